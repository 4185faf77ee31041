#include "explab/assemble.hpp"

#include <cmath>
#include <stdexcept>

namespace explab {

namespace {

struct Neighbor {
    int di, dj;
    double hd;
};

} // namespace

AdvectionDiffusionOperator assemble(GridPtr grid, const FlowField& flow, double amplitude,
                                    const ScalarField* zero_order, AdvectionForm form) {
    const Grid2D& g = *grid;
    if (flow.grid.get() != grid.get() &&
        (flow.grid->nx != g.nx || flow.grid->ny != g.ny))
        throw std::invalid_argument("assemble: flow not defined on this grid");

    bool flux = form == AdvectionForm::flux ||
                (form == AdvectionForm::automatic && flow.is_incompressible);

    AdvectionDiffusionOperator op;
    op.grid = grid;
    op.amplitude = amplitude;
    op.has_zero_order = zero_order != nullptr;
    op.conservative = flux;
    op.flow_incompressible = flow.is_incompressible;

    const double ihx2 = 1.0 / (g.hx * g.hx), ihy2 = 1.0 / (g.hy * g.hy);
    const Neighbor nb[4] = {{-1, 0, g.hx}, {1, 0, g.hx}, {0, -1, g.hy}, {0, 1, g.hy}};

    CsrBuilder bld(g.n_interior, 5 * g.n_interior);
    for (std::int64_t k = 0; k < g.n_interior; ++k) {
        int nd = g.interior_nodes[k];
        int i = nd % g.nx, j = nd / g.nx;
        double diag = 2.0 * ihx2 + 2.0 * ihy2;
        if (zero_order) diag += zero_order->at(i, j);
        for (const auto& d : nb) {
            double coef = d.di != 0 ? -ihx2 : -ihy2;
            if (flux) {
                // upwind flux through the face between (i,j) and the neighbor,
                // face velocity = average of node velocities
                double uf = d.di != 0
                                ? 0.5 * amplitude * (flow.u_at(i, j) + flow.u_at(i + d.di, j))
                                : 0.5 * amplitude * (flow.v_at(i, j) + flow.v_at(i, j + d.dj));
                int s = d.di + d.dj;  // +1 for east/north face, -1 for west/south
                if (s > 0) {
                    diag += std::max(uf, 0.0) / d.hd;
                    coef += std::min(uf, 0.0) / d.hd;
                } else {
                    diag += -std::min(uf, 0.0) / d.hd;
                    coef += -std::max(uf, 0.0) / d.hd;
                }
            } else {
                // advective form: node velocity, componentwise upwind
                double un = d.di != 0 ? amplitude * flow.u_at(i, j)
                                      : amplitude * flow.v_at(i, j);
                int s = d.di + d.dj;
                if (s > 0) {
                    coef += std::min(un, 0.0) / d.hd;
                    diag += -std::min(un, 0.0) / d.hd;
                } else {
                    coef += -std::max(un, 0.0) / d.hd;
                    diag += std::max(un, 0.0) / d.hd;
                }
            }
            std::int32_t cidx = g.interior_index[g.node(i + d.di, j + d.dj)];
            if (cidx >= 0) bld.add(cidx, coef);
            // else: Dirichlet neighbor, column eliminated (boundary value 0)
        }
        bld.add((std::int32_t)k, diag);
        bld.finish_row();
    }
    op.matrix = bld.take();
    return op;
}

AdvectionDiffusionOperator assemble_adjoint(GridPtr grid, const FlowField& flow,
                                            double amplitude, const ScalarField* zero_order,
                                            AdvectionForm form) {
    AdvectionDiffusionOperator direct = assemble(grid, flow, amplitude, zero_order, form);
    AdvectionDiffusionOperator adj;
    adj.grid = direct.grid;
    adj.amplitude = amplitude;
    adj.has_zero_order = direct.has_zero_order;
    adj.conservative = direct.conservative;
    adj.flow_incompressible = direct.flow_incompressible;
    adj.matrix = direct.matrix.transpose();
    return adj;
}

MMatrixReport mmatrix_scan(const AdvectionDiffusionOperator& op) {
    const CsrMatrix& m = op.matrix;
    MMatrixReport rep;
    rep.min_row_sum = std::numeric_limits<double>::infinity();
    rep.min_boundary_row_sum = std::numeric_limits<double>::infinity();
    for (std::int64_t r = 0; r < m.n; ++r) {
        double rs = 0.0;
        std::int64_t nnz_row = 0;
        for (std::int64_t k = m.rowptr[r]; k < m.rowptr[r + 1]; ++k) {
            rs += m.val[k];
            ++nnz_row;
            if (m.col[k] == r) {
                if (m.val[k] <= 0.0) rep.diag_positive = false;
            } else if (m.val[k] > 0.0) {
                rep.offdiag_nonpositive = false;
            }
        }
        rep.min_row_sum = std::min(rep.min_row_sum, rs);
        if (nnz_row < 5) rep.min_boundary_row_sum = std::min(rep.min_boundary_row_sum, rs);
    }
    return rep;
}

} // namespace explab
