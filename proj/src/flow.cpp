#include "explab/flow.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace explab {

namespace {

void finalize_checks(FlowField& f, bool enforce_divergence) {
    const Grid2D& g = *f.grid;
    f.max_speed = 0.0;
    for (std::size_t k = 0; k < f.u.size(); ++k)
        f.max_speed = std::max(f.max_speed, std::hypot(f.u[k], f.v[k]));

    if (enforce_divergence && f.max_speed > 0.0) {
        double worst = 0.0;
        int wi = -1, wj = -1;
        for (int j = 1; j < g.ny - 1; ++j)
            for (int i = 1; i < g.nx - 1; ++i) {
                if (!g.is_interior(i, j)) continue;
                double div = (f.u_at(i + 1, j) - f.u_at(i - 1, j)) / (2 * g.hx) +
                             (f.v_at(i, j + 1) - f.v_at(i, j - 1)) / (2 * g.hy);
                if (std::abs(div) > worst) { worst = std::abs(div); wi = i; wj = j; }
            }
        if (worst >= 1e-6 * f.max_speed) {
            char msg[160];
            std::snprintf(msg, sizeof msg,
                          "flow '%s' declared incompressible but centered divergence %.3e at "
                          "node (%d,%d) = (%.4g,%.4g) exceeds 1e-6*max|u|",
                          f.source.c_str(), worst, wi, wj, g.x(wi), g.y(wj));
            throw std::runtime_error(msg);
        }
    }

    // advisory u.n at Dirichlet faces (outward normal from interior neighbor)
    double un_max = 0.0;
    for (std::int64_t k = 0; k < g.n_interior; ++k) {
        int nd = g.interior_nodes[k];
        int i = nd % g.nx, j = nd / g.nx;
        const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
        for (int d = 0; d < 4; ++d) {
            int ii = i + di[d], jj = j + dj[d];
            if (!g.is_interior(ii, jj)) {
                double un = di[d] != 0 ? f.u_at(ii, jj) : f.v_at(ii, jj);
                un_max = std::max(un_max, std::abs(un));
            }
        }
    }
    f.un_boundary_rel = f.max_speed > 0 ? un_max / f.max_speed : 0.0;
    f.un_zero_on_boundary = f.un_boundary_rel < 1e-8;
}

} // namespace

double discrete_divergence(const FlowField& f) {
    const Grid2D& g = *f.grid;
    double worst = 0.0;
    for (int j = 1; j < g.ny - 1; ++j)
        for (int i = 1; i < g.nx - 1; ++i) {
            if (!g.is_interior(i, j)) continue;
            double div = (f.u_at(i + 1, j) - f.u_at(i - 1, j)) / (2 * g.hx) +
                         (f.v_at(i, j + 1) - f.v_at(i, j - 1)) / (2 * g.hy);
            worst = std::max(worst, std::abs(div));
        }
    return worst;
}

FlowField flow_from_stream_function(const StreamFunction& psi, GridPtr grid) {
    const Grid2D& g = *grid;
    FlowField f;
    f.grid = grid;
    f.source = "stream:" + psi.name;
    f.is_incompressible = true;
    f.u.resize((std::size_t)g.nx * g.ny);
    f.v.resize((std::size_t)g.nx * g.ny);
    // centered differences with a ghost ring (Psi is globally evaluable)
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            double x = g.x(i), y = g.y(j);
            f.u[g.node(i, j)] =
                (psi.eval(x, y + g.hy) - psi.eval(x, y - g.hy)) / (2 * g.hy);
            f.v[g.node(i, j)] =
                -(psi.eval(x + g.hx, y) - psi.eval(x - g.hx, y)) / (2 * g.hx);
        }
    finalize_checks(f, true);
    return f;
}

FlowField flow_from_formula(const std::string& source,
                            const std::function<std::array<double, 2>(double, double)>& uv,
                            GridPtr grid, bool declared_incompressible) {
    const Grid2D& g = *grid;
    FlowField f;
    f.grid = grid;
    f.source = source;
    f.is_incompressible = declared_incompressible;
    f.u.resize((std::size_t)g.nx * g.ny);
    f.v.resize((std::size_t)g.nx * g.ny);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            auto w = uv(g.x(i), g.y(j));
            f.u[g.node(i, j)] = w[0];
            f.v[g.node(i, j)] = w[1];
        }
    finalize_checks(f, declared_incompressible);
    return f;
}

FlowField builtin_flow(const std::string& name, const std::map<std::string, double>& params,
                       GridPtr grid) {
    if (name == "sinsin" || name == "fig2" || name == "paraboloid")
        return flow_from_stream_function(make_stream(name, params), std::move(grid));
    if (name == "shear") {
        double c = params.count("c") ? params.at("c") : 1.0;
        return flow_from_formula(
            "formula:shear", [c](double, double) -> std::array<double, 2> { return {c, 0.0}; },
            std::move(grid), true);
    }
    if (name == "radial") {
        double n = params.count("n") ? params.at("n") : 1.0;
        FlowField f = flow_from_formula(
            "formula:radial",
            [n](double x, double y) -> std::array<double, 2> {
                return {4.0 * n * x, 4.0 * n * y};
            },
            std::move(grid), false);
        return f;
    }
    throw std::invalid_argument("unknown flow: " + name);
}

FlowField zero_flow(GridPtr grid) { return builtin_flow("shear", {{"c", 0.0}}, std::move(grid)); }

} // namespace explab
