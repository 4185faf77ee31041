#pragma once
// Discrete advection-diffusion operators: -Lap + A u.grad (+ c(x)) over the
// interior unknowns, 5-point diffusion with first-order upwind advection and
// Dirichlet elimination. Incompressible flows are upwinded in conservative
// (face-flux) form, which keeps the exact discrete mass identity; compressible
// flows use the literal advective form u.grad.

#include <memory>
#include <mutex>
#include <optional>

#include "explab/csr.hpp"
#include "explab/field.hpp"
#include "explab/flow.hpp"

namespace explab {

enum class AdvectionForm { automatic, flux, advective };

class DirectLU;
class Ilu0;

struct SolverCache {
    std::mutex mutex;
    std::shared_ptr<const DirectLU> direct;
    std::shared_ptr<const Ilu0> ilu;
};

struct AdvectionDiffusionOperator {
    GridPtr grid;
    double amplitude = 0.0;
    CsrMatrix matrix;
    bool has_zero_order = false;
    bool conservative = false;  // flux-form advection used
    bool flow_incompressible = true;
    // lazily built factorizations, shared across solves of the same operator
    std::unique_ptr<SolverCache> cache = std::make_unique<SolverCache>();
};

AdvectionDiffusionOperator assemble(GridPtr grid, const FlowField& flow, double amplitude,
                                    const ScalarField* zero_order = nullptr,
                                    AdvectionForm form = AdvectionForm::automatic);

/// Adjoint operator: exact transpose of assemble() with the same arguments.
AdvectionDiffusionOperator assemble_adjoint(GridPtr grid, const FlowField& flow,
                                            double amplitude,
                                            const ScalarField* zero_order = nullptr,
                                            AdvectionForm form = AdvectionForm::automatic);

/// M-matrix scan: positive diagonal, non-positive off-diagonals, row sums
/// >= -tol. Returns the most negative row sum (>= 0 for a clean M-matrix).
struct MMatrixReport {
    bool diag_positive = true;
    bool offdiag_nonpositive = true;
    double min_row_sum = 0.0;
    double min_boundary_row_sum = 0.0;  // over rows with a Dirichlet neighbor
};
MMatrixReport mmatrix_scan(const AdvectionDiffusionOperator& op);

} // namespace explab
