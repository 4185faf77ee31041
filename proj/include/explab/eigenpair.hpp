#pragma once
// Principal (Perron) eigenvalue of an assembled operator by inverse power
// iteration with shift 0, max-normalized. Only the positive pair is computed.

#include "explab/linsolve.hpp"

namespace explab {

struct EigenResult {
    double eigenvalue = 0.0;
    ScalarField eigenfunction;  // normalized to max = 1, positive interior
    double residual_norm = 0.0;
    int iterations = 0;
};

struct EigenOptions {
    double tol = 1e-10;       // relative change of the Rayleigh quotient
    int max_iter = 500;
    SolveOptions solve;       // inner solves
};

EigenResult principal_eigenvalue(const AdvectionDiffusionOperator& op,
                                 const EigenOptions& opts = {});

} // namespace explab
