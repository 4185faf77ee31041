#pragma once
// The nonlinear engine: minimal solutions by monotone iteration from zero,
// blow-up detection, lambda* by bisection between the certified bounds,
// stability eigenvalues, and the streamline-equidistribution diagnostic.

#include <optional>
#include <string>

#include "explab/eigenpair.hpp"
#include "explab/nonlinearity.hpp"
#include "explab/parabolic.hpp"

namespace explab {

enum class IterStatus { converged, blown_up, iteration_limit };
const char* to_string(IterStatus s);

struct MinimalSolutionOptions {
    double tol_inc = 1e-10;    // sup-norm increment for convergence
    int max_iter = 10000;
    double blowup_cap = 0.0;   // <= 0: auto = 10 K(0.01) from the nonlinearity
    SolveOptions solve;
};

struct MinimalSolutionResult {
    IterStatus status = IterStatus::iteration_limit;
    ScalarField phi;             // meaningful when converged (last iterate otherwise)
    int iterations = 0;
    std::vector<double> sup_history;
    double final_increment = 0.0;
    double min_pointwise_increment = 0.0;  // most negative phi_{n+1}-phi_n seen
    double residual = 0.0;                 // ||L phi - lambda g(phi)||_inf on convergence
};

double default_blowup_cap(const Nonlinearity& g);

MinimalSolutionResult minimal_solution(const AdvectionDiffusionOperator& op, double lambda,
                                       const Nonlinearity& g,
                                       const MinimalSolutionOptions& opts = {});
MinimalSolutionResult minimal_solution(GridPtr grid, const FlowField& flow, double amplitude,
                                       double lambda, const Nonlinearity& g,
                                       const MinimalSolutionOptions& opts = {});

struct Bounds {
    double theta = 0.0;  // sup of the exit time
    double mu1 = 0.0;    // principal eigenvalue of the adjoint operator
    double lower = 0.0;  // sup{lambda : 2 g(0) >= g(2 g(0) lambda theta)}
    double upper = 0.0;  // mu1 / g'(0)
};

Bounds threshold_bounds(GridPtr grid, const FlowField& flow, double amplitude,
                        const Nonlinearity& g, const SolveOptions& opts = {});

/// Closed-form / numeric solve of 2 g(0) = g(2 g(0) lambda theta) for lambda.
double supersolution_lower_bound(const Nonlinearity& g, double theta_value);

struct ProbeRecord {
    double lambda = 0.0;
    IterStatus status = IterStatus::iteration_limit;
    double sup_phi = 0.0;
    int iterations = 0;
};

struct ThresholdResult {
    double lambda_star = 0.0;        // midpoint of the final bracket
    double lambda_lo_solved = 0.0;   // largest lambda that converged
    double lambda_hi_failed = 0.0;   // smallest lambda that blew up
    Bounds bounds;
    std::vector<ProbeRecord> records;
    bool expanded_above_upper = false;
    bool saw_iteration_limit = false;
};

struct ThresholdOptions {
    double rtol = 1e-3;  // bisection width relative to lambda_lo
    MinimalSolutionOptions minimal;
};

ThresholdResult lambda_star(GridPtr grid, const FlowField& flow, double amplitude,
                            const Nonlinearity& g, const ThresholdOptions& opts = {});

/// kappa_1 of the linearized operator -Lap + A u.grad - lambda g'(phi).
EigenResult stability_eigenvalue(GridPtr grid, const FlowField& flow, double amplitude,
                                 double lambda, const ScalarField& phi,
                                 const Nonlinearity& g, const EigenOptions& opts = {});

struct UniformBoundEntry {
    double lambda = 0.0;
    double sup_phi = 0.0;
    double margin = 0.0;  // K - sup_phi
};

struct UniformBoundReport {
    double delta = 0.0;
    double K = 0.0;
    double lambda_star_value = 0.0;
    std::vector<UniformBoundEntry> entries;  // probes with lambda <= (1-delta) lambda*
    double worst_margin = 0.0;
    bool ok = true;
};

/// Prop.-2.6-style check over the probes of a completed threshold run.
UniformBoundReport uniform_bound_check(const ThresholdResult& run, const Nonlinearity& g,
                                       double delta);

/// Midpoint-rule quadrature of |u.grad phi|^2 over the interior (centered
/// gradient, unit-amplitude flow profile). Requires u.n = 0 metadata.
double equidistribution_norm(const ScalarField& phi, const FlowField& flow);

} // namespace explab
