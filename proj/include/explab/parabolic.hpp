#pragma once
// Exit times and implicit-Euler evolution of psi_t - Lap psi + A u.grad psi = 0,
// with per-step norm series and decay-rate fits.

#include <optional>

#include "explab/eigenpair.hpp"

namespace explab {

/// tau solves -Lap tau + A u.grad tau = 1, tau = 0 on the boundary.
ScalarField exit_time(GridPtr grid, const FlowField& flow, double amplitude,
                      const SolveOptions& opts = {});

/// theta_u = max tau.
double theta(const ScalarField& tau);

struct ParabolicRun {
    GridPtr grid;
    double dt = 0.0;
    std::vector<double> times;     // after each step
    std::vector<double> norm_l1, norm_l2, norm_linf;
    std::vector<double> checkpoint_times;
    std::vector<ScalarField> checkpoints;
    double initial_l1 = 0.0, initial_l2 = 0.0, initial_linf = 0.0;
};

/// Implicit Euler with the assembled upwind operator (positivity-preserving).
/// dt <= 0 picks the default dt = (4 / mu1-estimate) / 100 clamped to
/// [1e-5, 1e-2], with mu1 estimated on the flow-free operator.
ParabolicRun evolve(GridPtr grid, const FlowField& flow, double amplitude,
                    const ScalarField& initial, double dt, double t_final,
                    const std::vector<double>& checkpoints = {},
                    const SolveOptions& opts = {});

enum class NormSelect { l1, l2, linf };

struct DecayFit {
    double C = 0.0;      // prefactor, normalized by ||f||_p
    double alpha = 0.0;  // exponential rate
    double r = 0.0;      // algebraic t^{-r} factor
    double fit_residual = 0.0;  // rms residual of the log-space fit
    double C_envelope = 0.0;    // C scaled so the envelope dominates every sample
};

/// Least-squares fit of ln||psi(t)|| = ln(C ||f||_p) - alpha t - r ln t over
/// the run's samples in [t_lo, t_hi] (full range when t_hi <= t_lo).
/// Requires >= 5 samples spanning at least one decade of decay.
DecayFit decay_profile(const ParabolicRun& run, double p, NormSelect sel = NormSelect::linf,
                       double t_lo = 0.0, double t_hi = 0.0);

} // namespace explab
