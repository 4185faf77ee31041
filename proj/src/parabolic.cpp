#include "explab/parabolic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "explab/kernels.hpp"

namespace explab {

ScalarField exit_time(GridPtr grid, const FlowField& flow, double amplitude,
                      const SolveOptions& opts) {
    AdvectionDiffusionOperator op = assemble(grid, flow, amplitude);
    ScalarField one(grid, 1.0);
    return solve(op, one, opts);
}

double theta(const ScalarField& tau) { return std::max(0.0, tau.max()); }

namespace {

double default_dt(GridPtr grid) {
    // resolve the principal decay mode with ~100 implicit-Euler steps
    FlowField still = zero_flow(grid);
    AdvectionDiffusionOperator lap = assemble(grid, still, 0.0);
    EigenOptions eo;
    eo.tol = 1e-4;  // an estimate is enough
    double mu = principal_eigenvalue(lap, eo).eigenvalue;
    return std::clamp(4.0 / mu / 100.0, 1e-5, 1e-2);
}

} // namespace

ParabolicRun evolve(GridPtr grid, const FlowField& flow, double amplitude,
                    const ScalarField& initial, double dt, double t_final,
                    const std::vector<double>& checkpoints, const SolveOptions& opts) {
    if (dt <= 0.0) dt = default_dt(grid);
    if (t_final <= 0.0) throw std::invalid_argument("evolve: t_final must be > 0");

    // (1/dt) I + L, solved against psi^k / dt each step
    ScalarField inv_dt(grid, 1.0 / dt);
    AdvectionDiffusionOperator op = assemble(grid, flow, amplitude, &inv_dt);

    ParabolicRun run;
    run.grid = grid;
    run.dt = dt;
    run.initial_l1 = initial.norm_l1();
    run.initial_l2 = initial.norm_l2();
    run.initial_linf = initial.max_abs();

    std::vector<double> cps = checkpoints;
    std::sort(cps.begin(), cps.end());
    std::size_t next_cp = 0;

    std::vector<double> psi = initial.interior();
    const std::size_t n = psi.size();
    std::vector<double> rhs(n);
    const double w = grid->hx * grid->hy;
    int steps = (int)std::ceil(t_final / dt - 1e-12);
    SolveOptions sopts = opts;
    for (int k = 1; k <= steps; ++k) {
        for (std::size_t i = 0; i < n; ++i) rhs[i] = psi[i] / dt;
        sopts.initial_guess = &psi;
        psi = solve_interior(op, rhs, sopts);
        double t = k * dt;
        run.times.push_back(t);
        run.norm_l1.push_back(kern::sum_abs(psi.data(), n) * w);
        run.norm_l2.push_back(std::sqrt(kern::dot(psi.data(), psi.data(), n) * w));
        run.norm_linf.push_back(kern::max_abs(psi.data(), n));
        while (next_cp < cps.size() && t >= cps[next_cp] - 1e-12) {
            run.checkpoint_times.push_back(t);
            run.checkpoints.push_back(ScalarField::from_interior(grid, psi));
            ++next_cp;
        }
    }
    return run;
}

DecayFit decay_profile(const ParabolicRun& run, double p, NormSelect sel, double t_lo,
                       double t_hi) {
    const std::vector<double>* series = sel == NormSelect::l1    ? &run.norm_l1
                                        : sel == NormSelect::l2  ? &run.norm_l2
                                                                 : &run.norm_linf;
    double fp;
    if (p <= 1.0)
        fp = run.initial_l1;
    else if (p <= 2.0)
        fp = run.initial_l2;
    else
        fp = run.initial_linf;

    std::vector<double> ts, ln_n;
    for (std::size_t k = 0; k < run.times.size(); ++k) {
        double t = run.times[k];
        if (t_hi > t_lo && (t < t_lo - 1e-12 || t > t_hi + 1e-12)) continue;
        double v = (*series)[k];
        if (v <= 0.0) continue;
        ts.push_back(t);
        ln_n.push_back(std::log(v));
    }
    if (ts.size() < 5)
        throw std::runtime_error("decay_profile: need >= 5 samples in the fit window");
    double drop = *std::max_element(ln_n.begin(), ln_n.end()) -
                  *std::min_element(ln_n.begin(), ln_n.end());
    if (drop < std::log(10.0))
        throw std::runtime_error(
            "decay_profile: less than one decade of decay observed; increase t_final");

    // least squares for ln n = a0 - alpha t - r ln t
    double S[3][3] = {{0}}, b[3] = {0};
    for (std::size_t k = 0; k < ts.size(); ++k) {
        double row[3] = {1.0, -ts[k], -std::log(ts[k])};
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) S[i][j] += row[i] * row[j];
            b[i] += row[i] * ln_n[k];
        }
    }
    // 3x3 Gaussian elimination with partial pivoting
    int piv[3] = {0, 1, 2};
    for (int c = 0; c < 3; ++c) {
        int best = c;
        for (int rr = c + 1; rr < 3; ++rr)
            if (std::abs(S[piv[rr]][c]) > std::abs(S[piv[best]][c])) best = rr;
        std::swap(piv[c], piv[best]);
        for (int rr = c + 1; rr < 3; ++rr) {
            double f = S[piv[rr]][c] / S[piv[c]][c];
            for (int cc = c; cc < 3; ++cc) S[piv[rr]][cc] -= f * S[piv[c]][cc];
            b[piv[rr]] -= f * b[piv[c]];
        }
    }
    double sol[3];
    for (int c = 2; c >= 0; --c) {
        double s = b[piv[c]];
        for (int cc = c + 1; cc < 3; ++cc) s -= S[piv[c]][cc] * sol[cc];
        sol[c] = s / S[piv[c]][c];
    }

    DecayFit fit;
    fit.alpha = sol[1];
    fit.r = sol[2];
    double rss = 0.0, worst = -1e300;
    for (std::size_t k = 0; k < ts.size(); ++k) {
        double pred = sol[0] - fit.alpha * ts[k] - fit.r * std::log(ts[k]);
        double e = ln_n[k] - pred;
        rss += e * e;
        worst = std::max(worst, e);
    }
    fit.fit_residual = std::sqrt(rss / ts.size());
    fit.C = std::exp(sol[0]) / fp;
    fit.C_envelope = fit.C * std::exp(std::max(0.0, worst));
    return fit;
}

} // namespace explab
