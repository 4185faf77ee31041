#include "explab/explosion.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "explab/kernels.hpp"

namespace explab {

const char* to_string(IterStatus s) {
    switch (s) {
    case IterStatus::converged: return "converged";
    case IterStatus::blown_up: return "blown_up";
    default: return "iteration_limit";
    }
}

double default_blowup_cap(const Nonlinearity& g) {
    // Minimal solutions below lambda* stay under K(delta); 10x the tight
    // delta=0.01 cap is a reliable divergence signal.
    return 10.0 * uniform_bound_K(g, 0.01);
}

MinimalSolutionResult minimal_solution(const AdvectionDiffusionOperator& op, double lambda,
                                       const Nonlinearity& g,
                                       const MinimalSolutionOptions& opts) {
    if (lambda < 0.0) throw std::invalid_argument("minimal_solution: lambda must be >= 0");
    double cap = opts.blowup_cap > 0.0 ? opts.blowup_cap : default_blowup_cap(g);

    const std::size_t n = (std::size_t)op.matrix.n;
    std::vector<double> phi(n, 0.0), rhs(n), next;
    MinimalSolutionResult res;
    res.min_pointwise_increment = 0.0;
    SolveOptions sopts = opts.solve;

    for (int it = 1; it <= opts.max_iter; ++it) {
        for (std::size_t k = 0; k < n; ++k) rhs[k] = lambda * g.g(phi[k]);
        sopts.initial_guess = &phi;
        next = solve_interior(op, rhs, sopts);

        double inc = 0.0, min_inc = 0.0, sup = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            double d = next[k] - phi[k];
            inc = std::max(inc, std::abs(d));
            min_inc = std::min(min_inc, d);
            sup = std::max(sup, next[k]);
        }
        phi.swap(next);
        res.iterations = it;
        res.sup_history.push_back(sup);
        res.final_increment = inc;
        res.min_pointwise_increment = std::min(res.min_pointwise_increment, min_inc);

        if (sup > cap) {
            res.status = IterStatus::blown_up;
            res.phi = ScalarField::from_interior(op.grid, phi);
            return res;
        }
        if (inc < opts.tol_inc) {
            res.status = IterStatus::converged;
            res.phi = ScalarField::from_interior(op.grid, phi);
            // discrete operator residual ||L phi - lambda g(phi)||_inf
            std::vector<double> lphi(n);
            op.matrix.matvec(phi.data(), lphi.data());
            for (std::size_t k = 0; k < n; ++k) lphi[k] -= lambda * g.g(phi[k]);
            res.residual = kern::max_abs(lphi.data(), n);
            return res;
        }
    }
    res.status = IterStatus::iteration_limit;
    res.phi = ScalarField::from_interior(op.grid, phi);
    return res;
}

MinimalSolutionResult minimal_solution(GridPtr grid, const FlowField& flow, double amplitude,
                                       double lambda, const Nonlinearity& g,
                                       const MinimalSolutionOptions& opts) {
    AdvectionDiffusionOperator op = assemble(grid, flow, amplitude);
    return minimal_solution(op, lambda, g, opts);
}

double supersolution_lower_bound(const Nonlinearity& g, double theta_value) {
    if (theta_value <= 0.0)
        throw std::invalid_argument("supersolution_lower_bound: theta must be > 0");
    double g0 = g.g0();
    if (g.name() == "exponential") return std::log(2.0) / (2.0 * theta_value);
    if (g.name() == "power") {
        // 2 = (1 + 2 lambda theta)^m with g0 = 1
        double m = g.params().at("m");
        return (std::pow(2.0, 1.0 / m) - 1.0) / (2.0 * theta_value);
    }
    // generic: g increasing => the equality point brackets the sup
    double lo = 0.0, hi = 1.0;
    auto crit = [&](double lam) { return g.g(2.0 * g0 * lam * theta_value) - 2.0 * g0; };
    while (crit(hi) < 0.0) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (crit(mid) < 0.0) lo = mid; else hi = mid;
    }
    return lo;
}

Bounds threshold_bounds(GridPtr grid, const FlowField& flow, double amplitude,
                        const Nonlinearity& g, const SolveOptions& opts) {
    Bounds b;
    b.theta = theta(exit_time(grid, flow, amplitude, opts));
    AdvectionDiffusionOperator adj = assemble_adjoint(grid, flow, amplitude);
    EigenOptions eo;
    eo.solve = opts;
    b.mu1 = principal_eigenvalue(adj, eo).eigenvalue;
    b.lower = supersolution_lower_bound(g, b.theta);
    b.upper = b.mu1 / g.gprime(0.0);
    return b;
}

ThresholdResult lambda_star(GridPtr grid, const FlowField& flow, double amplitude,
                            const Nonlinearity& g, const ThresholdOptions& opts) {
    ThresholdResult tr;
    tr.bounds = threshold_bounds(grid, flow, amplitude, g, opts.minimal.solve);

    AdvectionDiffusionOperator op = assemble(grid, flow, amplitude);
    auto probe = [&](double lam) {
        MinimalSolutionResult r = minimal_solution(op, lam, g, opts.minimal);
        if (r.status == IterStatus::iteration_limit) tr.saw_iteration_limit = true;
        tr.records.push_back(
            {lam, r.status, r.sup_history.empty() ? 0.0 : r.sup_history.back(), r.iterations});
        return r.status == IterStatus::converged;
    };

    // Both endpoints are certified: the discrete supersolution 2 g(0) lambda tau
    // guarantees convergence at the lower bound, and no discrete solution
    // exists above mu1/g'(0) (transpose Perron vector test).
    double lo = tr.bounds.lower;
    double hi = tr.bounds.upper;
    if (!probe(lo))
        throw std::runtime_error("lambda_star: certified lower bound failed to converge");
    while (probe(hi)) {
        tr.expanded_above_upper = true;  // discrete solve above the continuum bound
        hi *= 1.3;
        if (hi > 1e6 * tr.bounds.upper)
            throw std::runtime_error("lambda_star: no blow-up found above the upper bound");
    }
    while ((hi - lo) / lo > opts.rtol) {
        double mid = 0.5 * (lo + hi);
        if (probe(mid)) lo = mid; else hi = mid;
    }
    tr.lambda_lo_solved = lo;
    tr.lambda_hi_failed = hi;
    tr.lambda_star = 0.5 * (lo + hi);
    return tr;
}

EigenResult stability_eigenvalue(GridPtr grid, const FlowField& flow, double amplitude,
                                 double lambda, const ScalarField& phi,
                                 const Nonlinearity& g, const EigenOptions& opts) {
    ScalarField shift(grid);
    for (std::int64_t k = 0; k < grid->n_interior; ++k) {
        int nd = grid->interior_nodes[k];
        shift.values()[nd] = -lambda * g.gprime(phi.values()[nd]);
    }
    AdvectionDiffusionOperator op = assemble(grid, flow, amplitude, &shift);
    return principal_eigenvalue(op, opts);
}

UniformBoundReport uniform_bound_check(const ThresholdResult& run, const Nonlinearity& g,
                                       double delta) {
    if (!(delta > 0.0) || !(delta < 1.0))
        throw std::invalid_argument("uniform_bound_check: delta must be in (0,1)");
    UniformBoundReport rep;
    rep.delta = delta;
    rep.K = uniform_bound_K(g, delta);
    rep.lambda_star_value = run.lambda_star;
    rep.worst_margin = rep.K;
    for (const ProbeRecord& r : run.records) {
        if (r.status != IterStatus::converged) continue;
        if (r.lambda > (1.0 - delta) * run.lambda_star) continue;
        UniformBoundEntry e{r.lambda, r.sup_phi, rep.K - r.sup_phi};
        rep.worst_margin = std::min(rep.worst_margin, e.margin);
        if (e.margin < 0.0) rep.ok = false;
        rep.entries.push_back(e);
    }
    return rep;
}

double equidistribution_norm(const ScalarField& phi, const FlowField& flow) {
    const Grid2D& g = phi.grid();
    if (flow.grid->nx != g.nx || flow.grid->ny != g.ny)
        throw std::invalid_argument("equidistribution_norm: grids differ");
    if (!flow.un_zero_on_boundary)
        throw std::invalid_argument(
            "equidistribution_norm: flow does not satisfy u.n = 0 on the boundary");
    double s = 0.0;
    for (std::int64_t k = 0; k < g.n_interior; ++k) {
        int nd = g.interior_nodes[k];
        int i = nd % g.nx, j = nd / g.nx;
        double px = (phi.at(i + 1, j) - phi.at(i - 1, j)) / (2 * g.hx);
        double py = (phi.at(i, j + 1) - phi.at(i, j - 1)) / (2 * g.hy);
        double a = flow.u_at(i, j) * px + flow.v_at(i, j) * py;
        s += a * a;
    }
    return s * g.hx * g.hy;
}

} // namespace explab
