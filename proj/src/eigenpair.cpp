#include "explab/eigenpair.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "explab/kernels.hpp"

namespace explab {

EigenResult principal_eigenvalue(const AdvectionDiffusionOperator& op,
                                 const EigenOptions& opts) {
    const std::size_t n = (std::size_t)op.matrix.n;
    std::vector<double> psi(n, 1.0), w(n), lpsi(n);
    std::vector<double> residual_history;
    double mu = 0.0, mu_old = 0.0;
    int it = 0;
    SolveOptions sopts = opts.solve;
    for (; it < opts.max_iter; ++it) {
        sopts.initial_guess = &psi;  // ignored by the direct path, warm start for BiCGStab
        w = solve_interior(op, psi, sopts);
        // L w = psi  =>  Rayleigh quotient of L at w is <w,psi>/<w,w>
        mu = kern::dot(w.data(), psi.data(), n) / kern::dot(w.data(), w.data(), n);
        double wmax = kern::max_abs(w.data(), n);
        if (wmax == 0.0) throw SolveError("principal_eigenvalue: zero iterate", 0.0);
        // keep the iterate positive (Perron direction)
        double sign = 1.0;
        for (std::size_t k = 0; k < n; ++k)
            if (std::abs(w[k]) == wmax) { sign = w[k] > 0 ? 1.0 : -1.0; break; }
        for (std::size_t k = 0; k < n; ++k) psi[k] = sign * w[k] / wmax;
        if (it > 0 && std::abs(mu - mu_old) <= opts.tol * std::abs(mu)) break;
        mu_old = mu;
    }
    op.matrix.matvec(psi.data(), lpsi.data());
    kern::xmay(lpsi.data(), mu, psi.data(), lpsi.data(), n);
    double res = kern::max_abs(lpsi.data(), n);
    residual_history.push_back(res);
    double target = 1e-8 * std::abs(mu) * kern::max_abs(psi.data(), n);
    // polish with a few extra inverse iterations if the residual gate misses
    int extra = 0;
    while (res > target && extra < 100) {
        sopts.initial_guess = &psi;
        w = solve_interior(op, psi, sopts);
        mu = kern::dot(w.data(), psi.data(), n) / kern::dot(w.data(), w.data(), n);
        double wmax = kern::max_abs(w.data(), n);
        for (std::size_t k = 0; k < n; ++k) psi[k] = w[k] / wmax;
        op.matrix.matvec(psi.data(), lpsi.data());
        kern::xmay(lpsi.data(), mu, psi.data(), lpsi.data(), n);
        res = kern::max_abs(lpsi.data(), n);
        residual_history.push_back(res);
        ++it;
        ++extra;
    }
    if (res > target) {
        std::ostringstream os;
        os << "principal_eigenvalue: stagnation, residual history:";
        char buf[32];
        for (double r : residual_history) {
            std::snprintf(buf, sizeof buf, " %.3e", r);
            os << buf;
        }
        throw SolveError(os.str(), res);
    }
    for (std::size_t k = 0; k < n; ++k)
        if (psi[k] <= 0.0)
            throw SolveError("principal_eigenvalue: eigenfunction not strictly positive", res);

    EigenResult r;
    r.eigenvalue = mu;
    r.eigenfunction = ScalarField::from_interior(op.grid, psi);
    r.residual_norm = res;
    r.iterations = it + 1;
    return r;
}

} // namespace explab
