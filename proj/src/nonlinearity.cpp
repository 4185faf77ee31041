#include "explab/nonlinearity.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace explab {

namespace {

// adaptive Simpson on [a,b] to absolute tolerance tol
double simpson(const std::function<double(double)>& f, double a, double m, double b,
               double fa, double fm, double fb, double whole, double tol, int depth) {
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = (m - a) / 6.0 * (fa + 4 * flm + fm);
    double right = (b - m) / 6.0 * (fm + 4 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return simpson(f, a, lm, m, fa, flm, fm, left, tol / 2, depth - 1) +
           simpson(f, m, rm, b, fm, frm, fb, right, tol / 2, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
    if (a == b) return 0.0;
    double m = 0.5 * (a + b), fa = f(a), fm = f(m), fb = f(b);
    double whole = (b - a) / 6.0 * (fa + 4 * fm + fb);
    return simpson(f, a, m, b, fa, fm, fb, whole, tol, 48);
}

} // namespace

void Nonlinearity::validate() const {
    if (!(g0_ > 0.0)) throw std::invalid_argument("nonlinearity: g(0) must be > 0");
    if (std::abs(h_(0.0)) > 1e-14) throw std::logic_error("nonlinearity: h(0) != 0");
    if (!(hinf_ > 0.0) || !std::isfinite(hinf_))
        throw std::invalid_argument("nonlinearity: integral of 1/g must be finite");
    // monotonicity + convexity spot check on [0, 100]
    double prev_g = g_(0.0), prev_h = 0.0;
    for (int k = 1; k <= 50; ++k) {
        double s = 2.0 * k;
        double gs = g_(s);
        if (gs < prev_g - 1e-12 * std::abs(prev_g))
            throw std::invalid_argument("nonlinearity: g must be non-decreasing");
        double d = 0.5;
        double conv = g_(s + d) - 2.0 * gs + g_(s - d);
        if (conv < -1e-7 * std::max(1.0, gs))
            throw std::invalid_argument("nonlinearity: g must be convex");
        // h is strictly increasing but saturates to h_infinity in doubles
        double hs = h_(s);
        if (hs < prev_h) throw std::invalid_argument("nonlinearity: h must be increasing");
        prev_g = gs;
        prev_h = hs;
    }
    if (!(h_(1.0) > 0.0)) throw std::invalid_argument("nonlinearity: h must be increasing");
}

Nonlinearity Nonlinearity::exponential() {
    Nonlinearity n;
    n.name_ = "exponential";
    n.g_ = [](double s) { return std::exp(s); };
    n.gp_ = [](double s) { return std::exp(s); };
    n.h_ = [](double s) { return -std::expm1(-s); };  // 1 - e^{-s}
    n.hinv_ = [](double y) { return -std::log1p(-y); };
    n.hinf_ = 1.0;
    n.g0_ = 1.0;
    n.validate();
    return n;
}

Nonlinearity Nonlinearity::power(double m) {
    if (!(m > 1.0))
        throw std::invalid_argument("power nonlinearity requires m > 1 (else int 1/g diverges)");
    Nonlinearity n;
    n.name_ = "power";
    n.params_["m"] = m;
    n.g_ = [m](double s) { return std::pow(1.0 + s, m); };
    n.gp_ = [m](double s) { return m * std::pow(1.0 + s, m - 1.0); };
    n.h_ = [m](double s) { return (1.0 - std::pow(1.0 + s, 1.0 - m)) / (m - 1.0); };
    n.hinv_ = [m](double y) { return std::pow(1.0 - (m - 1.0) * y, -1.0 / (m - 1.0)) - 1.0; };
    n.hinf_ = 1.0 / (m - 1.0);
    n.g0_ = 1.0;
    n.validate();
    return n;
}

Nonlinearity Nonlinearity::make(const std::string& name,
                                const std::map<std::string, double>& params) {
    if (name == "exponential") return exponential();
    if (name == "power") {
        auto it = params.find("m");
        return power(it == params.end() ? 2.0 : it->second);
    }
    throw std::invalid_argument("unknown nonlinearity: " + name);
}

Nonlinearity Nonlinearity::custom(std::string name, std::function<double(double)> g,
                                  std::function<double(double)> gprime) {
    Nonlinearity n;
    n.name_ = std::move(name);
    n.g_ = std::move(g);
    n.gp_ = std::move(gprime);
    auto inv_g = [gf = n.g_](double s) { return 1.0 / gf(s); };

    // h_infinity by doubling the upper limit until the tail is negligible
    const double tol = 1e-12;
    double total = 0.0, a = 0.0, b = 1.0;
    for (int k = 0; k < 60; ++k) {
        double piece = integrate(inv_g, a, b, tol);
        total += piece;
        if (piece < 1e-14 * std::max(total, 1e-30) && k > 2) break;
        a = b;
        b *= 2.0;
        if (k == 59)
            throw std::invalid_argument("custom nonlinearity: int_0^inf ds/g(s) does not converge");
    }
    n.hinf_ = total;

    n.h_ = [inv_g, tol](double s) { return integrate(inv_g, 0.0, s, tol); };
    n.hinv_ = [h = n.h_, hinf = n.hinf_](double y) {
        if (y < 0 || y >= hinf)
            throw std::domain_error("h_inv: argument outside [0, h_infinity)");
        double lo = 0.0, hi = 1.0;
        while (h(hi) < y) {
            hi *= 2.0;
            if (hi > 1e12) throw std::runtime_error("h_inv: bracket failure");
        }
        for (int it = 0; it < 200; ++it) {
            double mid = 0.5 * (lo + hi);
            if (h(mid) < y) lo = mid; else hi = mid;
            if (hi - lo < 1e-13 * std::max(1.0, hi)) break;
        }
        return 0.5 * (lo + hi);
    };
    n.g0_ = n.g_(0.0);
    n.validate();
    return n;
}

double phi_transform(const Nonlinearity& g, double lambda0, double lambda1, double s) {
    if (!(lambda0 > 0.0) || !(lambda0 < lambda1))
        throw std::invalid_argument("phi_transform: need 0 < lambda0 < lambda1");
    if (s < 0.0) throw std::invalid_argument("phi_transform: s must be >= 0");
    double y = (lambda0 / lambda1) * g.h(s);
    // y < h_infinity by construction; guard the inverse bracket anyway
    if (y >= g.h_infinity()) y = std::nextafter(g.h_infinity(), 0.0);
    return g.h_inv(y);
}

double phi_transform_cap(const Nonlinearity& g, double lambda0, double lambda1) {
    if (!(lambda0 > 0.0) || !(lambda0 < lambda1))
        throw std::invalid_argument("phi_transform_cap: need 0 < lambda0 < lambda1");
    return g.h_inv((lambda0 / lambda1) * g.h_infinity());
}

double uniform_bound_K(const Nonlinearity& g, double delta) {
    if (!(delta > 0.0) || !(delta < 1.0))
        throw std::invalid_argument("uniform_bound_K: delta must be in (0,1)");
    double ratio = (1.0 - delta) / (1.0 - delta / 3.0);
    return g.h_inv(ratio * g.h_infinity());
}

} // namespace explab
