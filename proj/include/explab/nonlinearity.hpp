#pragma once
// Reaction nonlinearities g(s): convex, increasing, g(0) > 0, with the
// finite transform h(s) = int_0^s ds'/g(s'). Catalog entries carry analytic
// h and h^{-1}; user-supplied g falls back to adaptive Simpson quadrature and
// bisection inversion at 1e-12 (h feeds test oracles, so it must beat the PDE
// solver's accuracy).

#include <functional>
#include <map>
#include <string>

namespace explab {

class Nonlinearity {
public:
    static Nonlinearity exponential();          // g = e^s
    static Nonlinearity power(double m);        // g = (1+s)^m, m > 1
    static Nonlinearity make(const std::string& name,
                             const std::map<std::string, double>& params = {});
    /// Arbitrary g (quadrature-backed h). g must satisfy the class assumptions;
    /// they are spot-checked at construction.
    static Nonlinearity custom(std::string name, std::function<double(double)> g,
                               std::function<double(double)> gprime);

    const std::string& name() const { return name_; }
    const std::map<std::string, double>& params() const { return params_; }
    double g(double s) const { return g_(s); }
    double gprime(double s) const { return gp_(s); }
    double h(double s) const { return h_(s); }
    double h_inv(double y) const { return hinv_(y); }
    double h_infinity() const { return hinf_; }
    double g0() const { return g0_; }

private:
    Nonlinearity() = default;
    void validate() const;
    std::string name_;
    std::map<std::string, double> params_;
    std::function<double(double)> g_, gp_, h_, hinv_;
    double hinf_ = 0.0;
    double g0_ = 1.0;
};

/// Phi(s) = h^{-1}((lambda0/lambda1) h(s)), the rescaled inverse transform.
/// Requires 0 < lambda0 < lambda1 and s >= 0.
double phi_transform(const Nonlinearity& g, double lambda0, double lambda1, double s);

/// K = h^{-1}((lambda0/lambda1) h_infinity), the uniform cap of Phi.
double phi_transform_cap(const Nonlinearity& g, double lambda0, double lambda1);

/// K(delta) = h^{-1}(((1-delta)/(1-delta/3)) h_infinity): the a-priori sup
/// bound for minimal solutions with lambda <= (1-delta) lambda*.
double uniform_bound_K(const Nonlinearity& g, double delta);

} // namespace explab
