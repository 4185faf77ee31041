#include "explab/stream.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace explab {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

// fig2 warps: W spans [0,1] over x in [0,2pi] with the cubic profile of the
// figure, V likewise with the quadratic profile. sin(2 pi W) then vanishes at
// x = 0, x_split, 2pi, giving two strips per axis and four unequal cells.
struct Fig2Warps {
    double c1_span, c2_span;
    Fig2Warps()
        : c1_span(std::pow(2.0 * kTwoPi / 3.0 + 1.0, 3) - 1.0),
          c2_span((kTwoPi + 1.0) * (kTwoPi + 1.0) - 1.0) {}
    double W(double x) const { return (std::pow(2.0 * x / 3.0 + 1.0, 3) - 1.0) / c1_span; }
    double Wp(double x) const {
        double t = 2.0 * x / 3.0 + 1.0;
        return 2.0 * t * t / c1_span;
    }
    double Wpp(double x) const { return (8.0 / 3.0) * (2.0 * x / 3.0 + 1.0) / c1_span; }
    double V(double y) const { return ((y + 1.0) * (y + 1.0) - 1.0) / c2_span; }
    double Vp(double y) const { return 2.0 * (y + 1.0) / c2_span; }
    double Vpp(double y) const { return 2.0 / c2_span; }
    double invW(double w) const {
        return 1.5 * (std::cbrt(w * c1_span + 1.0) - 1.0);
    }
    double invV(double v) const { return std::sqrt(v * c2_span + 1.0) - 1.0; }
};

const Fig2Warps& fig2w() {
    static const Fig2Warps w;
    return w;
}

double get_param(const std::map<std::string, double>& p, const std::string& key,
                 double fallback) {
    auto it = p.find(key);
    return it == p.end() ? fallback : it->second;
}

} // namespace

StreamFunction make_stream(const std::string& name,
                           const std::map<std::string, double>& params) {
    StreamFunction s;
    s.name = name;
    if (name == "sinsin") {
        s.eval = [](double x, double y) { return std::sin(kPi * x) * std::sin(kPi * y); };
        s.grad = [](double x, double y) -> std::array<double, 2> {
            return {kPi * std::cos(kPi * x) * std::sin(kPi * y),
                    kPi * std::sin(kPi * x) * std::cos(kPi * y)};
        };
        s.laplacian = [](double x, double y) {
            return -2.0 * kPi * kPi * std::sin(kPi * x) * std::sin(kPi * y);
        };
    } else if (name == "fig2") {
        const Fig2Warps& w = fig2w();
        s.eval = [&w](double x, double y) {
            return std::sin(kTwoPi * w.W(x)) * std::sin(kTwoPi * w.V(y));
        };
        s.grad = [&w](double x, double y) -> std::array<double, 2> {
            double sx = std::sin(kTwoPi * w.W(x)), cx = std::cos(kTwoPi * w.W(x));
            double sy = std::sin(kTwoPi * w.V(y)), cy = std::cos(kTwoPi * w.V(y));
            return {kTwoPi * w.Wp(x) * cx * sy, kTwoPi * w.Vp(y) * sx * cy};
        };
        s.laplacian = [&w](double x, double y) {
            double sx = std::sin(kTwoPi * w.W(x)), cx = std::cos(kTwoPi * w.W(x));
            double sy = std::sin(kTwoPi * w.V(y)), cy = std::cos(kTwoPi * w.V(y));
            double pxx = kTwoPi * w.Wpp(x) * cx -
                         kTwoPi * kTwoPi * w.Wp(x) * w.Wp(x) * sx;
            double pyy = kTwoPi * w.Vpp(y) * cy -
                         kTwoPi * kTwoPi * w.Vp(y) * w.Vp(y) * sy;
            return pxx * sy + sx * pyy;
        };
    } else if (name == "paraboloid") {
        double H0 = get_param(params, "H0", 1.0);
        double R = get_param(params, "R", 1.0);
        double cx = get_param(params, "cx", 0.0);
        double cy = get_param(params, "cy", 0.0);
        if (R <= 0) throw std::invalid_argument("paraboloid stream: R must be > 0");
        double a = H0 / (R * R);
        s.eval = [H0, a, cx, cy](double x, double y) {
            double dx = x - cx, dy = y - cy;
            return H0 - a * (dx * dx + dy * dy);
        };
        s.grad = [a, cx, cy](double x, double y) -> std::array<double, 2> {
            return {-2.0 * a * (x - cx), -2.0 * a * (y - cy)};
        };
        s.laplacian = [a](double, double) { return -4.0 * a; };
    } else {
        throw std::invalid_argument("unknown stream function: " + name);
    }
    return s;
}

double stream_gradient_selfcheck(const StreamFunction& s, double x0, double y0, double x1,
                                 double y1, int samples) {
    std::mt19937 rng(12345);
    std::uniform_real_distribution<double> ux(x0, x1), uy(y0, y1);
    const double d = 1e-5;
    double worst = 0.0;
    for (int k = 0; k < samples; ++k) {
        double x = ux(rng), y = uy(rng);
        auto g = s.grad(x, y);
        double gx = (s.eval(x + d, y) - s.eval(x - d, y)) / (2 * d);
        double gy = (s.eval(x, y + d) - s.eval(x, y - d)) / (2 * d);
        worst = std::max({worst, std::abs(g[0] - gx), std::abs(g[1] - gy)});
    }
    return worst;
}

std::array<double, 2> fig2_splits() {
    const Fig2Warps& w = fig2w();
    return {w.invW(0.5), w.invV(0.5)};
}

std::array<std::array<double, 2>, 4> fig2_cell_seeds() {
    const Fig2Warps& w = fig2w();
    double xa = w.invW(0.25), xb = w.invW(0.75);
    double ya = w.invV(0.25), yb = w.invV(0.75);
    return {{{xa, ya}, {xb, ya}, {xa, yb}, {xb, yb}}};
}

} // namespace explab
