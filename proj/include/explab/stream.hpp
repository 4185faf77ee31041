#pragma once
// Stream-function catalog. Entries are analytic: eval, gradient and laplacian
// are closed-form, and the gradient is self-checked against centered
// differences at construction.

#include <functional>
#include <map>
#include <string>

#include "explab/grid.hpp"

namespace explab {

struct StreamFunction {
    std::string name;
    std::function<double(double, double)> eval;
    std::function<std::array<double, 2>(double, double)> grad;
    std::function<double(double, double)> laplacian;
};

/// Catalog lookup. Known names:
///   sinsin      Psi = sin(pi x) sin(pi y)
///   fig2        warped four-cell flow on [0,2pi]^2 (cubic x-warp, quadratic
///               y-warp, each normalized to one sine period)
///   paraboloid  Psi = H0 (1 - r^2/R^2) about (cx, cy); params H0, R, cx, cy
StreamFunction make_stream(const std::string& name,
                           const std::map<std::string, double>& params = {});

/// max |analytic grad - centered difference| over `samples` pseudo-random
/// points in the box; the catalog promises < 1e-8.
double stream_gradient_selfcheck(const StreamFunction& s, double x0, double y0, double x1,
                                 double y1, int samples = 100);

/// Cell-split coordinates of the fig2 flow: {x_split, y_split} where the
/// interior separatrices cross the axes. Seeds for the four cells sit at the
/// warp quarter-points; see fig2_cell_seeds().
std::array<double, 2> fig2_splits();
std::array<std::array<double, 2>, 4> fig2_cell_seeds();

} // namespace explab
