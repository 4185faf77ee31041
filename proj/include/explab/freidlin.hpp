#pragma once
// The effective 1D problem of the strong-flow limit in a cellular flow:
// per-cell coefficient extraction T(h), p(h) from the stream-function, the
// explicit Green-formula linear solver on [0, H0], the 1D monotone iteration,
// per-cell thresholds, and the min over cells.

#include "explab/explosion.hpp"
#include "explab/stream.hpp"

namespace explab {

struct CellSpec {
    std::array<double, 2> seed{};
    int sign = +1;                      // sign of Psi on the cell
    std::array<double, 2> extremum{};   // node location of max |Psi|
    double H0 = 0.0;                    // max |Psi| over member nodes
    std::vector<std::uint8_t> member;   // |Psi| > eps_sep component (per node)
    std::vector<std::uint8_t> domain_mask;  // full sign region (per node), for 2D runs
    std::int64_t member_count = 0;
};

/// Flood-fill the |Psi| > eps_sep component around each seed. eps_sep <= 0
/// picks the default 0.02 max|Psi|. Throws if a seed lies on the separatrix
/// or two seeds land in one component.
std::vector<CellSpec> detect_cells(const StreamFunction& psi, const Grid2D& grid,
                                   const std::vector<std::array<double, 2>>& seeds,
                                   double eps_sep = 0.0);

struct LevelCoefficients {
    std::vector<double> h;   // 0 < h_1 < ... < h_M < H0, geometric near 0
    std::vector<double> T;   // turnover time, -dA/dh
    std::vector<double> p;   // area integral of Lap(sign Psi), sign-adjusted
    std::vector<double> P;   // cumulative int_0^h ds/p(s)
    std::vector<double> area;
    double H0 = 0.0;
    double p_top_slope = 0.0;  // fitted C in p ~ C (H0 - h) near the top
};

/// Coefficients on n_levels >= 32 levels: areas by bilinear subcell fractions,
/// T by differentiating the area function, p by the area integral of the
/// laplacian, P by cumulative trapezoid with the top 5% handled through the
/// fitted linear model of p.
LevelCoefficients level_coefficients(const StreamFunction& psi, const Grid2D& grid,
                                     const CellSpec& cell, int n_levels);

/// Test-only style constructor: inject analytic coefficient tables.
LevelCoefficients make_level_coefficients(std::vector<double> h, std::vector<double> T,
                                          std::vector<double> p, double H0);

struct FreidlinResult {
    IterStatus status = IterStatus::converged;
    double lambda = 0.0;
    std::vector<double> phi;  // on the h grid
    int iterations = 0;
    double sup = 0.0;
};

/// psi(h) = int_0^{H0} f(xi) T(xi) P(min(h,xi)) dxi by composite trapezoid.
std::vector<double> freidlin_linear_solve(const LevelCoefficients& c,
                                          const std::vector<double>& f);

FreidlinResult freidlin_minimal_solution(const LevelCoefficients& c, double lambda,
                                         const Nonlinearity& g,
                                         const MinimalSolutionOptions& opts = {});

struct FreidlinThreshold {
    double lambda_star = 0.0;
    double lambda_lo_solved = 0.0;
    double lambda_hi_failed = 0.0;
    double lower_bound = 0.0;  // 1D supersolution bound
    std::vector<ProbeRecord> records;
};

FreidlinThreshold freidlin_lambda_star(const LevelCoefficients& c, const Nonlinearity& g,
                                       const ThresholdOptions& opts = {});

struct MultiCellResult {
    std::vector<CellSpec> cells;
    std::vector<double> lambda_star;  // per cell
    double min_lambda = 0.0;
    int argmin = -1;
};

MultiCellResult multi_cell_threshold(const StreamFunction& psi, const Grid2D& grid,
                                     const std::vector<std::array<double, 2>>& seeds,
                                     const Nonlinearity& g, int n_levels = 96,
                                     double eps_sep = 0.0);

} // namespace explab
