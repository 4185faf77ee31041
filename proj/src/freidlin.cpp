#include "explab/freidlin.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace explab {

// ============================================================================
// Cell detection
// ============================================================================

std::vector<CellSpec> detect_cells(const StreamFunction& psi, const Grid2D& grid,
                                   const std::vector<std::array<double, 2>>& seeds,
                                   double eps_sep) {
    const int nx = grid.nx, ny = grid.ny;
    std::vector<double> P((std::size_t)nx * ny);
    double pmax = 0.0;
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            P[grid.node(i, j)] = psi.eval(grid.x(i), grid.y(j));
            pmax = std::max(pmax, std::abs(P[grid.node(i, j)]));
        }
    if (eps_sep <= 0.0) eps_sep = 0.02 * pmax;

    std::vector<std::int32_t> owner((std::size_t)nx * ny, -1);
    std::vector<CellSpec> cells;

    auto flood = [&](std::vector<std::uint8_t>& mask, int si, int sj, int sign,
                     double threshold, bool record_owner, int cell_id) {
        std::vector<std::int32_t> stack{grid.node(si, sj)};
        std::int64_t count = 0;
        while (!stack.empty()) {
            int nd = stack.back();
            stack.pop_back();
            if (mask[nd]) continue;
            int i = nd % nx, j = nd / nx;
            if (sign * P[nd] <= threshold) continue;
            mask[nd] = 1;
            ++count;
            if (record_owner) owner[nd] = cell_id;
            const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
            for (int d = 0; d < 4; ++d) {
                int ii = i + di[d], jj = j + dj[d];
                if (ii >= 0 && ii < nx && jj >= 0 && jj < ny && !mask[grid.node(ii, jj)])
                    stack.push_back(grid.node(ii, jj));
            }
        }
        return count;
    };

    for (std::size_t s = 0; s < seeds.size(); ++s) {
        auto [si, sj] = grid.nearest_node(seeds[s][0], seeds[s][1]);
        double pv = P[grid.node(si, sj)];
        if (std::abs(pv) <= eps_sep) {
            char msg[128];
            std::snprintf(msg, sizeof msg,
                          "detect_cells: seed %zu at (%.4g,%.4g) lies on the separatrix "
                          "(|Psi| = %.3g <= eps_sep = %.3g)",
                          s, seeds[s][0], seeds[s][1], std::abs(pv), eps_sep);
            throw std::invalid_argument(msg);
        }
        if (owner[grid.node(si, sj)] >= 0) {
            char msg[128];
            std::snprintf(msg, sizeof msg,
                          "detect_cells: seeds %d and %zu lie in the same cell component",
                          owner[grid.node(si, sj)], s);
            throw std::invalid_argument(msg);
        }
        CellSpec c;
        c.seed = seeds[s];
        c.sign = pv > 0 ? +1 : -1;
        c.member.assign((std::size_t)nx * ny, 0);
        c.member_count = flood(c.member, si, sj, c.sign, eps_sep, true, (int)cells.size());
        c.domain_mask.assign((std::size_t)nx * ny, 0);
        flood(c.domain_mask, si, sj, c.sign, 0.0, false, 0);
        // restrict the 2D domain to the parent's interior
        for (std::size_t k = 0; k < c.domain_mask.size(); ++k)
            if (!grid.interior[k]) c.domain_mask[k] = 0;

        c.H0 = 0.0;
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i)
                if (c.member[grid.node(i, j)]) {
                    double v = c.sign * P[grid.node(i, j)];
                    if (v > c.H0) {
                        c.H0 = v;
                        c.extremum = {grid.x(i), grid.y(j)};
                    }
                }
        cells.push_back(std::move(c));
    }
    return cells;
}

// ============================================================================
// Level coefficients
// ============================================================================

namespace {

// area fraction of the unit square where the bilinear interpolant of the
// corner values (v00,v10,v11,v01 counterclockwise) is >= level, by marching-
// squares polygon clipping of the linear edge model
double cell_fraction(double v00, double v10, double v11, double v01, double level) {
    const double vx[4] = {v00, v10, v11, v01};
    const double cx[4] = {0, 1, 1, 0}, cy[4] = {0, 0, 1, 1};
    int above = 0;
    for (double v : vx)
        if (v >= level) ++above;
    if (above == 4) return 1.0;
    if (above == 0) return 0.0;
    double px[8], py[8];
    int np = 0;
    for (int k = 0; k < 4; ++k) {
        int k2 = (k + 1) & 3;
        if (vx[k] >= level) {
            px[np] = cx[k];
            py[np] = cy[k];
            ++np;
        }
        if ((vx[k] >= level) != (vx[k2] >= level)) {
            double t = (level - vx[k]) / (vx[k2] - vx[k]);
            px[np] = cx[k] + t * (cx[k2] - cx[k]);
            py[np] = cy[k] + t * (cy[k2] - cy[k]);
            ++np;
        }
    }
    double s = 0.0;
    for (int k = 0; k < np; ++k) {
        int k2 = (k + 1) % np;
        s += px[k] * py[k2] - px[k2] * py[k];
    }
    return std::abs(s) * 0.5;
}

} // namespace

LevelCoefficients level_coefficients(const StreamFunction& psi, const Grid2D& grid,
                                     const CellSpec& cell, int n_levels) {
    if (n_levels < 32)
        throw std::invalid_argument("level_coefficients: n_levels must be >= 32");
    const int nx = grid.nx, ny = grid.ny;
    const double s = (double)cell.sign;
    const double H0 = cell.H0;

    // one interior critical point: a second strict local max above H0/4
    // violates the cell assumptions
    {
        std::vector<double> val((std::size_t)nx * ny);
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) val[grid.node(i, j)] = s * psi.eval(grid.x(i), grid.y(j));
        int maxima = 0;
        for (int j = 1; j < ny - 1; ++j)
            for (int i = 1; i < nx - 1; ++i) {
                int nd = grid.node(i, j);
                if (!cell.member[nd] || val[nd] < 0.25 * H0) continue;
                if (val[nd] > val[nd - 1] && val[nd] > val[nd + 1] && val[nd] > val[nd - nx] &&
                    val[nd] > val[nd + nx])
                    ++maxima;
            }
        if (maxima > 1)
            throw std::runtime_error(
                "level_coefficients: cell violates the one-critical-point assumption "
                "(multiple interior extrema)");
    }

    // level grid: geometric refinement below 0.1 H0 (T ~ |ln h| there), then
    // uniform up to 0.995 H0
    LevelCoefficients c;
    c.H0 = H0;
    const int n_geo = 8;
    for (int k = n_geo; k >= 1; --k) c.h.push_back(0.1 * H0 * std::pow(2.0, -k));
    int n_uni = n_levels - n_geo;
    for (int k = 0; k < n_uni; ++k)
        c.h.push_back(0.1 * H0 + (0.995 * H0 - 0.1 * H0) * k / (double)(n_uni - 1));

    // gather grid cells touching the component; corner values of s*Psi
    struct QuadCell {
        double v00, v10, v11, v01, lap;
    };
    std::vector<QuadCell> quads;
    for (int j = 0; j + 1 < ny; ++j)
        for (int i = 0; i + 1 < nx; ++i) {
            bool touch = cell.member[grid.node(i, j)] || cell.member[grid.node(i + 1, j)] ||
                         cell.member[grid.node(i, j + 1)] || cell.member[grid.node(i + 1, j + 1)];
            if (!touch) continue;
            QuadCell q;
            q.v00 = s * psi.eval(grid.x(i), grid.y(j));
            q.v10 = s * psi.eval(grid.x(i + 1), grid.y(j));
            q.v11 = s * psi.eval(grid.x(i + 1), grid.y(j + 1));
            q.v01 = s * psi.eval(grid.x(i), grid.y(j + 1));
            q.lap = s * psi.laplacian(grid.x(i) + 0.5 * grid.hx, grid.y(j) + 0.5 * grid.hy);
            quads.push_back(q);
        }

    const double cw = grid.hx * grid.hy;
    const int M = (int)c.h.size();
    c.area.assign(M, 0.0);
    c.p.assign(M, 0.0);
    for (int k = 0; k < M; ++k) {
        double area = 0.0, plap = 0.0;
        for (const QuadCell& q : quads) {
            double f = cell_fraction(q.v00, q.v10, q.v11, q.v01, c.h[k]);
            if (f == 0.0) continue;
            area += f;
            plap += f * q.lap;
        }
        c.area[k] = area * cw;
        // p(h) = contour integral of |grad Psi| = -(area integral of Lap(s Psi))
        c.p[k] = -plap * cw;
    }

    // monotone area sanity
    for (int k = 0; k + 1 < M; ++k)
        if (c.area[k + 1] > c.area[k] + 1e-9 * c.area[0])
            throw std::runtime_error(
                "level_coefficients: non-monotone area function; cell violates the "
                "one-critical-point assumption");

    // T = -dA/dh on the nonuniform grid (3-point interior, one-sided ends)
    c.T.assign(M, 0.0);
    for (int k = 0; k < M; ++k) {
        if (k == 0) {
            c.T[k] = -(c.area[1] - c.area[0]) / (c.h[1] - c.h[0]);
        } else if (k == M - 1) {
            c.T[k] = -(c.area[M - 1] - c.area[M - 2]) / (c.h[M - 1] - c.h[M - 2]);
        } else {
            double a = c.h[k] - c.h[k - 1], b = c.h[k + 1] - c.h[k];
            c.T[k] = -(b * b * c.area[k + 1] + (a * a - b * b) * c.area[k] -
                       a * a * c.area[k - 1]) /
                     (a * b * (a + b));
        }
        if (c.T[k] <= 0.0)
            throw std::runtime_error("level_coefficients: non-positive turnover time");
    }

    // linear fit p ~ C (H0 - h) through the top 10% of levels
    {
        double num = 0.0, den = 0.0;
        int k0 = M - std::max(3, M / 10);
        for (int k = k0; k < M; ++k) {
            double d = H0 - c.h[k];
            num += c.p[k] * d;
            den += d * d;
        }
        c.p_top_slope = num / den;
        if (!(c.p_top_slope > 0.0))
            throw std::runtime_error("level_coefficients: top fit of p is not linear-positive");
    }

    // P = int_0^h ds/p, trapezoid; replace p by the fitted model on the last
    // 5% of levels (the raw samples degenerate with the level set)
    c.P.assign(M, 0.0);
    auto p_eff = [&](int k) {
        if (c.h[k] > 0.95 * H0) return c.p_top_slope * (H0 - c.h[k]);
        return c.p[k];
    };
    c.P[0] = c.h[0] / c.p[0];
    for (int k = 1; k < M; ++k) {
        double lo = c.h[k - 1], hi = c.h[k];
        double seg;
        if (lo > 0.95 * H0) {
            // analytic integral of 1/(C (H0 - s)) on [lo, hi]
            seg = std::log((H0 - lo) / (H0 - hi)) / c.p_top_slope;
        } else {
            seg = 0.5 * (1.0 / p_eff(k) + 1.0 / p_eff(k - 1)) * (hi - lo);
        }
        c.P[k] = c.P[k - 1] + seg;
    }
    return c;
}

LevelCoefficients make_level_coefficients(std::vector<double> h, std::vector<double> T,
                                          std::vector<double> p, double H0) {
    LevelCoefficients c;
    c.h = std::move(h);
    c.T = std::move(T);
    c.p = std::move(p);
    c.H0 = H0;
    const int M = (int)c.h.size();
    c.area.assign(M, 0.0);
    // same P construction as the grid route, with the tail fit from the data
    double num = 0.0, den = 0.0;
    int k0 = M - std::max(3, M / 10);
    for (int k = k0; k < M; ++k) {
        double d = H0 - c.h[k];
        num += c.p[k] * d;
        den += d * d;
    }
    c.p_top_slope = num / den > 0 ? num / den : 1.0;
    c.P.assign(M, 0.0);
    c.P[0] = c.h[0] / c.p[0];
    for (int k = 1; k < M; ++k) {
        double lo = c.h[k - 1], hi = c.h[k];
        double seg;
        if (lo > 0.95 * H0 && c.p_top_slope > 0)
            seg = std::log((H0 - lo) / (H0 - hi)) / c.p_top_slope;
        else
            seg = 0.5 * (1.0 / c.p[k] + 1.0 / c.p[k - 1]) * (hi - lo);
        c.P[k] = c.P[k - 1] + seg;
    }
    return c;
}

// ============================================================================
// Green-formula solver and thresholds
// ============================================================================

std::vector<double> freidlin_linear_solve(const LevelCoefficients& c,
                                          const std::vector<double>& f) {
    const int M = (int)c.h.size();
    if ((int)f.size() != M)
        throw std::invalid_argument("freidlin_linear_solve: f must be sampled on the h grid");
    // psi(h) = P(h) S1(h) + S2(h),  S1 = int_h^H0 f T,  S2 = int_0^h f T P
    std::vector<double> fT(M), S1(M, 0.0), S2(M, 0.0), psi(M);
    for (int k = 0; k < M; ++k) fT[k] = f[k] * c.T[k];
    S1[M - 1] = fT[M - 1] * (c.H0 - c.h[M - 1]);  // top remainder [h_M, H0]
    for (int k = M - 2; k >= 0; --k)
        S1[k] = S1[k + 1] + 0.5 * (fT[k] + fT[k + 1]) * (c.h[k + 1] - c.h[k]);
    // the [0, h_1] sliver of S2: the integrand f T P vanishes at h = 0
    S2[0] = 0.5 * fT[0] * c.P[0] * c.h[0];
    for (int k = 1; k < M; ++k)
        S2[k] = S2[k - 1] +
                0.5 * (fT[k] * c.P[k] + fT[k - 1] * c.P[k - 1]) * (c.h[k] - c.h[k - 1]);
    for (int k = 0; k < M; ++k) psi[k] = c.P[k] * S1[k] + S2[k];
    return psi;
}

FreidlinResult freidlin_minimal_solution(const LevelCoefficients& c, double lambda,
                                         const Nonlinearity& g,
                                         const MinimalSolutionOptions& opts) {
    const int M = (int)c.h.size();
    double cap = opts.blowup_cap > 0.0 ? opts.blowup_cap : default_blowup_cap(g);
    FreidlinResult r;
    r.lambda = lambda;
    r.phi.assign(M, 0.0);
    std::vector<double> rhs(M);
    for (int it = 1; it <= opts.max_iter; ++it) {
        for (int k = 0; k < M; ++k) rhs[k] = lambda * g.g(r.phi[k]);
        std::vector<double> next = freidlin_linear_solve(c, rhs);
        double inc = 0.0, sup = 0.0;
        for (int k = 0; k < M; ++k) {
            inc = std::max(inc, std::abs(next[k] - r.phi[k]));
            sup = std::max(sup, next[k]);
        }
        r.phi.swap(next);
        r.iterations = it;
        r.sup = sup;
        if (sup > cap) {
            r.status = IterStatus::blown_up;
            return r;
        }
        if (inc < opts.tol_inc) {
            r.status = IterStatus::converged;
            return r;
        }
    }
    r.status = IterStatus::iteration_limit;
    return r;
}

FreidlinThreshold freidlin_lambda_star(const LevelCoefficients& c, const Nonlinearity& g,
                                       const ThresholdOptions& opts) {
    FreidlinThreshold tr;
    // 1D supersolution bound with theta = sup of the unit-forcing solution
    std::vector<double> unit = freidlin_linear_solve(c, std::vector<double>(c.h.size(), 1.0));
    double theta1 = *std::max_element(unit.begin(), unit.end());
    tr.lower_bound = supersolution_lower_bound(g, theta1);

    auto probe = [&](double lam) {
        FreidlinResult r = freidlin_minimal_solution(c, lam, g, opts.minimal);
        tr.records.push_back({lam, r.status, r.sup, r.iterations});
        return r.status == IterStatus::converged;
    };
    double lo = tr.lower_bound;
    if (!probe(lo))
        throw std::runtime_error("freidlin_lambda_star: supersolution bound failed to converge");
    double hi = 2.0 * lo;
    int doublings = 0;
    while (probe(hi)) {
        hi *= 2.0;
        if (++doublings > 60)
            throw std::runtime_error("freidlin_lambda_star: no blow-up found");
    }
    lo = hi / 2.0 > lo ? hi / 2.0 : lo;
    while ((hi - lo) / lo > opts.rtol) {
        double mid = 0.5 * (lo + hi);
        if (probe(mid)) lo = mid; else hi = mid;
    }
    tr.lambda_lo_solved = lo;
    tr.lambda_hi_failed = hi;
    tr.lambda_star = 0.5 * (lo + hi);
    return tr;
}

MultiCellResult multi_cell_threshold(const StreamFunction& psi, const Grid2D& grid,
                                     const std::vector<std::array<double, 2>>& seeds,
                                     const Nonlinearity& g, int n_levels, double eps_sep) {
    MultiCellResult res;
    res.cells = detect_cells(psi, grid, seeds, eps_sep);
    res.min_lambda = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < res.cells.size(); ++j) {
        LevelCoefficients c = level_coefficients(psi, grid, res.cells[j], n_levels);
        FreidlinThreshold t = freidlin_lambda_star(c, g);
        res.lambda_star.push_back(t.lambda_star);
        if (t.lambda_star < res.min_lambda) {
            res.min_lambda = t.lambda_star;
            res.argmin = (int)j;
        }
    }
    return res;
}

} // namespace explab
