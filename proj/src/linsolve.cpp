#include "explab/linsolve.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "explab/kernels.hpp"

namespace explab {

// ============================================================================
// Direct sparse LU (Eigen SparseLU behind the solve contract)
// ============================================================================

struct DirectLU::Impl {
    Eigen::SparseMatrix<double> a;
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
};

DirectLU::DirectLU(const CsrMatrix& m) : impl_(new Impl) {
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve((std::size_t)m.nnz());
    for (std::int64_t r = 0; r < m.n; ++r)
        for (std::int64_t k = m.rowptr[r]; k < m.rowptr[r + 1]; ++k)
            trips.emplace_back((int)r, (int)m.col[k], m.val[k]);
    impl_->a.resize((int)m.n, (int)m.n);
    impl_->a.setFromTriplets(trips.begin(), trips.end());
    impl_->lu.compute(impl_->a);
    if (impl_->lu.info() != Eigen::Success) {
        delete impl_;
        throw SolveError("DirectLU: factorization failed", 0.0);
    }
}

DirectLU::~DirectLU() { delete impl_; }

void DirectLU::solve(const double* b, double* x) const {
    Eigen::Map<const Eigen::VectorXd> vb(b, impl_->a.rows());
    Eigen::Map<Eigen::VectorXd> vx(x, impl_->a.rows());
    vx = impl_->lu.solve(vb);
}

// ============================================================================
// ILU(0)
// ============================================================================

Ilu0::Ilu0(const CsrMatrix& a) : f_(a) {
    diag_.assign(f_.n, -1);
    for (std::int64_t r = 0; r < f_.n; ++r)
        for (std::int64_t k = f_.rowptr[r]; k < f_.rowptr[r + 1]; ++k)
            if (f_.col[k] == r) diag_[r] = k;
    for (std::int64_t r = 0; r < f_.n; ++r) {
        if (diag_[r] < 0) throw SolveError("ILU0: missing diagonal", 0.0);
        for (std::int64_t k = f_.rowptr[r]; k < f_.rowptr[r + 1] && f_.col[k] < r; ++k) {
            std::int64_t c = f_.col[k];
            double piv = f_.val[diag_[c]];
            if (std::abs(piv) < 1e-300) throw SolveError("ILU0: zero pivot", 0.0);
            double l = f_.val[k] / piv;
            f_.val[k] = l;
            // subtract l * (row c upper part) on the shared pattern
            for (std::int64_t kc = diag_[c] + 1; kc < f_.rowptr[c + 1]; ++kc) {
                std::int32_t cc = f_.col[kc];
                for (std::int64_t kk = k + 1; kk < f_.rowptr[r + 1]; ++kk)
                    if (f_.col[kk] == cc) {
                        f_.val[kk] -= l * f_.val[kc];
                        break;
                    }
            }
        }
    }
}

void Ilu0::apply(const double* r, double* z) const {
    // L z = r (unit diagonal), then U z = z
    for (std::int64_t i = 0; i < f_.n; ++i) {
        double s = r[i];
        for (std::int64_t k = f_.rowptr[i]; k < diag_[i]; ++k) s -= f_.val[k] * z[f_.col[k]];
        z[i] = s;
    }
    for (std::int64_t i = f_.n - 1; i >= 0; --i) {
        double s = z[i];
        for (std::int64_t k = diag_[i] + 1; k < f_.rowptr[i + 1]; ++k)
            s -= f_.val[k] * z[f_.col[k]];
        z[i] = s / f_.val[diag_[i]];
    }
}

// ============================================================================
// BiCGStab + solve entry
// ============================================================================

namespace {

int bicgstab(const CsrMatrix& a, const Ilu0& prec, const std::vector<double>& b,
             std::vector<double>& x, double rtol, int max_iter, double* out_res) {
    const std::size_t n = (std::size_t)a.n;
    double bnorm = kern::max_abs(b.data(), n);
    if (bnorm == 0.0) {
        x.assign(n, 0.0);
        *out_res = 0.0;
        return 0;
    }
    const double tol = rtol * bnorm;

    std::vector<double> r(n), rhat(n), p(n, 0.0), v(n, 0.0), s(n), t(n), phat(n), shat(n);
    a.matvec(x.data(), r.data());
    kern::xmay(b.data(), 1.0, r.data(), r.data(), n);  // r = b - Ax
    rhat = r;
    double rho = 1.0, alpha = 1.0, omega = 1.0;
    double res = kern::max_abs(r.data(), n);
    int it = 0;
    while (res > tol && it < max_iter) {
        ++it;
        double rho_new = kern::dot(rhat.data(), r.data(), n);
        if (std::abs(rho_new) < 1e-290) {  // restart from the current residual
            a.matvec(x.data(), r.data());
            kern::xmay(b.data(), 1.0, r.data(), r.data(), n);
            rhat = r;
            p.assign(n, 0.0);
            v.assign(n, 0.0);
            rho = alpha = omega = 1.0;
            rho_new = kern::dot(rhat.data(), r.data(), n);
            if (std::abs(rho_new) < 1e-290) break;
        }
        double beta = (rho_new / rho) * (alpha / omega);
        kern::update_p(beta, omega, r.data(), v.data(), p.data(), n);
        prec.apply(p.data(), phat.data());
        a.matvec(phat.data(), v.data());
        double rv = kern::dot(rhat.data(), v.data(), n);
        if (std::abs(rv) < 1e-290) break;
        alpha = rho_new / rv;
        kern::xmay(r.data(), alpha, v.data(), s.data(), n);
        if (kern::max_abs(s.data(), n) <= tol) {
            kern::axpy(alpha, phat.data(), x.data(), n);
            a.matvec(x.data(), r.data());
            kern::xmay(b.data(), 1.0, r.data(), r.data(), n);
            res = kern::max_abs(r.data(), n);
            if (res <= tol) break;
            rhat = r;
            p.assign(n, 0.0);
            v.assign(n, 0.0);
            rho = alpha = omega = 1.0;
            continue;
        }
        prec.apply(s.data(), shat.data());
        a.matvec(shat.data(), t.data());
        double tt = kern::dot(t.data(), t.data(), n);
        if (tt == 0.0) break;
        omega = kern::dot(t.data(), s.data(), n) / tt;
        kern::axpy(alpha, phat.data(), x.data(), n);
        kern::axpy(omega, shat.data(), x.data(), n);
        kern::xmay(s.data(), omega, t.data(), r.data(), n);
        res = kern::max_abs(r.data(), n);
        rho = rho_new;
    }
    // true residual
    a.matvec(x.data(), s.data());
    kern::xmay(b.data(), 1.0, s.data(), s.data(), n);
    *out_res = kern::max_abs(s.data(), n);
    return it;
}

} // namespace

std::vector<double> solve_interior(const AdvectionDiffusionOperator& op,
                                   const std::vector<double>& f, const SolveOptions& opts,
                                   SolveInfo* info) {
    const CsrMatrix& a = op.matrix;
    if ((std::int64_t)f.size() != a.n)
        throw std::invalid_argument("solve: rhs size mismatch");
    for (double x : f)
        if (!std::isfinite(x)) throw std::invalid_argument("solve: rhs not finite");

    SolveMethod method = opts.method;
    if (method == SolveMethod::automatic)
        method = a.n <= opts.direct_size_cap ? SolveMethod::direct : SolveMethod::bicgstab;

    std::vector<double> x(a.n, 0.0);
    if (method == SolveMethod::direct) {
        std::shared_ptr<const DirectLU> lu;
        {
            std::lock_guard<std::mutex> lock(op.cache->mutex);
            if (!op.cache->direct) op.cache->direct = std::make_shared<const DirectLU>(a);
            lu = op.cache->direct;
        }
        lu->solve(f.data(), x.data());
        if (info) {
            std::vector<double> r = a.matvec(x);
            kern::xmay(f.data(), 1.0, r.data(), r.data(), r.size());
            info->residual = kern::max_abs(r.data(), r.size());
            info->iterations = 0;
            info->direct = true;
        }
        return x;
    }

    std::shared_ptr<const Ilu0> prec;
    {
        std::lock_guard<std::mutex> lock(op.cache->mutex);
        if (!op.cache->ilu) op.cache->ilu = std::make_shared<const Ilu0>(a);
        prec = op.cache->ilu;
    }
    if (opts.initial_guess) {
        if ((std::int64_t)opts.initial_guess->size() != a.n)
            throw std::invalid_argument("solve: initial guess size mismatch");
        x = *opts.initial_guess;
    }
    double res = 0.0;
    int it = bicgstab(a, *prec, f, x, opts.rtol, opts.max_iter, &res);
    double bnorm = kern::max_abs(f.data(), f.size());
    if (res > opts.rtol * bnorm) {
        char msg[128];
        std::snprintf(msg, sizeof msg,
                      "BiCGStab did not converge: residual %.3e after %d iterations "
                      "(target %.3e)", res, it, opts.rtol * bnorm);
        throw SolveError(msg, res);
    }
    if (info) {
        info->iterations = it;
        info->residual = res;
        info->direct = false;
    }
    return x;
}

ScalarField solve(const AdvectionDiffusionOperator& op, const ScalarField& f,
                  const SolveOptions& opts, SolveInfo* info) {
    std::vector<double> q = solve_interior(op, f.interior(), opts, info);
    return ScalarField::from_interior(op.grid, q);
}

} // namespace explab
