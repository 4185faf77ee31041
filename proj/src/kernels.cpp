#include "explab/kernels.hpp"

#include <cmath>
#include <stdexcept>

namespace explab::kern {

// ============================================================================
// Scalar reference backend
// ============================================================================

namespace ref {

void axpy(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void xmay(const double* x, double a, const double* y, double* z, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) z[i] = x[i] - a * y[i];
}

void update_p(double beta, double omega, const double* r, const double* v,
              double* p, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * (p[i] - omega * v[i]);
}

double dot(const double* x, const double* y, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
    return s;
}

double sum_abs(const double* x, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += std::abs(x[i]);
    return s;
}

double max_abs(const double* x, std::size_t n) {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::abs(x[i]));
    return m;
}

void spmv(std::size_t nrow, const std::int64_t* rowptr, const std::int32_t* col,
          const double* val, const double* x, double* y) {
    for (std::size_t r = 0; r < nrow; ++r) {
        double s = 0.0;
        for (std::int64_t k = rowptr[r]; k < rowptr[r + 1]; ++k)
            s += val[k] * x[col[k]];
        y[r] = s;
    }
}

} // namespace ref

// ============================================================================
// Dispatch table
// ============================================================================

void (*axpy)(double, const double*, double*, std::size_t) = ref::axpy;
void (*xmay)(const double*, double, const double*, double*, std::size_t) = ref::xmay;
void (*update_p)(double, double, const double*, const double*, double*, std::size_t) =
    ref::update_p;
double (*dot)(const double*, const double*, std::size_t) = ref::dot;
double (*sum_abs)(const double*, std::size_t) = ref::sum_abs;
double (*max_abs)(const double*, std::size_t) = ref::max_abs;
void (*spmv)(std::size_t, const std::int64_t*, const std::int32_t*, const double*,
             const double*, double*) = ref::spmv;

namespace {
Backend g_active = Backend::scalar;
}

bool cpu_supports_avx2() {
#if defined(__x86_64__)
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

void select(Backend b) {
    switch (b) {
    case Backend::scalar:
        axpy = ref::axpy;
        xmay = ref::xmay;
        update_p = ref::update_p;
        dot = ref::dot;
        sum_abs = ref::sum_abs;
        max_abs = ref::max_abs;
        spmv = ref::spmv;
        break;
    case Backend::avx2:
#if defined(__x86_64__)
        if (!cpu_supports_avx2())
            throw std::runtime_error("kern::select: CPU does not support AVX2+FMA");
        axpy = avx2::axpy;
        xmay = avx2::xmay;
        update_p = avx2::update_p;
        dot = avx2::dot;
        sum_abs = avx2::sum_abs;
        max_abs = avx2::max_abs;
        spmv = avx2::spmv;
        break;
#else
        throw std::runtime_error("kern::select: AVX2 backend not built on this arch");
#endif
    }
    g_active = b;
}

Backend active() { return g_active; }

const char* backend_name() {
    return g_active == Backend::avx2 ? "avx2" : "scalar";
}

namespace {
// Pick the best backend once, before main().
struct AutoSelect {
    AutoSelect() {
        if (cpu_supports_avx2()) select(Backend::avx2);
    }
} auto_select;
} // namespace

} // namespace explab::kern
