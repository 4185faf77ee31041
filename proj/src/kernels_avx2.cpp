#include "explab/kernels.hpp"

#if defined(__x86_64__)

#include <immintrin.h>

#include <cmath>

// Compiled for the generic x86-64 baseline; each function carries its own
// target attribute so the TU builds everywhere and dispatch stays runtime.
#define EXPLAB_AVX2 __attribute__((target("avx2,fma")))

namespace explab::kern::avx2 {

EXPLAB_AVX2
void axpy(double a, const double* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vy = _mm256_loadu_pd(y + i);
        __m256d vx = _mm256_loadu_pd(x + i);
        _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, vx, vy));
    }
    for (; i < n; ++i) y[i] = std::fma(a, x[i], y[i]);
}

EXPLAB_AVX2
void xmay(const double* x, double a, const double* y, double* z, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vx = _mm256_loadu_pd(x + i);
        __m256d vy = _mm256_loadu_pd(y + i);
        _mm256_storeu_pd(z + i, _mm256_fnmadd_pd(va, vy, vx));
    }
    for (; i < n; ++i) z[i] = std::fma(-a, y[i], x[i]);
}

EXPLAB_AVX2
void update_p(double beta, double omega, const double* r, const double* v,
              double* p, std::size_t n) {
    const __m256d vb = _mm256_set1_pd(beta);
    const __m256d vw = _mm256_set1_pd(omega);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vp = _mm256_loadu_pd(p + i);
        __m256d vv = _mm256_loadu_pd(v + i);
        __m256d vr = _mm256_loadu_pd(r + i);
        __m256d t = _mm256_fnmadd_pd(vw, vv, vp);  // p - omega v
        _mm256_storeu_pd(p + i, _mm256_fmadd_pd(vb, t, vr));
    }
    for (; i < n; ++i) p[i] = std::fma(beta, std::fma(-omega, v[i], p[i]), r[i]);
}

EXPLAB_AVX2
static inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

EXPLAB_AVX2
double dot(const double* x, const double* y, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc);
    double s = hsum(acc);
    for (; i < n; ++i) s += x[i] * y[i];
    return s;
}

EXPLAB_AVX2
double sum_abs(const double* x, std::size_t n) {
    const __m256d mask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL));
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        acc = _mm256_add_pd(acc, _mm256_and_pd(mask, _mm256_loadu_pd(x + i)));
    double s = hsum(acc);
    for (; i < n; ++i) s += std::abs(x[i]);
    return s;
}

EXPLAB_AVX2
double max_abs(const double* x, std::size_t n) {
    const __m256d mask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL));
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        acc = _mm256_max_pd(acc, _mm256_and_pd(mask, _mm256_loadu_pd(x + i)));
    __m128d lo = _mm256_castpd256_pd128(acc);
    __m128d hi = _mm256_extractf128_pd(acc, 1);
    lo = _mm_max_pd(lo, hi);
    double m = _mm_cvtsd_f64(_mm_max_sd(lo, _mm_unpackhi_pd(lo, lo)));
    for (; i < n; ++i) m = std::max(m, std::abs(x[i]));
    return m;
}

EXPLAB_AVX2
void spmv(std::size_t nrow, const std::int64_t* rowptr, const std::int32_t* col,
          const double* val, const double* x, double* y) {
    for (std::size_t r = 0; r < nrow; ++r) {
        const std::int64_t b = rowptr[r], e = rowptr[r + 1];
        __m256d acc = _mm256_setzero_pd();
        std::int64_t k = b;
        for (; k + 4 <= e; k += 4) {
            __m128i idx = _mm_loadu_si128(reinterpret_cast<const __m128i*>(col + k));
            __m256d vx = _mm256_i32gather_pd(x, idx, 8);
            acc = _mm256_fmadd_pd(_mm256_loadu_pd(val + k), vx, acc);
        }
        double s = hsum(acc);
        for (; k < e; ++k) s += val[k] * x[col[k]];
        y[r] = s;
    }
}

} // namespace explab::kern::avx2

#endif // __x86_64__
