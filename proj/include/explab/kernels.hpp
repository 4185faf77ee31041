#pragma once
// Runtime-dispatched dense kernels for the hot inner loops (BiCGStab vector
// updates, CSR spmv, banded-LU row updates, norms). A scalar reference
// implementation always exists; an AVX2/FMA variant is selected at startup
// when the CPU supports it. The two backends are equivalence-tested.

#include <cstddef>
#include <cstdint>

namespace explab::kern {

enum class Backend { scalar, avx2 };

/// y[i] += a * x[i]
extern void (*axpy)(double a, const double* x, double* y, std::size_t n);
/// z[i] = x[i] - a * y[i]
extern void (*xmay)(const double* x, double a, const double* y, double* z, std::size_t n);
/// p[i] = r[i] + beta * (p[i] - omega * v[i])   (BiCGStab direction update)
extern void (*update_p)(double beta, double omega, const double* r, const double* v,
                        double* p, std::size_t n);
extern double (*dot)(const double* x, const double* y, std::size_t n);
extern double (*sum_abs)(const double* x, std::size_t n);
extern double (*max_abs)(const double* x, std::size_t n);
/// y = A x for CSR (rowptr int64, 32-bit column indices)
extern void (*spmv)(std::size_t nrow, const std::int64_t* rowptr, const std::int32_t* col,
                    const double* val, const double* x, double* y);

Backend active();
const char* backend_name();
/// Force a backend (used by the equivalence tests). Throws if unsupported.
void select(Backend b);
bool cpu_supports_avx2();

// Scalar reference implementations, always available (oracle side of the
// backend equivalence tests).
namespace ref {
void axpy(double a, const double* x, double* y, std::size_t n);
void xmay(const double* x, double a, const double* y, double* z, std::size_t n);
void update_p(double beta, double omega, const double* r, const double* v,
              double* p, std::size_t n);
double dot(const double* x, const double* y, std::size_t n);
double sum_abs(const double* x, std::size_t n);
double max_abs(const double* x, std::size_t n);
void spmv(std::size_t nrow, const std::int64_t* rowptr, const std::int32_t* col,
          const double* val, const double* x, double* y);
} // namespace ref

#if defined(__x86_64__)
namespace avx2 {
void axpy(double a, const double* x, double* y, std::size_t n);
void xmay(const double* x, double a, const double* y, double* z, std::size_t n);
void update_p(double beta, double omega, const double* r, const double* v,
              double* p, std::size_t n);
double dot(const double* x, const double* y, std::size_t n);
double sum_abs(const double* x, std::size_t n);
double max_abs(const double* x, std::size_t n);
void spmv(std::size_t nrow, const std::int64_t* rowptr, const std::int32_t* col,
          const double* val, const double* x, double* y);
} // namespace avx2
#endif

} // namespace explab::kern
