#pragma once
// Linear solves for the assembled operators. Direct sparse LU (factored once,
// reused for every right side of the same operator) up to a size cap;
// BiCGStab with ILU(0) beyond it or on request. Residual criterion is
// ||A q - f||_inf <= rtol ||f||_inf.

#include <stdexcept>
#include <vector>

#include "explab/assemble.hpp"

namespace explab {

class SolveError : public std::runtime_error {
public:
    SolveError(const std::string& what, double residual)
        : std::runtime_error(what), final_residual(residual) {}
    double final_residual;
};

/// Sparse direct factorization (fill-reducing LU), opaque handle.
class DirectLU {
public:
    explicit DirectLU(const CsrMatrix& a);
    ~DirectLU();
    DirectLU(const DirectLU&) = delete;
    DirectLU& operator=(const DirectLU&) = delete;
    void solve(const double* b, double* x) const;

private:
    struct Impl;
    Impl* impl_;
};

/// ILU(0) on the CSR pattern.
class Ilu0 {
public:
    explicit Ilu0(const CsrMatrix& a);
    void apply(const double* r, double* z) const;  // z = (LU)^{-1} r

private:
    CsrMatrix f_;
    std::vector<std::int64_t> diag_;
};

enum class SolveMethod { automatic, direct, bicgstab };

struct SolveOptions {
    double rtol = 1e-10;
    int max_iter = 4000;
    SolveMethod method = SolveMethod::automatic;
    const std::vector<double>* initial_guess = nullptr;  // interior-sized
    std::int64_t direct_size_cap = 400000;  // unknowns; beyond this go iterative
};

struct SolveInfo {
    int iterations = 0;
    double residual = 0.0;
    bool direct = false;
};

/// Solve op q = f over interior unknowns. Factorizations are cached inside
/// the operator and shared between calls (thread-safe build).
std::vector<double> solve_interior(const AdvectionDiffusionOperator& op,
                                   const std::vector<double>& f,
                                   const SolveOptions& opts = {}, SolveInfo* info = nullptr);

ScalarField solve(const AdvectionDiffusionOperator& op, const ScalarField& f,
                  const SolveOptions& opts = {}, SolveInfo* info = nullptr);

} // namespace explab
