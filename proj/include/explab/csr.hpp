#pragma once
// Compressed-row sparse matrices (square, 32-bit columns) for the 5-point
// operators; matvec goes through the dispatched spmv kernel.

#include <cstdint>
#include <vector>

namespace explab {

struct CsrMatrix {
    std::int64_t n = 0;
    std::vector<std::int64_t> rowptr;  // n+1
    std::vector<std::int32_t> col;
    std::vector<double> val;

    std::int64_t nnz() const { return (std::int64_t)val.size(); }
    void matvec(const double* x, double* y) const;
    std::vector<double> matvec(const std::vector<double>& x) const;
    double diag(std::int64_t i) const;
    /// Exact structural+value transpose (sorted columns).
    CsrMatrix transpose() const;
    /// Max |i-j| over stored entries (banded-LU bandwidth).
    std::int64_t bandwidth() const;
};

/// Row-by-row builder; rows must be appended in order.
class CsrBuilder {
public:
    explicit CsrBuilder(std::int64_t n, std::int64_t nnz_hint = 0);
    void add(std::int32_t col, double v);  // into the current row
    void finish_row();
    CsrMatrix take();

private:
    CsrMatrix m_;
    std::vector<std::pair<std::int32_t, double>> row_;
};

} // namespace explab
