#include "explab/csr.hpp"

#include <algorithm>
#include <stdexcept>

#include "explab/kernels.hpp"

namespace explab {

void CsrMatrix::matvec(const double* x, double* y) const {
    kern::spmv((std::size_t)n, rowptr.data(), col.data(), val.data(), x, y);
}

std::vector<double> CsrMatrix::matvec(const std::vector<double>& x) const {
    std::vector<double> y(n);
    matvec(x.data(), y.data());
    return y;
}

double CsrMatrix::diag(std::int64_t i) const {
    for (std::int64_t k = rowptr[i]; k < rowptr[i + 1]; ++k)
        if (col[k] == i) return val[k];
    return 0.0;
}

CsrMatrix CsrMatrix::transpose() const {
    CsrMatrix t;
    t.n = n;
    t.rowptr.assign(n + 1, 0);
    for (std::int32_t c : col) ++t.rowptr[c + 1];
    for (std::int64_t i = 0; i < n; ++i) t.rowptr[i + 1] += t.rowptr[i];
    t.col.resize(col.size());
    t.val.resize(val.size());
    std::vector<std::int64_t> next(t.rowptr.begin(), t.rowptr.end() - 1);
    for (std::int64_t r = 0; r < n; ++r)
        for (std::int64_t k = rowptr[r]; k < rowptr[r + 1]; ++k) {
            std::int64_t pos = next[col[k]]++;
            t.col[pos] = (std::int32_t)r;
            t.val[pos] = val[k];
        }
    return t;  // rows appear in increasing original-row order => sorted columns
}

std::int64_t CsrMatrix::bandwidth() const {
    std::int64_t b = 0;
    for (std::int64_t r = 0; r < n; ++r)
        for (std::int64_t k = rowptr[r]; k < rowptr[r + 1]; ++k)
            b = std::max(b, std::abs((std::int64_t)col[k] - r));
    return b;
}

CsrBuilder::CsrBuilder(std::int64_t n, std::int64_t nnz_hint) {
    m_.n = n;
    m_.rowptr.reserve(n + 1);
    m_.rowptr.push_back(0);
    if (nnz_hint > 0) {
        m_.col.reserve(nnz_hint);
        m_.val.reserve(nnz_hint);
    }
}

void CsrBuilder::add(std::int32_t col, double v) { row_.emplace_back(col, v); }

void CsrBuilder::finish_row() {
    std::sort(row_.begin(), row_.end());
    for (auto& [c, v] : row_) {
        m_.col.push_back(c);
        m_.val.push_back(v);
    }
    m_.rowptr.push_back((std::int64_t)m_.col.size());
    row_.clear();
}

CsrMatrix CsrBuilder::take() {
    if ((std::int64_t)m_.rowptr.size() != m_.n + 1)
        throw std::logic_error("CsrBuilder: wrong number of rows finished");
    return std::move(m_);
}

} // namespace explab
