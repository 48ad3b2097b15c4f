#include "fsidlm/csr.hpp"

#include <algorithm>
#include <cmath>

namespace fsidlm {

CsrMatrix CsrMatrix::from_triplets(int n_rows, int n_cols, std::vector<Triplet> triplets) {
    std::stable_sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    CsrMatrix m(n_rows, n_cols);
    m.col_idx_.reserve(triplets.size());
    m.values_.reserve(triplets.size());
    std::size_t i = 0;
    for (int r = 0; r < n_rows; ++r) {
        m.row_ptr_[static_cast<std::size_t>(r)] = static_cast<int>(m.col_idx_.size());
        while (i < triplets.size() && triplets[i].row == r) {
            const int c = triplets[i].col;
            double v = 0.0;
            while (i < triplets.size() && triplets[i].row == r && triplets[i].col == c)
                v += triplets[i++].val;
            m.col_idx_.push_back(c);
            m.values_.push_back(v);
        }
    }
    m.row_ptr_[static_cast<std::size_t>(n_rows)] = static_cast<int>(m.col_idx_.size());
    return m;
}

void CsrMatrix::matvec(std::span<const double> x, std::span<double> y, int n_threads) const {
    par_for(static_cast<std::size_t>(n_rows_), n_threads, [&](std::size_t b, std::size_t e, int) {
        for (std::size_t r = b; r < e; ++r) {
            double acc = 0.0;
            for (int k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
                acc += values_[static_cast<std::size_t>(k)] *
                       x[static_cast<std::size_t>(col_idx_[static_cast<std::size_t>(k)])];
            y[r] = acc;
        }
    });
}

void CsrMatrix::matvec_add(std::span<const double> x, std::span<double> y, double alpha) const {
    for (int r = 0; r < n_rows_; ++r) {
        double acc = 0.0;
        for (int k = row_ptr_[static_cast<std::size_t>(r)]; k < row_ptr_[static_cast<std::size_t>(r) + 1]; ++k)
            acc += values_[static_cast<std::size_t>(k)] *
                   x[static_cast<std::size_t>(col_idx_[static_cast<std::size_t>(k)])];
        y[static_cast<std::size_t>(r)] += alpha * acc;
    }
}

CsrMatrix CsrMatrix::transposed() const {
    CsrMatrix t(n_cols_, n_rows_);
    t.col_idx_.resize(nnz());
    t.values_.resize(nnz());
    std::vector<int> count(static_cast<std::size_t>(n_cols_) + 1, 0);
    for (const int c : col_idx_) ++count[static_cast<std::size_t>(c) + 1];
    for (int c = 0; c < n_cols_; ++c) count[static_cast<std::size_t>(c) + 1] += count[static_cast<std::size_t>(c)];
    t.row_ptr_ = count;
    for (int r = 0; r < n_rows_; ++r)
        for (int k = row_ptr_[static_cast<std::size_t>(r)]; k < row_ptr_[static_cast<std::size_t>(r) + 1]; ++k) {
            const int c = col_idx_[static_cast<std::size_t>(k)];
            const int pos = count[static_cast<std::size_t>(c)]++;
            t.col_idx_[static_cast<std::size_t>(pos)] = r;
            t.values_[static_cast<std::size_t>(pos)] = values_[static_cast<std::size_t>(k)];
        }
    return t;
}

double CsrMatrix::coeff(int row, int col) const {
    const auto begin = col_idx_.begin() + row_ptr_[static_cast<std::size_t>(row)];
    const auto end = col_idx_.begin() + row_ptr_[static_cast<std::size_t>(row) + 1];
    const auto it = std::lower_bound(begin, end, col);
    if (it == end || *it != col) return 0.0;
    return values_[static_cast<std::size_t>(it - col_idx_.begin())];
}

double CsrMatrix::inf_norm() const {
    double best = 0.0;
    for (int r = 0; r < n_rows_; ++r) {
        double s = 0.0;
        for (int k = row_ptr_[static_cast<std::size_t>(r)]; k < row_ptr_[static_cast<std::size_t>(r) + 1]; ++k)
            s += std::abs(values_[static_cast<std::size_t>(k)]);
        best = std::max(best, s);
    }
    return best;
}

namespace {
std::vector<char> make_mask(int n, std::span<const int> idx) {
    std::vector<char> mask(static_cast<std::size_t>(n), 0);
    for (const int i : idx) mask[static_cast<std::size_t>(i)] = 1;
    return mask;
}
} // namespace

void CsrMatrix::zero_rows_set_identity(std::span<const int> rows) {
    zero_rows(rows);
    for (const int r : rows)
        for (int k = row_ptr_[static_cast<std::size_t>(r)]; k < row_ptr_[static_cast<std::size_t>(r) + 1]; ++k)
            if (col_idx_[static_cast<std::size_t>(k)] == r) values_[static_cast<std::size_t>(k)] = 1.0;
}

void CsrMatrix::zero_rows(std::span<const int> rows) {
    for (const int r : rows)
        std::fill(values_.begin() + row_ptr_[static_cast<std::size_t>(r)],
                  values_.begin() + row_ptr_[static_cast<std::size_t>(r) + 1], 0.0);
}

void CsrMatrix::zero_cols(std::span<const int> cols) {
    const auto mask = make_mask(n_cols_, cols);
    for (std::size_t k = 0; k < col_idx_.size(); ++k)
        if (mask[static_cast<std::size_t>(col_idx_[k])]) values_[k] = 0.0;
}

void RowGatherAssembler::finalize_element(std::vector<Triplet>& buf) {
    std::sort(buf.begin(), buf.end(), [](const Triplet& a, const Triplet& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    std::size_t out = 0;
    for (std::size_t i = 0; i < buf.size();) {
        Triplet t = buf[i++];
        while (i < buf.size() && buf[i].row == t.row && buf[i].col == t.col) t.val += buf[i++].val;
        buf[out++] = t;
    }
    buf.resize(out);
}

CsrMatrix RowGatherAssembler::assemble(const std::vector<std::vector<int>>& row_to_elems,
                                       int n_threads) const {
    std::vector<std::vector<Triplet>> rows(static_cast<std::size_t>(n_rows_));
    par_for(static_cast<std::size_t>(n_rows_), n_threads, [&](std::size_t b, std::size_t e, int) {
        std::vector<Triplet> gather;
        for (std::size_t r = b; r < e; ++r) {
            gather.clear();
            for (const int elem : row_to_elems[r]) {
                const auto& buf = elem_triplets_[static_cast<std::size_t>(elem)];
                const auto lo = std::lower_bound(
                    buf.begin(), buf.end(), static_cast<int>(r),
                    [](const Triplet& t, int row) { return t.row < row; });
                for (auto it = lo; it != buf.end() && it->row == static_cast<int>(r); ++it)
                    gather.push_back(*it);
            }
            // Stable by construction: adjacent elements were visited ascending,
            // so duplicate columns are summed in element order.
            std::stable_sort(gather.begin(), gather.end(),
                             [](const Triplet& a, const Triplet& b) { return a.col < b.col; });
            auto& out = rows[r];
            out.reserve(gather.size());
            for (std::size_t i = 0; i < gather.size();) {
                Triplet t = gather[i++];
                while (i < gather.size() && gather[i].col == t.col) t.val += gather[i++].val;
                out.push_back(t);
            }
        }
    });

    CsrMatrix m(n_rows_, n_cols_);
    std::size_t total = 0;
    for (const auto& r : rows) total += r.size();
    m.col_idx_.resize(total);
    m.values_.resize(total);
    std::size_t pos = 0;
    for (int r = 0; r < n_rows_; ++r) {
        m.row_ptr_[static_cast<std::size_t>(r)] = static_cast<int>(pos);
        for (const Triplet& t : rows[static_cast<std::size_t>(r)]) {
            m.col_idx_[pos] = t.col;
            m.values_[pos] = t.val;
            ++pos;
        }
    }
    m.row_ptr_[static_cast<std::size_t>(n_rows_)] = static_cast<int>(pos);
    return m;
}

} // namespace fsidlm
