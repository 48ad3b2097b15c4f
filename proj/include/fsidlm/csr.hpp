#pragma once

#include "fsidlm/par_for.hpp"
#include "fsidlm/types.hpp"

#include <span>
#include <vector>

namespace fsidlm {

struct Triplet {
    int row = 0;
    int col = 0;
    double val = 0.0;
};

/// Compressed sparse row matrix. Column indices are strictly increasing
/// within each row; duplicates are summed when the matrix is built.
class CsrMatrix {
public:
    CsrMatrix() = default;
    CsrMatrix(int n_rows, int n_cols) : n_rows_(n_rows), n_cols_(n_cols), row_ptr_(n_rows + 1, 0) {}

    static CsrMatrix from_triplets(int n_rows, int n_cols, std::vector<Triplet> triplets);

    [[nodiscard]] int n_rows() const { return n_rows_; }
    [[nodiscard]] int n_cols() const { return n_cols_; }
    [[nodiscard]] std::size_t nnz() const { return col_idx_.size(); }

    [[nodiscard]] const std::vector<int>& row_ptr() const { return row_ptr_; }
    [[nodiscard]] const std::vector<int>& col_idx() const { return col_idx_; }
    [[nodiscard]] const std::vector<double>& values() const { return values_; }
    [[nodiscard]] std::vector<double>& values() { return values_; }

    /// y = A x (row-parallel, bitwise deterministic in the thread count).
    void matvec(std::span<const double> x, std::span<double> y, int n_threads = 1) const;
    /// y += alpha * A x (serial).
    void matvec_add(std::span<const double> x, std::span<double> y, double alpha = 1.0) const;

    [[nodiscard]] CsrMatrix transposed() const;
    [[nodiscard]] double coeff(int row, int col) const;
    [[nodiscard]] double inf_norm() const;

    /// Symmetric elimination helpers for Dirichlet rows/columns.
    void zero_rows_set_identity(std::span<const int> rows);
    void zero_rows(std::span<const int> rows);
    void zero_cols(std::span<const int> cols);

    [[nodiscard]] bool same_pattern(const CsrMatrix& o) const {
        return n_rows_ == o.n_rows_ && n_cols_ == o.n_cols_ && row_ptr_ == o.row_ptr_ &&
               col_idx_ == o.col_idx_;
    }
    bool operator==(const CsrMatrix& o) const = default;

private:
    friend class RowGatherAssembler;
    int n_rows_ = 0;
    int n_cols_ = 0;
    std::vector<int> row_ptr_;
    std::vector<int> col_idx_;
    std::vector<double> values_;
};

/// Deterministic element-parallel assembler.
///
/// Phase 1 (caller, element-parallel): fill one triplet buffer per element,
/// locally combined and sorted by (row, col). Phase 2 (row-parallel): each
/// row gathers from its adjacent elements in ascending element order, so the
/// floating-point summation order is independent of the thread count.
class RowGatherAssembler {
public:
    RowGatherAssembler(int n_rows, int n_cols, int n_elems)
        : n_rows_(n_rows), n_cols_(n_cols),
          elem_triplets_(static_cast<std::size_t>(n_elems)) {}

    std::vector<Triplet>& elem_buffer(int e) { return elem_triplets_[static_cast<std::size_t>(e)]; }

    /// Sort an element buffer by (row, col) and combine duplicate keys.
    static void finalize_element(std::vector<Triplet>& buf);

    /// row_to_elems[r] lists the elements contributing to row r in ascending
    /// order (extra elements are fine, they are skipped).
    [[nodiscard]] CsrMatrix assemble(const std::vector<std::vector<int>>& row_to_elems,
                                     int n_threads) const;

private:
    int n_rows_;
    int n_cols_;
    std::vector<std::vector<Triplet>> elem_triplets_;
};

} // namespace fsidlm
