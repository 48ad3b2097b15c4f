#include "fsidlm/direct_solver.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

namespace fsidlm {

struct DirectFactorization::Impl {
    Eigen::SparseMatrix<double> matrix;
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
};

DirectFactorization::DirectFactorization() : impl_(std::make_unique<Impl>()) {}
DirectFactorization::~DirectFactorization() = default;
DirectFactorization::DirectFactorization(DirectFactorization&&) noexcept = default;
DirectFactorization& DirectFactorization::operator=(DirectFactorization&&) noexcept = default;

void DirectFactorization::factorize(const CsrMatrix& a, int pinned_dof) {
    if (a.n_rows() != a.n_cols()) throw SingularBlock("factorize expects a square matrix");
    n_ = a.n_rows();
    pinned_dof_ = pinned_dof;

    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(a.nnz() + 1);
    bool pinned_diag_present = false;
    for (int r = 0; r < a.n_rows(); ++r) {
        const bool pinned_row = r == pinned_dof;
        for (int k = a.row_ptr()[static_cast<std::size_t>(r)];
             k < a.row_ptr()[static_cast<std::size_t>(r) + 1]; ++k) {
            const int c = a.col_idx()[static_cast<std::size_t>(k)];
            if (pinned_row || c == pinned_dof) {
                if (pinned_row && c == pinned_dof) {
                    triplets.emplace_back(r, c, 1.0);
                    pinned_diag_present = true;
                }
                continue;
            }
            triplets.emplace_back(r, c, a.values()[static_cast<std::size_t>(k)]);
        }
    }
    if (pinned_dof >= 0 && !pinned_diag_present)
        triplets.emplace_back(pinned_dof, pinned_dof, 1.0);

    impl_->matrix.resize(n_, n_);
    impl_->matrix.setFromTriplets(triplets.begin(), triplets.end());
    impl_->matrix.makeCompressed();
    impl_->lu.isSymmetric(false);
    impl_->lu.compute(impl_->matrix);
    if (impl_->lu.info() != Eigen::Success)
        throw SingularBlock("sparse LU failed: " + impl_->lu.lastErrorMessage());
    ++n_factorizations_;
}

bool DirectFactorization::ready() const { return n_factorizations_ > 0; }

void DirectFactorization::solve(std::span<const double> b, std::span<double> x) const {
    if (n_factorizations_ == 0) throw SingularBlock("solve called before factorize");
    Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(b.data(), n_);
    if (pinned_dof_ >= 0) rhs[pinned_dof_] = 0.0;
    const Eigen::VectorXd sol = impl_->lu.solve(rhs);
    if (impl_->lu.info() != Eigen::Success) throw SingularBlock("sparse LU solve failed");
    Eigen::Map<Eigen::VectorXd>(x.data(), n_) = sol;
}

std::vector<double> DirectFactorization::solve(std::span<const double> b) const {
    std::vector<double> x(b.size());
    solve(b, x);
    return x;
}

} // namespace fsidlm
