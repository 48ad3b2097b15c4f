#pragma once

#include "fsidlm/csr.hpp"

#include <memory>
#include <span>
#include <vector>

namespace fsidlm {

/// Exact sparse LU factorization of a square matrix behind an opaque handle.
///
/// Contract: solve() returns x with ||Ax - b||_inf <= 1e-10 * (||A||_inf
/// ||x||_inf + ||b||_inf). Throws SingularBlock when the factorization
/// detects a (numerically) singular matrix.
///
/// An optional pinned dof turns a known one-dimensional null space into a
/// fixed representative: the pinned row/column is replaced by the identity
/// and the corresponding rhs entry is forced to zero on every solve.
class DirectFactorization {
public:
    DirectFactorization();
    ~DirectFactorization();
    DirectFactorization(DirectFactorization&&) noexcept;
    DirectFactorization& operator=(DirectFactorization&&) noexcept;

    void factorize(const CsrMatrix& a, int pinned_dof = -1);
    [[nodiscard]] bool ready() const;

    void solve(std::span<const double> b, std::span<double> x) const;
    [[nodiscard]] std::vector<double> solve(std::span<const double> b) const;

    /// Number of successful factorize() calls on this object.
    [[nodiscard]] int factorization_count() const { return n_factorizations_; }

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    int n_factorizations_ = 0;
    int pinned_dof_ = -1;
    int n_ = 0;
};

} // namespace fsidlm
