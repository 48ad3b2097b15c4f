#pragma once

#include "fsidlm/assembly.hpp"
#include "fsidlm/coupling.hpp"
#include "fsidlm/csr.hpp"

#include <span>
#include <vector>

namespace fsidlm {

struct BlockSizes {
    int n_u = 0;
    int n_p = 0;
    int n_X = 0;
    int n_lambda = 0;
    [[nodiscard]] int total() const { return n_u + n_p + n_X + n_lambda; }
    [[nodiscard]] int offset_u() const { return 0; }
    [[nodiscard]] int offset_p() const { return n_u; }
    [[nodiscard]] int offset_X() const { return n_u + n_p; }
    [[nodiscard]] int offset_lambda() const { return n_u + n_p + n_X; }
};

/// The monolithic 4x4 block operator in unknown order (u, p, X, lambda):
///
///   [ A_f   -B^T    0            L_f^T ] [u]        [g1]
///   [ -B     0      0            0     ] [p]      = [0 ]
///   [  0     0      K           -L_s^T ] [X]        [f_s]
///   [ L_f    0   -(1/dt) L_s     0     ] [lambda]   [g2]
///
/// A_f and B carry the velocity Dirichlet elimination (rows/cols zeroed,
/// unit diagonal); L_f columns of constrained dofs are zeroed when the
/// coupling block is installed.
class BlockSystem {
public:
    BlockSystem(BlockSizes sizes, double dt) : sizes_(sizes), dt_(dt) {}

    [[nodiscard]] const BlockSizes& sizes() const { return sizes_; }
    [[nodiscard]] double dt() const { return dt_; }

    void set_fluid_blocks(CsrMatrix A_f, CsrMatrix B);
    void set_solid_block(CsrMatrix K);
    void set_multiplier_mass(CsrMatrix L_s);
    void set_coupling(CsrMatrix L_f);
    void set_velocity_dirichlet(std::vector<int> dofs);

    /// Cell measures used to weight the pressure mean (constant pressure
    /// dofs are every third DiscP1 dof).
    void set_pressure_cell_areas(std::vector<double> areas);

    [[nodiscard]] const CsrMatrix& A_f() const { return A_f_; }
    [[nodiscard]] const CsrMatrix& B() const { return B_; }
    [[nodiscard]] const CsrMatrix& K() const { return K_; }
    [[nodiscard]] const CsrMatrix& L_f() const { return L_f_; }
    [[nodiscard]] const CsrMatrix& L_s() const { return L_s_; }
    [[nodiscard]] const std::vector<int>& dirichlet_dofs() const { return dirichlet_dofs_; }

    /// Version counter bumped by set_solid_block / set_coupling; the
    /// preconditioner uses it to detect stale factorizations.
    [[nodiscard]] int solid_version() const { return solid_version_; }
    [[nodiscard]] int coupling_version() const { return coupling_version_; }

    /// y = A x over the full unknown vector.
    void apply(std::span<const double> x, std::span<double> y, int n_threads = 1) const;

    /// r_lambda -= L_f * z_u; the action of the strictly lower block A21.
    void apply_A21_correction(std::span<const double> z, std::span<double> r) const;

    /// Monolithic saddle blocks for the exact inner solves.
    [[nodiscard]] CsrMatrix build_A11() const;
    [[nodiscard]] CsrMatrix build_A22() const;

    /// Subtract the (area-weighted) mean from the pressure sub-vector.
    void project_pressure_mean(std::span<double> full_vector) const;

    std::span<double> u_part(std::span<double> v) const {
        return v.subspan(static_cast<std::size_t>(sizes_.offset_u()), static_cast<std::size_t>(sizes_.n_u));
    }
    std::span<double> p_part(std::span<double> v) const {
        return v.subspan(static_cast<std::size_t>(sizes_.offset_p()), static_cast<std::size_t>(sizes_.n_p));
    }
    std::span<double> X_part(std::span<double> v) const {
        return v.subspan(static_cast<std::size_t>(sizes_.offset_X()), static_cast<std::size_t>(sizes_.n_X));
    }
    std::span<double> lambda_part(std::span<double> v) const {
        return v.subspan(static_cast<std::size_t>(sizes_.offset_lambda()),
                         static_cast<std::size_t>(sizes_.n_lambda));
    }

private:
    BlockSizes sizes_;
    double dt_;
    CsrMatrix A_f_, B_, Bt_, K_, L_f_, L_ft_, L_s_;
    std::vector<int> dirichlet_dofs_;
    std::vector<double> pressure_cell_areas_;
    int solid_version_ = 0;
    int coupling_version_ = 0;
};

} // namespace fsidlm
