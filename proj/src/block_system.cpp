#include "fsidlm/block_system.hpp"

#include <algorithm>

namespace fsidlm {

void BlockSystem::set_fluid_blocks(CsrMatrix A_f, CsrMatrix B) {
    A_f_ = std::move(A_f);
    B_ = std::move(B);
    if (!dirichlet_dofs_.empty()) {
        A_f_.zero_rows_set_identity(dirichlet_dofs_);
        A_f_.zero_cols(dirichlet_dofs_);
        B_.zero_cols(dirichlet_dofs_);
    }
    Bt_ = B_.transposed();
}

void BlockSystem::set_solid_block(CsrMatrix K) {
    K_ = std::move(K);
    ++solid_version_;
}

void BlockSystem::set_multiplier_mass(CsrMatrix L_s) { L_s_ = std::move(L_s); }

void BlockSystem::set_coupling(CsrMatrix L_f) {
    L_f_ = std::move(L_f);
    if (!dirichlet_dofs_.empty()) L_f_.zero_cols(dirichlet_dofs_);
    L_ft_ = L_f_.transposed();
    ++coupling_version_;
}

void BlockSystem::set_velocity_dirichlet(std::vector<int> dofs) {
    std::sort(dofs.begin(), dofs.end());
    dofs.erase(std::unique(dofs.begin(), dofs.end()), dofs.end());
    dirichlet_dofs_ = std::move(dofs);
}

void BlockSystem::set_pressure_cell_areas(std::vector<double> areas) {
    pressure_cell_areas_ = std::move(areas);
}

void BlockSystem::apply(std::span<const double> x, std::span<double> y, int n_threads) const {
    const auto xu = x.subspan(0, static_cast<std::size_t>(sizes_.n_u));
    const auto xp = x.subspan(static_cast<std::size_t>(sizes_.offset_p()),
                              static_cast<std::size_t>(sizes_.n_p));
    const auto xX = x.subspan(static_cast<std::size_t>(sizes_.offset_X()),
                              static_cast<std::size_t>(sizes_.n_X));
    const auto xl = x.subspan(static_cast<std::size_t>(sizes_.offset_lambda()),
                              static_cast<std::size_t>(sizes_.n_lambda));
    auto yu = y.subspan(0, static_cast<std::size_t>(sizes_.n_u));
    auto yp = y.subspan(static_cast<std::size_t>(sizes_.offset_p()),
                        static_cast<std::size_t>(sizes_.n_p));
    auto yX = y.subspan(static_cast<std::size_t>(sizes_.offset_X()),
                        static_cast<std::size_t>(sizes_.n_X));
    auto yl = y.subspan(static_cast<std::size_t>(sizes_.offset_lambda()),
                        static_cast<std::size_t>(sizes_.n_lambda));

    // Row 1: A_f u - B^T p + L_f^T lambda
    A_f_.matvec(xu, yu, n_threads);
    Bt_.matvec_add(xp, yu, -1.0);
    L_ft_.matvec_add(xl, yu, 1.0);
    // Row 2: -B u
    B_.matvec(xu, yp, n_threads);
    for (auto& v : yp) v = -v;
    // Row 3: K X - L_s lambda (L_s is symmetric)
    K_.matvec(xX, yX, n_threads);
    L_s_.matvec_add(xl, yX, -1.0);
    // Row 4: L_f u - (1/dt) L_s X
    L_f_.matvec(xu, yl, n_threads);
    L_s_.matvec_add(xX, yl, -1.0 / dt_);
}

void BlockSystem::apply_A21_correction(std::span<const double> z, std::span<double> r) const {
    const auto zu = z.subspan(0, static_cast<std::size_t>(sizes_.n_u));
    auto rl = r.subspan(static_cast<std::size_t>(sizes_.offset_lambda()),
                        static_cast<std::size_t>(sizes_.n_lambda));
    L_f_.matvec_add(zu, rl, -1.0);
}

namespace {

// Assemble [[A, s12*B12], [s21*B21, 0]] as one CSR matrix.
CsrMatrix compose_saddle(const CsrMatrix& A, const CsrMatrix& B12, double s12,
                         const CsrMatrix& B21, double s21) {
    const int n1 = A.n_rows();
    const int n2 = B21.n_rows();
    CsrMatrix out;
    std::vector<Triplet> triplets;
    triplets.reserve(A.nnz() + B12.nnz() + B21.nnz());
    for (int r = 0; r < n1; ++r)
        for (int k = A.row_ptr()[static_cast<std::size_t>(r)];
             k < A.row_ptr()[static_cast<std::size_t>(r) + 1]; ++k)
            triplets.push_back({r, A.col_idx()[static_cast<std::size_t>(k)],
                                A.values()[static_cast<std::size_t>(k)]});
    for (int r = 0; r < B12.n_rows(); ++r)
        for (int k = B12.row_ptr()[static_cast<std::size_t>(r)];
             k < B12.row_ptr()[static_cast<std::size_t>(r) + 1]; ++k)
            triplets.push_back({r, n1 + B12.col_idx()[static_cast<std::size_t>(k)],
                                s12 * B12.values()[static_cast<std::size_t>(k)]});
    for (int r = 0; r < n2; ++r)
        for (int k = B21.row_ptr()[static_cast<std::size_t>(r)];
             k < B21.row_ptr()[static_cast<std::size_t>(r) + 1]; ++k)
            triplets.push_back({n1 + r, B21.col_idx()[static_cast<std::size_t>(k)],
                                s21 * B21.values()[static_cast<std::size_t>(k)]});
    return CsrMatrix::from_triplets(n1 + n2, n1 + n2, std::move(triplets));
}

} // namespace

CsrMatrix BlockSystem::build_A11() const { return compose_saddle(A_f_, Bt_, -1.0, B_, -1.0); }

CsrMatrix BlockSystem::build_A22() const {
    return compose_saddle(K_, L_s_, -1.0, L_s_, -1.0 / dt_);
}

void BlockSystem::project_pressure_mean(std::span<double> full_vector) const {
    auto p = full_vector.subspan(static_cast<std::size_t>(sizes_.offset_p()),
                                 static_cast<std::size_t>(sizes_.n_p));
    double total = 0.0, weighted = 0.0;
    const std::size_t n_cells = p.size() / 3;
    for (std::size_t e = 0; e < n_cells; ++e) {
        const double a = pressure_cell_areas_.empty() ? 1.0 : pressure_cell_areas_[e];
        total += a;
        weighted += a * p[3 * e];
    }
    if (total == 0.0) return;
    const double mean = weighted / total;
    for (std::size_t e = 0; e < n_cells; ++e) p[3 * e] -= mean;
}

} // namespace fsidlm
