#pragma once

#include "fsidlm/block_system.hpp"
#include "fsidlm/direct_solver.hpp"

#include <functional>
#include <span>
#include <vector>

namespace fsidlm {

enum class PreconKind { BlockDiag, BlockTri };

/// Block preconditioner with exact inner solves:
///   block-diag: z1 = A11^{-1} r1, z2 = A22^{-1} r2
///   block-tri : z1 = A11^{-1} r1, z2 = A22^{-1} (r2 - A21 z1)
/// A11 = [[A_f,-B^T],[-B,0]] is factored once (it is time-independent);
/// A22 = [[K,-L_s^T],[-(1/dt)L_s,0]] is refactored whenever the solid block
/// changes (every Newton iteration for a nonlinear law).
class BlockPreconditioner {
public:
    /// pin_pressure fixes one pressure dof inside the A11 factorization,
    /// which enclosed-flow scenarios need (constant pressure null vector).
    void build(const BlockSystem& system, PreconKind kind, bool pin_pressure);

    /// Refactor A22 against the system's current solid block.
    void refactor_solid(const BlockSystem& system);

    /// z = M^{-1} r. Throws FactorizationStale if the solid block changed
    /// since the last (re)factorization.
    void apply(std::span<const double> r, std::span<double> z) const;

    [[nodiscard]] int a11_factorizations() const { return fact11_.factorization_count(); }
    [[nodiscard]] int a22_factorizations() const { return fact22_.factorization_count(); }
    [[nodiscard]] PreconKind kind() const { return kind_; }

private:
    const BlockSystem* system_ = nullptr;
    PreconKind kind_ = PreconKind::BlockTri;
    DirectFactorization fact11_, fact22_;
    int built_solid_version_ = -1;
    mutable std::vector<double> scratch_;
};

struct GmresOptions {
    double tol_rel = 1e-8;
    int restart = 200;
    int max_it = 2000;
    int n_threads = 1;
};

struct GmresResult {
    std::vector<double> x;
    int iterations = 0;      ///< total inner iterations
    double rel_residual = 0; ///< true relative residual of the returned x
};

using LinearOp = std::function<void(std::span<const double>, std::span<double>)>;

/// Right-preconditioned restarted GMRES. Converges on the true residual
/// ||b - A x|| <= tol_rel * ||b||; the optional postprocess hook is applied
/// to every new Krylov basis vector (pressure mean projection). Throws
/// MaxIterations / Breakdown.
[[nodiscard]] GmresResult gmres(const LinearOp& op, std::span<const double> rhs,
                                const LinearOp& precon, const GmresOptions& options,
                                const std::function<void(std::span<double>)>& postprocess = {});

/// Convenience driver for the monolithic system: wires the operator, the
/// block preconditioner and the pressure projection together.
[[nodiscard]] GmresResult solve_block_system(const BlockSystem& system,
                                             const BlockPreconditioner& precon,
                                             std::span<const double> rhs,
                                             const GmresOptions& options,
                                             bool project_pressure);

} // namespace fsidlm
