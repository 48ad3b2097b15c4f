#pragma once

#include "fsidlm/csr.hpp"
#include "fsidlm/fe_space.hpp"
#include "fsidlm/quadrature.hpp"

#include <functional>
#include <span>
#include <vector>

namespace fsidlm {

/// Constitutive law of the solid: P(F) = kappa * F, or the exponential
/// isotropic energy W(F) = gamma/(2 eta) * exp(eta (tr(F^T F) - 2)) whose
/// stress is P(F) = gamma * exp(eta (tr(F^T F) - 2)) * F.
struct MaterialLaw {
    enum class Kind { Linear, Exponential };
    /// Placement of the "-2" in the exponential-law exponent. ShiftedTrace
    /// reads eta*(tr - 2); RawExponent reads eta*tr - 2. The two differ by a
    /// constant rescaling of gamma.
    enum class ExpArg { ShiftedTrace, RawExponent };

    Kind kind = Kind::Linear;
    double kappa = 1.0;
    double gamma = 1.0;
    double eta = 1.0;
    ExpArg exp_arg = ExpArg::ShiftedTrace;

    static MaterialLaw linear(double kappa) { return {Kind::Linear, kappa, 0.0, 0.0, ExpArg::ShiftedTrace}; }
    static MaterialLaw exponential(double gamma, double eta,
                                   ExpArg arg = ExpArg::ShiftedTrace) {
        return {Kind::Exponential, 0.0, gamma, eta, arg};
    }
};

struct FluidBlocks {
    CsrMatrix M; ///< vector Q2 mass
    CsrMatrix K; ///< symmetric-gradient viscous stiffness
    CsrMatrix A; ///< (rho/dt) M + K
    CsrMatrix B; ///< rows = pressure dofs, cols = velocity dofs
};

/// Assemble M_f, K_f, A_f and B on the fluid mesh. V and Q must live on the
/// same mesh.
[[nodiscard]] FluidBlocks assemble_fluid_blocks(const FeSpace& V, const FeSpace& Q, double rho,
                                                double nu, double dt, int n_threads = 1);

/// kappa * (grad X, grad Y)_B on a VectorQ1 space (full gradient, so the
/// kernel is the per-component constants).
[[nodiscard]] CsrMatrix assemble_solid_linear(const FeSpace& S, double kappa, int n_threads = 1);

/// Vector Q1 mass matrix on the solid reference mesh.
[[nodiscard]] CsrMatrix assemble_multiplier_mass(const FeSpace& S, int n_threads = 1);

struct SolidResidual {
    std::vector<double> residual;
    CsrMatrix tangent;
};

/// Residual r_i = (P(F), grad chi_i)_B and its exact directional derivative
/// at the nodal state X. Throws NonFiniteValue when the exponential-law
/// exponent exceeds 700 (imminent overflow).
[[nodiscard]] SolidResidual solid_residual_and_tangent(const FeSpace& S, const MaterialLaw& law,
                                                       std::span<const double> X,
                                                       int n_threads = 1);

/// Consistent load vector f_i = (f, phi_i) for a velocity-space forcing,
/// integrated with the given tensor Gauss rule (used by verification runs).
[[nodiscard]] std::vector<double> assemble_velocity_load(
    const FeSpace& V, const std::function<Vec2(const Vec2&)>& f, int points_per_dir = 3);

} // namespace fsidlm
