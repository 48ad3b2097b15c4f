#pragma once

#include "fsidlm/block_system.hpp"
#include "fsidlm/config.hpp"
#include "fsidlm/diagnostics.hpp"
#include "fsidlm/saddle_solver.hpp"

#include <memory>
#include <optional>

namespace fsidlm {

/// Nodal deformation map of the solid and its previous-step values.
struct SolidState {
    std::vector<double> X;
    std::vector<double> X_prev;
};

/// One coupled fluid-structure simulation: semi-implicit backward Euler with
/// the coupling block frozen at the previous position, monolithic solves by
/// preconditioned GMRES, and a Newton loop for the nonlinear solid law.
class Simulation {
public:
    explicit Simulation(const SimConfig& config);

    /// Advance one step. Uses a single linear solve for the linear law and
    /// the Newton loop for the exponential law.
    StepReport step();

    /// Full run: N = T/dt steps, snapshots and CSV rows through the sink.
    /// A step failure flushes partial outputs and rethrows.
    std::vector<StepReport> run(DiagnosticsSink* sink = nullptr);

    // State access
    [[nodiscard]] const std::vector<double>& u() const { return u_; }
    [[nodiscard]] const std::vector<double>& p() const { return p_; }
    [[nodiscard]] const std::vector<double>& lambda() const { return lambda_; }
    [[nodiscard]] const SolidState& state() const { return state_; }
    [[nodiscard]] std::vector<double>& mutable_X() { return state_.X; }
    [[nodiscard]] double time() const { return time_; }
    [[nodiscard]] int step_index() const { return step_index_; }

    // Component access (tests and studies)
    [[nodiscard]] const SimConfig& config() const { return config_; }
    [[nodiscard]] const FeSpace& velocity_space() const { return *V_; }
    [[nodiscard]] const FeSpace& pressure_space() const { return *Q_; }
    [[nodiscard]] const FeSpace& solid_space() const { return *S_; }
    [[nodiscard]] const QuadMesh& solid_mesh() const { return *solid_mesh_; }
    [[nodiscard]] const BlockSystem& system() const { return system_; }
    [[nodiscard]] BlockSystem& mutable_system() { return system_; }
    [[nodiscard]] const BlockPreconditioner& preconditioner() const { return precon_; }
    [[nodiscard]] const CsrMatrix& mass_matrix() const { return blocks_.M; }
    [[nodiscard]] const CsrMatrix& solid_stiffness() const { return K_s_; }
    [[nodiscard]] double initial_volume() const { return initial_volume_; }

    /// Discrete energy (rho/2)||u||_M^2 + elastic energy of the current X.
    [[nodiscard]] double energy() const;
    [[nodiscard]] double elastic_energy() const;

    /// Outer rhs (g1, 0, f_s, g2) for the step that advances to new_time.
    [[nodiscard]] std::vector<double> build_rhs(double new_time) const;

    /// Kinematic constraint residual of the last accepted step.
    [[nodiscard]] double constraint_residual_inf() const;

    /// Write the assembled blocks and rhs in Matrix Market format.
    void dump_system(const std::string& dir, double new_time) const;

    /// External solid load override (testing hook); active while engaged.
    void set_solid_load(std::vector<double> f_s) { solid_load_override_ = std::move(f_s); }

private:
    StepReport step_linear(double new_time);
    StepReport step_newton(double new_time);
    void install_coupling(StepReport& report);
    void extract_solution(const std::vector<double>& y);
    void apply_rhs_dirichlet(std::vector<double>& rhs) const;

    SimConfig config_;
    int n_threads_ = 1;

    std::unique_ptr<QuadMesh> fluid_mesh_, solid_mesh_;
    std::unique_ptr<FeSpace> V_, Q_, S_;
    FluidBlocks blocks_;
    CsrMatrix K_s_;
    BlockSystem system_;
    BlockPreconditioner precon_;

    SolidState state_;
    std::vector<double> u_, p_, lambda_;
    double time_ = 0.0;
    int step_index_ = 0;
    double initial_volume_ = 0.0;
    double min_volume_ = 0.0;
    int bar_force_dof_ = -1;
    std::optional<std::vector<double>> solid_load_override_;
    CouplingStats last_coupling_stats_;
};

} // namespace fsidlm
