#include "fsidlm/simulation.hpp"

#include "fsidlm/matrix_market.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>

namespace fsidlm {

namespace {

double inf_norm(std::span<const double> v) {
    double m = 0.0;
    for (const double x : v) m = std::max(m, std::abs(x));
    return m;
}

} // namespace

Simulation::Simulation(const SimConfig& config)
    : config_(config), n_threads_(resolve_thread_count(config.threads)),
      system_({}, config.dt) {
    fluid_mesh_ = std::make_unique<QuadMesh>(
        QuadMesh::fluid_box(config_.fluid_nx, config_.fluid_ny, config_.fluid_box));
    solid_mesh_ = std::make_unique<QuadMesh>(
        config_.scenario == Scenario::Bar
            ? QuadMesh::solid_rect(config_.solid_nx, config_.solid_ny, config_.solid_rect)
            : QuadMesh::quarter_annulus(config_.solid_nx, config_.solid_ny, config_.annulus_r_in,
                                        config_.annulus_r_out));
    V_ = std::make_unique<FeSpace>(SpaceKind::VectorQ2, *fluid_mesh_);
    Q_ = std::make_unique<FeSpace>(SpaceKind::DiscP1, *fluid_mesh_);
    S_ = std::make_unique<FeSpace>(SpaceKind::VectorQ1, *solid_mesh_);

    BlockSizes sizes;
    sizes.n_u = V_->n_dofs();
    sizes.n_p = Q_->n_dofs();
    sizes.n_X = S_->n_dofs();
    sizes.n_lambda = S_->n_dofs();
    system_ = BlockSystem(sizes, config_.dt);

    // Velocity boundary conditions: the annulus closes the box with full
    // Dirichlet on top/right and normal-only conditions on the symmetry
    // edges; the bar clamps the entire boundary.
    std::vector<int> constrained;
    auto add = [&](const std::string& name) {
        const auto& set = V_->boundary_dofs(name);
        constrained.insert(constrained.end(), set.begin(), set.end());
    };
    if (config_.scenario == Scenario::Annulus) {
        add("top");
        add("right");
        add("left_normal");
        add("bottom_normal");
    } else {
        add("all");
    }
    system_.set_velocity_dirichlet(std::move(constrained));

    blocks_ = assemble_fluid_blocks(*V_, *Q_, config_.rho, config_.nu, config_.dt, n_threads_);
    system_.set_fluid_blocks(blocks_.A, blocks_.B);
    system_.set_multiplier_mass(assemble_multiplier_mass(*S_, n_threads_));

    const double cell_area = fluid_mesh_->elem_area(0);
    system_.set_pressure_cell_areas(
        std::vector<double>(static_cast<std::size_t>(fluid_mesh_->n_elems()), cell_area));

    // Initial data.
    state_.X.assign(static_cast<std::size_t>(S_->n_dofs()), 0.0);
    for (int n = 0; n < S_->n_scalar_nodes(); ++n) {
        const Vec2 s = solid_mesh_->vertices()[static_cast<std::size_t>(n)];
        if (config_.scenario == Scenario::Annulus) {
            state_.X[static_cast<std::size_t>(2 * n)] = s.x / 1.4;
            state_.X[static_cast<std::size_t>(2 * n + 1)] = 1.4 * s.y;
        } else {
            state_.X[static_cast<std::size_t>(2 * n)] = s.x;
            state_.X[static_cast<std::size_t>(2 * n + 1)] = s.y;
        }
    }
    state_.X_prev = state_.X;
    u_.assign(static_cast<std::size_t>(V_->n_dofs()), 0.0);
    p_.assign(static_cast<std::size_t>(Q_->n_dofs()), 0.0);
    lambda_.assign(static_cast<std::size_t>(S_->n_dofs()), 0.0);

    K_s_ = assemble_solid_linear(
        *S_, config_.law.kind == MaterialLaw::Kind::Linear ? config_.law.kappa : 1.0, n_threads_);
    if (config_.law.kind == MaterialLaw::Kind::Linear) {
        system_.set_solid_block(K_s_);
    } else {
        system_.set_solid_block(
            solid_residual_and_tangent(*S_, config_.law, state_.X, n_threads_).tangent);
    }

    initial_volume_ = solid_volume(*solid_mesh_, state_.X);
    min_volume_ = initial_volume_;

    if (config_.scenario == Scenario::Bar) {
        // Point load at the solid node nearest the midpoint of the right edge.
        const Vec2 target{config_.solid_rect.x1,
                          0.5 * (config_.solid_rect.y0 + config_.solid_rect.y1)};
        double best = 1e300;
        int best_node = 0;
        for (int n = 0; n < solid_mesh_->n_vertices(); ++n) {
            const double d = (solid_mesh_->vertices()[static_cast<std::size_t>(n)] - target).norm();
            if (d < best) {
                best = d;
                best_node = n;
            }
        }
        bar_force_dof_ = 2 * best_node + 1;
    }

    precon_.build(system_, config_.precon, /*pin_pressure=*/true);
}

std::vector<double> Simulation::build_rhs(double new_time) const {
    const auto& sz = system_.sizes();
    std::vector<double> rhs(static_cast<std::size_t>(sz.total()), 0.0);
    // g1 = (rho/dt) M u^n
    {
        std::vector<double> g1(static_cast<std::size_t>(sz.n_u), 0.0);
        blocks_.M.matvec(u_, g1, n_threads_);
        const double s = config_.rho / config_.dt;
        for (int i = 0; i < sz.n_u; ++i) rhs[static_cast<std::size_t>(i)] = s * g1[static_cast<std::size_t>(i)];
    }
    // Solid load.
    if (solid_load_override_) {
        for (int i = 0; i < sz.n_X; ++i)
            rhs[static_cast<std::size_t>(sz.offset_X() + i)] =
                (*solid_load_override_)[static_cast<std::size_t>(i)];
    } else if (bar_force_dof_ >= 0 && new_time <= 1.0 + 1e-12) {
        rhs[static_cast<std::size_t>(sz.offset_X() + bar_force_dof_)] = -config_.bar_force;
    }
    // g2 = -(1/dt) L_s X^n
    {
        std::vector<double> g2(static_cast<std::size_t>(sz.n_lambda), 0.0);
        system_.L_s().matvec(state_.X, g2, n_threads_);
        const double s = -1.0 / config_.dt;
        for (int i = 0; i < sz.n_lambda; ++i)
            rhs[static_cast<std::size_t>(sz.offset_lambda() + i)] = s * g2[static_cast<std::size_t>(i)];
    }
    apply_rhs_dirichlet(rhs);
    return rhs;
}

void Simulation::apply_rhs_dirichlet(std::vector<double>& rhs) const {
    for (const int dof : system_.dirichlet_dofs()) rhs[static_cast<std::size_t>(dof)] = 0.0;
}

void Simulation::install_coupling(StepReport& report) {
    CouplingOptions opts;
    opts.strategy = config_.coupling;
    opts.triangle_rule = config_.triangle_rule;
    opts.n_threads = n_threads_;
    CouplingAssembly coupling = assemble_coupling(*V_, *S_, state_.X, opts);
    report.t_coup = coupling.stats.wall_seconds;
    report.nnz_Lf = coupling.L_f.nnz();
    last_coupling_stats_ = coupling.stats;
    system_.set_coupling(std::move(coupling.L_f));
}

void Simulation::extract_solution(const std::vector<double>& y) {
    const auto& sz = system_.sizes();
    state_.X_prev = state_.X;
    std::copy(y.begin(), y.begin() + sz.n_u, u_.begin());
    std::copy(y.begin() + sz.offset_p(), y.begin() + sz.offset_p() + sz.n_p, p_.begin());
    std::copy(y.begin() + sz.offset_X(), y.begin() + sz.offset_X() + sz.n_X, state_.X.begin());
    std::copy(y.begin() + sz.offset_lambda(), y.begin() + sz.offset_lambda() + sz.n_lambda,
              lambda_.begin());
}

StepReport Simulation::step() {
    const double new_time = time_ + config_.dt;
    StepReport report = config_.law.kind == MaterialLaw::Kind::Linear ? step_linear(new_time)
                                                                      : step_newton(new_time);
    time_ = new_time;
    ++step_index_;
    report.step = step_index_;
    report.time = time_;

    std::vector<int> negatives;
    report.volume = solid_volume(*solid_mesh_, state_.X, &negatives);
    if (!negatives.empty())
        std::fprintf(stderr, "warning: %zu mapped solid elements inverted at step %d\n",
                     negatives.size(), step_index_);
    min_volume_ = std::min(min_volume_, report.volume);
    report.vol_loss_pct = 100.0 * (initial_volume_ - min_volume_) / initial_volume_;
    return report;
}

StepReport Simulation::step_linear(double new_time) {
    StepReport report;
    install_coupling(report);
    const std::vector<double> rhs = build_rhs(new_time);

    GmresOptions gopts;
    gopts.tol_rel = config_.gmres_tol;
    gopts.restart = config_.gmres_restart;
    gopts.max_it = config_.gmres_max_it;
    gopts.n_threads = n_threads_;

    const auto t0 = std::chrono::steady_clock::now();
    const GmresResult sol = solve_block_system(system_, precon_, rhs, gopts, true);
    report.t_sol = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report.nit = 1;
    report.its = static_cast<double>(sol.iterations);
    extract_solution(sol.x);
    return report;
}

StepReport Simulation::step_newton(double new_time) {
    StepReport report;
    install_coupling(report);
    const std::vector<double> rhs = build_rhs(new_time);
    const auto& sz = system_.sizes();

    GmresOptions gopts;
    gopts.tol_rel = config_.gmres_tol;
    gopts.restart = config_.gmres_restart;
    gopts.max_it = config_.gmres_max_it;
    gopts.n_threads = n_threads_;

    // Initial guess: previous step solution.
    std::vector<double> y(static_cast<std::size_t>(sz.total()), 0.0);
    std::copy(u_.begin(), u_.end(), y.begin());
    std::copy(p_.begin(), p_.end(), y.begin() + sz.offset_p());
    std::copy(state_.X.begin(), state_.X.end(), y.begin() + sz.offset_X());
    std::copy(lambda_.begin(), lambda_.end(), y.begin() + sz.offset_lambda());

    std::vector<double> residual(y.size());
    std::vector<double> kx(static_cast<std::size_t>(sz.n_X));
    const auto t0 = std::chrono::steady_clock::now();
    int solves = 0;
    long total_its = 0;
    bool converged = false;

    for (int it = 0; it < config_.newton_max_it; ++it) {
        const auto X_now = std::span<const double>(y).subspan(
            static_cast<std::size_t>(sz.offset_X()), static_cast<std::size_t>(sz.n_X));
        SolidResidual solid = solid_residual_and_tangent(*S_, config_.law, X_now, n_threads_);
        system_.set_solid_block(std::move(solid.tangent));

        // Residual of the monolithic nonlinear system: the block apply gives
        // K_T X in the solid row; swap it for the true nonlinear residual.
        system_.apply(y, residual, n_threads_);
        system_.K().matvec(X_now, kx, n_threads_);
        for (int i = 0; i < sz.n_X; ++i)
            residual[static_cast<std::size_t>(sz.offset_X() + i)] +=
                solid.residual[static_cast<std::size_t>(i)] - kx[static_cast<std::size_t>(i)];
        for (std::size_t i = 0; i < residual.size(); ++i) residual[i] -= rhs[i];
        apply_rhs_dirichlet(residual);

        if (inf_norm(residual) <= config_.newton_tol) {
            converged = true;
            break;
        }

        precon_.refactor_solid(system_);
        for (auto& v : residual) v = -v;
        const GmresResult delta = solve_block_system(system_, precon_, residual, gopts, true);
        ++solves;
        total_its += delta.iterations;
        for (std::size_t i = 0; i < y.size(); ++i) y[i] += delta.x[i];
    }

    if (!converged)
        throw NewtonDiverged("Newton did not reach tolerance " +
                             std::to_string(config_.newton_tol) + " in " +
                             std::to_string(config_.newton_max_it) + " iterations");

    report.t_sol = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report.nit = std::max(1, solves);
    report.its = solves > 0 ? static_cast<double>(total_its) / solves : 0.0;
    extract_solution(y);
    (void)new_time;
    return report;
}

std::vector<StepReport> Simulation::run(DiagnosticsSink* sink) {
    const int n_steps = config_.n_steps();
    std::vector<StepReport> reports;
    reports.reserve(static_cast<std::size_t>(n_steps));

    if (sink && sink->snapshot_due(0, n_steps)) {
        sink->write_fluid_snapshot(0, *V_, *Q_, u_, p_);
        sink->write_solid_snapshot(0, *solid_mesh_, state_.X);
    }

    for (int n = 0; n < n_steps; ++n) {
        try {
            if (config_.dump_system_step == n) {
                StepReport scratch;
                install_coupling(scratch);
                dump_system(config_.out_dir, time_ + config_.dt);
            }
            StepReport report = step();
            reports.push_back(report);
            if (sink) {
                sink->write_step(report);
                sink->write_coupling_stats(config_.coupling, report.nnz_Lf, last_coupling_stats_);
                if (sink->snapshot_due(report.step, n_steps)) {
                    sink->write_fluid_snapshot(report.step, *V_, *Q_, u_, p_);
                    sink->write_solid_snapshot(report.step, *solid_mesh_, state_.X);
                }
            }
        } catch (const std::exception&) {
            StepReport failed;
            failed.step = step_index_ + 1;
            failed.time = time_ + config_.dt;
            failed.failed = true;
            reports.push_back(failed);
            if (sink) {
                sink->write_step(failed);
                sink->write_summary(emit_config(config_), reports);
            }
            throw;
        }
    }
    if (sink) sink->write_summary(emit_config(config_), reports);
    return reports;
}

double Simulation::elastic_energy() const {
    if (config_.law.kind == MaterialLaw::Kind::Linear) {
        std::vector<double> kx(state_.X.size(), 0.0);
        K_s_.matvec(state_.X, kx, n_threads_);
        double e = 0.0;
        for (std::size_t i = 0; i < kx.size(); ++i) e += state_.X[i] * kx[i];
        return 0.5 * config_.law.kappa * e;
    }
    // Exponential energy density integrated with the volume rule.
    const QuadratureRule& rule = volume_quadrature(RuleKind::GaussQuad3x3);
    double total = 0.0;
    BasisEval q1;
    for (int e = 0; e < solid_mesh_->n_elems(); ++e) {
        const auto corners = solid_mesh_->elem_corners(e);
        const int* nodes = S_->elem_nodes(e);
        for (std::size_t q = 0; q < rule.size(); ++q) {
            S_->eval_basis(e, rule.points[q], q1);
            const Vec2 r = rule.points[q];
            const Vec2 dxi = (corners[1] - corners[0]) * (1.0 - r.y) + (corners[2] - corners[3]) * r.y;
            const Vec2 deta = (corners[3] - corners[0]) * (1.0 - r.x) + (corners[2] - corners[1]) * r.x;
            const double det = cross(dxi, deta);
            const double inv = 1.0 / det;
            double F[2][2] = {{0, 0}, {0, 0}};
            for (int a = 0; a < 4; ++a) {
                const Vec2 g = q1.ref_grads[static_cast<std::size_t>(a)];
                const Vec2 gp{(deta.y * g.x - dxi.y * g.y) * inv, (-deta.x * g.x + dxi.x * g.y) * inv};
                for (int c = 0; c < 2; ++c) {
                    const double xa = state_.X[static_cast<std::size_t>(2 * nodes[a] + c)];
                    F[c][0] += xa * gp.x;
                    F[c][1] += xa * gp.y;
                }
            }
            const double tr = F[0][0] * F[0][0] + F[0][1] * F[0][1] + F[1][0] * F[1][0] + F[1][1] * F[1][1];
            const double z = config_.law.exp_arg == MaterialLaw::ExpArg::ShiftedTrace
                                 ? config_.law.eta * (tr - 2.0)
                                 : config_.law.eta * tr - 2.0;
            total += rule.weights[q] * det * config_.law.gamma / (2.0 * config_.law.eta) * std::exp(z);
        }
    }
    return total;
}

double Simulation::energy() const {
    std::vector<double> mu(u_.size(), 0.0);
    blocks_.M.matvec(u_, mu, n_threads_);
    double kinetic = 0.0;
    for (std::size_t i = 0; i < u_.size(); ++i) kinetic += u_[i] * mu[i];
    kinetic *= 0.5 * config_.rho;
    if (config_.law.kind == MaterialLaw::Kind::Linear) {
        std::vector<double> kx(state_.X.size(), 0.0);
        system_.K().matvec(state_.X, kx, n_threads_);
        double e = 0.0;
        for (std::size_t i = 0; i < kx.size(); ++i) e += state_.X[i] * kx[i];
        return kinetic + 0.5 * e;
    }
    return kinetic + elastic_energy();
}

double Simulation::constraint_residual_inf() const {
    const auto& sz = system_.sizes();
    std::vector<double> r(static_cast<std::size_t>(sz.n_lambda), 0.0);
    system_.L_f().matvec(u_, r, n_threads_);
    std::vector<double> dx(state_.X.size());
    for (std::size_t i = 0; i < dx.size(); ++i) dx[i] = state_.X[i] - state_.X_prev[i];
    std::vector<double> lsdx(dx.size(), 0.0);
    system_.L_s().matvec(dx, lsdx, n_threads_);
    double m = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i)
        m = std::max(m, std::abs(r[i] - lsdx[i] / config_.dt));
    return m;
}

void Simulation::dump_system(const std::string& dir, double new_time) const {
    std::filesystem::create_directories(dir);
    write_matrix_market(system_.A_f(), dir + "/A_f.mtx");
    write_matrix_market(system_.B(), dir + "/B.mtx");
    write_matrix_market(system_.K(), dir + "/K.mtx");
    write_matrix_market(system_.L_f(), dir + "/L_f.mtx");
    write_matrix_market(system_.L_s(), dir + "/L_s.mtx");
    write_matrix_market_vector(build_rhs(new_time), dir + "/rhs.mtx");
}

} // namespace fsidlm
