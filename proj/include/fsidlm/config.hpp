#pragma once

#include "fsidlm/assembly.hpp"
#include "fsidlm/coupling.hpp"
#include "fsidlm/saddle_solver.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fsidlm {

enum class Scenario { Annulus, Bar, Custom };

/// Complete description of one simulation run. Scenario presets fill every
/// field; file values and CLI flags override individual entries.
struct SimConfig {
    Scenario scenario = Scenario::Annulus;

    // Fluid grid
    int fluid_nx = 64;
    int fluid_ny = 64;
    Rect fluid_box{0.0, 1.0, 0.0, 1.0};

    // Solid grid (quarter annulus r in [r_in, r_out] or rectangle)
    int solid_nx = 96;
    int solid_ny = 48;
    double annulus_r_in = 0.3;
    double annulus_r_out = 0.5;
    Rect solid_rect{0.0, 0.4, 0.45, 0.55};

    // Physics
    double rho = 1.0;
    double nu = 0.1;
    MaterialLaw law = MaterialLaw::linear(10.0);

    // Time discretization
    double dt = 0.01;
    double T = 2.0;

    // Solver
    CouplingStrategy coupling = CouplingStrategy::VertexRule;
    RuleKind triangle_rule = RuleKind::TriangleDegree6;
    PreconKind precon = PreconKind::BlockTri;
    double gmres_tol = 1e-8;
    int gmres_restart = 200;
    int gmres_max_it = 2000;
    double newton_tol = 1e-8;
    int newton_max_it = 20;

    // Execution / output
    int threads = 0; ///< 0 = auto (FSIDLM_THREADS env, then hardware)
    std::string out_dir = "out";
    int snapshot_stride = 10;
    bool write_vtk = true;
    bool raw_fields = false;
    double bar_force = 2.0;
    int dump_system_step = -1; ///< dump the assembled blocks at this step

    [[nodiscard]] int n_steps() const { return static_cast<int>(T / dt + 0.5); }
};

SimConfig annulus_preset();
SimConfig bar_preset();

/// All validation failures of a config, each as "path: reason". Empty means
/// valid.
[[nodiscard]] std::vector<std::string> validate_config(const SimConfig& config);

/// Parse a config from a TOML file plus "key=value" overrides (dotted paths,
/// e.g. "time.dt=0.005"). The preset named by the file's `scenario` entry
/// (or the `preset` override) supplies every default. Throws IoError with
/// the full list of errors when validation fails.
[[nodiscard]] SimConfig parse_config(const std::string& path,
                                     const std::vector<std::string>& overrides);
[[nodiscard]] SimConfig parse_config_text(const std::string& text,
                                          const std::vector<std::string>& overrides);

/// Serialize the fully resolved config; parse_config_text round-trips it.
[[nodiscard]] std::string emit_config(const SimConfig& config);

[[nodiscard]] std::string to_string(Scenario s);
[[nodiscard]] std::string to_string(CouplingStrategy s);
[[nodiscard]] std::string to_string(PreconKind p);

} // namespace fsidlm
