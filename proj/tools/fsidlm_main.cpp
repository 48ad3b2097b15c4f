#include "fsidlm/simulation.hpp"
#include "fsidlm/studies.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <sstream>

namespace {

std::vector<double> parse_sweep(const std::string& csv) {
    std::vector<double> values;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) values.push_back(std::stod(item));
    return values;
}

void add_override_flags(CLI::App* cmd, std::vector<std::string>& overrides) {
    const auto bind = [&overrides, cmd](const std::string& flag, const std::string& key,
                                        const std::string& desc) {
        cmd->add_option_function<std::string>(
            flag, [&overrides, key](const std::string& v) { overrides.push_back(key + "=" + v); },
            desc);
    };
    bind("--preset", "scenario", "scenario preset: annulus, bar, custom");
    bind("--dt", "time.dt", "time step size");
    bind("--T", "time.T", "final time");
    bind("--fluid-nx", "fluid.nx", "fluid cells in x");
    bind("--fluid-ny", "fluid.ny", "fluid cells in y");
    bind("--solid-nx", "solid.nx", "solid cells in the first direction");
    bind("--solid-ny", "solid.ny", "solid cells in the second direction");
    bind("--coupling", "solver.coupling", "coupling assembly: vertex or intersection");
    bind("--triangle-rule", "solver.triangle_rule", "intersection rule: degree6 or degree3");
    bind("--precon", "solver.precon", "preconditioner: tri or diag");
    bind("--gmres-tol", "solver.gmres_tol", "GMRES relative tolerance");
    bind("--newton-tol", "solver.newton_tol", "Newton residual tolerance");
    bind("--threads", "run.threads", "worker threads (0 = auto)");
    bind("--out-dir", "run.out_dir", "output directory");
    bind("--snapshot-stride", "run.snapshot_stride", "steps between VTK snapshots");
    bind("--bar-force", "run.bar_force", "bar point-load magnitude");
    bind("--raw-fields", "run.raw_fields", "also write the full velocity lattice (true/false)");
    bind("--no-vtk", "run.write_vtk", "disable VTK output with =false");
}

int do_run(const std::string& config_path, const std::vector<std::string>& overrides) {
    const fsidlm::SimConfig config = fsidlm::parse_config(config_path, overrides);
    fsidlm::DiagnosticsSink sink(config.out_dir, config.snapshot_stride, config.write_vtk,
                                 config.raw_fields);
    fsidlm::Simulation sim(config);
    std::printf("scenario=%s dofs=%ld steps=%d coupling=%s precon=%s\n",
                fsidlm::to_string(config.scenario).c_str(), fsidlm::config_dof_count(config),
                config.n_steps(), fsidlm::to_string(config.coupling).c_str(),
                fsidlm::to_string(config.precon).c_str());
    try {
        const auto reports = sim.run(&sink);
        if (!reports.empty()) {
            const auto& last = reports.back();
            double its = 0.0;
            for (const auto& r : reports) its += r.its;
            std::printf("done: t=%.4g volume_loss=%.4g%% avg_its=%.4g\n", last.time,
                        last.vol_loss_pct, its / static_cast<double>(reports.size()));
        } else {
            std::printf("done: no steps (T=0), initial fields written\n");
        }
    } catch (const std::exception& ex) {
        std::fprintf(stderr, "run failed: %s\n", ex.what());
        return 1;
    }
    return 0;
}

int do_study(const std::string& kind_name, const std::string& config_path,
             const std::string& sweep_csv, const std::vector<std::string>& overrides) {
    const auto kind = fsidlm::study_kind_from_string(kind_name);
    if (!kind) {
        std::fprintf(stderr, "unknown study kind \"%s\"\n", kind_name.c_str());
        return 2;
    }
    const fsidlm::SimConfig config = fsidlm::parse_config(config_path, overrides);
    const auto sweep = parse_sweep(sweep_csv);
    const auto outcome = fsidlm::run_study(*kind, config, sweep, config.out_dir);
    fsidlm::write_study_csv(outcome.table, config.out_dir + "/study_" + kind_name + ".csv");
    std::fputs(fsidlm::format_study_text(outcome.table).c_str(), stdout);
    return outcome.failed_runs;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"2D fluid-structure interaction solver with a distributed Lagrange multiplier"};
    app.require_subcommand(1);

    std::string config_path, study_kind, sweep_csv;
    std::vector<std::string> overrides;
    int dump_step = 0;

    auto* run_cmd = app.add_subcommand("run", "run one simulation");
    run_cmd->add_option("--config", config_path, "TOML config file");
    run_cmd->add_option("--set", overrides, "override key=value (repeatable)");
    add_override_flags(run_cmd, overrides);

    auto* study_cmd = app.add_subcommand("study", "run a parameter sweep");
    study_cmd->add_option("--kind", study_kind,
                          "mesh_refine, dt_refine, precon_compare or scaling")
        ->required();
    study_cmd->add_option("--config", config_path, "TOML config file");
    study_cmd->add_option("--sweep", sweep_csv, "comma-separated sweep values")->required();
    study_cmd->add_option("--set", overrides, "override key=value (repeatable)");
    add_override_flags(study_cmd, overrides);

    auto* dump_cmd = app.add_subcommand("dump-system", "dump the assembled blocks at a step");
    dump_cmd->add_option("--step", dump_step, "0-based step index to dump")->required();
    dump_cmd->add_option("--config", config_path, "TOML config file");
    dump_cmd->add_option("--set", overrides, "override key=value (repeatable)");
    add_override_flags(dump_cmd, overrides);

    CLI11_PARSE(app, argc, argv);

    try {
        if (run_cmd->parsed()) return do_run(config_path, overrides);
        if (study_cmd->parsed()) return do_study(study_kind, config_path, sweep_csv, overrides);
        if (dump_cmd->parsed()) {
            overrides.push_back("run.dump_system_step=" + std::to_string(dump_step));
            return do_run(config_path, overrides);
        }
    } catch (const std::exception& ex) {
        std::fprintf(stderr, "error: %s\n", ex.what());
        return 1;
    }
    return 0;
}
