#include "fsidlm/studies.hpp"

#include "fsidlm/simulation.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>

namespace fsidlm {

long config_dof_count(const SimConfig& c) {
    const long nu = 2L * (2 * c.fluid_nx + 1) * (2 * c.fluid_ny + 1);
    const long np = 3L * c.fluid_nx * c.fluid_ny;
    const long ns = 2L * (c.solid_nx + 1) * (c.solid_ny + 1);
    return nu + np + 2 * ns;
}

namespace {

struct RefRow {
    long dofs;
    double vol_loss_inter, its_diag_inter, its_tri_inter;
    double vol_loss_vertex, its_diag_vertex, its_tri_vertex;
};

// Reference mesh-refinement results for the stretched-annulus problem at
// dt = 0.01, T = 2 (negative = solver failed at that size).
constexpr RefRow annulus_mesh_refs[] = {
    {30534, 1.17, 12, 7, 6.99e-2, 9, 5},
    {120454, 5.06e-1, 31, 9, 6.89e-2, 9, 6},
    {269766, 3.18e-1, 86, 11, 4.87e-2, 10, 6},
    {478470, 2.33e-1, 160, 12, 4.24e-2, 10, 6},
    {746566, 1.85e-1, 394, 13, 4.09e-2, 10, 6},
    {1074054, 1.54e-1, -1, 14, 3.69e-2, 10, 6},
    {1460934, 1.27e-1, -1, 16, 3.52e-2, 10, 6},
};

const RefRow* find_annulus_ref(long dofs) {
    for (const auto& r : annulus_mesh_refs)
        if (r.dofs == dofs) return &r;
    return nullptr;
}

std::string fmt_num(double v, const char* spec = "%.6g") {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

} // namespace

std::optional<double> reference_iterations(const SimConfig& c, long dofs) {
    if (c.scenario != Scenario::Annulus || std::abs(c.dt - 0.01) > 1e-12 ||
        std::abs(c.T - 2.0) > 1e-12)
        return std::nullopt;
    const RefRow* r = find_annulus_ref(dofs);
    if (!r) return std::nullopt;
    const double its = c.coupling == CouplingStrategy::Intersection
                           ? (c.precon == PreconKind::BlockDiag ? r->its_diag_inter : r->its_tri_inter)
                           : (c.precon == PreconKind::BlockDiag ? r->its_diag_vertex : r->its_tri_vertex);
    if (its < 0) return std::nullopt;
    return its;
}

std::optional<double> reference_volume_loss(const SimConfig& c, long dofs) {
    if (c.scenario != Scenario::Annulus || std::abs(c.dt - 0.01) > 1e-12 ||
        std::abs(c.T - 2.0) > 1e-12)
        return std::nullopt;
    const RefRow* r = find_annulus_ref(dofs);
    if (!r) return std::nullopt;
    return c.coupling == CouplingStrategy::Intersection ? r->vol_loss_inter : r->vol_loss_vertex;
}

namespace {

struct RunMetrics {
    bool failed = false;
    double vol_loss = 0.0;
    double its = 0.0;
    double nit = 0.0;
    double t_coup = 0.0;
    double t_sol = 0.0;
};

RunMetrics run_one(const SimConfig& config, const std::string& out_dir) {
    RunMetrics m;
    try {
        std::filesystem::create_directories(out_dir);
        DiagnosticsSink sink(out_dir, config.snapshot_stride, config.write_vtk,
                             config.raw_fields);
        Simulation sim(config);
        const auto reports = sim.run(&sink);
        if (reports.empty()) return m;
        double its = 0.0, nit = 0.0;
        for (const auto& r : reports) {
            its += r.its;
            nit += r.nit;
            m.t_coup += r.t_coup;
            m.t_sol += r.t_sol;
        }
        m.vol_loss = reports.back().vol_loss_pct;
        m.its = its / static_cast<double>(reports.size());
        m.nit = nit / static_cast<double>(reports.size());
        m.t_coup /= static_cast<double>(reports.size());
        m.t_sol /= static_cast<double>(reports.size());
    } catch (const std::exception& ex) {
        std::fprintf(stderr, "run failed: %s\n", ex.what());
        m.failed = true;
    }
    return m;
}

SimConfig scaled_config(const SimConfig& base, int level) {
    SimConfig c = base;
    c.fluid_nx = base.fluid_nx * level;
    c.fluid_ny = base.fluid_ny * level;
    c.solid_nx = base.solid_nx * level;
    c.solid_ny = base.solid_ny * level;
    return c;
}

void metrics_columns(const RunMetrics& m, std::vector<std::string>& row) {
    if (m.failed) {
        for (int i = 0; i < 5; ++i) row.push_back("failed");
        return;
    }
    row.push_back(fmt_num(m.vol_loss));
    row.push_back(fmt_num(m.its, "%.4g"));
    row.push_back(fmt_num(m.nit, "%.4g"));
    row.push_back(fmt_num(m.t_coup));
    row.push_back(fmt_num(m.t_sol));
}

} // namespace

StudyOutcome run_study(StudyKind kind, const SimConfig& base, const std::vector<double>& sweep,
                       const std::string& out_dir) {
    StudyOutcome outcome;
    auto& table = outcome.table;
    std::filesystem::create_directories(out_dir);

    switch (kind) {
    case StudyKind::MeshRefine: {
        table.columns = {"level", "dofs",     "vol_loss_pct", "its",          "nit",
                         "t_coup_s", "t_sol_s", "ref_vol_loss", "ref_its"};
        for (const double v : sweep) {
            const int level = static_cast<int>(v);
            SimConfig c = scaled_config(base, level);
            const long dofs = config_dof_count(c);
            const RunMetrics m =
                run_one(c, out_dir + "/mesh_l" + std::to_string(level));
            outcome.failed_runs += m.failed ? 1 : 0;
            std::vector<std::string> row{std::to_string(level), std::to_string(dofs)};
            metrics_columns(m, row);
            const auto rv = reference_volume_loss(c, dofs);
            const auto ri = reference_iterations(c, dofs);
            row.push_back(rv ? fmt_num(*rv) : "-");
            row.push_back(ri ? fmt_num(*ri, "%.4g") : "-");
            table.rows.push_back(std::move(row));
        }
        break;
    }
    case StudyKind::DtRefine: {
        table.columns = {"dt",       "dofs",    "vol_loss_pct", "its", "nit",
                         "t_coup_s", "t_sol_s", "ref_vol_loss", "ref_its"};
        for (const double dt : sweep) {
            SimConfig c = base;
            c.dt = dt;
            const long dofs = config_dof_count(c);
            const RunMetrics m = run_one(c, out_dir + "/dt_" + fmt_num(dt, "%g"));
            outcome.failed_runs += m.failed ? 1 : 0;
            std::vector<std::string> row{fmt_num(dt, "%g"), std::to_string(dofs)};
            metrics_columns(m, row);
            row.push_back("-");
            row.push_back("-");
            table.rows.push_back(std::move(row));
        }
        break;
    }
    case StudyKind::PreconCompare: {
        table.columns = {"level",    "dofs",     "its_diag", "its_tri",
                         "t_sol_diag_s", "t_sol_tri_s", "ref_its_diag", "ref_its_tri"};
        for (const double v : sweep) {
            const int level = static_cast<int>(v);
            SimConfig cd = scaled_config(base, level);
            cd.precon = PreconKind::BlockDiag;
            SimConfig ct = scaled_config(base, level);
            ct.precon = PreconKind::BlockTri;
            const long dofs = config_dof_count(cd);
            const RunMetrics md =
                run_one(cd, out_dir + "/precon_diag_l" + std::to_string(level));
            const RunMetrics mt =
                run_one(ct, out_dir + "/precon_tri_l" + std::to_string(level));
            outcome.failed_runs += (md.failed ? 1 : 0) + (mt.failed ? 1 : 0);
            std::vector<std::string> row{std::to_string(level), std::to_string(dofs)};
            row.push_back(md.failed ? "failed" : fmt_num(md.its, "%.4g"));
            row.push_back(mt.failed ? "failed" : fmt_num(mt.its, "%.4g"));
            row.push_back(md.failed ? "failed" : fmt_num(md.t_sol));
            row.push_back(mt.failed ? "failed" : fmt_num(mt.t_sol));
            const auto rd = reference_iterations(cd, dofs);
            const auto rt = reference_iterations(ct, dofs);
            row.push_back(rd ? fmt_num(*rd, "%.4g") : "-");
            row.push_back(rt ? fmt_num(*rt, "%.4g") : "-");
            table.rows.push_back(std::move(row));
        }
        break;
    }
    case StudyKind::Scaling: {
        table.columns = {"threads",        "t_assembly_s",     "t_coupling_s", "t_matvec_s",
                         "speedup_coupling", "bitwise_identical"};
        std::vector<int> threads;
        threads.reserve(sweep.size());
        for (const double v : sweep) threads.push_back(static_cast<int>(v));
        const auto rows = scaling_harness(base, threads);
        write_scaling_csv(rows, out_dir + "/scaling.csv");
        for (const auto& r : rows)
            table.rows.push_back({std::to_string(r.threads), fmt_num(r.t_assembly),
                                  fmt_num(r.t_coupling), fmt_num(r.t_matvec),
                                  fmt_num(r.speedup_coupling, "%.3g"),
                                  r.bitwise_identical ? "yes" : "NO"});
        break;
    }
    }
    return outcome;
}

void write_study_csv(const StudyTable& table, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw IoError("cannot open " + path);
    for (std::size_t i = 0; i < table.columns.size(); ++i)
        std::fprintf(f, "%s%s", table.columns[i].c_str(),
                     i + 1 < table.columns.size() ? "," : "\n");
    for (const auto& row : table.rows)
        for (std::size_t i = 0; i < row.size(); ++i)
            std::fprintf(f, "%s%s", row[i].c_str(), i + 1 < row.size() ? "," : "\n");
    std::fclose(f);
}

std::string format_study_text(const StudyTable& table) {
    std::vector<std::size_t> width(table.columns.size(), 0);
    for (std::size_t i = 0; i < table.columns.size(); ++i)
        width[i] = table.columns[i].size();
    for (const auto& row : table.rows)
        for (std::size_t i = 0; i < row.size() && i < width.size(); ++i)
            width[i] = std::max(width[i], row[i].size());

    std::ostringstream out;
    auto emit = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            out << cells[i];
            if (i + 1 < cells.size())
                out << std::string(width[i] + 2 - cells[i].size(), ' ');
        }
        out << "\n";
    };
    emit(table.columns);
    for (const auto& row : table.rows) emit(row);
    return out.str();
}

std::optional<StudyKind> study_kind_from_string(const std::string& name) {
    if (name == "mesh_refine") return StudyKind::MeshRefine;
    if (name == "dt_refine") return StudyKind::DtRefine;
    if (name == "precon_compare") return StudyKind::PreconCompare;
    if (name == "scaling") return StudyKind::Scaling;
    return std::nullopt;
}

} // namespace fsidlm
