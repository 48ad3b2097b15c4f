#include "fsidlm/diagnostics.hpp"

#include "fsidlm/assembly.hpp"
#include "fsidlm/config.hpp"
#include "fsidlm/par_for.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>

namespace fsidlm {

double solid_volume(const QuadMesh& mesh_B, std::span<const double> X,
                    std::vector<int>* negative_elements) {
    double total = 0.0;
    for (int e = 0; e < mesh_B.n_elems(); ++e) {
        const auto& nodes = mesh_B.elem_vertices(e);
        std::array<Vec2, 4> mapped;
        for (int k = 0; k < 4; ++k) {
            const int n = nodes[static_cast<std::size_t>(k)];
            mapped[static_cast<std::size_t>(k)] = {X[static_cast<std::size_t>(2 * n)],
                                                   X[static_cast<std::size_t>(2 * n + 1)]};
        }
        const double a = shoelace_area(mapped);
        if (a <= 0.0) {
            if (negative_elements)
                negative_elements->push_back(e);
            else
                throw NegativeElementArea("mapped element " + std::to_string(e) +
                                          " has non-positive area");
        }
        total += a;
    }
    return total;
}

DiagnosticsSink::DiagnosticsSink(std::string out_dir, int snapshot_stride, bool write_vtk,
                                 bool raw_fields)
    : out_dir_(std::move(out_dir)), snapshot_stride_(snapshot_stride), write_vtk_(write_vtk),
      raw_fields_(raw_fields) {
    std::filesystem::create_directories(out_dir_);
    step_csv_ = std::fopen((out_dir_ + "/steps.csv").c_str(), "w");
    if (!step_csv_) throw IoError("cannot open " + out_dir_ + "/steps.csv");
    std::fprintf(step_csv_, "step,time,nit,its,t_coup_s,t_sol_s,volume,vol_loss_pct,nnz_Lf\n");
    std::fflush(step_csv_);
    coupling_csv_ = std::fopen((out_dir_ + "/coupling_stats.csv").c_str(), "w");
    if (!coupling_csv_) throw IoError("cannot open " + out_dir_ + "/coupling_stats.csv");
    std::fprintf(coupling_csv_, "strategy,nnz,polygons,triangles,wall_s\n");
    std::fflush(coupling_csv_);
}

DiagnosticsSink::~DiagnosticsSink() {
    if (step_csv_) std::fclose(step_csv_);
    if (coupling_csv_) std::fclose(coupling_csv_);
}

void DiagnosticsSink::write_step(const StepReport& r) {
    std::fprintf(step_csv_, "%d,%.12g,%d,%.12g,%.6g,%.6g,%.12g,%.12g,%zu\n", r.step, r.time,
                 r.nit, r.its, r.t_coup, r.t_sol, r.volume, r.vol_loss_pct, r.nnz_Lf);
    std::fflush(step_csv_);
}

void DiagnosticsSink::write_coupling_stats(CouplingStrategy strategy, std::size_t nnz,
                                           const CouplingStats& stats) {
    std::fprintf(coupling_csv_, "%s,%zu,%ld,%ld,%.6g\n",
                 strategy == CouplingStrategy::VertexRule ? "vertex" : "intersection", nnz,
                 stats.polygons, stats.triangles, stats.wall_seconds);
    std::fflush(coupling_csv_);
}

void DiagnosticsSink::write_summary(const std::string& resolved_config,
                                    const std::vector<StepReport>& reports) {
    {
        std::FILE* f = std::fopen((out_dir_ + "/resolved_config.toml").c_str(), "w");
        if (!f) throw IoError("cannot write resolved config");
        std::fputs(resolved_config.c_str(), f);
        std::fclose(f);
    }
    std::FILE* f = std::fopen((out_dir_ + "/summary.csv").c_str(), "w");
    if (!f) throw IoError("cannot write summary.csv");
    std::fprintf(f, "steps,final_time,vol_loss_pct,avg_its,avg_nit,total_t_coup_s,total_t_sol_s,failed\n");
    double its = 0.0, nit = 0.0, tc = 0.0, ts = 0.0;
    int failed = 0;
    for (const auto& r : reports) {
        its += r.its;
        nit += r.nit;
        tc += r.t_coup;
        ts += r.t_sol;
        failed += r.failed ? 1 : 0;
    }
    const double n = reports.empty() ? 1.0 : static_cast<double>(reports.size());
    std::fprintf(f, "%zu,%.12g,%.12g,%.6g,%.6g,%.6g,%.6g,%d\n", reports.size(),
                 reports.empty() ? 0.0 : reports.back().time,
                 reports.empty() ? 0.0 : reports.back().vol_loss_pct, its / n, nit / n, tc, ts,
                 failed);
    std::fclose(f);
}

namespace {

std::FILE* open_vtk(const std::string& path, const char* title) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw IoError("cannot open " + path);
    std::fprintf(f, "# vtk DataFile Version 3.0\n%s\nASCII\n", title);
    return f;
}

} // namespace

void DiagnosticsSink::write_fluid_snapshot(int step, const FeSpace& V, const FeSpace& Q,
                                           std::span<const double> u,
                                           std::span<const double> p) const {
    const QuadMesh& mesh = V.mesh();
    const int nx = mesh.nx(), ny = mesh.ny();
    char name[64];
    std::snprintf(name, sizeof name, "/fluid_%05d.vtk", step);
    std::FILE* f = open_vtk(out_dir_ + name, "fluid fields");
    std::fprintf(f, "DATASET STRUCTURED_GRID\nDIMENSIONS %d %d 1\nPOINTS %d double\n", nx + 1,
                 ny + 1, (nx + 1) * (ny + 1));
    for (const Vec2& v : mesh.vertices()) std::fprintf(f, "%.9g %.9g 0\n", v.x, v.y);
    std::fprintf(f, "POINT_DATA %d\nVECTORS velocity double\n", (nx + 1) * (ny + 1));
    const int gx = 2 * nx + 1;
    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i) {
            const int q2node = (2 * j) * gx + 2 * i;
            std::fprintf(f, "%.9g %.9g 0\n", u[static_cast<std::size_t>(2 * q2node)],
                         u[static_cast<std::size_t>(2 * q2node + 1)]);
        }
    std::fprintf(f, "CELL_DATA %d\nSCALARS pressure double\nLOOKUP_TABLE default\n",
                 mesh.n_elems());
    for (int e = 0; e < mesh.n_elems(); ++e)
        std::fprintf(f, "%.9g\n", p[static_cast<std::size_t>(3 * e)]);
    std::fclose(f);

    if (raw_fields_) {
        std::snprintf(name, sizeof name, "/fluid_q2_%05d.vtk", step);
        std::FILE* g = open_vtk(out_dir_ + name, "fluid velocity on the full lattice");
        const int gy = 2 * ny + 1;
        std::fprintf(g, "DATASET STRUCTURED_GRID\nDIMENSIONS %d %d 1\nPOINTS %d double\n", gx, gy,
                     gx * gy);
        const Rect box = mesh.box();
        for (int j = 0; j < gy; ++j)
            for (int i = 0; i < gx; ++i)
                std::fprintf(g, "%.9g %.9g 0\n", box.x0 + box.width() * i / (gx - 1),
                             box.y0 + box.height() * j / (gy - 1));
        std::fprintf(g, "POINT_DATA %d\nVECTORS velocity double\n", gx * gy);
        for (int node = 0; node < gx * gy; ++node)
            std::fprintf(g, "%.9g %.9g 0\n", u[static_cast<std::size_t>(2 * node)],
                         u[static_cast<std::size_t>(2 * node + 1)]);
        std::fclose(g);
    }
}

void DiagnosticsSink::write_solid_snapshot(int step, const QuadMesh& mesh_B,
                                           std::span<const double> X) const {
    char name[64];
    std::snprintf(name, sizeof name, "/solid_%05d.vtk", step);
    std::FILE* f = open_vtk(out_dir_ + name, "solid configuration");
    const int nv = mesh_B.n_vertices();
    std::fprintf(f, "DATASET UNSTRUCTURED_GRID\nPOINTS %d double\n", nv);
    for (int n = 0; n < nv; ++n)
        std::fprintf(f, "%.9g %.9g 0\n", X[static_cast<std::size_t>(2 * n)],
                     X[static_cast<std::size_t>(2 * n + 1)]);
    std::fprintf(f, "CELLS %d %d\n", mesh_B.n_elems(), 5 * mesh_B.n_elems());
    for (int e = 0; e < mesh_B.n_elems(); ++e) {
        const auto& v = mesh_B.elem_vertices(e);
        std::fprintf(f, "4 %d %d %d %d\n", v[0], v[1], v[2], v[3]);
    }
    std::fprintf(f, "CELL_TYPES %d\n", mesh_B.n_elems());
    for (int e = 0; e < mesh_B.n_elems(); ++e) std::fprintf(f, "9\n");
    std::fclose(f);
}

namespace {

double time_best_of(int repetitions, const std::function<void()>& fn) {
    double best = 1e300;
    for (int r = 0; r < repetitions; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        fn();
        const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        best = std::min(best, dt);
    }
    return best;
}

} // namespace

std::vector<ScalingRow> scaling_harness(const SimConfig& config,
                                        const std::vector<int>& thread_counts, int repetitions) {
    const QuadMesh fluid = QuadMesh::fluid_box(config.fluid_nx, config.fluid_ny, config.fluid_box);
    const QuadMesh solid =
        config.scenario == Scenario::Bar
            ? QuadMesh::solid_rect(config.solid_nx, config.solid_ny, config.solid_rect)
            : QuadMesh::quarter_annulus(config.solid_nx, config.solid_ny, config.annulus_r_in,
                                        config.annulus_r_out);
    const FeSpace V(SpaceKind::VectorQ2, fluid);
    const FeSpace Q(SpaceKind::DiscP1, fluid);
    const FeSpace S(SpaceKind::VectorQ1, solid);

    std::vector<double> X(static_cast<std::size_t>(S.n_dofs()));
    for (int n = 0; n < S.n_scalar_nodes(); ++n) {
        const Vec2 s = solid.vertices()[static_cast<std::size_t>(n)];
        if (config.scenario == Scenario::Bar) {
            X[static_cast<std::size_t>(2 * n)] = s.x;
            X[static_cast<std::size_t>(2 * n + 1)] = s.y;
        } else {
            X[static_cast<std::size_t>(2 * n)] = s.x / 1.4;
            X[static_cast<std::size_t>(2 * n + 1)] = 1.4 * s.y;
        }
    }

    std::vector<ScalingRow> rows;
    CsrMatrix ref_A, ref_Lf;
    for (std::size_t idx = 0; idx < thread_counts.size(); ++idx) {
        const int nt = thread_counts[idx];
        ScalingRow row;
        row.threads = nt;

        FluidBlocks blocks;
        row.t_assembly = time_best_of(repetitions, [&] {
            blocks = assemble_fluid_blocks(V, Q, config.rho, config.nu, config.dt, nt);
        });

        CouplingAssembly coupling;
        CouplingOptions copts;
        copts.strategy = CouplingStrategy::Intersection;
        copts.triangle_rule = config.triangle_rule;
        copts.n_threads = nt;
        row.t_coupling = time_best_of(repetitions, [&] { coupling = assemble_coupling(V, S, X, copts); });

        std::vector<double> x(static_cast<std::size_t>(V.n_dofs()), 1.0);
        std::vector<double> y(static_cast<std::size_t>(V.n_dofs()), 0.0);
        row.t_matvec = time_best_of(repetitions, [&] {
            for (int rep = 0; rep < 50; ++rep) blocks.A.matvec(x, y, nt);
        });

        if (idx == 0) {
            ref_A = blocks.A;
            ref_Lf = coupling.L_f;
        } else {
            row.bitwise_identical = blocks.A == ref_A && coupling.L_f == ref_Lf;
            row.speedup_assembly = rows[0].t_assembly / row.t_assembly;
            row.speedup_coupling = rows[0].t_coupling / row.t_coupling;
            row.speedup_matvec = rows[0].t_matvec / row.t_matvec;
        }
        rows.push_back(row);
    }
    return rows;
}

void write_scaling_csv(const std::vector<ScalingRow>& rows, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw IoError("cannot open " + path);
    std::fprintf(f, "threads,t_assembly_s,t_coupling_s,t_matvec_s,speedup_assembly,"
                    "speedup_coupling,speedup_matvec,bitwise_identical\n");
    for (const auto& r : rows)
        std::fprintf(f, "%d,%.6g,%.6g,%.6g,%.4g,%.4g,%.4g,%d\n", r.threads, r.t_assembly,
                     r.t_coupling, r.t_matvec, r.speedup_assembly, r.speedup_coupling,
                     r.speedup_matvec, r.bitwise_identical ? 1 : 0);
    std::fclose(f);
}

} // namespace fsidlm
