#pragma once

#include "fsidlm/coupling.hpp"
#include "fsidlm/fe_space.hpp"
#include "fsidlm/mesh.hpp"

#include <cstdio>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace fsidlm {

/// Area of the mapped solid mesh X(T_h^B) with straight edges. Elements with
/// non-positive mapped area are reported through `negative_elements` (or
/// raise NegativeElementArea when the caller does not capture them).
[[nodiscard]] double solid_volume(const QuadMesh& mesh_B, std::span<const double> X,
                                  std::vector<int>* negative_elements = nullptr);

struct StepReport {
    int step = 0;
    double time = 0.0;
    int nit = 0;        ///< Newton iterations (1 for the linear scheme)
    double its = 0.0;   ///< GMRES iterations, averaged over Newton iterations
    double t_coup = 0.0;
    double t_sol = 0.0;
    double volume = 0.0;
    double vol_loss_pct = 0.0; ///< running 100*(V0 - min V)/V0
    std::size_t nnz_Lf = 0;
    bool failed = false;
};

/// Per-run output files. CSVs are flushed at every step so partial runs stay
/// usable; re-running the same config reproduces them byte-identically up to
/// the timing columns.
class DiagnosticsSink {
public:
    DiagnosticsSink(std::string out_dir, int snapshot_stride, bool write_vtk, bool raw_fields);
    ~DiagnosticsSink();

    void write_step(const StepReport& report);
    void write_coupling_stats(CouplingStrategy strategy, std::size_t nnz,
                              const CouplingStats& stats);
    void write_summary(const std::string& resolved_config, const std::vector<StepReport>& reports);

    [[nodiscard]] bool snapshot_due(int step, int n_steps) const {
        return write_vtk_ && (step % snapshot_stride_ == 0 || step == n_steps);
    }
    [[nodiscard]] const std::string& out_dir() const { return out_dir_; }
    [[nodiscard]] bool raw_fields() const { return raw_fields_; }

    /// Fluid snapshot: STRUCTURED_GRID with Q1-corner point velocities and
    /// element-mean cell pressure. With raw fields enabled a second file
    /// carries the full Q2 lattice.
    void write_fluid_snapshot(int step, const FeSpace& V, const FeSpace& Q,
                              std::span<const double> u, std::span<const double> p) const;
    /// Solid snapshot: UNSTRUCTURED_GRID with mapped node coordinates.
    void write_solid_snapshot(int step, const QuadMesh& mesh_B,
                              std::span<const double> X) const;

private:
    std::string out_dir_;
    int snapshot_stride_;
    bool write_vtk_;
    bool raw_fields_;
    std::FILE* step_csv_ = nullptr;
    std::FILE* coupling_csv_ = nullptr;
};

struct ScalingRow {
    int threads = 0;
    double t_assembly = 0.0;
    double t_coupling = 0.0;
    double t_matvec = 0.0;
    double speedup_assembly = 1.0;
    double speedup_coupling = 1.0;
    double speedup_matvec = 1.0;
    bool bitwise_identical = true;
};

struct SimConfig;

/// Re-runs the assembly, coupling-assembly and operator-matvec phases of a
/// fixed-size problem at each thread count, reporting wall times and
/// speedups versus the first entry, and checking the assembled matrices are
/// bitwise identical across thread counts.
[[nodiscard]] std::vector<ScalingRow> scaling_harness(const SimConfig& config,
                                                      const std::vector<int>& thread_counts,
                                                      int repetitions = 3);

void write_scaling_csv(const std::vector<ScalingRow>& rows, const std::string& path);

} // namespace fsidlm
