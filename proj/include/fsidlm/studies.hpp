#pragma once

#include "fsidlm/config.hpp"
#include "fsidlm/diagnostics.hpp"

#include <optional>
#include <string>
#include <vector>

namespace fsidlm {

enum class StudyKind { MeshRefine, DtRefine, PreconCompare, Scaling };

struct StudyTable {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
};

struct StudyOutcome {
    StudyTable table;
    int failed_runs = 0;
};

/// Sweep driver. Sweep values are level multipliers (mesh_refine,
/// precon_compare), time steps (dt_refine) or thread counts (scaling).
/// Failed runs become "failed" rows and do not abort the sweep.
[[nodiscard]] StudyOutcome run_study(StudyKind kind, const SimConfig& base,
                                     const std::vector<double>& sweep,
                                     const std::string& out_dir);

void write_study_csv(const StudyTable& table, const std::string& path);
[[nodiscard]] std::string format_study_text(const StudyTable& table);

[[nodiscard]] std::optional<StudyKind> study_kind_from_string(const std::string& name);

/// Total dof count (u, p, X, lambda) of a configuration.
[[nodiscard]] long config_dof_count(const SimConfig& config);

/// Published reference values for the corresponding problem sizes, where one
/// exists for this configuration; used to print measured values next to the
/// literature numbers.
[[nodiscard]] std::optional<double> reference_iterations(const SimConfig& config, long dofs);
[[nodiscard]] std::optional<double> reference_volume_loss(const SimConfig& config, long dofs);

} // namespace fsidlm
