#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "verifact/config.hpp"
#include "verifact/core.hpp"

namespace verifact::cli {

// Exit codes shared by all commands.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;    // config or IO error
inline constexpr int kExitProvider = 2;  // provider unreachable on first call
inline constexpr int kExitValidation = 3;

/// Executes the configured method over the dataset, appending one RunRecord
/// line per task to config.out_path in task-id order. A run file left over
/// from an interrupted invocation is resumed: complete records are kept,
/// a partial trailing line is truncated, and only missing tasks run.
/// Stage failures recorded inside records do not fail the process.
int cmd_run(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Scores a run file against its dataset and writes the EvalReport (JSON) to
/// report_path, printing the rendered table.
int cmd_eval(const std::string& run_path, const std::string& dataset_path, double threshold,
             const std::string& report_path, eval::ReportFormat format, std::ostream& out,
             std::ostream& err);

/// Runs the four ablation variants (full, w/o claim extraction, w/o
/// verification simulation, w/o refinement & integration) over the dataset,
/// evaluates each, and renders the comparison table. Run files are written
/// next to config.out_path with a per-variant suffix. baseline_run_path, if
/// nonempty, is evaluated and added as the baseline row.
int cmd_ablate(const RunConfig& config, const std::string& baseline_run_path, std::ostream& out,
               std::ostream& err);

/// Merges report files into one table grouped by task type and method.
/// Duplicate (method, task type) groups across inputs are a conflict.
int cmd_report(const std::vector<std::string>& report_paths, eval::ReportFormat format,
               std::ostream& out, std::ostream& err);

}  // namespace verifact::cli
