#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include <json.hpp>

#include "resq/diagnostic.hpp"

namespace resq {

inline constexpr const char* kVersion = "0.1.0";

inline constexpr int kExitPassed = 0;
inline constexpr int kExitConfigError = 1;
inline constexpr int kExitRuntimeError = 2;
inline constexpr int kExitFailed = 3;

struct WorkflowOverrides {
    std::optional<std::filesystem::path> report_path;
    std::optional<std::uint64_t> seed;
};

// Workflow document:
// {
//   "backend": {"type": "simulator", "noise": {"p1", "p2", "readout_flip"}?, "seed": u64?,
//               "calibration_file": path?}
//            | {"type": "replay", "recording_file": path, "strict": bool?},
//   "constraint": <constraint tree>,
//   "main_circuit": <circuit document> | path,
//   "constraint_shots": int, "main_shots": int,
//   "report_path": path
// }
// Relative paths inside the document resolve against `base_dir` (the
// directory holding the document). Referenced files are loaded and checked
// too; nothing is executed.
Diagnostics validate_workflow_document(const nlohmann::json& doc, const std::filesystem::path& base_dir,
                                       const WorkflowOverrides& overrides = {});

Diagnostics validate_workflow(const std::filesystem::path& config_path, const WorkflowOverrides& overrides = {});

// Runs the workflow and writes its report. Returns one of the kExit* codes;
// diagnostics go to `err`, a one-line summary to `out`. No report is
// written unless the constraint evaluation and callback both complete.
int run_workflow(const std::filesystem::path& config_path, const WorkflowOverrides& overrides, std::ostream& out,
                 std::ostream& err);

}  // namespace resq
