#include "resq/workflow.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <memory>
#include <ostream>
#include <sstream>

#include "resq/backend.hpp"
#include "resq/circuit.hpp"
#include "resq/constraints.hpp"
#include "resq/executor.hpp"

namespace resq {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::optional<std::string> read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        return std::nullopt;
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

fs::path resolve(const fs::path& base_dir, const std::string& p) {
    const fs::path path(p);
    return path.is_absolute() ? path : base_dir / path;
}

bool positive_integer(const json& v) {
    if (!v.is_number_integer()) {
        return false;
    }
    return v.is_number_unsigned() ? v.get<std::uint64_t>() > 0 : v.get<long long>() > 0;
}

struct Loaded {
    json effective;  // resolved configuration, embedded in the report
    std::unique_ptr<BackendAdapter> adapter;
    ConstraintPtr constraint;
    std::optional<Circuit> main_circuit;
    std::uint64_t constraint_shots = 0;
    std::uint64_t main_shots = 0;
    fs::path report_path;
};

// Validates and, when `build` is set and no diagnostics were produced,
// materializes the adapter, constraint and circuit.
Diagnostics load(const json& doc, const fs::path& base_dir, const WorkflowOverrides& overrides, Loaded* build) {
    Diagnostics diags;
    if (!doc.is_object()) {
        diags.push_back({"$", "workflow document must be an object"});
        return diags;
    }
    json effective = json::object();

    // backend
    std::unique_ptr<BackendAdapter> adapter;
    const auto backend_it = doc.find("backend");
    if (backend_it == doc.end() || !backend_it->is_object()) {
        diags.push_back({"backend", "missing backend object"});
    } else {
        const auto& backend = *backend_it;
        const auto type_it = backend.find("type");
        const std::string type = type_it != backend.end() && type_it->is_string() ? type_it->get<std::string>() : "";
        json eff_backend{{"type", type}};
        if (type == "simulator") {
            NoiseModel noise = NoiseModel::defaults();
            bool noise_ok = true;
            if (const auto it = backend.find("noise"); it != backend.end()) {
                if (!it->is_object()) {
                    diags.push_back({"backend.noise", "noise must be an object"});
                    noise_ok = false;
                } else {
                    for (const auto& [key, v] : it->items()) {
                        double* slot = key == "p1"             ? &noise.p1
                                       : key == "p2"           ? &noise.p2
                                       : key == "readout_flip" ? &noise.readout_flip
                                                               : nullptr;
                        if (!slot) {
                            diags.push_back({"backend.noise." + key, "unknown noise parameter"});
                            noise_ok = false;
                        } else if (!v.is_number() || !(v.get<double>() >= 0.0 && v.get<double>() <= 1.0)) {
                            diags.push_back({"backend.noise." + key, "must be a probability in [0, 1]"});
                            noise_ok = false;
                        } else {
                            *slot = v.get<double>();
                        }
                    }
                }
            }
            if (const auto it = backend.find("seed"); it != backend.end()) {
                if (!it->is_number_unsigned()) {
                    diags.push_back({"backend.seed", "seed must be a non-negative integer"});
                    noise_ok = false;
                } else {
                    noise.seed = it->get<std::uint64_t>();
                }
            }
            if (overrides.seed) {
                noise.seed = *overrides.seed;
            }

            std::optional<CalibrationSnapshot> calibration;
            if (const auto it = backend.find("calibration_file"); it != backend.end()) {
                if (!it->is_string()) {
                    diags.push_back({"backend.calibration_file", "must be a path string"});
                } else {
                    const auto path = resolve(base_dir, it->get<std::string>());
                    eff_backend["calibration_file"] = path.string();
                    if (const auto text = read_file(path); !text) {
                        diags.push_back({"backend.calibration_file", "cannot read '" + path.string() + "'"});
                    } else {
                        try {
                            calibration = parse_calibration(*text);
                        } catch (const BackendError& e) {
                            diags.push_back({"backend.calibration_file", e.what()});
                        }
                    }
                }
            }
            if (!calibration) {
                calibration = synthetic_calibration(8, noise);
            }
            eff_backend["noise"] = {{"p1", noise.p1}, {"p2", noise.p2}, {"readout_flip", noise.readout_flip}};
            eff_backend["seed"] = noise.seed;
            if (build && noise_ok && diags.empty()) {
                adapter = std::make_unique<SimulatorAdapter>(noise, *calibration);
            }
        } else if (type == "replay") {
            const auto it = backend.find("recording_file");
            bool strict = false;
            if (const auto s = backend.find("strict"); s != backend.end()) {
                if (!s->is_boolean()) {
                    diags.push_back({"backend.strict", "must be a boolean"});
                } else {
                    strict = s->get<bool>();
                }
            }
            eff_backend["strict"] = strict;
            if (it == backend.end() || !it->is_string()) {
                diags.push_back({"backend.recording_file", "replay backend requires recording_file"});
            } else {
                const auto path = resolve(base_dir, it->get<std::string>());
                eff_backend["recording_file"] = path.string();
                if (const auto text = read_file(path); !text) {
                    diags.push_back({"backend.recording_file", "cannot read '" + path.string() + "'"});
                } else {
                    try {
                        auto recording = parse_recording(*text);
                        if (build) {
                            adapter = std::make_unique<ReplayAdapter>(std::move(recording), strict);
                        }
                    } catch (const std::exception& e) {
                        diags.push_back({"backend.recording_file", e.what()});
                    }
                }
            }
        } else {
            diags.push_back({"backend.type", "backend type must be \"simulator\" or \"replay\""});
        }
        effective["backend"] = std::move(eff_backend);
    }

    // constraint
    const auto constraint_it = doc.find("constraint");
    if (constraint_it == doc.end()) {
        diags.push_back({"constraint", "missing constraint tree"});
    } else {
        auto cdiags = validate_constraint_document(*constraint_it, "constraint");
        diags.insert(diags.end(), cdiags.begin(), cdiags.end());
        effective["constraint"] = *constraint_it;
    }

    // main circuit
    std::optional<Circuit> circuit;
    const auto circuit_it = doc.find("main_circuit");
    if (circuit_it == doc.end()) {
        diags.push_back({"main_circuit", "missing main_circuit"});
    } else if (circuit_it->is_string()) {
        const auto path = resolve(base_dir, circuit_it->get<std::string>());
        if (const auto text = read_file(path); !text) {
            diags.push_back({"main_circuit", "cannot read '" + path.string() + "'"});
        } else {
            try {
                circuit = parse_circuit(*text);
            } catch (const CircuitError& e) {
                diags.push_back({"main_circuit", path.string() + ": " + e.what()});
            }
        }
    } else {
        try {
            circuit = circuit_from_json(*circuit_it);
        } catch (const CircuitError& e) {
            diags.push_back({e.path().empty() ? "main_circuit" : "main_circuit." + e.path(), e.what()});
        }
    }
    if (circuit) {
        effective["main_circuit"] = circuit_to_json(*circuit);
    }

    // shots
    std::uint64_t shot_values[2] = {0, 0};
    const char* shot_keys[2] = {"constraint_shots", "main_shots"};
    for (int i = 0; i < 2; ++i) {
        const auto it = doc.find(shot_keys[i]);
        if (it == doc.end() || !positive_integer(*it)) {
            diags.push_back({shot_keys[i], "must be a positive integer"});
        } else {
            shot_values[i] = it->get<std::uint64_t>();
            effective[shot_keys[i]] = shot_values[i];
        }
    }

    // report path
    fs::path report_path;
    if (overrides.report_path) {
        report_path = *overrides.report_path;
    } else if (const auto it = doc.find("report_path"); it != doc.end() && it->is_string()) {
        report_path = resolve(base_dir, it->get<std::string>());
    } else {
        diags.push_back({"report_path", "missing report_path (or pass --report)"});
    }
    effective["report_path"] = report_path.string();

    for (const auto& [key, v] : doc.items()) {
        static const std::array<const char*, 6> kKnown{"backend",          "constraint", "main_circuit",
                                                       "constraint_shots", "main_shots", "report_path"};
        if (std::find_if(kKnown.begin(), kKnown.end(), [&](const char* k) { return key == k; }) == kKnown.end()) {
            diags.push_back({key, "unknown field"});
        }
    }

    if (build && diags.empty()) {
        build->effective = std::move(effective);
        build->adapter = std::move(adapter);
        build->constraint = build_constraint(*constraint_it);
        build->main_circuit = std::move(circuit);
        build->constraint_shots = shot_values[0];
        build->main_shots = shot_values[1];
        build->report_path = std::move(report_path);
    }
    return diags;
}

std::optional<json> read_document(const fs::path& config_path, Diagnostics& diags) {
    const auto text = read_file(config_path);
    if (!text) {
        diags.push_back({"$", "cannot read '" + config_path.string() + "'"});
        return std::nullopt;
    }
    try {
        return json::parse(*text);
    } catch (const json::parse_error& e) {
        diags.push_back({"$", std::string("malformed JSON at byte ") + std::to_string(e.byte) + ": " + e.what()});
        return std::nullopt;
    }
}

fs::path base_of(const fs::path& config_path) {
    const auto parent = config_path.parent_path();
    return parent.empty() ? fs::path(".") : parent;
}

}  // namespace

Diagnostics validate_workflow_document(const json& doc, const fs::path& base_dir, const WorkflowOverrides& overrides) {
    return load(doc, base_dir, overrides, nullptr);
}

Diagnostics validate_workflow(const fs::path& config_path, const WorkflowOverrides& overrides) {
    Diagnostics diags;
    const auto doc = read_document(config_path, diags);
    if (!doc) {
        return diags;
    }
    return validate_workflow_document(*doc, base_of(config_path), overrides);
}

int run_workflow(const fs::path& config_path, const WorkflowOverrides& overrides, std::ostream& out,
                 std::ostream& err) {
    Diagnostics diags;
    Loaded loaded;
    if (const auto doc = read_document(config_path, diags)) {
        try {
            diags = load(*doc, base_of(config_path), overrides, &loaded);
        } catch (const std::exception& e) {
            diags.push_back({"$", e.what()});
        }
    }
    if (!diags.empty()) {
        for (const auto& d : diags) {
            err << "config error: " << d.path << ": " << d.message << "\n";
        }
        return kExitConfigError;
    }

    const Circuit main_circuit = *loaded.main_circuit;
    const std::uint64_t main_shots = loaded.main_shots;
    auto on_pass = [&](BackendAdapter& adapter, const IntrospectionResult&) -> std::any {
        return adapter.run(main_circuit, main_shots);
    };
    auto on_fail = [](BackendAdapter&, const IntrospectionResult&) -> std::any { return {}; };

    ConditionalResult result;
    try {
        result = run_conditionally(*loaded.adapter, *loaded.constraint, on_pass, on_fail, loaded.constraint_shots);
    } catch (const ExecutionError& e) {
        err << "runtime error: " << e.what() << "\n";
        return kExitRuntimeError;
    } catch (const std::exception& e) {
        err << "runtime error: " << e.what() << "\n";
        return kExitRuntimeError;
    }

    json report{{"branch", result.branch == Branch::Passed ? "passed" : "failed"},
                {"introspection", introspection_to_json(result.introspection)},
                {"started_at", format_rfc3339(result.started_at)},
                {"decided_at", format_rfc3339(result.decided_at)},
                {"finished_at", format_rfc3339(result.finished_at)},
                {"config", loaded.effective},
                {"version", kVersion}};
    if (const auto* main = result.main_result()) {
        report["main_result"] = experiment_result_to_json(*main);
    }

    {
        std::ofstream file(loaded.report_path, std::ios::binary | std::ios::trunc);
        if (!file) {
            err << "runtime error: cannot write report to '" << loaded.report_path.string() << "'\n";
            return kExitRuntimeError;
        }
        file << report.dump(2) << "\n";
        if (!file) {
            err << "runtime error: failed writing report to '" << loaded.report_path.string() << "'\n";
            return kExitRuntimeError;
        }
    }

    out << "branch=" << report["branch"].get<std::string>() << " constraint=" << result.introspection.constraint_name;
    for (const auto& [key, value] : result.introspection.scores) {
        if (key.rfind("se_", 0) != 0) {
            out << " " << key << "=" << value;
        }
    }
    out << " report=" << loaded.report_path.string() << "\n";
    return result.branch == Branch::Passed ? kExitPassed : kExitFailed;
}

}  // namespace resq
