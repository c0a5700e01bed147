#include "resq/backend.hpp"

#include <algorithm>
#include <cmath>

#include "resq/rng.hpp"

namespace resq {

namespace {

using Code = BackendError::Code;
using nlohmann::json;

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

std::string at(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

const json& field(const json& obj, const char* key, const std::string& path) {
    if (!obj.is_object()) {
        throw BackendError(Code::SchemaViolation, path.empty() ? "$" : path, "expected an object");
    }
    const auto it = obj.find(key);
    if (it == obj.end()) {
        throw BackendError(Code::SchemaViolation, join(path, key), std::string("missing field '") + key + "'");
    }
    return *it;
}

double number(const json& v, const std::string& path) {
    if (!v.is_number()) {
        throw BackendError(Code::SchemaViolation, path, "expected a number");
    }
    return v.get<double>();
}

std::uint64_t natural(const json& v, const std::string& path) {
    if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<long long>() < 0)) {
        throw BackendError(Code::SchemaViolation, path, "expected a non-negative integer");
    }
    return v.get<std::uint64_t>();
}

std::string string(const json& v, const std::string& path) {
    if (!v.is_string()) {
        throw BackendError(Code::SchemaViolation, path, "expected a string");
    }
    return v.get<std::string>();
}

const json& array(const json& v, const std::string& path) {
    if (!v.is_array()) {
        throw BackendError(Code::SchemaViolation, path, "expected an array");
    }
    return v;
}

Timestamp timestamp(const json& v, const std::string& path) {
    try {
        return parse_rfc3339(string(v, path));
    } catch (const std::invalid_argument& e) {
        throw BackendError(Code::SchemaViolation, path, e.what());
    }
}

void check_probability(double p, const std::string& path) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw BackendError(Code::RangeViolation, path, "probability " + std::to_string(p) + " outside [0, 1]");
    }
}

json parse_text(std::string_view text) {
    try {
        return json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        throw BackendError(Code::SchemaViolation, "$", std::string("malformed document: ") + e.what());
    }
}

}  // namespace

BackendError::BackendError(Code code, std::string path, const std::string& message)
    : std::runtime_error(path.empty() ? message : path + ": " + message), code_(code), path_(std::move(path)) {}

void ExperimentResult::validate() const {
    if (shots == 0) {
        throw BackendError(Code::RangeViolation, "shots", "shots must be positive");
    }
    if (counts.total() != shots) {
        throw BackendError(Code::RangeViolation, "counts",
                           "counts sum to " + std::to_string(counts.total()) + ", expected " + std::to_string(shots));
    }
    if (completed_at < submitted_at) {
        throw BackendError(Code::RangeViolation, "completed_at", "completed before submission");
    }
}

void CalibrationSnapshot::validate() const {
    if (num_qubits == 0) {
        throw BackendError(Code::RangeViolation, "num_qubits", "must be positive");
    }
    if (qubits.size() != num_qubits) {
        throw BackendError(Code::SchemaViolation, "qubits",
                           "expected " + std::to_string(num_qubits) + " entries, got " + std::to_string(qubits.size()));
    }
    for (std::size_t i = 0; i < qubits.size(); ++i) {
        const auto& q = qubits[i];
        const std::string path = at("qubits", i);
        if (!(q.t1_us > 0.0) || !std::isfinite(q.t1_us)) {
            throw BackendError(Code::RangeViolation, path + ".t1_us", "must be positive");
        }
        if (!(q.t2_us > 0.0) || !std::isfinite(q.t2_us)) {
            throw BackendError(Code::RangeViolation, path + ".t2_us", "must be positive");
        }
        check_probability(q.readout_error, path + ".readout_error");
        if (q.t2_us > 2.0 * q.t1_us) {
            throw BackendError(Code::PhysicalBound, path + ".t2_us",
                               "T2 " + std::to_string(q.t2_us) + "us exceeds 2*T1 " + std::to_string(2.0 * q.t1_us) +
                                   "us");
        }
    }
    for (std::size_t i = 0; i < gates.size(); ++i) {
        const std::string path = at("gates", i);
        check_probability(gates[i].error, path + ".error");
        for (std::size_t k = 0; k < gates[i].qubits.size(); ++k) {
            if (gates[i].qubits[k] >= num_qubits) {
                throw BackendError(Code::RangeViolation, at(path + ".qubits", k), "qubit index out of range");
            }
        }
    }
    for (std::size_t i = 0; i < coupling_map.size(); ++i) {
        const auto [a, b] = coupling_map[i];
        if (a >= num_qubits || b >= num_qubits) {
            throw BackendError(Code::RangeViolation, at("coupling_map", i), "qubit index out of range");
        }
    }
}

CalibrationSnapshot synthetic_calibration(std::size_t num_qubits, const NoiseModel& noise) {
    CalibrationSnapshot snap;
    snap.num_qubits = num_qubits;
    snap.qubits.assign(num_qubits, QubitCalibration{100.0, 80.0, noise.readout_flip});
    for (std::size_t q = 0; q < num_qubits; ++q) {
        snap.gates.push_back({"sx", {q}, noise.p1});
    }
    for (std::size_t q = 0; q + 1 < num_qubits; ++q) {
        snap.gates.push_back({"cx", {q, q + 1}, noise.p2});
        snap.coupling_map.emplace_back(q, q + 1);
        snap.coupling_map.emplace_back(q + 1, q);
    }
    return snap;
}

SimulatorAdapter::SimulatorAdapter(NoiseModel noise, CalibrationSnapshot calibration,
                                   std::shared_ptr<const Clock> clock, RunOptions options)
    : noise_(noise), calibration_(std::move(calibration)), clock_(std::move(clock)), options_(options) {
    noise_.validate();
    calibration_.validate();
}

ExperimentResult SimulatorAdapter::run(const Circuit& circuit, std::uint64_t shots) {
    NoiseModel run_noise = noise_;
    run_noise.seed = mix64(noise_.seed + runs_);
    ExperimentResult result;
    result.submitted_at = clock_->now();
    try {
        result.counts = run_shots(circuit, shots, run_noise, options_);
    } catch (const SimulationError& e) {
        throw BackendError(Code::ExecutionFailed, "", e.what());
    }
    result.completed_at = clock_->now();
    result.shots = shots;
    result.backend_name = name();
    result.metadata = {
        {"run_index", std::to_string(runs_)},
        {"seed", std::to_string(run_noise.seed)},
        {"num_qubits", std::to_string(circuit.num_qubits())},
    };
    ++runs_;
    return result;
}

CalibrationSnapshot SimulatorAdapter::calibration() {
    CalibrationSnapshot snap = calibration_;
    snap.taken_at = clock_->now();
    return snap;
}

ReplayAdapter::ReplayAdapter(Recording recording, bool strict) : recording_(std::move(recording)), strict_(strict) {
    recording_.calibration.validate();
    for (std::size_t i = 0; i < recording_.results.size(); ++i) {
        try {
            recording_.results[i].validate();
        } catch (const BackendError& e) {
            throw BackendError(e.code(), at("results", i) + "." + e.path(), e.what());
        }
    }
}

ExperimentResult ReplayAdapter::run(const Circuit& circuit, std::uint64_t shots) {
    if (next_ >= recording_.results.size()) {
        throw BackendError(Code::RecordingExhausted, "",
                           "recording exhausted after " + std::to_string(recording_.results.size()) + " result(s)");
    }
    const auto& result = recording_.results[next_];
    if (strict_) {
        if (result.counts.width() != circuit.measured_qubits().size()) {
            throw BackendError(Code::CircuitMismatch, at("results", next_) + ".counts",
                               "recorded bitstring width " + std::to_string(result.counts.width()) +
                                   " does not match " + std::to_string(circuit.measured_qubits().size()) +
                                   " measured qubits");
        }
        if (result.shots != shots) {
            throw BackendError(Code::CircuitMismatch, at("results", next_) + ".shots",
                               "recorded " + std::to_string(result.shots) + " shots, requested " +
                                   std::to_string(shots));
        }
    }
    submitted_.push_back(circuit);
    ++next_;
    return result;
}

ExperimentResult RecordingAdapter::run(const Circuit& circuit, std::uint64_t shots) {
    auto result = inner_.run(circuit, shots);
    results_.push_back(result);
    return result;
}

CalibrationSnapshot RecordingAdapter::calibration() {
    calibration_ = inner_.calibration();
    return *calibration_;
}

Recording RecordingAdapter::recording() {
    if (!calibration_) {
        calibration();
    }
    return {*calibration_, results_};
}

json calibration_to_json(const CalibrationSnapshot& s) {
    json qubits = json::array();
    for (const auto& q : s.qubits) {
        qubits.push_back({{"t1_us", q.t1_us}, {"t2_us", q.t2_us}, {"readout_error", q.readout_error}});
    }
    json gates = json::array();
    for (const auto& g : s.gates) {
        gates.push_back({{"name", g.name}, {"qubits", g.qubits}, {"error", g.error}});
    }
    json coupling = json::array();
    for (const auto& [a, b] : s.coupling_map) {
        coupling.push_back({a, b});
    }
    return {{"taken_at", format_rfc3339(s.taken_at)},
            {"num_qubits", s.num_qubits},
            {"qubits", std::move(qubits)},
            {"gates", std::move(gates)},
            {"coupling_map", std::move(coupling)}};
}

CalibrationSnapshot calibration_from_json(const json& doc, const std::string& path) {
    CalibrationSnapshot s;
    s.taken_at = timestamp(field(doc, "taken_at", path), join(path, "taken_at"));
    s.num_qubits = natural(field(doc, "num_qubits", path), join(path, "num_qubits"));

    const std::string qpath = join(path, "qubits");
    const auto& qubits = array(field(doc, "qubits", path), qpath);
    for (std::size_t i = 0; i < qubits.size(); ++i) {
        const std::string p = at(qpath, i);
        s.qubits.push_back({number(field(qubits[i], "t1_us", p), p + ".t1_us"),
                            number(field(qubits[i], "t2_us", p), p + ".t2_us"),
                            number(field(qubits[i], "readout_error", p), p + ".readout_error")});
    }

    const std::string gpath = join(path, "gates");
    const auto& gates = array(field(doc, "gates", path), gpath);
    for (std::size_t i = 0; i < gates.size(); ++i) {
        const std::string p = at(gpath, i);
        GateCalibration g;
        g.name = string(field(gates[i], "name", p), p + ".name");
        const auto& gq = array(field(gates[i], "qubits", p), p + ".qubits");
        for (std::size_t k = 0; k < gq.size(); ++k) {
            g.qubits.push_back(natural(gq[k], at(p + ".qubits", k)));
        }
        g.error = number(field(gates[i], "error", p), p + ".error");
        s.gates.push_back(std::move(g));
    }

    const std::string cpath = join(path, "coupling_map");
    const auto& coupling = array(field(doc, "coupling_map", path), cpath);
    for (std::size_t i = 0; i < coupling.size(); ++i) {
        const std::string p = at(cpath, i);
        const auto& edge = array(coupling[i], p);
        if (edge.size() != 2) {
            throw BackendError(Code::SchemaViolation, p, "expected a [from, to] pair");
        }
        s.coupling_map.emplace_back(natural(edge[0], at(p, 0)), natural(edge[1], at(p, 1)));
    }

    try {
        s.validate();
    } catch (const BackendError& e) {
        throw BackendError(e.code(), join(path, e.path()), e.what());
    }
    return s;
}

CalibrationSnapshot parse_calibration(std::string_view text) { return calibration_from_json(parse_text(text)); }

json experiment_result_to_json(const ExperimentResult& r) {
    json counts = json::object();
    for (const auto& [key, n] : r.counts) {
        counts[key] = n;
    }
    return {{"counts", std::move(counts)},
            {"shots", r.shots},
            {"backend_name", r.backend_name},
            {"submitted_at", format_rfc3339(r.submitted_at)},
            {"completed_at", format_rfc3339(r.completed_at)},
            {"metadata", r.metadata}};
}

ExperimentResult experiment_result_from_json(const json& doc, const std::string& path) {
    ExperimentResult r;
    const std::string cpath = join(path, "counts");
    const auto& counts = field(doc, "counts", path);
    if (!counts.is_object()) {
        throw BackendError(Code::SchemaViolation, cpath, "expected an object");
    }
    BitstringCounts::Map map;
    for (const auto& [key, n] : counts.items()) {
        map.emplace(key, natural(n, cpath + "[\"" + key + "\"]"));
    }
    try {
        r.counts = BitstringCounts(std::move(map));
    } catch (const CircuitError& e) {
        throw BackendError(Code::SchemaViolation, cpath, e.what());
    }
    r.shots = natural(field(doc, "shots", path), join(path, "shots"));
    r.backend_name = string(field(doc, "backend_name", path), join(path, "backend_name"));
    r.submitted_at = timestamp(field(doc, "submitted_at", path), join(path, "submitted_at"));
    r.completed_at = timestamp(field(doc, "completed_at", path), join(path, "completed_at"));
    if (const auto it = doc.find("metadata"); it != doc.end()) {
        const std::string mpath = join(path, "metadata");
        if (!it->is_object()) {
            throw BackendError(Code::SchemaViolation, mpath, "expected an object");
        }
        for (const auto& [key, v] : it->items()) {
            r.metadata.emplace(key, string(v, mpath + "." + key));
        }
    }
    try {
        r.validate();
    } catch (const BackendError& e) {
        throw BackendError(e.code(), join(path, e.path()), e.what());
    }
    return r;
}

json recording_to_json(const Recording& recording) {
    json results = json::array();
    for (const auto& r : recording.results) {
        results.push_back(experiment_result_to_json(r));
    }
    return {{"calibration", calibration_to_json(recording.calibration)}, {"results", std::move(results)}};
}

Recording recording_from_json(const json& doc) {
    Recording recording;
    recording.calibration = calibration_from_json(field(doc, "calibration", ""), "calibration");
    const auto& results = array(field(doc, "results", ""), "results");
    for (std::size_t i = 0; i < results.size(); ++i) {
        recording.results.push_back(experiment_result_from_json(results[i], at("results", i)));
    }
    return recording;
}

Recording parse_recording(std::string_view text) { return recording_from_json(parse_text(text)); }

}  // namespace resq
