#include "resq/circuit.hpp"

#include <algorithm>
#include <array>
#include <utility>

namespace resq {

namespace {

constexpr std::array<std::pair<GateKind, std::string_view>, 10> kGateNames{{
    {GateKind::H, "H"},
    {GateKind::X, "X"},
    {GateKind::Y, "Y"},
    {GateKind::Z, "Z"},
    {GateKind::S, "S"},
    {GateKind::T, "T"},
    {GateKind::RX, "RX"},
    {GateKind::RY, "RY"},
    {GateKind::RZ, "RZ"},
    {GateKind::CNOT, "CNOT"},
}};

using Code = CircuitError::Code;

std::string describe(const std::string& path, const std::string& message) {
    return path.empty() ? message : path + ": " + message;
}

}  // namespace

std::string_view to_string(GateKind kind) {
    for (const auto& [k, name] : kGateNames) {
        if (k == kind) {
            return name;
        }
    }
    return "?";
}

std::optional<GateKind> gate_kind_from_string(std::string_view name) {
    for (const auto& [k, n] : kGateNames) {
        if (n == name) {
            return k;
        }
    }
    return std::nullopt;
}

CircuitError::CircuitError(Code code, std::string path, const std::string& message,
                           std::optional<std::size_t> offset)
    : std::runtime_error(describe(path, message)),
      code_(code),
      path_(std::move(path)),
      offset_(offset) {}

Gate::Gate(GateKind kind, std::vector<std::size_t> targets, std::optional<double> angle)
    : kind_(kind), angle_(angle) {
    if (targets.size() != arity(kind)) {
        throw CircuitError(Code::ArityMismatch, "",
                           std::string(to_string(kind)) + " takes " + std::to_string(arity(kind)) +
                               " target(s), got " + std::to_string(targets.size()));
    }
    if (is_rotation(kind) && !angle) {
        throw CircuitError(Code::MissingAngle, "", std::string(to_string(kind)) + " requires an angle");
    }
    if (!is_rotation(kind) && angle) {
        throw CircuitError(Code::UnexpectedAngle, "",
                           std::string(to_string(kind)) + " does not take an angle");
    }
    if (kind == GateKind::CNOT && targets[0] == targets[1]) {
        throw CircuitError(Code::DuplicateTarget, "", "CNOT control and target must differ");
    }
    std::copy(targets.begin(), targets.end(), targets_.begin());
}

Circuit::Circuit(std::size_t num_qubits, std::vector<Gate> gates, std::vector<std::size_t> measured_qubits)
    : num_qubits_(num_qubits), gates_(std::move(gates)), measured_(std::move(measured_qubits)) {
    if (num_qubits_ == 0) {
        throw CircuitError(Code::InvalidQubitCount, "num_qubits", "circuit needs at least one qubit");
    }
    for (std::size_t i = 0; i < gates_.size(); ++i) {
        for (const std::size_t q : gates_[i].targets()) {
            if (q >= num_qubits_) {
                throw CircuitError(Code::IndexOutOfRange, "gates[" + std::to_string(i) + "].targets",
                                   "qubit " + std::to_string(q) + " out of range for " +
                                       std::to_string(num_qubits_) + "-qubit circuit");
            }
        }
    }
    if (measured_.empty()) {
        throw CircuitError(Code::InvalidMeasurement, "measure", "at least one qubit must be measured");
    }
    for (std::size_t i = 0; i < measured_.size(); ++i) {
        if (measured_[i] >= num_qubits_) {
            throw CircuitError(Code::IndexOutOfRange, "measure[" + std::to_string(i) + "]",
                               "qubit " + std::to_string(measured_[i]) + " out of range for " +
                                   std::to_string(num_qubits_) + "-qubit circuit");
        }
        if (i > 0 && measured_[i] <= measured_[i - 1]) {
            throw CircuitError(Code::InvalidMeasurement, "measure[" + std::to_string(i) + "]",
                               "measured qubits must be strictly increasing");
        }
    }
}

BitstringCounts::BitstringCounts(Map counts) : counts_(std::move(counts)) {
    bool first = true;
    for (const auto& [key, n] : counts_) {
        if (key.empty() || key.find_first_not_of("01") != std::string::npos) {
            throw CircuitError(Code::InvalidCounts, "counts[\"" + key + "\"]", "bitstring must be non-empty and binary");
        }
        if (first) {
            width_ = key.size();
            first = false;
        } else if (key.size() != width_) {
            throw CircuitError(Code::InvalidCounts, "counts[\"" + key + "\"]",
                               "bitstring width " + std::to_string(key.size()) + " differs from " +
                                   std::to_string(width_));
        }
        total_ += n;
    }
}

std::uint64_t BitstringCounts::count(const std::string& key) const {
    const auto it = counts_.find(key);
    return it == counts_.end() ? 0 : it->second;
}

Circuit phi_plus() { return Circuit(2, {Gate::h(0), Gate::cnot(0, 1)}, {0, 1}); }

Circuit packed_chsh_circuit(const MeasurementSettings& settings) {
    const std::array<std::pair<double, double>, 4> pair_settings{{
        {settings.a0, settings.b0},
        {settings.a0, settings.b1},
        {settings.a1, settings.b0},
        {settings.a1, settings.b1},
    }};
    std::vector<Gate> gates;
    gates.reserve(16);
    for (std::size_t pair = 0; pair < 4; ++pair) {
        gates.push_back(Gate::h(2 * pair));
        gates.push_back(Gate::cnot(2 * pair, 2 * pair + 1));
    }
    for (std::size_t pair = 0; pair < 4; ++pair) {
        gates.push_back(Gate::ry(2 * pair, -pair_settings[pair].first));
        gates.push_back(Gate::ry(2 * pair + 1, -pair_settings[pair].second));
    }
    return Circuit(8, std::move(gates), {0, 1, 2, 3, 4, 5, 6, 7});
}

nlohmann::json circuit_to_json(const Circuit& c) {
    nlohmann::json gates = nlohmann::json::array();
    for (const auto& g : c.gates()) {
        nlohmann::json entry{{"kind", std::string(to_string(g.kind()))},
                             {"targets", std::vector<std::size_t>(g.targets().begin(), g.targets().end())}};
        if (g.angle()) {
            entry["angle"] = *g.angle();
        }
        gates.push_back(std::move(entry));
    }
    return {{"num_qubits", c.num_qubits()}, {"gates", std::move(gates)}, {"measure", c.measured_qubits()}};
}

namespace {

const nlohmann::json& require(const nlohmann::json& obj, const char* key, const std::string& path) {
    const auto it = obj.find(key);
    if (it == obj.end()) {
        throw CircuitError(Code::Schema, path.empty() ? key : path + "." + key,
                           std::string("missing field '") + key + "'");
    }
    return *it;
}

std::size_t index_value(const nlohmann::json& v, const std::string& path) {
    if (!v.is_number_integer()) {
        throw CircuitError(Code::Schema, path, "expected a non-negative integer");
    }
    if (v.is_number_unsigned()) {
        return v.get<std::size_t>();
    }
    const auto signed_value = v.get<long long>();
    if (signed_value < 0) {
        throw CircuitError(Code::IndexOutOfRange, path, "negative qubit index");
    }
    return static_cast<std::size_t>(signed_value);
}

}  // namespace

Circuit circuit_from_json(const nlohmann::json& doc) {
    if (!doc.is_object()) {
        throw CircuitError(Code::Schema, "", "circuit document must be an object");
    }
    const auto& nq = require(doc, "num_qubits", "");
    if (!nq.is_number_integer() || nq.get<long long>() <= 0) {
        throw CircuitError(Code::InvalidQubitCount, "num_qubits", "expected a positive integer");
    }
    const auto num_qubits = nq.get<std::size_t>();

    const auto& gates_doc = require(doc, "gates", "");
    if (!gates_doc.is_array()) {
        throw CircuitError(Code::Schema, "gates", "expected an array");
    }
    std::vector<Gate> gates;
    gates.reserve(gates_doc.size());
    for (std::size_t i = 0; i < gates_doc.size(); ++i) {
        const std::string path = "gates[" + std::to_string(i) + "]";
        const auto& g = gates_doc[i];
        if (!g.is_object()) {
            throw CircuitError(Code::Schema, path, "expected an object");
        }
        const auto& kind_doc = require(g, "kind", path);
        if (!kind_doc.is_string()) {
            throw CircuitError(Code::Schema, path + ".kind", "expected a string");
        }
        const auto kind = gate_kind_from_string(kind_doc.get<std::string>());
        if (!kind) {
            throw CircuitError(Code::UnknownGate, path + ".kind",
                               "unknown gate kind '" + kind_doc.get<std::string>() + "'");
        }
        const auto& targets_doc = require(g, "targets", path);
        if (!targets_doc.is_array()) {
            throw CircuitError(Code::Schema, path + ".targets", "expected an array");
        }
        std::vector<std::size_t> targets;
        for (std::size_t t = 0; t < targets_doc.size(); ++t) {
            const std::string tpath = path + ".targets[" + std::to_string(t) + "]";
            const auto q = index_value(targets_doc[t], tpath);
            if (q >= num_qubits) {
                throw CircuitError(Code::IndexOutOfRange, tpath,
                                   "qubit " + std::to_string(q) + " out of range for " +
                                       std::to_string(num_qubits) + "-qubit circuit");
            }
            targets.push_back(q);
        }
        std::optional<double> angle;
        if (const auto it = g.find("angle"); it != g.end() && !it->is_null()) {
            if (!it->is_number()) {
                throw CircuitError(Code::Schema, path + ".angle", "expected a number");
            }
            angle = it->get<double>();
        }
        try {
            gates.emplace_back(*kind, std::move(targets), angle);
        } catch (const CircuitError& e) {
            const std::string where = e.code() == Code::MissingAngle || e.code() == Code::UnexpectedAngle
                                          ? path + ".angle"
                                          : path + ".targets";
            throw CircuitError(e.code(), where, e.what());
        }
    }

    const auto& measure_doc = require(doc, "measure", "");
    if (!measure_doc.is_array()) {
        throw CircuitError(Code::Schema, "measure", "expected an array");
    }
    std::vector<std::size_t> measured;
    for (std::size_t i = 0; i < measure_doc.size(); ++i) {
        measured.push_back(index_value(measure_doc[i], "measure[" + std::to_string(i) + "]"));
    }
    return Circuit(num_qubits, std::move(gates), std::move(measured));
}

std::string serialize_circuit(const Circuit& c) { return circuit_to_json(c).dump(2); }

Circuit parse_circuit(std::string_view text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text.begin(), text.end());
    } catch (const nlohmann::json::parse_error& e) {
        throw CircuitError(Code::Syntax, "", e.what(), e.byte);
    }
    return circuit_from_json(doc);
}

}  // namespace resq
