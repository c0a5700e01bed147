#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace resq {

enum class GateKind { H, X, Y, Z, S, T, RX, RY, RZ, CNOT };

std::string_view to_string(GateKind kind);
std::optional<GateKind> gate_kind_from_string(std::string_view name);

constexpr bool is_rotation(GateKind kind) {
    return kind == GateKind::RX || kind == GateKind::RY || kind == GateKind::RZ;
}

constexpr std::size_t arity(GateKind kind) { return kind == GateKind::CNOT ? 2 : 1; }

class CircuitError : public std::runtime_error {
  public:
    enum class Code {
        Syntax,
        Schema,
        UnknownGate,
        IndexOutOfRange,
        MissingAngle,
        UnexpectedAngle,
        DuplicateTarget,
        ArityMismatch,
        InvalidMeasurement,
        InvalidQubitCount,
        InvalidCounts,
    };

    // `path` locates the offending element ("gates[2].angle"); `offset` is a
    // byte offset into the source text for syntax errors.
    CircuitError(Code code, std::string path, const std::string& message,
                 std::optional<std::size_t> offset = std::nullopt);

    Code code() const { return code_; }
    const std::string& path() const { return path_; }
    std::optional<std::size_t> offset() const { return offset_; }

  private:
    Code code_;
    std::string path_;
    std::optional<std::size_t> offset_;
};

class Gate {
  public:
    // Validates arity, angle presence and distinct targets. Range checks
    // against a qubit count happen when the gate is placed in a Circuit.
    Gate(GateKind kind, std::vector<std::size_t> targets, std::optional<double> angle = std::nullopt);

    static Gate h(std::size_t q) { return Gate(GateKind::H, {q}); }
    static Gate x(std::size_t q) { return Gate(GateKind::X, {q}); }
    static Gate y(std::size_t q) { return Gate(GateKind::Y, {q}); }
    static Gate z(std::size_t q) { return Gate(GateKind::Z, {q}); }
    static Gate s(std::size_t q) { return Gate(GateKind::S, {q}); }
    static Gate t(std::size_t q) { return Gate(GateKind::T, {q}); }
    static Gate rx(std::size_t q, double theta) { return Gate(GateKind::RX, {q}, theta); }
    static Gate ry(std::size_t q, double theta) { return Gate(GateKind::RY, {q}, theta); }
    static Gate rz(std::size_t q, double theta) { return Gate(GateKind::RZ, {q}, theta); }
    static Gate cnot(std::size_t control, std::size_t target) {
        return Gate(GateKind::CNOT, {control, target});
    }

    GateKind kind() const { return kind_; }
    // [q] for single-qubit kinds, [control, target] for CNOT.
    std::span<const std::size_t> targets() const { return {targets_.data(), arity(kind_)}; }
    std::optional<double> angle() const { return angle_; }

    friend bool operator==(const Gate&, const Gate&) = default;

  private:
    GateKind kind_;
    std::array<std::size_t, 2> targets_{};
    std::optional<double> angle_;
};

// Gate list over `num_qubits` qubits followed by a single terminal
// measurement of `measured_qubits`. Immutable once constructed.
class Circuit {
  public:
    Circuit(std::size_t num_qubits, std::vector<Gate> gates, std::vector<std::size_t> measured_qubits);

    std::size_t num_qubits() const { return num_qubits_; }
    const std::vector<Gate>& gates() const { return gates_; }
    const std::vector<std::size_t>& measured_qubits() const { return measured_; }

    friend bool operator==(const Circuit&, const Circuit&) = default;

  private:
    std::size_t num_qubits_;
    std::vector<Gate> gates_;
    std::vector<std::size_t> measured_;
};

// Measurement outcome histogram. Character i of every key is the outcome
// of measured_qubits[i] of the producing circuit (leftmost = index 0).
class BitstringCounts {
  public:
    using Map = std::map<std::string, std::uint64_t>;

    BitstringCounts() = default;
    // Throws CircuitError(InvalidCounts) on mixed key widths or non-binary keys.
    explicit BitstringCounts(Map counts);

    const Map& map() const { return counts_; }
    std::size_t width() const { return width_; }
    std::uint64_t total() const { return total_; }
    bool empty() const { return counts_.empty(); }
    std::uint64_t count(const std::string& key) const;

    auto begin() const { return counts_.begin(); }
    auto end() const { return counts_.end(); }

    friend bool operator==(const BitstringCounts&, const BitstringCounts&) = default;

  private:
    Map counts_;
    std::size_t width_ = 0;
    std::uint64_t total_ = 0;
};

// The Bell state |00> + |11> (unnormalized): H(0), CNOT(0,1), measure [0,1].
Circuit phi_plus();

// Measurement angles for the two CHSH parties. A measurement at angle θ is
// realized as RY(-θ) followed by a Z measurement, so Φ+ gives E(a,b) = cos(a-b).
struct MeasurementSettings {
    double a0 = 0.0;
    double a1 = std::numbers::pi / 2;
    double b0 = std::numbers::pi / 4;
    double b1 = -std::numbers::pi / 4;
};

// Four Bell pairs (2i, 2i+1) measured in the setting combinations
// (a0,b0), (a0,b1), (a1,b0), (a1,b1) for i = 0..3, all in one circuit.
Circuit packed_chsh_circuit(const MeasurementSettings& settings = {});

nlohmann::json circuit_to_json(const Circuit& c);
Circuit circuit_from_json(const nlohmann::json& doc);

std::string serialize_circuit(const Circuit& c);
// Throws CircuitError: Syntax (with byte offset) for malformed text, and a
// specific code with a document path for schema or invariant violations.
Circuit parse_circuit(std::string_view text);

}  // namespace resq
