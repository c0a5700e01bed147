#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "resq/circuit.hpp"
#include "resq/clock.hpp"
#include "resq/statevector.hpp"

namespace resq {

class BackendError : public std::runtime_error {
  public:
    enum class Code {
        SchemaViolation,
        RangeViolation,
        PhysicalBound,
        RecordingExhausted,
        CircuitMismatch,
        CalibrationUnavailable,
        ExecutionFailed,
    };

    BackendError(Code code, std::string path, const std::string& message);

    Code code() const { return code_; }
    // Document path of the offending field, empty when not applicable.
    const std::string& path() const { return path_; }

  private:
    Code code_;
    std::string path_;
};

struct ExperimentResult {
    BitstringCounts counts;
    std::uint64_t shots = 0;
    std::string backend_name;
    Timestamp submitted_at{};
    Timestamp completed_at{};
    std::map<std::string, std::string> metadata;

    // Throws BackendError(RangeViolation) if counts do not sum to shots or
    // the timestamps are out of order.
    void validate() const;

    friend bool operator==(const ExperimentResult&, const ExperimentResult&) = default;
};

struct QubitCalibration {
    double t1_us = 0.0;
    double t2_us = 0.0;
    double readout_error = 0.0;

    friend bool operator==(const QubitCalibration&, const QubitCalibration&) = default;
};

struct GateCalibration {
    std::string name;
    std::vector<std::size_t> qubits;
    double error = 0.0;

    friend bool operator==(const GateCalibration&, const GateCalibration&) = default;
};

struct CalibrationSnapshot {
    Timestamp taken_at{};
    std::size_t num_qubits = 0;
    std::vector<QubitCalibration> qubits;
    std::vector<GateCalibration> gates;
    std::vector<std::pair<std::size_t, std::size_t>> coupling_map;

    // Throws BackendError with the path of the first violated field.
    void validate() const;

    friend bool operator==(const CalibrationSnapshot&, const CalibrationSnapshot&) = default;
};

// Common surface over every execution provider.
class BackendAdapter {
  public:
    virtual ~BackendAdapter() = default;

    virtual ExperimentResult run(const Circuit& circuit, std::uint64_t shots) = 0;
    virtual CalibrationSnapshot calibration() = 0;
    virtual std::string name() const = 0;
};

// Linear-chain device with uniform properties, used when a simulator is
// configured without an explicit calibration file.
CalibrationSnapshot synthetic_calibration(std::size_t num_qubits, const NoiseModel& noise);

// Runs circuits on the built-in statevector simulator. Run k (0-based) of
// an adapter uses seed mix64(noise.seed + k), so repeated runs differ but a
// fresh adapter with the same configuration reproduces them exactly.
class SimulatorAdapter final : public BackendAdapter {
  public:
    SimulatorAdapter(NoiseModel noise, CalibrationSnapshot calibration,
                     std::shared_ptr<const Clock> clock = std::make_shared<SystemClock>(),
                     RunOptions options = {});

    ExperimentResult run(const Circuit& circuit, std::uint64_t shots) override;
    // The configured snapshot, restamped with the current time.
    CalibrationSnapshot calibration() override;
    std::string name() const override { return "simulator"; }

    const NoiseModel& noise() const { return noise_; }

  private:
    NoiseModel noise_;
    CalibrationSnapshot calibration_;
    std::shared_ptr<const Clock> clock_;
    RunOptions options_;
    std::uint64_t runs_ = 0;
};

struct Recording {
    CalibrationSnapshot calibration;
    std::vector<ExperimentResult> results;

    friend bool operator==(const Recording&, const Recording&) = default;
};

// Plays back a recorded session in order. The submitted circuit is only
// logged unless `strict` is set, in which case each result's bitstring
// width must match the circuit's measured-qubit count.
class ReplayAdapter final : public BackendAdapter {
  public:
    explicit ReplayAdapter(Recording recording, bool strict = false);

    // Throws BackendError(RecordingExhausted) once every result is consumed.
    ExperimentResult run(const Circuit& circuit, std::uint64_t shots) override;
    CalibrationSnapshot calibration() override { return recording_.calibration; }
    std::string name() const override { return "replay"; }

    std::size_t remaining() const { return recording_.results.size() - next_; }
    const std::vector<Circuit>& submitted() const { return submitted_; }

  private:
    Recording recording_;
    bool strict_;
    std::size_t next_ = 0;
    std::vector<Circuit> submitted_;
};

// Forwards to another adapter and captures everything it returns, so a
// live session can later be replayed with ReplayAdapter.
class RecordingAdapter final : public BackendAdapter {
  public:
    explicit RecordingAdapter(BackendAdapter& inner) : inner_(inner) {}

    ExperimentResult run(const Circuit& circuit, std::uint64_t shots) override;
    CalibrationSnapshot calibration() override;
    std::string name() const override { return inner_.name(); }

    // Uses the most recent calibration() result, or fetches one if none yet.
    Recording recording();

  private:
    BackendAdapter& inner_;
    std::optional<CalibrationSnapshot> calibration_;
    std::vector<ExperimentResult> results_;
};

nlohmann::json calibration_to_json(const CalibrationSnapshot& snapshot);
CalibrationSnapshot calibration_from_json(const nlohmann::json& doc, const std::string& path = "");
CalibrationSnapshot parse_calibration(std::string_view text);

nlohmann::json experiment_result_to_json(const ExperimentResult& result);
ExperimentResult experiment_result_from_json(const nlohmann::json& doc, const std::string& path = "");

nlohmann::json recording_to_json(const Recording& recording);
Recording recording_from_json(const nlohmann::json& doc);
Recording parse_recording(std::string_view text);

}  // namespace resq
