#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "resq/backend.hpp"
#include "resq/circuit.hpp"
#include "resq/clock.hpp"
#include "resq/diagnostic.hpp"

namespace resq {

class ConstraintError : public std::runtime_error {
  public:
    enum class Code { InvalidArgument, MalformedCounts, InvalidDocument };

    ConstraintError(Code code, const std::string& message, Diagnostics diagnostics = {});

    Code code() const { return code_; }
    const Diagnostics& diagnostics() const { return diagnostics_; }

  private:
    Code code_;
    Diagnostics diagnostics_;
};

enum class PolicyKind { MinimumAcceptableValue, MaximumAcceptableValue };

// Threshold decision on a scalar score. Both bounds are inclusive; NaN never passes.
struct Policy {
    PolicyKind kind = PolicyKind::MinimumAcceptableValue;
    double threshold = 0.0;

    bool decide(double x) const {
        return kind == PolicyKind::MinimumAcceptableValue ? x >= threshold : x <= threshold;
    }
    std::string describe() const;

    friend bool operator==(const Policy&, const Policy&) = default;
};

inline Policy minimum_acceptable_value(double threshold) { return {PolicyKind::MinimumAcceptableValue, threshold}; }
inline Policy maximum_acceptable_value(double threshold) { return {PolicyKind::MaximumAcceptableValue, threshold}; }

struct IntrospectionResult {
    std::string constraint_name;
    bool passed = false;
    std::map<std::string, double> scores;
    Timestamp evaluated_at{};
    std::optional<ExperimentResult> evidence;
    std::vector<IntrospectionResult> children;
    std::map<std::string, std::string> metadata;

    // Score lookup; throws std::out_of_range for unknown keys.
    double operator[](std::string_view key) const;

    friend bool operator==(const IntrospectionResult&, const IntrospectionResult&) = default;
};

nlohmann::json introspection_to_json(const IntrospectionResult& result);

// Extension point: anything that can judge a backend. Implementations must
// be safe to evaluate from several threads.
class ResourceConstraint {
  public:
    virtual ~ResourceConstraint() = default;

    virtual IntrospectionResult evaluate(BackendAdapter& adapter, std::uint64_t shots) const = 0;
    virtual std::string name() const = 0;
};

using ConstraintPtr = std::shared_ptr<const ResourceConstraint>;

// Parity correlator of bits (2*pair, 2*pair+1) over 8-bit outcomes:
// (equal - unequal) / total.
double compute_pair_correlator(const BitstringCounts& counts, std::size_t pair_index);

// S = E00 + E01 + E10 - E11.
double chsh_score(double e00, double e01, double e10, double e11);

// Entanglement probe: one run of packed_chsh_circuit(settings), scored by
// the CHSH combination of its four pair correlators. Scores: E00..E11,
// CHSH_score, and their standard errors se_E00..se_E11, se_S.
class PackedChshTest final : public ResourceConstraint {
  public:
    explicit PackedChshTest(Policy policy, MeasurementSettings settings = {},
                            std::shared_ptr<const Clock> clock = std::make_shared<SystemClock>());

    IntrospectionResult evaluate(BackendAdapter& adapter, std::uint64_t shots) const override;
    std::string name() const override { return "PackedCHSHTest"; }

    const Policy& policy() const { return policy_; }

  private:
    Policy policy_;
    MeasurementSettings settings_;
    std::shared_ptr<const Clock> clock_;
};

struct CalibrationCriteria {
    std::optional<std::size_t> min_qubits;
    std::optional<double> min_t1_us;
    std::optional<double> min_t2_us;
    std::optional<double> max_readout_error;
    std::optional<double> max_gate_error;

    bool any() const { return min_qubits || min_t1_us || min_t2_us || max_readout_error || max_gate_error; }
};

// Threshold checks on the adapter's calibration snapshot, each against the
// worst qubit or gate. Runs no circuits.
class CalibrationConstraint final : public ResourceConstraint {
  public:
    explicit CalibrationConstraint(CalibrationCriteria criteria,
                                   std::shared_ptr<const Clock> clock = std::make_shared<SystemClock>());

    IntrospectionResult evaluate(BackendAdapter& adapter, std::uint64_t shots) const override;
    std::string name() const override { return "CalibrationThresholds"; }

  private:
    CalibrationCriteria criteria_;
    std::shared_ptr<const Clock> clock_;
};

// Fixed outcome; a building block for tests and for disabling a branch of a tree.
class ConstantConstraint final : public ResourceConstraint {
  public:
    explicit ConstantConstraint(bool passes, std::shared_ptr<const Clock> clock = std::make_shared<SystemClock>())
        : passes_(passes), clock_(std::move(clock)) {}

    IntrospectionResult evaluate(BackendAdapter& adapter, std::uint64_t shots) const override;
    std::string name() const override { return passes_ ? "AlwaysPass" : "AlwaysFail"; }

  private:
    bool passes_;
    std::shared_ptr<const Clock> clock_;
};

enum class Evaluation { ShortCircuit, All };

// AND stops at the first failing child and OR at the first passing child
// unless Evaluation::All is requested. Only evaluated children appear in
// the result. A composite's evaluated_at is the oldest child's.
class AndConstraint final : public ResourceConstraint {
  public:
    explicit AndConstraint(std::vector<ConstraintPtr> children, Evaluation mode = Evaluation::ShortCircuit);

    IntrospectionResult evaluate(BackendAdapter& adapter, std::uint64_t shots) const override;
    std::string name() const override { return "AND"; }

  private:
    std::vector<ConstraintPtr> children_;
    Evaluation mode_;
};

class OrConstraint final : public ResourceConstraint {
  public:
    explicit OrConstraint(std::vector<ConstraintPtr> children, Evaluation mode = Evaluation::ShortCircuit);

    IntrospectionResult evaluate(BackendAdapter& adapter, std::uint64_t shots) const override;
    std::string name() const override { return "OR"; }

  private:
    std::vector<ConstraintPtr> children_;
    Evaluation mode_;
};

class NotConstraint final : public ResourceConstraint {
  public:
    explicit NotConstraint(ConstraintPtr child);

    IntrospectionResult evaluate(BackendAdapter& adapter, std::uint64_t shots) const override;
    std::string name() const override { return "NOT"; }

  private:
    ConstraintPtr child_;
};

// Caches the child's result and reuses it while clock.now - evaluated_at <= ttl.
// At most one child evaluation runs at a time; a failed evaluation leaves
// the cache untouched.
class FreshWithin final : public ResourceConstraint {
  public:
    FreshWithin(ConstraintPtr child, std::chrono::microseconds ttl,
                std::shared_ptr<const Clock> clock = std::make_shared<SystemClock>());

    IntrospectionResult evaluate(BackendAdapter& adapter, std::uint64_t shots) const override;
    std::string name() const override { return "FreshWithin"; }

  private:
    ConstraintPtr child_;
    std::chrono::microseconds ttl_;
    std::shared_ptr<const Clock> clock_;
    mutable std::mutex mutex_;
    mutable std::optional<IntrospectionResult> cache_;
};

// Constraint tree documents:
//   {"type": "packed_chsh", "policy": {"kind": "min"|"max", "threshold": x}}
//   {"type": "calibration", "criteria": {"min_qubits", "min_t1_us", "min_t2_us",
//                                        "max_readout_error", "max_gate_error"}}
//   {"type": "and"|"or", "children": [...], "evaluate_all": bool?}
//   {"type": "not", "children": [one]}
//   {"type": "fresh_within", "ttl_seconds": x, "children": [one]}
Diagnostics validate_constraint_document(const nlohmann::json& doc, const std::string& path = "constraint");

// Throws ConstraintError(InvalidDocument) carrying every diagnostic.
ConstraintPtr build_constraint(const nlohmann::json& doc,
                               std::shared_ptr<const Clock> clock = std::make_shared<SystemClock>());

}  // namespace resq
