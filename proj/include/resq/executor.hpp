#pragma once

#include <any>
#include <cstdint>
#include <exception>
#include <functional>
#include <optional>
#include <stdexcept>

#include "resq/backend.hpp"
#include "resq/clock.hpp"
#include "resq/constraints.hpp"

namespace resq {

enum class Branch { Passed, Failed };

struct ConditionalResult {
    IntrospectionResult introspection;
    Branch branch = Branch::Failed;
    // Whatever the executed callback returned; empty if it returned nothing.
    std::any main_value;
    Timestamp started_at{};
    Timestamp decided_at{};
    Timestamp finished_at{};

    // The callback value if it is an ExperimentResult, otherwise nullptr.
    const ExperimentResult* main_result() const { return std::any_cast<ExperimentResult>(&main_value); }
    bool has_main_value() const { return main_value.has_value(); }
};

// Callbacks receive the adapter the constraint was evaluated on and the
// unmodified introspection result. Return an empty std::any for "no value".
using BranchCallback = std::function<std::any(BackendAdapter&, const IntrospectionResult&)>;

// Raised when the constraint or a callback fails. The original exception
// is available via nested(); partial() holds what was recorded so far
// (introspection and branch are set only if evaluation succeeded).
class ExecutionError : public std::runtime_error {
  public:
    enum class Stage { Introspection, Callback };

    ExecutionError(Stage stage, const std::string& message, std::exception_ptr cause,
                   std::optional<IntrospectionResult> introspection, std::optional<Branch> branch,
                   Timestamp started_at);

    Stage stage() const { return stage_; }
    const std::optional<IntrospectionResult>& introspection() const { return introspection_; }
    const std::optional<Branch>& branch() const { return branch_; }
    Timestamp started_at() const { return started_at_; }
    std::exception_ptr nested() const { return cause_; }
    [[noreturn]] void rethrow_nested() const { std::rethrow_exception(cause_); }

  private:
    Stage stage_;
    std::exception_ptr cause_;
    std::optional<IntrospectionResult> introspection_;
    std::optional<Branch> branch_;
    Timestamp started_at_;
};

// Evaluates `constraint` once with `shots` and runs exactly one of
// on_pass / on_fail, immediately after the decision.
ConditionalResult run_conditionally(BackendAdapter& adapter, const ResourceConstraint& constraint,
                                    const BranchCallback& on_pass, const BranchCallback& on_fail,
                                    std::uint64_t shots, const Clock& clock = SystemClock{});

}  // namespace resq
