#include "resq/executor.hpp"

namespace resq {

namespace {

std::string describe(std::exception_ptr e) {
    try {
        std::rethrow_exception(e);
    } catch (const std::exception& ex) {
        return ex.what();
    } catch (...) {
        return "unknown error";
    }
}

}  // namespace

ExecutionError::ExecutionError(Stage stage, const std::string& message, std::exception_ptr cause,
                               std::optional<IntrospectionResult> introspection, std::optional<Branch> branch,
                               Timestamp started_at)
    : std::runtime_error(message),
      stage_(stage),
      cause_(std::move(cause)),
      introspection_(std::move(introspection)),
      branch_(branch),
      started_at_(started_at) {}

ConditionalResult run_conditionally(BackendAdapter& adapter, const ResourceConstraint& constraint,
                                    const BranchCallback& on_pass, const BranchCallback& on_fail,
                                    std::uint64_t shots, const Clock& clock) {
    if (shots == 0) {
        throw std::invalid_argument("run_conditionally needs at least one shot");
    }
    if (!on_pass || !on_fail) {
        throw std::invalid_argument("run_conditionally needs both callbacks");
    }

    ConditionalResult result;
    result.started_at = clock.now();
    try {
        result.introspection = constraint.evaluate(adapter, shots);
    } catch (...) {
        auto cause = std::current_exception();
        throw ExecutionError(ExecutionError::Stage::Introspection,
                             "constraint '" + constraint.name() + "' failed: " + describe(cause), cause, std::nullopt,
                             std::nullopt, result.started_at);
    }
    result.decided_at = clock.now();
    result.branch = result.introspection.passed ? Branch::Passed : Branch::Failed;

    const auto& callback = result.branch == Branch::Passed ? on_pass : on_fail;
    try {
        result.main_value = callback(adapter, result.introspection);
    } catch (...) {
        auto cause = std::current_exception();
        throw ExecutionError(ExecutionError::Stage::Callback,
                             std::string(result.branch == Branch::Passed ? "on_pass" : "on_fail") +
                                 " callback failed: " + describe(cause),
                             cause, result.introspection, result.branch, result.started_at);
    }
    result.finished_at = clock.now();
    return result;
}

}  // namespace resq
