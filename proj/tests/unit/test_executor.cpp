#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "resq/executor.hpp"
#include "test_support.hpp"

namespace resq {
namespace {

using testing::CountingAdapter;
using testing::ScriptedConstraint;
using Mode = ScriptedConstraint::Mode;

struct Calls {
    int pass = 0;
    int fail = 0;
};

BranchCallback counting(int& counter, BranchCallback inner = nullptr) {
    return [&counter, inner](BackendAdapter& a, const IntrospectionResult& r) -> std::any {
        ++counter;
        return inner ? inner(a, r) : std::any{};
    };
}

TEST(RunConditionally, PassRunsMainCircuit) {
    auto sim = testing::make_simulator(NoiseModel::noiseless(2));
    Calls calls;
    const ConstantConstraint always(true);
    auto main = [](BackendAdapter& a, const IntrospectionResult&) -> std::any { return a.run(phi_plus(), 1024); };
    const auto result = run_conditionally(*sim, always, counting(calls.pass, main), counting(calls.fail), 1024);
    EXPECT_EQ(result.branch, Branch::Passed);
    EXPECT_EQ(calls.pass, 1);
    EXPECT_EQ(calls.fail, 0);
    ASSERT_NE(result.main_result(), nullptr);
    EXPECT_EQ(result.main_result()->counts.total(), 1024u);
    EXPECT_LE(result.started_at, result.decided_at);
    EXPECT_LE(result.decided_at, result.finished_at);
}

TEST(RunConditionally, WernerNoiseTakesFailBranch) {
    auto sim = testing::make_simulator(NoiseModel{0.0, 0.3, 0.0, 12});
    const PackedChshTest constraint(minimum_acceptable_value(2.2));
    double observed = 0.0;
    int pass_calls = 0;
    auto on_fail = [&](BackendAdapter&, const IntrospectionResult& r) -> std::any {
        observed = r["CHSH_score"];
        return {};
    };
    const auto result = run_conditionally(*sim, constraint, counting(pass_calls), on_fail, 10000);
    EXPECT_EQ(result.branch, Branch::Failed);
    EXPECT_EQ(pass_calls, 0);
    EXPECT_NEAR(observed, 2.0 * std::numbers::sqrt2 * 0.7, 0.06);
    EXPECT_EQ(observed, result.introspection["CHSH_score"]);
    EXPECT_FALSE(result.has_main_value());
    EXPECT_EQ(result.main_result(), nullptr);
}

TEST(RunConditionally, ConstraintErrorRunsNoCallback) {
    auto sim = testing::make_simulator(NoiseModel{});
    const ScriptedConstraint thrower(Mode::Throw);
    Calls calls;
    try {
        run_conditionally(*sim, thrower, counting(calls.pass), counting(calls.fail), 10);
        FAIL();
    } catch (const ExecutionError& e) {
        EXPECT_EQ(e.stage(), ExecutionError::Stage::Introspection);
        EXPECT_FALSE(e.introspection().has_value());
        EXPECT_FALSE(e.branch().has_value());
        EXPECT_THROW(e.rethrow_nested(), std::runtime_error);
    }
    EXPECT_EQ(calls.pass + calls.fail, 0);
}

TEST(RunConditionally, CallbackErrorKeepsDecision) {
    auto sim = testing::make_simulator(NoiseModel{});
    const ConstantConstraint never(false);
    auto boom = [](BackendAdapter&, const IntrospectionResult&) -> std::any { throw std::logic_error("boom"); };
    int pass_calls = 0;
    try {
        run_conditionally(*sim, never, counting(pass_calls), boom, 10);
        FAIL();
    } catch (const ExecutionError& e) {
        EXPECT_EQ(e.stage(), ExecutionError::Stage::Callback);
        ASSERT_TRUE(e.branch().has_value());
        EXPECT_EQ(*e.branch(), Branch::Failed);
        ASSERT_TRUE(e.introspection().has_value());
        EXPECT_EQ(e.introspection()->constraint_name, "AlwaysFail");
        EXPECT_THROW(e.rethrow_nested(), std::logic_error);
    }
    EXPECT_EQ(pass_calls, 0);
}

TEST(RunConditionally, OpaqueCallbackValues) {
    auto sim = testing::make_simulator(NoiseModel{});
    const ConstantConstraint always(true);
    auto label = [](BackendAdapter&, const IntrospectionResult&) -> std::any { return std::string("deferred"); };
    const auto result = run_conditionally(*sim, always, label, label, 10);
    EXPECT_TRUE(result.has_main_value());
    EXPECT_EQ(result.main_result(), nullptr);
    EXPECT_EQ(std::any_cast<std::string>(result.main_value), "deferred");
}

TEST(RunConditionally, CallbackSeesSameAdapterAndResult) {
    auto sim = testing::make_simulator(NoiseModel::noiseless(1));
    CountingAdapter adapter(*sim);
    const PackedChshTest constraint(minimum_acceptable_value(2.2));
    const BackendAdapter* seen_adapter = nullptr;
    IntrospectionResult seen;
    auto capture = [&](BackendAdapter& a, const IntrospectionResult& r) -> std::any {
        seen_adapter = &a;
        seen = r;
        return {};
    };
    const auto result = run_conditionally(adapter, constraint, capture, capture, 2000);
    EXPECT_EQ(seen_adapter, &adapter);
    EXPECT_EQ(seen, result.introspection);
    EXPECT_EQ(adapter.runs, 1);
}

TEST(RunConditionally, RejectsBadArguments) {
    auto sim = testing::make_simulator(NoiseModel{});
    const ConstantConstraint always(true);
    auto noop = [](BackendAdapter&, const IntrospectionResult&) -> std::any { return {}; };
    EXPECT_THROW(run_conditionally(*sim, always, noop, noop, 0), std::invalid_argument);
    EXPECT_THROW(run_conditionally(*sim, always, nullptr, noop, 1), std::invalid_argument);
}

TEST(RunConditionally, UsesInjectedClock) {
    auto sim = testing::make_simulator(NoiseModel{});
    ManualClock clock(testing::at_seconds(500));
    const ConstantConstraint always(true);
    auto noop = [](BackendAdapter&, const IntrospectionResult&) -> std::any { return {}; };
    const auto result = run_conditionally(*sim, always, noop, noop, 1, clock);
    EXPECT_EQ(result.started_at, testing::at_seconds(500));
    EXPECT_EQ(result.finished_at, testing::at_seconds(500));
}

}  // namespace
}  // namespace resq
