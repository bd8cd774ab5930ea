#include <gtest/gtest.h>

#include "perfagent/verify.hpp"
#include "support/properties.hpp"

using namespace perfagent;
using C = CorrectnessCategory;

namespace {

ValidationPolicy numeric(double rel, double abs = 0.0) {
    ValidationPolicy p;
    p.mode = ValidationMode::NumericTokens;
    p.rel_tol = rel;
    p.abs_tol = abs;
    return p;
}

BuildOutcome built(bool ok) {
    BuildOutcome b;
    b.status = ok ? BuildStatus::Ok : BuildStatus::CompileError;
    if (ok) b.binary_path = "a.out";
    return b;
}

RunSample ran(RunStatus s = RunStatus::Ok) {
    RunSample r;
    r.status = s;
    if (s == RunStatus::Ok) r.wall_times_s = {1.0};
    return r;
}

MatchReport matched(bool m) {
    MatchReport r;
    r.matched = m;
    return r;
}

}  // namespace

TEST(Compare, ExactBytesReportsLineAndColumn) {
    auto r = compare_outputs("a 1\nb 2\n", "a 1\nb 3\n", ValidationPolicy{});
    EXPECT_FALSE(r.matched);
    ASSERT_TRUE(r.first_divergence);
    EXPECT_EQ(r.first_divergence->line, 2u);
    EXPECT_EQ(r.first_divergence->token_index, 3u);
    EXPECT_TRUE(compare_outputs("x\n", "x\n", ValidationPolicy{}).matched);
}

TEST(Compare, NumericTolerance) {
    EXPECT_TRUE(compare_outputs("sum 1.0000001", "sum 1.0", numeric(1e-6)).matched);
    EXPECT_FALSE(compare_outputs("sum 1.001", "sum 1.0", numeric(1e-6)).matched);
    EXPECT_TRUE(compare_outputs("0.0", "1e-13", numeric(0.0, 1e-12)).matched);
    EXPECT_TRUE(compare_outputs("x  1.5\n", "x 1.50\n", numeric(0.0)).matched);
    EXPECT_FALSE(compare_outputs("label 1", "other 1", numeric(1.0)).matched);
}

TEST(Compare, NanAndInfinity) {
    EXPECT_TRUE(compare_outputs("nan inf -inf", "NaN inf -inf", numeric(0.1)).matched);
    EXPECT_FALSE(compare_outputs("inf", "-inf", numeric(10.0)).matched);
    EXPECT_FALSE(compare_outputs("nan", "1.0", numeric(10.0)).matched);
}

TEST(Compare, TokenCountMismatch) {
    auto r = compare_outputs("1 2 3", "1 2", numeric(0.1));
    EXPECT_FALSE(r.matched);
    ASSERT_TRUE(r.first_divergence);
    EXPECT_EQ(r.first_divergence->token_index, 3u);
    EXPECT_EQ(r.first_divergence->candidate_excerpt, "<end of output>");
}

TEST(Compare, IgnorePatterns) {
    ValidationPolicy p;
    p.ignore_patterns = {"^Time", "elapsed"};
    EXPECT_TRUE(compare_outputs("Time 1.2\nres 5\n", "Time 9.9\nres 5\nelapsed 3\n", p).matched);
    EXPECT_EQ(filter_lines("a\nTime x\nb", {"^Time"}), "a\nb");
}

TEST(Compare, RandomizedProperties) {
    auto rep = testsupport::comparator_properties(200, 11);
    EXPECT_EQ(rep.failures, 0) << rep.first_failure;
}

TEST(Classify, Precedence) {
    std::set<ConstraintFlag> none, flagged{ConstraintFlag::RemovedFunction};
    EXPECT_EQ(classify_attempt(std::nullopt, {false}, std::nullopt, std::nullopt, flagged), C::NoGeneratedCode);
    EXPECT_EQ(classify_attempt(built(false), {true}, std::nullopt, std::nullopt, flagged), C::CompilationError);
    EXPECT_EQ(classify_attempt(built(true), {true}, std::nullopt, std::nullopt, flagged),
              C::FailedToFollowInstructions);
    EXPECT_EQ(classify_attempt(built(true), {true}, ran(), matched(false), flagged), C::FailedToFollowInstructions);
    EXPECT_EQ(classify_attempt(built(true), {true}, ran(), matched(false), none), C::OutputMismatch);
    EXPECT_EQ(classify_attempt(built(true), {true}, ran(RunStatus::Crash), std::nullopt, none), C::OutputMismatch);
    EXPECT_EQ(classify_attempt(built(true), {true}, ran(RunStatus::Timeout), std::nullopt, none), C::OutputMismatch);
    EXPECT_EQ(classify_attempt(built(true), {true}, ran(), matched(true), none), C::Correct);
}

TEST(Classify, InconsistentInputs) {
    std::set<ConstraintFlag> none;
    EXPECT_THROW(classify_attempt(std::nullopt, {true}, std::nullopt, std::nullopt, none), InconsistentInputs);
    EXPECT_THROW(classify_attempt(built(false), {true}, ran(), std::nullopt, none), InconsistentInputs);
    EXPECT_THROW(classify_attempt(built(true), {true}, std::nullopt, matched(true), none), InconsistentInputs);
    EXPECT_THROW(classify_attempt(built(true), {true}, ran(), std::nullopt, none), InconsistentInputs);
    EXPECT_THROW(classify_attempt(built(true), {false}, std::nullopt, std::nullopt, none), InconsistentInputs);
}

TEST(PassAt1, Fractions) {
    EXPECT_THROW(pass_at_1({}), EmptyList);
    EXPECT_EQ(pass_at_1({C::Correct, C::OutputMismatch}), 0.5);
    EXPECT_EQ(pass_at_1({C::NoGeneratedCode}), 0.0);
    std::vector<C> l32(14, C::Correct);
    l32.insert(l32.end(), 6, C::OutputMismatch);
    EXPECT_EQ(pass_at_1(l32), 0.7);
}

TEST(Categories, OrderAndNames) {
    const auto& all = all_categories();
    ASSERT_EQ(all.size(), 5u);
    EXPECT_EQ(all.back(), C::Correct);
    for (auto c : all) EXPECT_EQ(category_from_string(to_string(c)), c);
}
