#include <gtest/gtest.h>

#include <cmath>

#include "perfagent/toolchain.hpp"
#include "support/support.hpp"

using namespace perfagent;
using testsupport::TempDir;

namespace {

const ToolchainConfig& tc() {
    static const ToolchainConfig t = ToolchainConfig::detect();
    return t;
}

RunSample sample(std::vector<double> t) {
    RunSample s;
    s.wall_times_s = std::move(t);
    return s;
}

}  // namespace

TEST(Toolchain, DetectsGcc) {
    auto& e = tc().resolve("gcc");
    EXPECT_FALSE(e.c_path.empty());
    EXPECT_FALSE(e.version_string.empty());
    EXPECT_THROW(tc().resolve("icx-not-here"), ToolNotFound);
}

TEST(Toolchain, JsonRoundTrip) {
    auto again = ToolchainConfig::from_json(tc().to_json());
    EXPECT_EQ(again.to_json(), tc().to_json());
}

TEST(Toolchain, VariantLayoutNests) {
    auto l = variant_layout("w", "cg", "agent/iter2");
    EXPECT_EQ(l.dir, fs::path("w/cg/agent/iter2"));
    EXPECT_EQ(l.bin(), fs::path("w/cg/agent/iter2/bin"));
}

TEST(Toolchain, CompileRunAndSweep) {
    TempDir work("tc");
    auto spec = testsupport::fixture_bench("vecsum");
    auto b = compile(spec, spec.root, tc(), work.path(), "original");
    ASSERT_TRUE(b.ok()) << b.stderr_text;
    EXPECT_TRUE(fs::exists(work.path() / "vecsum/original/logs/build.log"));
    EXPECT_TRUE(fs::exists(work.path() / "vecsum/original/src/vecsum.c"));
    EXPECT_NE(b.command_line.find("-O2"), std::string::npos);

    auto s = run_timed(*b.binary_path, spec.run, RunOptions{1, std::nullopt});
    ASSERT_TRUE(s.ok());
    EXPECT_EQ(s.wall_times_s.size(), 3u);
    EXPECT_EQ(s.stdout_text.rfind("dot ", 0), 0u);
    EXPECT_GT(s.mean(), 0.0);
    EXPECT_LE(s.min(), s.mean());

    auto sweep = thread_sweep(*b.binary_path, spec.run, {8, 2, 2, 1});
    std::vector<int> counts;
    for (const auto& [c, smp] : sweep) {
        counts.push_back(c);
        EXPECT_EQ(smp.thread_count, c);
        EXPECT_TRUE(smp.ok());
    }
    EXPECT_EQ(counts, (std::vector<int>{1, 2, 8}));
}

TEST(Toolchain, CompileErrorIsAnOutcome) {
    TempDir work("tc-err");
    auto spec = testsupport::fixture_bench("vecsum");
    testsupport::spit(work.path() / "src" / "vecsum.c", "int main(void) { return 0 }\n");
    auto b = compile(spec, work.path() / "src", tc(), work.path(), "broken");
    EXPECT_FALSE(b.ok());
    EXPECT_FALSE(b.binary_path);
    EXPECT_NE(b.stderr_text.find("error"), std::string::npos);
}

TEST(Toolchain, CrashAndTimeoutRecorded) {
    TempDir work("tc-crash");
    auto spec = testsupport::fixture_bench("vecsum");
    testsupport::spit(work.path() / "src" / "vecsum.c",
                      "#include <stdlib.h>\n#include <unistd.h>\nint main(int c, char** v) { if (c > 1) sleep(5); abort(); }\n");
    auto b = compile(spec, work.path() / "src", tc(), work.path(), "crash");
    ASSERT_TRUE(b.ok()) << b.stderr_text;
    auto crash = run_timed(*b.binary_path, spec.run);
    EXPECT_EQ(crash.status, RunStatus::Crash);
    EXPECT_EQ(crash.wall_times_s.size(), 0u);
    EXPECT_THROW(crash.mean(), EmptySample);

    RunRecipe slow = spec.run;
    slow.args = {"x"};
    slow.timeout_s = 0.2;
    auto to = run_timed(*b.binary_path, slow);
    EXPECT_EQ(to.status, RunStatus::Timeout);
}

TEST(Toolchain, SpeedupArithmetic) {
    auto s = measure_speedup(sample({25.0, 25.0}), sample({4.5, 4.66}));
    EXPECT_NEAR(s.speedup, 25.0 / 4.58, 1e-12);
    EXPECT_DOUBLE_EQ(s.baseline_mean_s, 25.0);
    EXPECT_DOUBLE_EQ(s.candidate_min_s, 4.5);
    EXPECT_NEAR(s.candidate_stddev_s, 0.08 * std::sqrt(2.0), 1e-12);  // sample stddev
    EXPECT_THROW(measure_speedup(sample({}), sample({1.0})), EmptySample);
    EXPECT_DOUBLE_EQ(speedup_from_means(10.0, 4.0), 2.5);
}
