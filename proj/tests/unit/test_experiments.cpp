#include <gtest/gtest.h>

#include <cmath>

#include "perfagent/experiments.hpp"
#include "perfagent/patch.hpp"
#include "support/support.hpp"

using namespace perfagent;
using testsupport::fenced_reply;
using testsupport::TempDir;

namespace {

const ToolchainConfig& tc() {
    static const ToolchainConfig t = ToolchainConfig::detect();
    return t;
}

AttemptRecord row(const std::string& id, const std::string& tool, CorrectnessCategory c, double s = 1.0,
                  Motif m = Motif::DenseLinearAlgebra, Experiment e = Experiment::EX1) {
    AttemptRecord r;
    r.benchmark_id = id;
    r.motif = m;
    r.experiment = e;
    r.tool_id = tool;
    r.variant_tag = "ex1";
    r.category = c;
    r.speedup = c == CorrectnessCategory::Correct ? s : 1.0;
    return r;
}

ExperimentOptions opts(const fs::path& work) {
    ExperimentOptions o;
    o.work_root = work;
    o.timestamp = "2024-01-01T00:00:00Z";
    return o;
}

std::string dot_variant(const std::string& body_line) {
    return "double dot(void) {\n    double s = 0.0;\n    " + body_line + "\n    return s;\n}";
}

}  // namespace

TEST(Aggregate, NaCountsAsOne) {
    ResultsTable t;
    t.add(row("a", "m", CorrectnessCategory::Correct, 2.0));
    t.add(row("b", "m", CorrectnessCategory::OutputMismatch));
    auto s = aggregate(t, {GroupKey::Tool});
    ASSERT_EQ(s.size(), 1u);
    EXPECT_DOUBLE_EQ(s[0].mean_speedup, 1.5);
    EXPECT_DOUBLE_EQ(s[0].pass_at_1, 0.5);
    EXPECT_EQ(s[0].n, 2u);
    EXPECT_EQ(s[0].group, (std::vector<std::pair<std::string, std::string>>{{"tool", "m"}}));
    auto g = aggregate(t, {GroupKey::Tool}, MeanKind::Geometric);
    EXPECT_NEAR(g[0].mean_speedup, std::sqrt(2.0), 1e-12);
}

TEST(Aggregate, AllNa) {
    ResultsTable t;
    t.add(row("a", "m", CorrectnessCategory::CompilationError));
    t.add(row("b", "m", CorrectnessCategory::NoGeneratedCode));
    auto s = aggregate(t, {});
    ASSERT_EQ(s.size(), 1u);
    EXPECT_DOUBLE_EQ(s[0].mean_speedup, 1.0);
    EXPECT_DOUBLE_EQ(s[0].pass_at_1, 0.0);
    EXPECT_EQ(s[0].category_counts.at(CorrectnessCategory::CompilationError), 1u);
}

TEST(Aggregate, PassAtOneFraction) {
    ResultsTable t;
    for (int i = 0; i < 20; ++i)
        t.add(row("b" + std::to_string(i), "m",
                  i < 18 ? CorrectnessCategory::Correct : CorrectnessCategory::FailedToFollowInstructions, 1.2));
    auto s = aggregate(t, {GroupKey::Tool});
    EXPECT_DOUBLE_EQ(s[0].pass_at_1, 0.90);
    EXPECT_NEAR(s[0].mean_speedup, (18 * 1.2 + 2.0) / 20.0, 1e-12);
}

TEST(Aggregate, GroupsSortedAndEmptyRejected) {
    ResultsTable t;
    t.add(row("a", "zeta", CorrectnessCategory::Correct, 1.1, Motif::Stencils));
    t.add(row("b", "alpha", CorrectnessCategory::Correct, 1.3, Motif::DenseLinearAlgebra));
    t.add(row("c", "alpha", CorrectnessCategory::Correct, 1.5, Motif::Stencils));
    auto s = aggregate(t, {GroupKey::Tool, GroupKey::Motif});
    ASSERT_EQ(s.size(), 3u);
    EXPECT_EQ(s[0].group[0].second, "alpha");
    EXPECT_EQ(s[0].group[1].second, "DenseLinearAlgebra");
    EXPECT_EQ(s[2].group[0].second, "zeta");
    EXPECT_THROW(aggregate(ResultsTable{}, {}), EmptyTable);
}

TEST(ResultsTable, DuplicateRowsRejected) {
    ResultsTable t;
    t.add(row("a", "m", CorrectnessCategory::Correct, 1.1));
    EXPECT_THROW(t.add(row("a", "m", CorrectnessCategory::Correct, 1.2)), DuplicateRow);
    EXPECT_NO_THROW(t.add(row("a", "other", CorrectnessCategory::Correct, 1.2)));
}

TEST(ResultsTable, JsonRoundTrip) {
    ResultsTable t;
    auto r = row("a", "m", CorrectnessCategory::Correct, 1.75, Motif::Stencils, Experiment::EX3);
    r.thread_results = std::map<int, std::optional<double>>{{4, 1.5}, {8, std::nullopt}};
    r.labels = {OptimizationLabel{OptimizationKind::LoopInterchange, "interchange"}};
    t.add(r);
    t.add(row("b", "m", CorrectnessCategory::OutputMismatch));
    t.provenance["note"] = "x";
    TempDir d("rt");
    save_results(d.path() / "r.json", t);
    auto back = load_results(d.path() / "r.json");
    EXPECT_EQ(to_json(back), to_json(t));
    ASSERT_TRUE(back.rows[0].thread_results);
    EXPECT_FALSE(back.rows[0].thread_results->at(8));

    auto bad = to_json(t.rows[1]);
    bad["speedup"] = 1.3;
    EXPECT_THROW(attempt_from_json(bad), Error);
}

TEST(Report, CsvShape) {
    ResultsTable t;
    t.add(row("a", "m", CorrectnessCategory::Correct, 1.5));
    auto r = row("b,quoted", "m", CorrectnessCategory::Correct, 2.0, Motif::Stencils, Experiment::EX3);
    r.thread_results = std::map<int, std::optional<double>>{{4, 1.5}, {32, std::nullopt}};
    t.add(r);
    auto csv = render_csv(t);
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
    EXPECT_NE(csv.find("\"b,quoted\""), std::string::npos);
    EXPECT_NE(csv.find(",1.500000,,,NA,"), std::string::npos);
    EXPECT_EQ(render_csv(ResultsTable{}).find('\n'), render_csv(ResultsTable{}).size() - 1);
}

TEST(Report, DeterministicAndComplete) {
    ResultsTable t;
    t.add(row("a", "m", CorrectnessCategory::Correct, 1.5));
    t.add(row("b", "m", CorrectnessCategory::CompilationError));
    auto s = aggregate(t, {GroupKey::Tool, GroupKey::Experiment});
    TempDir d("rep");
    for (auto f : {ReportFormat::Csv, ReportFormat::Markdown, ReportFormat::Json}) {
        auto p1 = emit_report(t, s, f, d.path() / "one");
        auto p2 = emit_report(t, s, f, d.path() / "two");
        EXPECT_EQ(p1.extension().string(), "." + std::string(extension(f)));
        EXPECT_EQ(testsupport::slurp(p1), testsupport::slurp(p2));
    }
    auto md = render_markdown(t, s);
    EXPECT_NE(md.find("| - Compilation errors | 1 | 1 |"), std::string::npos);
    EXPECT_NE(md.find("| **Total** | 2 | 2 |"), std::string::npos);
    EXPECT_NE(md.find("| tool=m, experiment=EX1 | 2 | 1.25 | 0.50 |"), std::string::npos);
    auto j = nlohmann::json::parse(render_json(t, s));
    EXPECT_EQ(j["rows"].size(), 2u);
    EXPECT_EQ(j["summaries"][0]["pass_at_1"], 0.5);
    // Headers only when there is nothing to summarize.
    auto empty = render_markdown(ResultsTable{}, {});
    EXPECT_NE(empty.find("## Summary"), std::string::npos);
}

TEST(Report, UnwritablePath) {
    TempDir d("unw");
    testsupport::spit(d.path() / "file", "x");
    ResultsTable t;
    EXPECT_THROW(emit_report(t, {}, ReportFormat::Csv, d.path() / "file" / "sub" / "r"), UnwritablePath);
}

TEST(Experiments, Ex1ProseOnlyIsNa) {
    TempDir work("ex1-prose");
    auto p = testsupport::replay({"You could vectorize the loop with SIMD intrinsics."});
    auto t = run_ex1({testsupport::fixture_bench("vecsum")}, *p, tc(), opts(work.path()));
    ASSERT_EQ(t.rows.size(), 1u);
    EXPECT_EQ(t.rows[0].category, CorrectnessCategory::NoGeneratedCode);
    EXPECT_DOUBLE_EQ(t.rows[0].speedup, 1.0);
    EXPECT_TRUE(t.rows[0].na());
    EXPECT_EQ(t.rows[0].tool_id, "replay");
    EXPECT_EQ(t.provenance["timestamp"], "2024-01-01T00:00:00Z");
}

TEST(Experiments, Ex1OneRowPerBenchmark) {
    TempDir work("ex1-two");
    auto vec = testsupport::fixture_bench("vecsum");
    auto src = testsupport::slurp(vec.root / "vecsum.c");
    auto p = testsupport::replay({fenced_reply(src, "Unchanged."),
                                  fenced_reply(dot_variant("for (int i = 0; i < N; i++) s += x[i] * y[i] + 1.0;"),
                                               "Added a bias.")});
    auto sl = testsupport::fixture_bench("sleeper");
    auto t = run_ex1({vec, sl}, *p, tc(), opts(work.path()));
    ASSERT_EQ(t.rows.size(), 2u);
    EXPECT_EQ(t.rows[0].benchmark_id, "vecsum");
    EXPECT_EQ(t.rows[0].category, CorrectnessCategory::Correct);
    EXPECT_GT(t.rows[0].speedup, 0.0);
    // A lone function is not a whole program.
    EXPECT_TRUE(t.rows[1].na());
    EXPECT_THROW(run_ex1({}, *p, tc(), opts(work.path())), EmptySelection);
}

TEST(Experiments, Ex3RequiresParallelism) {
    TempDir work("ex3");
    auto vec = testsupport::fixture_bench("vecsum");
    // Serial-code experiments send and expect whole files.
    auto src = testsupport::slurp(vec.root / "vecsum.c");
    const std::string loop = "    for (int i = 0; i < N; i++) s += x[i] * y[i];";
    auto par = testsupport::replace_once(src, loop, "#pragma omp parallel for reduction(+:s)\n" + loop);
    auto ser = testsupport::replace_once(src, "x[i] * y[i];", "y[i] * x[i];");
    auto o = opts(work.path());
    o.thread_counts = {1, 2};
    auto p = testsupport::replay({fenced_reply(par, "Parallel reduction."), fenced_reply(ser, "Swapped.")});
    auto t1 = run_ex3({vec}, *p, tc(), o);
    ASSERT_EQ(t1.rows.size(), 1u);
    EXPECT_EQ(t1.rows[0].category, CorrectnessCategory::Correct);
    ASSERT_TRUE(t1.rows[0].thread_results);
    EXPECT_EQ(t1.rows[0].thread_results->size(), 2u);
    EXPECT_TRUE(t1.rows[0].thread_results->at(2));
    o.work_root = work.path() / "second";
    auto t2 = run_ex3({vec}, *p, tc(), o);
    EXPECT_EQ(t2.rows[0].category, CorrectnessCategory::FailedToFollowInstructions);
}

TEST(Import, EmptyDirAndBrokenTree) {
    TempDir work("imp");
    auto vec = testsupport::fixture_bench("vecsum");
    fs::create_directories(work.path() / "ext");
    auto t = import_external_tool_results(work.path() / "ext", "polly", {vec}, tc(), opts(work.path() / "w"));
    EXPECT_TRUE(t.rows.empty());

    testsupport::spit(work.path() / "ext/vecsum/vecsum.c", "double dot(void) { return 0.0 }\n");
    t = import_external_tool_results(work.path() / "ext", "polly", {vec}, tc(), opts(work.path() / "w"));
    ASSERT_EQ(t.rows.size(), 1u);
    EXPECT_EQ(t.rows[0].category, CorrectnessCategory::CompilationError);
    EXPECT_EQ(t.rows[0].tool_id, "polly");
    EXPECT_EQ(t.rows[0].experiment, Experiment::EX1);
}

TEST(Import, OverlayKeepsUntouchedFiles) {
    TempDir work("imp2");
    auto vec = testsupport::fixture_bench("vecsum");
    auto src = testsupport::slurp(vec.root / "vecsum.c");
    testsupport::spit(work.path() / "ext/vecsum/vecsum.c", src);
    auto t = import_external_tool_results(work.path() / "ext", "same", {vec}, tc(), opts(work.path() / "w"),
                                          Experiment::EX2);
    ASSERT_EQ(t.rows.size(), 1u);
    EXPECT_EQ(t.rows[0].category, CorrectnessCategory::Correct);
    EXPECT_EQ(t.rows[0].experiment, Experiment::EX2);
}
