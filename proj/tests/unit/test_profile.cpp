#include <gtest/gtest.h>

#include "perfagent/profile.hpp"
#include "support/support.hpp"

using namespace perfagent;

namespace {

ProfileTree fixture(const std::string& name) {
    return import_profile(std::string_view(testsupport::slurp(testsupport::fixtures() / "profiles" / name)));
}

nlohmann::json doc_with(nlohmann::json root) {
    return {{"schema", "cct-v1"},
            {"metrics", {{{"id", "time_excl"}, {"unit", "s"}, {"kind", "exclusive"}},
                         {{"id", "time_incl"}, {"unit", "s"}, {"kind", "inclusive"}}}},
            {"roots", {root}}};
}

}  // namespace

TEST(Profile, CgShapedHotspot) {
    auto t = fixture("npb_cg.json");
    EXPECT_DOUBLE_EQ(t.total.at("time_excl"), 25.0);
    auto h = hotspot(t);
    EXPECT_EQ(h.frame().function, "conj_grad");
    EXPECT_NEAR(h.share, 0.88, 1e-12);
    EXPECT_EQ(function_chain(h), (std::vector<std::string>{"main", "conj_grad"}));
    auto ranked = rank_nodes(t, "time_excl");
    ASSERT_EQ(ranked.size(), 3u);
    EXPECT_EQ(ranked[1].frame().function, "main");
    EXPECT_EQ(ranked[2].frame().function, "makea");
}

TEST(Profile, XsbenchShare) {
    auto h = hotspot(fixture("xsbench.json"));
    EXPECT_EQ(h.frame().function, "calculate_macro_xs");
    EXPECT_NEAR(h.share, 28.3 / 39.5, 1e-12);
    EXPECT_EQ(hotspot(fixture("xsbench.json"), "l1_dcache_miss_excl").frame().function, "calculate_macro_xs");
}

TEST(Profile, TiesKeepPreorder) {
    auto d = doc_with({{"frame", {{"fn", "main"}}},
                       {"metrics", {{"time_excl", 0.0}, {"time_incl", 2.0}}},
                       {"children", {{{"frame", {{"fn", "a"}}}, {"metrics", {{"time_excl", 1.0}, {"time_incl", 1.0}}}},
                                     {{"frame", {{"fn", "b"}}}, {"metrics", {{"time_excl", 1.0}, {"time_incl", 1.0}}}}}}});
    auto t = import_profile(d);
    EXPECT_EQ(hotspot(t).frame().function, "a");
}

TEST(Profile, RoundTrip) {
    for (const char* f : {"npb_cg.json", "xsbench.json", "single.json"}) {
        auto a = fixture(f);
        auto b = import_profile(export_profile(a));
        EXPECT_EQ(a, b) << f;
        EXPECT_EQ(export_profile(a), export_profile(b)) << f;
    }
}

TEST(Profile, SchemaViolations) {
    auto d = doc_with({{"frame", {{"fn", "main"}}}, {"metrics", {{"time_excl", 1.0}, {"time_incl", 1.0}}}});
    auto bad = d;
    bad["schema"] = "cct-v0";
    EXPECT_THROW(import_profile(bad), SchemaViolation);
    bad = d;
    bad["roots"][0]["frame"].erase("fn");
    try {
        import_profile(bad);
        FAIL();
    } catch (const SchemaViolation& e) {
        EXPECT_EQ(e.path, "/roots/0/frame/fn");
    }
    bad = d;
    bad["roots"][0]["metrics"]["time_excl"] = -1.0;
    EXPECT_THROW(import_profile(bad), NegativeMetric);
    bad = d;
    bad["roots"][0]["metrics"]["undeclared"] = 1.0;
    EXPECT_THROW(import_profile(bad), SchemaViolation);
    bad = d;
    bad["roots"][0]["metrics"]["time_excl"] = 2.0;  // exclusive above inclusive
    EXPECT_THROW(import_profile(bad), SchemaViolation);
    bad = d;
    bad["totals"] = {{"time_excl", 5.0}};
    EXPECT_THROW(import_profile(bad), SchemaViolation);
    EXPECT_THROW(import_profile(std::string_view("{not json")), SchemaViolation);
}

TEST(Profile, UnknownMetric) {
    auto t = fixture("npb_cg.json");
    EXPECT_THROW(hotspot(t, "cycles"), UnknownMetric);
    EXPECT_THROW(hotspot(t, "time_incl"), UnknownMetric);
}

TEST(Profile, SummaryFormatAndBudget) {
    auto t = fixture("npb_cg.json");
    RunContext env;
    env.threads = 4;
    env.hardware = "test box";
    auto s = summarize_for_model(t, env, SummaryOptions{});
    EXPECT_EQ(s.rfind("Hotspots by time_excl (total 25 s):\n1. conj_grad (cg.c:410) 88.0% of time_excl [22 s]", 0), 0u)
        << s;
    EXPECT_NE(s.find("Execution context:\n  threads: 4\n  hardware: test box\n"), std::string::npos);
    EXPECT_EQ(s, summarize_for_model(t, env, SummaryOptions{}));

    SummaryOptions tiny;
    tiny.char_budget = 90;
    auto cut = summarize_for_model(t, env, tiny);
    EXPECT_LE(cut.size(), 90u);
    EXPECT_NE(cut.find(kTruncationMarker), std::string::npos);
    EXPECT_EQ(cut.back(), '\n');

    SummaryOptions one;
    one.top_k = 1;
    auto s1 = summarize_for_model(t, {}, one);
    EXPECT_EQ(s1.find("2. "), std::string::npos);
    EXPECT_EQ(s1.find("Execution context"), std::string::npos);
}

TEST(Profile, DiffMetrics) {
    auto before = fixture("npb_cg.json");
    auto after = before;
    after.roots[0].children[0].metrics["time_excl"] = 11.0;
    auto d = diff_metrics(before, after, {"main", "conj_grad"});
    ASSERT_TRUE(d.contains("time_excl"));
    EXPECT_DOUBLE_EQ(d["time_excl"].before, 22.0);
    EXPECT_DOUBLE_EQ(d["time_excl"].after, 11.0);
    EXPECT_NEAR(*d["time_excl"].relative_change, -0.5, 1e-12);
    EXPECT_THROW(diff_metrics(before, after, {"main", "renamed"}), NodeNotFound);
}

TEST(Profile, ExclusiveSumsMatchTotals) {
    for (const char* f : {"npb_cg.json", "xsbench.json"}) {
        auto t = fixture(f);
        EXPECT_NEAR(sum_over_nodes(t, "time_excl"), t.total.at("time_excl"), 1e-9) << f;
    }
    EXPECT_DOUBLE_EQ(hotspot(fixture("single.json")).share, 1.0);
}
