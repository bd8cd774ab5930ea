// perfagent command-line driver.
#include <cstdio>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "perfagent/agent.hpp"
#include "perfagent/experiments.hpp"

using namespace perfagent;

namespace {

struct Common {
    std::string root = "benchmarks";
    std::string select;
    std::string toolchain;
    std::string work = "work";
    std::string compiler;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--root", c.root, "Benchmark tree (directories holding benchmark.json)");
    cmd->add_option("--select", c.select, "Selector, e.g. 'level=1;motif=Stencils;id=matmul'");
    cmd->add_option("--toolchain", c.toolchain, "Toolchain config JSON (default: probe PATH)");
    cmd->add_option("--work", c.work, "Working directory for variants");
    cmd->add_option("--compiler", c.compiler, "Compiler id overriding the manifests");
}

std::vector<BenchmarkSpec> selection(const Common& c) { return select(load_manifest(c.root), parse_select(c.select)); }

ToolchainConfig toolchain(const Common& c) {
    return c.toolchain.empty() ? ToolchainConfig::detect() : ToolchainConfig::load(c.toolchain);
}

ExperimentOptions options(const Common& c) {
    ExperimentOptions o;
    o.work_root = c.work;
    if (!c.compiler.empty()) o.compiler_id = c.compiler;
    return o;
}

void print_summary(const ResultsTable& t) {
    for (const auto& r : t.rows)
        std::printf("%-16s %-4s %-28s %-12s %.2f%s\n", r.benchmark_id.c_str(), std::string(to_string(r.experiment)).c_str(),
                    std::string(to_string(r.category)).c_str(), r.variant_tag.c_str(), r.speedup, r.na() ? " (NA)" : "");
    if (t.provenance.contains("errors"))
        for (const auto& e : t.provenance["errors"]) std::fprintf(stderr, "skipped: %s\n", e.get<std::string>().c_str());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Benchmark harness for model-driven performance optimization"};
    app.require_subcommand(1);

    // bench
    Common bench_c;
    auto* bench = app.add_subcommand("bench", "Inspect and prepare benchmarks");
    bench->require_subcommand(1);
    auto* bench_list = bench->add_subcommand("list", "List benchmarks");
    add_common(bench_list, bench_c);
    auto* bench_prep = bench->add_subcommand("prepare", "Write prepared sources");
    add_common(bench_prep, bench_c);
    std::string prep_out = "prepared";
    bench_prep->add_option("--out", prep_out, "Output directory");

    // ex1 / ex2 / ex3
    struct ExArgs {
        Common c;
        std::string provider;
        std::string out = "results.json";
        int jobs = 1;
        std::vector<int> counts{4, 8, 16, 32};
    };
    ExArgs ex_args[3];
    CLI::App* ex_cmds[3];
    const char* ex_names[3] = {"ex1", "ex2", "ex3"};
    const char* ex_desc[3] = {"Single serial optimization", "Five-turn serial optimization conversation",
                              "Parallel optimization with a thread sweep"};
    for (int i = 0; i < 3; ++i) {
        ex_cmds[i] = app.add_subcommand(ex_names[i], ex_desc[i]);
        add_common(ex_cmds[i], ex_args[i].c);
        ex_cmds[i]->add_option("--provider", ex_args[i].provider, "Provider config JSON")->required();
        ex_cmds[i]->add_option("--out", ex_args[i].out, "Results JSON");
        ex_cmds[i]->add_option("--jobs", ex_args[i].jobs, "Benchmarks processed concurrently");
    }
    ex_cmds[2]->add_option("--counts", ex_args[2].counts, "Thread counts")->delimiter(',');

    // import-tool
    Common imp_c;
    std::string imp_dir, imp_tool = "external", imp_out = "results.json", imp_exp = "EX1";
    auto* imp = app.add_subcommand("import-tool", "Measure externally optimized source trees");
    add_common(imp, imp_c);
    imp->add_option("--dir", imp_dir, "Directory with one subdirectory per benchmark id")->required();
    imp->add_option("--tool-id", imp_tool, "Tool tag for the rows");
    imp->add_option("--experiment", imp_exp, "Experiment column for the rows (EX1, EX2, EX3)");
    imp->add_option("--out", imp_out, "Results JSON");

    // agent
    Common ag_c;
    std::string ag_bench, ag_provider, ag_profiles, ag_profiler, ag_policy = "last";
    int ag_iters = 3;
    std::optional<int> ag_threads;
    auto* agent = app.add_subcommand("agent", "Profile-guided iterative optimization of one benchmark");
    add_common(agent, ag_c);
    agent->add_option("--bench", ag_bench, "Benchmark id")->required();
    agent->add_option("--provider", ag_provider, "Provider config JSON")->required();
    agent->add_option("--max-iters", ag_iters, "Iteration threshold");
    agent->add_option("--profiles", ag_profiles, "Directory of pre-collected cct-v1 profiles");
    agent->add_option("--profiler-cmd", ag_profiler,
                      "Profiler command printing cct-v1 JSON; {binary} {src} {variant} {metrics} are substituted");
    agent->add_option("--base-policy", ag_policy, "last|best")->check(CLI::IsMember({"last", "best"}));
    agent->add_option("--threads", ag_threads, "Thread count for timed runs");

    // report
    std::vector<std::string> rep_in;
    std::vector<std::string> rep_formats{"csv", "markdown", "json"};
    std::string rep_out = "report", rep_group = "tool,experiment";
    bool rep_geo = false;
    auto* report = app.add_subcommand("report", "Render results tables");
    report->add_option("--in", rep_in, "Results JSON files (merged)")->required();
    report->add_option("--format", rep_formats, "csv, markdown, json")->delimiter(',');
    report->add_option("--out", rep_out, "Output path stem");
    report->add_option("--group-by", rep_group, "Comma list of tool, motif, experiment");
    report->add_flag("--geometric", rep_geo, "Geometric instead of arithmetic mean");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*bench_list) {
            for (const auto& s : selection(bench_c))
                std::printf("%-16s L%d %-4s %s\n", s.id.c_str(), s.level, std::string(to_string(s.language)).c_str(),
                            std::string(to_string(s.motif)).c_str());
        } else if (*bench_prep) {
            for (const auto& s : selection(bench_c)) {
                auto dir = prepare_sources(s, fs::path(prep_out) / s.id);
                std::printf("%s -> %s\n", s.id.c_str(), dir.c_str());
            }
        }
        for (int i = 0; i < 3; ++i) {
            if (!*ex_cmds[i]) continue;
            auto& a = ex_args[i];
            auto opts = options(a.c);
            opts.jobs = a.jobs;
            opts.thread_counts = a.counts;
            auto provider = load_provider(a.provider);
            auto specs = selection(a.c);
            auto tc = toolchain(a.c);
            ResultsTable t = i == 0 ? run_ex1(specs, *provider, tc, opts)
                           : i == 1 ? run_ex2(specs, *provider, tc, opts)
                                    : run_ex3(specs, *provider, tc, opts);
            save_results(a.out, t);
            print_summary(t);
        }
        if (*imp) {
            auto exp = experiment_from_string(imp_exp);
            if (!exp || *exp == Experiment::Agent) throw Error("--experiment must be EX1, EX2 or EX3");
            auto t = import_external_tool_results(imp_dir, imp_tool, selection(imp_c), toolchain(imp_c),
                                                  options(imp_c), *exp);
            save_results(imp_out, t);
            print_summary(t);
        }
        if (*agent) {
            auto specs = select(load_manifest(ag_c.root), parse_select("id=" + ag_bench));
            if (specs.empty()) throw Error("no benchmark with id " + ag_bench);
            ProfileSource source;
            if (!ag_profiles.empty()) {
                source = directory_profile_source(ag_profiles);
            } else if (!ag_profiler.empty()) {
                std::istringstream ss(ag_profiler);
                std::vector<std::string> argv_words;
                for (std::string w; ss >> w;) argv_words.push_back(w);
                source = command_profile_source(argv_words);
            }
            AgentConfig cfg;
            cfg.max_iterations = ag_iters;
            cfg.base_policy = ag_policy == "best" ? BasePolicy::BestCorrect : BasePolicy::LastCorrect;
            cfg.env_context.threads = ag_threads;
            cfg.work_root = ag_c.work;
            if (!ag_c.compiler.empty()) cfg.compiler_id = ag_c.compiler;
            auto provider = load_provider(ag_provider);
            cfg.provider_id = provider->id();
            auto trace = run_agent(specs.front(), source, *provider, toolchain(ag_c), cfg);
            for (const auto& it : trace.iterations)
                std::printf("iteration %d  %-18s %-28s %s\n", it.index, it.hotspot.c_str(),
                            std::string(to_string(it.category)).c_str(),
                            it.speedup_vs_original ? std::to_string(it.speedup_vs_original->speedup).c_str() : "NA");
            std::printf("stop: %s\n", std::string(to_string(trace.stop_reason)).c_str());
            if (!trace.fatal_error.empty()) std::fprintf(stderr, "%s\n", trace.fatal_error.c_str());
            std::printf("trace: %s\n", (fs::path(ag_c.work) / ag_bench / "agent" / "trace.json").c_str());
            return trace.stop_reason == StopReason::FatalError ? 1 : 0;
        }
        if (*report) {
            ResultsTable t;
            for (const auto& f : rep_in) t.merge(load_results(f));
            std::vector<GroupKey> keys;
            std::istringstream ss(rep_group);
            for (std::string k; std::getline(ss, k, ',');) {
                if (k.empty()) continue;
                auto g = group_key_from_string(k);
                if (!g) throw Error("unknown group key: " + k);
                keys.push_back(*g);
            }
            std::vector<SummaryRow> summaries;
            if (!t.rows.empty()) summaries = aggregate(t, keys, rep_geo ? MeanKind::Geometric : MeanKind::Arithmetic);
            for (const auto& f : rep_formats) {
                auto fmt = report_format_from_string(f);
                if (!fmt) throw Error("unknown report format: " + f);
                std::printf("%s\n", emit_report(t, summaries, *fmt, rep_out).c_str());
            }
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "perfagent: %s\n", e.what());
        return 1;
    }
    return 0;
}
