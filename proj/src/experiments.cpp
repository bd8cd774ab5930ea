#include "perfagent/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <future>
#include <sstream>

#include "perfagent/json_io.hpp"

namespace perfagent {

namespace {

std::string read_text(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error("cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const fs::path& p, std::string_view text) {
    fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + p.string());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

std::string row_key(const AttemptRecord& r) {
    return r.benchmark_id + "|" + std::string(to_string(r.experiment)) + "|" + r.tool_id + "|" + r.variant_tag;
}

std::string now_utc() {
    auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// Serial and parallel experiments time everything against the same
// original build at one thread.
constexpr int kBaselineThreads = 1;

struct Baseline {
    fs::path src_dir;
    fs::path binary;
    RunSample sample;
    std::string primary;       // relative path of the file shown to the model
    std::string primary_text;  // its prepared contents
};

class BaselineFailure : public Error {
public:
    using Error::Error;
};

Baseline make_baseline(const BenchmarkSpec& spec, const ToolchainConfig& tc, const ExperimentOptions& opts) {
    auto layout = variant_layout(opts.work_root, spec.id, "original");
    fs::remove_all(layout.dir);
    prepare_sources(spec, layout.src());
    BuildOutcome b;
    try {
        b = compile(spec, layout.src(), tc, opts.work_root, "original", opts.compiler_id);
    } catch (const BuildTimeout& e) {
        throw BaselineFailure(std::string("baseline build timed out: ") + e.what());
    }
    if (!b.ok()) throw BaselineFailure("baseline build failed: " + b.stderr_text.substr(0, 2000));
    Baseline base;
    base.src_dir = layout.src();
    base.binary = *b.binary_path;
    base.sample = run_timed(base.binary, spec.run, RunOptions{kBaselineThreads, layout.src()});
    if (!base.sample.ok() || base.sample.wall_times_s.empty())
        throw BaselineFailure("baseline run failed: " + std::string(to_string(base.sample.status)));
    base.primary = primary_source(spec);
    base.primary_text = read_text(base.src_dir / base.primary);
    return base;
}

struct Evaluation {
    std::optional<BuildOutcome> build;
    std::set<ConstraintFlag> flags;
    std::optional<RunSample> run;
    std::optional<MatchReport> match;
    CorrectnessCategory category = CorrectnessCategory::NoGeneratedCode;
    std::optional<SpeedupStat> speedup;
    std::optional<std::map<int, std::optional<double>>> per_count;
    std::string note;
};

/// Variant src = original prepared tree with `overlay` applied.
fs::path stage_variant(const BenchmarkSpec& spec, const Baseline& base, const ExperimentOptions& opts,
                       const std::string& tag) {
    auto layout = variant_layout(opts.work_root, spec.id, tag);
    fs::remove_all(layout.dir);
    fs::create_directories(layout.src());
    fs::copy(base.src_dir, layout.src(), fs::copy_options::recursive | fs::copy_options::overwrite_existing);
    return layout.src();
}

std::optional<BuildOutcome> build_variant(const BenchmarkSpec& spec, const fs::path& src,
                                          const ToolchainConfig& tc, const ExperimentOptions& opts,
                                          const std::string& tag) {
    try {
        return compile(spec, src, tc, opts.work_root, tag, opts.compiler_id);
    } catch (const BuildTimeout& e) {
        BuildOutcome b;
        b.status = BuildStatus::CompileError;
        b.timed_out = true;
        b.stderr_text = e.what();
        return b;
    }
}

/// Build and, when allowed, run/validate a staged variant. Serial experiments
/// run once at the baseline thread count; EX3 sweeps `counts`.
void run_and_classify(Evaluation& ev, const BenchmarkSpec& spec, const Baseline& base, const fs::path& src,
                      bool has_code, const ToolchainConfig& tc, const ExperimentOptions& opts,
                      const std::string& tag, const std::vector<int>* counts) {
    ev.build = build_variant(spec, src, tc, opts, tag);
    if (ev.build->ok() && ev.flags.empty()) {
        if (!counts) {
            ev.run = run_timed(*ev.build->binary_path, spec.run, RunOptions{kBaselineThreads, src});
            if (ev.run->ok()) ev.match = compare_outputs(base.sample.stdout_text, ev.run->stdout_text, spec.validation);
        } else {
            auto sweep = thread_sweep(*ev.build->binary_path, spec.run, *counts, src);
            std::map<int, std::optional<double>> per;
            std::optional<RunSample> first_bad_run;
            std::optional<MatchReport> first_bad_match;
            for (auto& [count, sample] : sweep) {
                std::optional<double> s;
                if (sample.ok()) {
                    auto m = compare_outputs(base.sample.stdout_text, sample.stdout_text, spec.validation);
                    if (m.matched)
                        s = speedup_from_means(base.sample.mean(), sample.mean());
                    else if (!first_bad_run) {
                        first_bad_run = sample;
                        first_bad_match = m;
                    }
                } else if (!first_bad_run) {
                    first_bad_run = sample;
                    ev.note += "thread count " + std::to_string(count) + " " +
                               std::string(to_string(sample.status)) + "; ";
                }
                per[count] = s;
            }
            ev.per_count = per;
            if (first_bad_run) {
                ev.run = first_bad_run;
                ev.match = first_bad_match;
            } else if (!sweep.empty()) {
                ev.run = sweep.begin()->second;
                ev.match = MatchReport{};
            }
        }
    }
    ExtractionSummary es{has_code};
    ev.category = classify_attempt(ev.build, es, ev.run, ev.match, ev.flags);
    if (ev.category == CorrectnessCategory::Correct && !counts) ev.speedup = measure_speedup(base.sample, *ev.run);
}

Evaluation evaluate_response(const BenchmarkSpec& spec, const Baseline& base, const ExtractionResult& ex,
                             Experiment exp, const ToolchainConfig& tc, const ExperimentOptions& opts,
                             const std::string& tag, const std::vector<int>* counts) {
    Evaluation ev;
    if (!ex.code) {
        ev.category = CorrectnessCategory::NoGeneratedCode;
        ev.note = ex.truncated ? "response truncated; " : "no code in response; ";
        return ev;
    }
    try {
        ev.flags = check_constraints(base.primary_text, *ex.code, exp);
    } catch (const UnparseableCandidate& e) {
        ev.note += std::string(e.what()) + "; ";
    }
    auto src = stage_variant(spec, base, opts, tag);
    write_text(src / base.primary, *ex.code);
    run_and_classify(ev, spec, base, src, true, tc, opts, tag, counts);
    return ev;
}

AttemptRecord make_row(const BenchmarkSpec& spec, Experiment exp, const std::string& tool, const std::string& tag,
                       const Evaluation& ev, const std::optional<ExtractionResult>& ex) {
    AttemptRecord r;
    r.benchmark_id = spec.id;
    r.motif = spec.motif;
    r.level = spec.level;
    r.experiment = exp;
    r.tool_id = tool;
    r.variant_tag = tag;
    r.category = ev.category;
    r.note = ev.note;
    for (auto f : ev.flags) r.note += "constraint: " + std::string(to_string(f)) + "; ";
    if (ev.build && !ev.build->ok()) r.note += "build failed; ";
    if (ex && ex->explanation) r.labels = classify_explanation(*ex->explanation);
    if (ev.per_count) r.thread_results = ev.per_count;
    if (r.category == CorrectnessCategory::Correct) {
        if (ev.speedup) {
            r.speedup_stat = ev.speedup;
            r.speedup = ev.speedup->speedup;
        } else if (ev.per_count && !ev.per_count->empty()) {
            double sum = 0.0;
            for (const auto& [c, s] : *ev.per_count) sum += *s;
            r.speedup = sum / static_cast<double>(ev.per_count->size());
        }
    }
    return r;
}

nlohmann::json evaluation_log(const Evaluation& ev) {
    nlohmann::json j{{"category", to_string(ev.category)}, {"note", ev.note}};
    nlohmann::json flags = nlohmann::json::array();
    for (auto f : ev.flags) flags.push_back(to_string(f));
    j["constraint_flags"] = flags;
    j["build"] = ev.build ? to_json(*ev.build) : nlohmann::json(nullptr);
    j["run"] = ev.run ? to_json(*ev.run) : nlohmann::json(nullptr);
    j["match"] = ev.match ? to_json(*ev.match) : nlohmann::json(nullptr);
    j["speedup"] = ev.speedup ? to_json(*ev.speedup) : nlohmann::json(nullptr);
    return j;
}

nlohmann::json provenance(const ToolchainConfig& tc, const Provider* provider, const ExperimentOptions& opts,
                          Experiment exp) {
    nlohmann::json p{{"experiment", to_string(exp)},
                     {"toolchain", tc.to_json()},
                     {"timestamp", opts.timestamp.empty() ? now_utc() : opts.timestamp},
                     {"baseline_threads", kBaselineThreads},
                     {"instruction_check", "heuristic"}};
    if (provider) p["providers"] = nlohmann::json::array({provider->describe()});
    if (exp == Experiment::EX3) p["thread_counts"] = opts.thread_counts;
    return p;
}

/// Runs `fn` for every benchmark (up to `jobs` at once) and assembles rows in
/// selection order. Baseline failures are recorded in provenance.
template <typename Fn>
ResultsTable drive(const std::vector<BenchmarkSpec>& selection, const ExperimentOptions& opts, Fn fn) {
    if (selection.empty()) throw EmptySelection();
    using Result = std::pair<std::vector<AttemptRecord>, std::string>;
    auto one = [&](const BenchmarkSpec& spec) -> Result {
        try {
            return {fn(spec), {}};
        } catch (const BaselineFailure& e) {
            return {{}, spec.id + ": " + e.what()};
        } catch (const ToolNotFound& e) {
            return {{}, spec.id + ": " + e.what()};
        }
    };
    std::vector<Result> results;
    const std::size_t jobs = static_cast<std::size_t>(std::max(1, opts.jobs));
    for (std::size_t i = 0; i < selection.size(); i += jobs) {
        std::vector<std::future<Result>> batch;
        for (std::size_t k = i; k < std::min(selection.size(), i + jobs); ++k)
            batch.push_back(std::async(jobs == 1 ? std::launch::deferred : std::launch::async, one,
                                       std::cref(selection[k])));
        for (auto& f : batch) results.push_back(f.get());
    }
    ResultsTable table;
    nlohmann::json errors = nlohmann::json::array();
    for (auto& [rows, err] : results) {
        for (auto& r : rows) table.add(std::move(r));
        if (!err.empty()) errors.push_back(err);
    }
    if (!errors.empty()) table.provenance["errors"] = errors;
    return table;
}

}  // namespace

nlohmann::json to_json(const AttemptRecord& r) {
    nlohmann::json j{{"benchmark_id", r.benchmark_id},
                     {"motif", to_string(r.motif)},
                     {"level", r.level},
                     {"experiment", to_string(r.experiment)},
                     {"tool_id", r.tool_id},
                     {"variant_tag", r.variant_tag},
                     {"category", to_string(r.category)},
                     {"speedup", r.speedup},
                     {"na", r.na()},
                     {"wallclock_log", r.wallclock_log},
                     {"note", r.note}};
    j["speedup_stat"] = r.speedup_stat ? to_json(*r.speedup_stat) : nlohmann::json(nullptr);
    nlohmann::json labels = nlohmann::json::array();
    for (const auto& l : r.labels) labels.push_back(to_json(l));
    j["labels"] = labels;
    if (r.thread_results) {
        nlohmann::json t = nlohmann::json::object();
        for (const auto& [c, s] : *r.thread_results) t[std::to_string(c)] = s ? nlohmann::json(*s) : nlohmann::json(nullptr);
        j["thread_results"] = t;
    } else {
        j["thread_results"] = nullptr;
    }
    return j;
}

AttemptRecord attempt_from_json(const nlohmann::json& j) {
    AttemptRecord r;
    r.benchmark_id = j.at("benchmark_id").get<std::string>();
    auto motif = motif_from_string(j.at("motif").get<std::string>());
    auto exp = experiment_from_string(j.at("experiment").get<std::string>());
    auto cat = category_from_string(j.at("category").get<std::string>());
    if (!motif || !exp || !cat) throw Error("results row has an unknown motif, experiment or category");
    r.motif = *motif;
    r.experiment = *exp;
    r.category = *cat;
    r.level = j.at("level").get<int>();
    r.tool_id = j.at("tool_id").get<std::string>();
    r.variant_tag = j.at("variant_tag").get<std::string>();
    r.speedup = j.at("speedup").get<double>();
    r.wallclock_log = j.value("wallclock_log", "");
    r.note = j.value("note", "");
    if (j.contains("speedup_stat") && !j["speedup_stat"].is_null()) r.speedup_stat = speedup_from_json(j["speedup_stat"]);
    for (const auto& l : j.value("labels", nlohmann::json::array())) r.labels.push_back(label_from_json(l));
    if (j.contains("thread_results") && j["thread_results"].is_object()) {
        std::map<int, std::optional<double>> t;
        for (const auto& [k, v] : j["thread_results"].items())
            t[std::stoi(k)] = v.is_null() ? std::nullopt : std::optional<double>(v.get<double>());
        r.thread_results = t;
    }
    if (r.na() && r.speedup != 1.0) throw Error("results row " + row_key(r) + " is NA but speedup is not 1.0");
    return r;
}

void ResultsTable::add(AttemptRecord r) {
    auto key = row_key(r);
    for (const auto& existing : rows)
        if (row_key(existing) == key) throw DuplicateRow(key);
    rows.push_back(std::move(r));
}

void ResultsTable::merge(const ResultsTable& other) {
    for (const auto& r : other.rows) add(r);
    if (provenance.is_null() || provenance.empty()) {
        provenance = other.provenance;
    } else if (!other.provenance.empty()) {
        if (!provenance.contains("merged")) {
            auto first = provenance;
            provenance = nlohmann::json{{"merged", nlohmann::json::array({first})}};
        }
        provenance["merged"].push_back(other.provenance);
    }
}

nlohmann::json to_json(const ResultsTable& t) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : t.rows) rows.push_back(to_json(r));
    return {{"provenance", t.provenance}, {"rows", rows}};
}

ResultsTable table_from_json(const nlohmann::json& j) {
    ResultsTable t;
    t.provenance = j.value("provenance", nlohmann::json::object());
    for (const auto& r : j.at("rows")) t.add(attempt_from_json(r));
    return t;
}

ResultsTable load_results(const fs::path& file) {
    try {
        return table_from_json(nlohmann::json::parse(read_text(file)));
    } catch (const nlohmann::json::exception& e) {
        throw Error("malformed results file " + file.string() + ": " + e.what());
    }
}

void save_results(const fs::path& file, const ResultsTable& t) {
    if (file.has_parent_path()) fs::create_directories(file.parent_path());
    write_text(file, to_json(t).dump(2) + "\n");
}

ResultsTable run_ex1(const std::vector<BenchmarkSpec>& selection, Provider& provider, const ToolchainConfig& toolchain,
                     const ExperimentOptions& opts) {
    auto table = drive(selection, opts, [&](const BenchmarkSpec& spec) {
        auto base = make_baseline(spec, toolchain, opts);
        auto prompt = render_prompt(Experiment::EX1, spec, base.primary_text, opts.prompt_env);
        ExtractionResult ex;
        Evaluation ev;
        try {
            auto resp = request(provider, prompt, {});
            ex = extract_code(resp.raw_text);
            ev = evaluate_response(spec, base, ex, Experiment::EX1, toolchain, opts, "ex1", nullptr);
        } catch (const ProviderError& e) {
            ev.note = std::string("provider error: ") + e.what() + "; ";
        }
        write_text(opts.work_root / spec.id / "ex1" / "attempt.json", evaluation_log(ev).dump(2) + "\n");
        return std::vector<AttemptRecord>{make_row(spec, Experiment::EX1, provider.id(), "ex1", ev, ex)};
    });
    auto errors = table.provenance.value("errors", nlohmann::json());
    table.provenance = provenance(toolchain, &provider, opts, Experiment::EX1);
    if (!errors.is_null()) table.provenance["errors"] = errors;
    return table;
}

ResultsTable run_ex2(const std::vector<BenchmarkSpec>& selection, Provider& provider, const ToolchainConfig& toolchain,
                     const ExperimentOptions& opts) {
    constexpr int kTurns = 5;
    auto table = drive(selection, opts, [&](const BenchmarkSpec& spec) {
        auto base = make_baseline(spec, toolchain, opts);
        std::vector<Exchange> history;
        std::string attached = base.primary_text;
        struct Turn {
            std::string tag;
            ExtractionResult ex;
            Evaluation ev;
        };
        std::vector<Turn> turns;
        nlohmann::json log = nlohmann::json::array();
        for (int k = 1; k <= kTurns; ++k) {
            Turn t;
            t.tag = "ex2/turn" + std::to_string(k);
            auto exp = k == 1 ? Experiment::EX1 : Experiment::EX2;
            auto prompt = render_prompt(exp, spec, attached, opts.prompt_env);
            bool stop = false;
            try {
                auto resp = request(provider, prompt, history);
                history.push_back({prompt.user_text, resp.raw_text});
                t.ex = extract_code(resp.raw_text);
                t.ev = evaluate_response(spec, base, t.ex, Experiment::EX2, toolchain, opts, t.tag, nullptr);
            } catch (const ProviderError& e) {
                t.ev.note = std::string("provider error: ") + e.what() + "; ";
                stop = true;
            }
            if (t.ex.code) attached = *t.ex.code;
            auto entry = evaluation_log(t.ev);
            entry["turn"] = k;
            log.push_back(entry);
            turns.push_back(std::move(t));
            if (stop) break;
        }
        write_text(opts.work_root / spec.id / "ex2" / "turns.json", log.dump(2) + "\n");

        const Turn* best = nullptr;
        for (const auto& t : turns) {
            if (t.ev.category != CorrectnessCategory::Correct) continue;
            if (!best || t.ev.speedup->speedup > best->ev.speedup->speedup) best = &t;
        }
        const Turn& chosen = best ? *best : turns.back();
        auto row = make_row(spec, Experiment::EX2, provider.id(), chosen.tag, chosen.ev, chosen.ex);
        row.note = "turns attempted: " + std::to_string(turns.size()) + "; " + row.note;
        return std::vector<AttemptRecord>{row};
    });
    auto errors = table.provenance.value("errors", nlohmann::json());
    table.provenance = provenance(toolchain, &provider, opts, Experiment::EX2);
    table.provenance["ex2_turns"] = kTurns;
    if (!errors.is_null()) table.provenance["errors"] = errors;
    return table;
}

ResultsTable run_ex3(const std::vector<BenchmarkSpec>& selection, Provider& provider, const ToolchainConfig& toolchain,
                     const ExperimentOptions& opts) {
    if (opts.thread_counts.empty()) throw Error("EX3 needs at least one thread count");
    auto table = drive(selection, opts, [&](const BenchmarkSpec& spec) {
        auto base = make_baseline(spec, toolchain, opts);
        auto prompt = render_prompt(Experiment::EX3, spec, base.primary_text, opts.prompt_env);
        ExtractionResult ex;
        Evaluation ev;
        try {
            auto resp = request(provider, prompt, {});
            ex = extract_code(resp.raw_text);
            ev = evaluate_response(spec, base, ex, Experiment::EX3, toolchain, opts, "ex3", &opts.thread_counts);
        } catch (const ProviderError& e) {
            ev.note = std::string("provider error: ") + e.what() + "; ";
        }
        write_text(opts.work_root / spec.id / "ex3" / "attempt.json", evaluation_log(ev).dump(2) + "\n");
        auto row = make_row(spec, Experiment::EX3, provider.id(), "ex3", ev, ex);
        if (!row.thread_results) {
            // Counts never ran; keep one entry per count so reports stay rectangular.
            std::map<int, std::optional<double>> empty;
            for (int c : opts.thread_counts) empty[c] = std::nullopt;
            row.thread_results = empty;
        }
        return std::vector<AttemptRecord>{row};
    });
    auto errors = table.provenance.value("errors", nlohmann::json());
    table.provenance = provenance(toolchain, &provider, opts, Experiment::EX3);
    table.provenance["ex3_row_speedup"] = "arithmetic mean over thread counts";
    if (!errors.is_null()) table.provenance["errors"] = errors;
    return table;
}

ResultsTable import_external_tool_results(const fs::path& dir, const std::string& tool_id,
                                          const std::vector<BenchmarkSpec>& selection,
                                          const ToolchainConfig& toolchain, const ExperimentOptions& opts,
                                          Experiment experiment) {
    ResultsTable table;
    std::vector<BenchmarkSpec> present;
    for (const auto& spec : selection)
        if (fs::is_directory(dir / spec.id)) present.push_back(spec);
    if (!present.empty()) {
        table = drive(present, opts, [&](const BenchmarkSpec& spec) {
            auto base = make_baseline(spec, toolchain, opts);
            const std::string tag = "external";
            Evaluation ev;
            auto src = stage_variant(spec, base, opts, tag);
            fs::copy(dir / spec.id, src, fs::copy_options::recursive | fs::copy_options::overwrite_existing);
            const std::vector<int>* counts = experiment == Experiment::EX3 ? &opts.thread_counts : nullptr;
            run_and_classify(ev, spec, base, src, true, toolchain, opts, tag, counts);
            write_text(opts.work_root / spec.id / tag / "attempt.json", evaluation_log(ev).dump(2) + "\n");
            return std::vector<AttemptRecord>{make_row(spec, experiment, tool_id, tag, ev, std::nullopt)};
        });
    }
    auto errors = table.provenance.value("errors", nlohmann::json());
    table.provenance = provenance(toolchain, nullptr, opts, experiment);
    table.provenance["external_tool"] = {{"tool_id", tool_id}, {"dir", dir.string()}};
    if (!errors.is_null()) table.provenance["errors"] = errors;
    return table;
}

std::string_view to_string(GroupKey k) {
    switch (k) {
        case GroupKey::Tool: return "tool";
        case GroupKey::Motif: return "motif";
        case GroupKey::Experiment: return "experiment";
    }
    return "?";
}

std::string_view to_string(MeanKind k) { return k == MeanKind::Arithmetic ? "arithmetic" : "geometric"; }

std::optional<GroupKey> group_key_from_string(std::string_view s) {
    for (auto k : {GroupKey::Tool, GroupKey::Motif, GroupKey::Experiment})
        if (to_string(k) == s) return k;
    return std::nullopt;
}

double mean_of(const std::vector<double>& xs, MeanKind kind) {
    if (xs.empty()) throw Error("mean of an empty list");
    double acc = 0.0;
    if (kind == MeanKind::Arithmetic) {
        for (double x : xs) acc += x;
        return acc / static_cast<double>(xs.size());
    }
    for (double x : xs) {
        if (!(x > 0.0)) throw Error("geometric mean needs positive values");
        acc += std::log(x);
    }
    return std::exp(acc / static_cast<double>(xs.size()));
}

std::vector<SummaryRow> aggregate(const ResultsTable& table, const std::vector<GroupKey>& group_by, MeanKind mean) {
    if (table.rows.empty()) throw EmptyTable();
    std::map<std::vector<std::string>, std::vector<const AttemptRecord*>> groups;
    for (const auto& r : table.rows) {
        std::vector<std::string> key;
        for (auto g : group_by) {
            switch (g) {
                case GroupKey::Tool: key.push_back(r.tool_id); break;
                case GroupKey::Motif: key.emplace_back(to_string(r.motif)); break;
                case GroupKey::Experiment: key.emplace_back(to_string(r.experiment)); break;
            }
        }
        groups[key].push_back(&r);
    }
    std::vector<SummaryRow> out;
    for (const auto& [key, rows] : groups) {
        SummaryRow s;
        for (std::size_t i = 0; i < key.size(); ++i) s.group.emplace_back(to_string(group_by[i]), key[i]);
        std::vector<double> speedups;
        std::vector<CorrectnessCategory> cats;
        for (auto c : all_categories()) s.category_counts[c] = 0;
        for (const auto* r : rows) {
            speedups.push_back(r->na() ? 1.0 : r->speedup);
            cats.push_back(r->category);
            ++s.category_counts[r->category];
        }
        s.n = rows.size();
        s.mean_speedup = mean_of(speedups, mean);
        s.pass_at_1 = pass_at_1(cats);
        s.mean_kind = mean;
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace perfagent
