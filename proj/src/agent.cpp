#include "perfagent/agent.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <map>
#include <regex>
#include <sstream>

#include "perfagent/json_io.hpp"
#include "perfagent/patch.hpp"
#include "perfagent/process.hpp"

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
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

std::string first_line(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    auto nl = s.find('\n');
    std::string line(nl == std::string_view::npos ? s : s.substr(0, nl));
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back()))) line.pop_back();
    return line;
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

std::string tag_file_name(std::string tag) {
    std::replace(tag.begin(), tag.end(), '/', '_');
    return tag + ".json";
}

std::vector<std::string> merge_metrics(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    std::vector<std::string> out = a;
    for (const auto& m : b)
        if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
    return out;
}

/// Source file (relative path) whose text defines `fn`, searched in `src_dir`.
std::optional<std::string> file_defining(const BenchmarkSpec& spec, const fs::path& src_dir, const std::string& fn) {
    for (const auto& rel : spec.source_files) {
        auto ext = fs::path(rel).extension().string();
        if (ext != ".c" && ext != ".cc" && ext != ".cpp" && ext != ".cxx" && ext != ".C") continue;
        try {
            for (const auto& f : list_functions(read_text(src_dir / rel)))
                if (f.name == fn) return rel;
        } catch (const PatchError&) {
        }
    }
    return std::nullopt;
}

struct Version {
    std::string variant_tag;
    fs::path src_dir;
    fs::path binary;
    std::optional<double> mean_s;
    int iteration = 0;
};

}  // namespace

std::string_view to_string(StopReason r) {
    switch (r) {
        case StopReason::ThresholdReached: return "ThresholdReached";
        case StopReason::ModelDeclined: return "ModelDeclined";
        case StopReason::FatalError: return "FatalError";
    }
    return "?";
}

std::string_view to_string(BasePolicy p) { return p == BasePolicy::LastCorrect ? "LastCorrect" : "BestCorrect"; }

ProfileSource directory_profile_source(const fs::path& dir) {
    return [dir](const ProfileRequest& req) {
        auto p = dir / tag_file_name(req.variant_tag);
        if (!fs::exists(p)) {
            // Fall back to the bare tag (e.g. "iter1.json" for "agent/iter1").
            auto bare = fs::path(req.variant_tag).filename().string() + ".json";
            if (fs::exists(dir / bare)) p = dir / bare;
        }
        return import_profile(std::string_view(read_text(p)));
    };
}

ProfileSource command_profile_source(std::vector<std::string> command) {
    return [command](const ProfileRequest& req) {
        std::string metrics;
        for (const auto& m : req.metrics) metrics += (metrics.empty() ? "" : ",") + m;
        ProcessRequest pr;
        for (auto arg : command) {
            auto sub = [&](const std::string& key, const std::string& val) {
                for (auto pos = arg.find(key); pos != std::string::npos; pos = arg.find(key, pos + val.size()))
                    arg.replace(pos, key.size(), val);
            };
            sub("{binary}", req.binary.string());
            sub("{src}", req.src_dir.string());
            sub("{variant}", req.variant_tag);
            sub("{metrics}", metrics);
            pr.argv.push_back(arg);
        }
        if (req.threads) pr.env_overrides[kThreadEnvVar] = std::to_string(*req.threads);
        pr.timeout = std::chrono::hours(1);
        auto res = run_process(pr);
        if (!res.ok()) throw Error("profiler command failed: " + res.err.substr(0, 2000));
        return import_profile(std::string_view(res.out));
    };
}

const std::vector<MetricAlias>& default_metric_catalog() {
    static const std::vector<MetricAlias> k{
        {"time_excl", {"cpu time", "execution time", "exclusive time", "time_excl"}},
        {"l1_dcache_miss",
         {"l1 data cache load misses", "l1 data cache misses", "l1 dcache misses", "l1 cache misses", "l1 cache miss",
          "l1 misses", "l1d misses", "l1_dcache_miss"}},
        {"fp_ins",
         {"floating-point instructions", "floating point instructions", "floating-point operations",
          "floating point operations", "fp instructions", "flops", "fp_ins"}},
        {"llc_miss", {"last level cache misses", "llc misses", "l3 cache misses", "llc_miss"}},
        {"branch_miss", {"branch mispredictions", "branch misses", "branch_miss"}},
        {"stalled_cycles", {"front-end stalls", "frontend stalls", "stalled cycles", "stall cycles", "stalled_cycles"}},
        {"cycles", {"cpu cycles", "cycles"}},
        {"instructions", {"instructions retired", "instruction count", "instructions"}},
    };
    return k;
}

MetricRequests parse_metric_requests(std::string_view response_text, const std::vector<MetricAlias>& catalog) {
    MetricRequests out;
    std::string text = lower(response_text);
    // Earliest match position per catalog id; longer aliases claim their span
    // first so that "l1 cache misses" is not also read as "instructions" etc.
    std::vector<std::pair<std::size_t, std::string>> hits;
    std::vector<std::pair<std::size_t, std::size_t>> claimed;
    std::vector<std::pair<std::string, std::string>> flat;
    for (const auto& m : catalog)
        for (const auto& a : m.aliases) flat.emplace_back(lower(a), m.id);
    std::stable_sort(flat.begin(), flat.end(),
                     [](const auto& a, const auto& b) { return a.first.size() > b.first.size(); });
    auto is_word = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; };
    for (const auto& [alias, id] : flat) {
        for (std::size_t pos = text.find(alias); pos != std::string::npos; pos = text.find(alias, pos + 1)) {
            std::size_t end = pos + alias.size();
            if ((pos > 0 && is_word(text[pos - 1])) || (end < text.size() && is_word(text[end]))) continue;
            bool overlaps = std::any_of(claimed.begin(), claimed.end(),
                                        [&](const auto& c) { return pos < c.second && c.first < end; });
            if (overlaps) continue;
            claimed.emplace_back(pos, end);
            hits.emplace_back(pos, id);
        }
    }
    std::sort(hits.begin(), hits.end());
    for (const auto& [pos, id] : hits)
        if (std::find(out.ids.begin(), out.ids.end(), id) == out.ids.end()) out.ids.push_back(id);

    static const std::regex request(
        R"(\b(?:measure|profile|collect|track|monitor|record)\s+(?:the\s+)?([a-z0-9][a-z0-9 _\-]{1,60}?)(?=[.,;:!?\n]|$))");
    for (std::sregex_iterator it(text.begin(), text.end(), request), end; it != end; ++it) {
        auto span_start = static_cast<std::size_t>(it->position(1));
        auto span_end = span_start + static_cast<std::size_t>(it->length(1));
        bool known = std::any_of(claimed.begin(), claimed.end(),
                                 [&](const auto& c) { return c.first < span_end && span_start < c.second; });
        if (!known) out.notes.push_back("unrecognized metric request: " + (*it)[1].str());
    }
    return out;
}

std::string build_memory_digest(const std::vector<IterationRecord>& iterations, std::size_t budget) {
    if (iterations.empty()) return {};
    std::vector<std::string> blocks;
    for (auto it = iterations.rbegin(); it != iterations.rend(); ++it) {
        const auto& r = *it;
        std::string summary = r.extraction.explanation ? first_line(*r.extraction.explanation) : std::string();
        if (summary.empty()) summary = "(no explanation)";
        std::string b = "Iteration " + std::to_string(r.index) + ": " + summary + "\n";
        b += "  category: " + std::string(to_string(r.category)) + "; speedup: ";
        b += r.speedup_vs_original ? fmt("%.2fx", r.speedup_vs_original->speedup) : std::string("NA");
        if (r.run && !r.run->wall_times_s.empty()) b += "; mean time: " + fmt("%.3f s", r.run->mean());
        b += "\n";
        if (r.profile_delta && !r.profile_delta->empty()) {
            b += "  metric changes:";
            for (const auto& [id, c] : *r.profile_delta) {
                b += " " + id + " ";
                b += c.relative_change ? fmt("%+.1f%%", *c.relative_change * 100.0)
                                       : fmt("%g", c.before) + "->" + fmt("%g", c.after);
            }
            b += "\n";
        }
        if (!r.requested_metrics.empty()) {
            b += "  requested metrics:";
            for (const auto& m : r.requested_metrics) b += " " + m;
            b += "\n";
        }
        blocks.push_back(std::move(b));
    }
    std::string full;
    for (const auto& b : blocks) full += b;
    if (full.size() <= budget) return full;
    std::string out;
    std::istringstream lines(full);
    std::string line;
    while (std::getline(lines, line)) {
        if (out.size() + line.size() + 1 + kTruncationMarker.size() + 1 > budget) break;
        out += line + "\n";
    }
    return out + std::string(kTruncationMarker) + "\n";
}

bool is_decline(std::string_view response_text, std::string_view sentinel) {
    // With code present only the exact sentinel counts; prose like "no further
    // optimizations after this one" next to a patch is not a refusal.
    const bool has_code = response_text.find("```") != std::string_view::npos || extract_code(response_text).code;
    if (!sentinel.empty() && response_text.find(sentinel) != std::string_view::npos) return true;
    if (has_code) return false;
    std::string text = lower(response_text);
    if (!sentinel.empty() && text.find(lower(sentinel)) != std::string::npos) return true;
    static const std::regex affirm(
        R"(\bno (further|additional|more) (meaningful |significant )?optimi[sz]ations?\b|\balready (optimal|fully optimi[sz]ed|well[- ]optimi[sz]ed)\b|\bcannot be (further|meaningfully) optimi[sz]ed\b)");
    return std::regex_search(text, affirm);
}

nlohmann::json to_json(const AgentTrace& t) {
    nlohmann::json iters = nlohmann::json::array();
    for (const auto& r : t.iterations) {
        nlohmann::json j{{"index", r.index},
                         {"hotspot", r.hotspot},
                         {"context_sent", r.context_sent},
                         {"response", to_json(r.response)},
                         {"extraction", to_json(r.extraction)},
                         {"category", to_string(r.category)},
                         {"requested_metrics", r.requested_metrics},
                         {"declined", r.declined},
                         {"note", r.note}};
        nlohmann::json flags = nlohmann::json::array();
        for (auto f : r.constraint_flags) flags.push_back(to_string(f));
        j["constraint_flags"] = flags;
        nlohmann::json labels = nlohmann::json::array();
        for (const auto& l : r.labels) labels.push_back(to_json(l));
        j["labels"] = labels;
        j["run"] = r.run ? to_json(*r.run) : nlohmann::json(nullptr);
        j["match"] = r.match ? to_json(*r.match) : nlohmann::json(nullptr);
        j["speedup_vs_original"] = r.speedup_vs_original ? to_json(*r.speedup_vs_original) : nlohmann::json(nullptr);
        j["profile_delta"] = r.profile_delta ? to_json(*r.profile_delta) : nlohmann::json(nullptr);
        iters.push_back(std::move(j));
    }
    nlohmann::json out{{"benchmark_id", t.benchmark_id},
                       {"baseline", to_json(t.baseline)},
                       {"iterations", iters},
                       {"stop_reason", to_string(t.stop_reason)},
                       {"base_policy", to_string(t.base_policy)},
                       {"fatal_error", t.fatal_error}};
    out["best_iteration"] = t.best_iteration ? nlohmann::json(*t.best_iteration) : nlohmann::json(nullptr);
    return out;
}

AgentTrace run_agent(const BenchmarkSpec& spec, const ProfileSource& profile_source, Provider& provider,
                     const ToolchainConfig& toolchain, const AgentConfig& cfg) {
    if (cfg.max_iterations < 1) throw Error("max_iterations must be >= 1");
    AgentTrace trace;
    trace.benchmark_id = spec.id;
    trace.base_policy = cfg.base_policy;
    const fs::path agent_dir = cfg.work_root / spec.id / "agent";
    auto persist = [&] { write_text(agent_dir / "trace.json", to_json(trace).dump(2) + "\n"); };

    // Original program.
    const std::string original_tag = "agent/original";
    auto original_layout = variant_layout(cfg.work_root, spec.id, original_tag);
    fs::remove_all(original_layout.dir);
    prepare_sources(spec, original_layout.src());
    BuildOutcome base_build;
    try {
        base_build = compile(spec, original_layout.src(), toolchain, cfg.work_root, original_tag, cfg.compiler_id);
    } catch (const BuildTimeout& e) {
        base_build.status = BuildStatus::CompileError;
        base_build.stderr_text = e.what();
    }
    if (!base_build.ok()) {
        trace.stop_reason = StopReason::FatalError;
        trace.fatal_error = "BaselineBuildFailed: " + base_build.stderr_text.substr(0, 2000);
        persist();
        return trace;
    }
    RunOptions run_opts{cfg.env_context.threads, original_layout.src()};
    trace.baseline = run_timed(*base_build.binary_path, spec.run, run_opts);
    if (!trace.baseline.ok() || trace.baseline.wall_times_s.empty()) {
        trace.stop_reason = StopReason::FatalError;
        trace.fatal_error = "BaselineRunFailed: " + std::string(to_string(trace.baseline.status)) + " " +
                            trace.baseline.stderr_text.substr(0, 2000);
        persist();
        return trace;
    }

    Version base{original_tag, original_layout.src(), *base_build.binary_path, trace.baseline.mean(), 0};
    std::map<std::string, ProfileTree> profile_cache;
    std::vector<std::string> requested = cfg.fixed_metrics;

    auto fetch_profile = [&](const Version& v, int iteration) -> std::optional<ProfileTree> {
        if (!profile_source) return std::nullopt;
        if (auto it = profile_cache.find(v.variant_tag); it != profile_cache.end()) return it->second;
        ProfileRequest req{spec.id, v.variant_tag, iteration, v.binary, v.src_dir,
                           merge_metrics({cfg.hotspot_metric}, requested), cfg.env_context.threads};
        auto tree = profile_source(req);
        profile_cache.emplace(v.variant_tag, tree);
        return tree;
    };

    trace.stop_reason = StopReason::ThresholdReached;
    for (int index = 1; index <= cfg.max_iterations; ++index) {
        IterationRecord rec;
        rec.index = index;

        // (1) profile the current base and pick the hotspot.
        std::optional<ProfileTree> base_profile;
        std::optional<HotspotReport> hot;
        try {
            base_profile = fetch_profile(base, base.iteration);
        } catch (const Error& e) {
            rec.note += std::string("profile unavailable: ") + e.what() + "; ";
        }
        std::string hotspot_fn;
        if (base_profile) {
            try {
                for (const auto& cand : rank_nodes(*base_profile, cfg.hotspot_metric)) {
                    if (file_defining(spec, base.src_dir, cand.frame().function)) {
                        hot = cand;
                        hotspot_fn = cand.frame().function;
                        break;
                    }
                }
            } catch (const UnknownMetric& e) {
                rec.note += std::string(e.what()) + "; ";
            }
        }
        if (hotspot_fn.empty() && spec.entry_hotspot) hotspot_fn = *spec.entry_hotspot;
        auto hot_file = hotspot_fn.empty() ? std::nullopt : file_defining(spec, base.src_dir, hotspot_fn);
        if (!hot_file) {
            trace.stop_reason = StopReason::FatalError;
            trace.fatal_error = "no hotspot function could be located in the benchmark sources";
            break;
        }
        rec.hotspot = hotspot_fn;
        const std::string base_text = read_text(base.src_dir / *hot_file);
        const std::string hotspot_code = extract_function(base_text, hotspot_fn);

        // (2) context.
        AgentPromptContext actx;
        actx.hotspot_name = hotspot_fn;
        actx.decline_sentinel = cfg.decline_sentinel;
        if (base_profile) {
            SummaryOptions so{cfg.top_k_hotspots, cfg.summary_budget, cfg.hotspot_metric};
            try {
                actx.profile_summary = summarize_for_model(*base_profile, cfg.env_context, so);
            } catch (const UnknownMetric& e) {
                rec.note += std::string(e.what()) + "; ";
            }
        }
        actx.memory_digest = build_memory_digest(trace.iterations, cfg.memory_budget);
        auto prompt = render_prompt(Experiment::Agent, spec, hotspot_code, cfg.prompt_env, &actx);
        rec.context_sent = prompt.user_text;

        // (3) request.
        try {
            rec.response = request(provider, prompt, {});
        } catch (const ProviderError& e) {
            rec.note += std::string("provider error: ") + e.what() + "; ";
            rec.category = CorrectnessCategory::NoGeneratedCode;
            trace.iterations.push_back(std::move(rec));
            persist();
            continue;
        }
        if (is_decline(rec.response.raw_text, cfg.decline_sentinel)) {
            rec.declined = true;
            rec.category = CorrectnessCategory::NoGeneratedCode;
            rec.extraction.explanation = rec.response.raw_text;
            trace.iterations.push_back(std::move(rec));
            trace.stop_reason = StopReason::ModelDeclined;
            break;
        }

        // (4) extract.
        rec.extraction = extract_code(rec.response.raw_text);
        if (rec.extraction.explanation) rec.labels = classify_explanation(*rec.extraction.explanation);
        if (cfg.metric_request_policy == MetricRequestPolicy::HonorModelRequests) {
            auto mr = parse_metric_requests(rec.response.raw_text);
            rec.requested_metrics = mr.ids;
            for (const auto& n : mr.notes) rec.note += n + "; ";
        }

        auto finish_without_build = [&](const std::string& why) {
            rec.note += why;
            rec.category = CorrectnessCategory::NoGeneratedCode;
            trace.iterations.push_back(std::move(rec));
            persist();
        };
        if (!rec.extraction.code) {
            finish_without_build(rec.extraction.truncated ? "response truncated" : "no code in response");
            continue;
        }

        // (5) patch the hotspot.
        std::string new_definition;
        try {
            auto fns = list_functions(*rec.extraction.code);
            bool defines_hotspot = std::any_of(fns.begin(), fns.end(), [&](const auto& f) { return f.name == hotspot_fn; });
            if (!defines_hotspot) {
                finish_without_build("response does not define " + hotspot_fn);
                continue;
            }
            auto base_fns = list_functions(base_text);
            bool echoes_file = std::any_of(fns.begin(), fns.end(), [&](const auto& f) {
                return f.name != hotspot_fn && std::any_of(base_fns.begin(), base_fns.end(),
                                                           [&](const auto& b) { return b.name == f.name; });
            });
            if (echoes_file) {
                new_definition = extract_function(*rec.extraction.code, hotspot_fn);
            } else {
                std::string_view c = *rec.extraction.code;
                while (!c.empty() && std::isspace(static_cast<unsigned char>(c.front()))) c.remove_prefix(1);
                while (!c.empty() && std::isspace(static_cast<unsigned char>(c.back()))) c.remove_suffix(1);
                new_definition = std::string(c);
            }
        } catch (const PatchError& e) {
            finish_without_build(std::string("unusable code: ") + e.what());
            continue;
        }
        std::string patched;
        try {
            patched = replace_function(base_text, hotspot_fn, new_definition);
            rec.constraint_flags = check_constraints(base_text, patched, Experiment::Agent);
        } catch (const Error& e) {
            finish_without_build(std::string("patch failed: ") + e.what());
            continue;
        }

        // (6) compile.
        const std::string tag = "agent/iter" + std::to_string(index);
        auto layout = variant_layout(cfg.work_root, spec.id, tag);
        fs::remove_all(layout.dir);
        fs::create_directories(layout.src());
        fs::copy(base.src_dir, layout.src(), fs::copy_options::recursive | fs::copy_options::overwrite_existing);
        write_text(layout.src() / *hot_file, patched);
        BuildOutcome build;
        try {
            build = compile(spec, layout.src(), toolchain, cfg.work_root, tag, cfg.compiler_id);
        } catch (const BuildTimeout& e) {
            build.status = BuildStatus::CompileError;
            build.stderr_text = e.what();
        }

        // (7) run and validate.
        if (build.ok() && rec.constraint_flags.empty()) {
            rec.run = run_timed(*build.binary_path, spec.run, RunOptions{cfg.env_context.threads, layout.src()});
            if (rec.run->ok())
                rec.match = compare_outputs(trace.baseline.stdout_text, rec.run->stdout_text, spec.validation);
        }
        rec.category = classify_attempt(build, rec.extraction.summary(), rec.run, rec.match, rec.constraint_flags);
        if (!build.ok()) rec.note += "build failed; ";

        // (8) speedup and profile delta.
        if (rec.category == CorrectnessCategory::Correct) {
            rec.speedup_vs_original = measure_speedup(trace.baseline, *rec.run);
            Version candidate{tag, layout.src(), *build.binary_path, rec.run->mean(), index};
            if (base_profile && hot) {
                try {
                    if (auto after = fetch_profile(candidate, index))
                        rec.profile_delta = diff_metrics(*base_profile, *after, function_chain(*hot));
                } catch (const Error& e) {
                    rec.note += std::string("profile delta unavailable: ") + e.what() + "; ";
                }
            }
            bool adopt = cfg.base_policy == BasePolicy::LastCorrect || !base.mean_s || *candidate.mean_s < *base.mean_s;
            if (adopt) base = candidate;
        }
        if (cfg.metric_request_policy == MetricRequestPolicy::HonorModelRequests)
            requested = merge_metrics(requested, rec.requested_metrics);

        trace.iterations.push_back(std::move(rec));
        persist();
    }

    for (const auto& r : trace.iterations) {
        if (r.category != CorrectnessCategory::Correct || !r.speedup_vs_original) continue;
        if (!trace.best_iteration) {
            trace.best_iteration = r.index;
            continue;
        }
        const auto& best = trace.iterations[static_cast<std::size_t>(*trace.best_iteration - 1)];
        if (r.speedup_vs_original->candidate_mean_s < best.speedup_vs_original->candidate_mean_s)
            trace.best_iteration = r.index;
    }
    persist();
    return trace;
}

}  // namespace perfagent
