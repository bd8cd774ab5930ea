#include "perfagent/json_io.hpp"

namespace perfagent {

nlohmann::json to_json(const RunSample& s) {
    nlohmann::json j{{"status", to_string(s.status)},
                     {"wall_times_s", s.wall_times_s},
                     {"exit_code", s.exit_code},
                     {"term_signal", s.term_signal}};
    if (s.thread_count) j["thread_count"] = *s.thread_count;
    if (!s.wall_times_s.empty()) {
        j["mean_s"] = s.mean();
        j["min_s"] = s.min();
        j["stddev_s"] = s.stddev();
    }
    return j;
}

nlohmann::json to_json(const SpeedupStat& s) {
    return {{"baseline_mean_s", s.baseline_mean_s},     {"candidate_mean_s", s.candidate_mean_s},
            {"speedup", s.speedup},                     {"baseline_min_s", s.baseline_min_s},
            {"candidate_min_s", s.candidate_min_s},     {"baseline_stddev_s", s.baseline_stddev_s},
            {"candidate_stddev_s", s.candidate_stddev_s}};
}

SpeedupStat speedup_from_json(const nlohmann::json& j) {
    SpeedupStat s;
    s.baseline_mean_s = j.value("baseline_mean_s", 0.0);
    s.candidate_mean_s = j.value("candidate_mean_s", 0.0);
    s.speedup = j.value("speedup", 1.0);
    s.baseline_min_s = j.value("baseline_min_s", 0.0);
    s.candidate_min_s = j.value("candidate_min_s", 0.0);
    s.baseline_stddev_s = j.value("baseline_stddev_s", 0.0);
    s.candidate_stddev_s = j.value("candidate_stddev_s", 0.0);
    return s;
}

nlohmann::json to_json(const ModelResponse& r) {
    nlohmann::json j{{"provider_id", r.provider_id}, {"latency_s", r.latency_s}, {"raw_text", r.raw_text}};
    if (r.token_counts) j["token_counts"] = {{"input", r.token_counts->input}, {"output", r.token_counts->output}};
    return j;
}

nlohmann::json to_json(const ExtractionResult& e) {
    nlohmann::json j{{"rule", to_string(e.rule)}, {"truncated", e.truncated}};
    j["code"] = e.code ? nlohmann::json(*e.code) : nlohmann::json(nullptr);
    j["explanation"] = e.explanation ? nlohmann::json(*e.explanation) : nlohmann::json(nullptr);
    return j;
}

nlohmann::json to_json(const OptimizationLabel& l) { return {{"label", to_string(l.label)}, {"evidence", l.evidence}}; }

OptimizationLabel label_from_json(const nlohmann::json& j) {
    OptimizationLabel l;
    l.label = optimization_kind_from_string(j.value("label", std::string("Other"))).value_or(OptimizationKind::Other);
    l.evidence = j.value("evidence", std::string());
    return l;
}

nlohmann::json to_json(const MetricDelta& d) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [id, c] : d) {
        j[id] = {{"before", c.before}, {"after", c.after}};
        j[id]["relative_change"] = c.relative_change ? nlohmann::json(*c.relative_change) : nlohmann::json(nullptr);
    }
    return j;
}

nlohmann::json to_json(const BuildOutcome& b) {
    nlohmann::json j{{"status", b.ok() ? "Ok" : "CompileError"},
                     {"command_line", b.command_line},
                     {"elapsed_s", b.elapsed_s},
                     {"timed_out", b.timed_out}};
    if (b.binary_path) j["binary_path"] = b.binary_path->string();
    return j;
}

}  // namespace perfagent
