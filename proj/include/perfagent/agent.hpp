// Profile-guided iterative optimization loop.
//
// Each iteration profiles the current base version, asks the model for an
// optimized hotspot definition, patches it in, rebuilds, validates against the
// original program's output and records the outcome in the agent's memory.
#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "perfagent/llm_gateway.hpp"
#include "perfagent/manifest.hpp"
#include "perfagent/profile.hpp"
#include "perfagent/provider.hpp"
#include "perfagent/toolchain.hpp"
#include "perfagent/verify.hpp"

namespace perfagent {

enum class MetricRequestPolicy { HonorModelRequests, FixedSet };
enum class BasePolicy { LastCorrect, BestCorrect };
enum class StopReason { ThresholdReached, ModelDeclined, FatalError };

std::string_view to_string(StopReason r);
std::string_view to_string(BasePolicy p);

inline constexpr std::string_view kDefaultDeclineSentinel = "NO FURTHER OPTIMIZATIONS";

struct AgentConfig {
    int max_iterations = 3;
    std::string provider_id;
    std::size_t top_k_hotspots = 5;
    RunContext env_context;
    MetricRequestPolicy metric_request_policy = MetricRequestPolicy::HonorModelRequests;
    BasePolicy base_policy = BasePolicy::LastCorrect;
    std::string decline_sentinel = std::string(kDefaultDeclineSentinel);
    std::string hotspot_metric = std::string(kDefaultHotspotMetric);
    std::size_t summary_budget = 4000;
    std::size_t memory_budget = 4000;
    /// Metrics always requested from the profiler.
    std::vector<std::string> fixed_metrics;
    PromptEnv prompt_env;
    std::optional<std::string> compiler_id;
    std::filesystem::path work_root = "work";
};

/// What the agent asks the profiler for.
struct ProfileRequest {
    std::string bench_id;
    std::string variant_tag;  // e.g. "agent/original", "agent/iter2"
    int iteration = 0;        // 0 for the original program
    std::filesystem::path binary;
    std::filesystem::path src_dir;
    std::vector<std::string> metrics;
    std::optional<int> threads;
};

using ProfileSource = std::function<ProfileTree(const ProfileRequest&)>;

/// Profiles stored as `<dir>/<variant_tag with '/' replaced by '_'>.json`,
/// e.g. `agent_iter1.json`.
ProfileSource directory_profile_source(const std::filesystem::path& dir);

/// Runs `command` with `{binary}`, `{src}`, `{variant}`, `{metrics}` placeholders
/// substituted; the command must print cct-v1 JSON on stdout.
ProfileSource command_profile_source(std::vector<std::string> command);

struct IterationRecord {
    int index = 0;
    std::string hotspot;
    std::string context_sent;
    ModelResponse response;
    ExtractionResult extraction;
    CorrectnessCategory category = CorrectnessCategory::NoGeneratedCode;
    std::set<ConstraintFlag> constraint_flags;
    std::optional<RunSample> run;
    std::optional<MatchReport> match;
    std::optional<SpeedupStat> speedup_vs_original;
    std::vector<std::string> requested_metrics;
    std::optional<MetricDelta> profile_delta;
    std::vector<OptimizationLabel> labels;
    bool declined = false;
    std::string note;
};

struct AgentTrace {
    std::string benchmark_id;
    RunSample baseline;
    std::vector<IterationRecord> iterations;
    StopReason stop_reason = StopReason::ThresholdReached;
    std::optional<int> best_iteration;
    std::string fatal_error;
    BasePolicy base_policy = BasePolicy::LastCorrect;
};

nlohmann::json to_json(const AgentTrace& trace);

AgentTrace run_agent(const BenchmarkSpec& spec, const ProfileSource& profile_source, Provider& provider,
                     const ToolchainConfig& toolchain, const AgentConfig& cfg);

struct MetricAlias {
    std::string id;
    std::vector<std::string> aliases;
};

/// Default aliases for common hardware-counter metrics.
const std::vector<MetricAlias>& default_metric_catalog();

struct MetricRequests {
    std::vector<std::string> ids;    // catalog ids in order of first mention
    std::vector<std::string> notes;  // unrecognized requests
};

MetricRequests parse_metric_requests(std::string_view response_text,
                                     const std::vector<MetricAlias>& catalog = default_metric_catalog());

/// Most-recent-first summary of prior iterations, truncated to `budget`
/// characters with the profile module's truncation marker.
std::string build_memory_digest(const std::vector<IterationRecord>& iterations, std::size_t budget);

/// True when the response signals that no further optimization is worthwhile.
bool is_decline(std::string_view response_text, std::string_view sentinel);

}  // namespace perfagent
