// Calling-context-tree profiles: import/export of the neutral `cct-v1` JSON
// schema, hotspot extraction, model-facing summaries and metric diffs.
//
// Exclusive and inclusive variants of a metric are paired by name: the
// inclusive partner of `X_excl` is `X_incl`.
#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "perfagent/error.hpp"

namespace perfagent {

inline constexpr std::string_view kProfileSchema = "cct-v1";
inline constexpr std::string_view kDefaultHotspotMetric = "time_excl";

struct Frame {
    std::string function;
    std::string file;
    int line = 0;

    bool operator==(const Frame&) const = default;
};

struct ProfileNode {
    Frame frame;
    std::map<std::string, double> metrics;
    std::vector<ProfileNode> children;

    bool operator==(const ProfileNode&) const = default;
};

enum class MetricKind { Inclusive, Exclusive, Rate };
std::string_view to_string(MetricKind k);

struct MetricInfo {
    std::string unit;
    MetricKind kind = MetricKind::Exclusive;

    bool operator==(const MetricInfo&) const = default;
};

struct ProfileTree {
    std::vector<ProfileNode> roots;
    std::map<std::string, MetricInfo> metric_catalog;
    std::map<std::string, double> total;
    /// Declaration order of metrics in the source document.
    std::vector<std::string> metric_order;

    bool operator==(const ProfileTree&) const = default;
};

class SchemaViolation : public Error {
public:
    SchemaViolation(const std::string& path, const std::string& why)
        : Error("profile schema violation at " + path + ": " + why), path(path) {}
    std::string path;
};

class NegativeMetric : public Error {
public:
    NegativeMetric(const std::string& path, const std::string& metric)
        : Error("negative or non-finite metric '" + metric + "' at " + path), path(path), metric(metric) {}
    std::string path;
    std::string metric;
};

class UnknownMetric : public Error {
public:
    explicit UnknownMetric(const std::string& id) : Error("unknown or non-exclusive metric: " + id), id(id) {}
    std::string id;
};

class NodeNotFound : public Error {
public:
    explicit NodeNotFound(const std::string& path) : Error("profile node not found: " + path), path(path) {}
    std::string path;
};

ProfileTree import_profile(std::string_view document);
ProfileTree import_profile(const nlohmann::json& document);
nlohmann::json export_profile(const ProfileTree& tree);

struct HotspotReport {
    std::vector<Frame> path;  // root .. hotspot
    std::string metric_id;
    double value = 0.0;
    double share = 0.0;
    std::map<std::string, double> node_metrics;

    const Frame& frame() const { return path.back(); }
};

HotspotReport hotspot(const ProfileTree& tree, const std::string& metric_id = std::string(kDefaultHotspotMetric));

/// Every node ranked by exclusive value of `metric_id`, descending; ties keep
/// depth-first pre-order.
std::vector<HotspotReport> rank_nodes(const ProfileTree& tree, const std::string& metric_id);

struct RunContext {
    std::optional<int> threads;
    std::optional<int> ranks;
    std::optional<int> iterations;
    std::string hardware;

    bool empty() const { return !threads && !ranks && !iterations && hardware.empty(); }
};

inline constexpr std::string_view kTruncationMarker = "[... truncated]";

struct SummaryOptions {
    std::size_t top_k = 5;
    std::size_t char_budget = 4000;
    std::string metric_id = std::string(kDefaultHotspotMetric);
};

/// Deterministic text: hotspot lines `N. fn (file:line) SS.S% of metric ...`
/// then an environment block (omitted when empty). Whole lines are kept while
/// they fit the budget; dropped content is replaced by the truncation marker.
std::string summarize_for_model(const ProfileTree& tree, const RunContext& env, const SummaryOptions& opts);

struct MetricChange {
    double before = 0.0;
    double after = 0.0;
    std::optional<double> relative_change;  // absent when before == 0
};

using MetricDelta = std::map<std::string, MetricChange>;

/// Compare the metrics of the node reached by the function-name chain `path`.
MetricDelta diff_metrics(const ProfileTree& before, const ProfileTree& after, const std::vector<std::string>& path);

/// Function-name chain of a hotspot, for diff_metrics.
std::vector<std::string> function_chain(const HotspotReport& h);

/// Sum of a metric over every node.
double sum_over_nodes(const ProfileTree& tree, const std::string& metric_id);

}  // namespace perfagent
