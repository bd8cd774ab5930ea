#include "perfagent/profile.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>

namespace perfagent {

namespace {

constexpr double kRelTol = 1e-9;

bool approx_le(double a, double b) { return a <= b + kRelTol * std::max(std::fabs(a), std::fabs(b)); }

std::string fmt_num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string fmt_pct(double share) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f%%", share * 100.0);
    return buf;
}

std::optional<std::string> inclusive_partner(const std::string& id) {
    static const std::string suffix = "_excl";
    if (id.size() > suffix.size() && id.compare(id.size() - suffix.size(), suffix.size(), suffix) == 0)
        return id.substr(0, id.size() - suffix.size()) + "_incl";
    return std::nullopt;
}

std::optional<MetricKind> kind_from_string(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    if (s == "inclusive") return MetricKind::Inclusive;
    if (s == "exclusive") return MetricKind::Exclusive;
    if (s == "rate") return MetricKind::Rate;
    return std::nullopt;
}

class Importer {
public:
    ProfileTree run(const nlohmann::json& doc) {
        if (!doc.is_object()) throw SchemaViolation("/", "document must be an object");
        auto schema = doc.find("schema");
        if (schema == doc.end() || !schema->is_string() || schema->get<std::string>() != kProfileSchema)
            throw SchemaViolation("/schema", "expected \"" + std::string(kProfileSchema) + "\"");

        auto metrics = doc.find("metrics");
        if (metrics == doc.end() || !metrics->is_array()) throw SchemaViolation("/metrics", "must be an array");
        for (std::size_t i = 0; i < metrics->size(); ++i) {
            const auto& m = (*metrics)[i];
            std::string p = "/metrics/" + std::to_string(i);
            if (!m.is_object() || !m.contains("id") || !m["id"].is_string())
                throw SchemaViolation(p, "metric needs a string 'id'");
            std::string id = m["id"].get<std::string>();
            if (tree_.metric_catalog.contains(id)) throw SchemaViolation(p, "duplicate metric '" + id + "'");
            MetricInfo info;
            info.unit = m.value("unit", std::string());
            if (!m.contains("kind") || !m["kind"].is_string()) throw SchemaViolation(p + "/kind", "must be a string");
            auto kind = kind_from_string(m["kind"].get<std::string>());
            if (!kind) throw SchemaViolation(p + "/kind", "unknown kind");
            info.kind = *kind;
            tree_.metric_catalog[id] = info;
            tree_.metric_order.push_back(id);
        }

        auto roots = doc.find("roots");
        if (roots == doc.end() || !roots->is_array()) throw SchemaViolation("/roots", "must be an array");
        for (std::size_t i = 0; i < roots->size(); ++i)
            tree_.roots.push_back(node((*roots)[i], "/roots/" + std::to_string(i), nullptr));

        compute_totals();
        if (auto totals = doc.find("totals"); totals != doc.end()) {
            if (!totals->is_object()) throw SchemaViolation("/totals", "must be an object");
            for (const auto& [id, v] : totals->items()) {
                std::string p = "/totals/" + id;
                auto info = tree_.metric_catalog.find(id);
                if (info == tree_.metric_catalog.end()) throw SchemaViolation(p, "unknown metric");
                if (!v.is_number()) throw SchemaViolation(p, "must be a number");
                double d = v.get<double>();
                if (!std::isfinite(d) || d < 0) throw NegativeMetric(p, id);
                if (info->second.kind == MetricKind::Exclusive) {
                    double sum = tree_.total[id];
                    if (std::fabs(d - sum) > kRelTol * std::max(std::fabs(d), std::fabs(sum)))
                        throw SchemaViolation(p, "total disagrees with the sum over nodes");
                }
                tree_.total[id] = d;
            }
        }
        return std::move(tree_);
    }

private:
    ProfileNode node(const nlohmann::json& j, const std::string& p, const ProfileNode* parent) {
        if (!j.is_object()) throw SchemaViolation(p, "node must be an object");
        ProfileNode n;
        auto fr = j.find("frame");
        if (fr == j.end() || !fr->is_object()) throw SchemaViolation(p + "/frame", "must be an object");
        if (!fr->contains("fn") || !(*fr)["fn"].is_string()) throw SchemaViolation(p + "/frame/fn", "must be a string");
        n.frame.function = (*fr)["fn"].get<std::string>();
        if (fr->contains("file")) {
            if (!(*fr)["file"].is_string()) throw SchemaViolation(p + "/frame/file", "must be a string");
            n.frame.file = (*fr)["file"].get<std::string>();
        }
        if (fr->contains("line")) {
            if (!(*fr)["line"].is_number_integer()) throw SchemaViolation(p + "/frame/line", "must be an integer");
            n.frame.line = (*fr)["line"].get<int>();
        }

        if (auto ms = j.find("metrics"); ms != j.end()) {
            if (!ms->is_object()) throw SchemaViolation(p + "/metrics", "must be an object");
            for (const auto& [id, v] : ms->items()) {
                std::string mp = p + "/metrics/" + id;
                if (!tree_.metric_catalog.contains(id)) throw SchemaViolation(mp, "metric not declared");
                if (!v.is_number()) throw SchemaViolation(mp, "must be a number");
                double d = v.get<double>();
                if (!std::isfinite(d) || d < 0) throw NegativeMetric(mp, id);
                n.metrics[id] = d;
            }
        }
        for (const auto& [id, v] : n.metrics) {
            if (tree_.metric_catalog[id].kind != MetricKind::Exclusive) continue;
            auto partner = inclusive_partner(id);
            if (!partner) continue;
            auto inc = n.metrics.find(*partner);
            if (inc != n.metrics.end() && !approx_le(v, inc->second))
                throw SchemaViolation(p + "/metrics/" + id, "exclusive value exceeds inclusive value");
        }
        if (parent) {
            for (const auto& [id, v] : n.metrics) {
                if (tree_.metric_catalog[id].kind != MetricKind::Inclusive) continue;
                auto pv = parent->metrics.find(id);
                if (pv != parent->metrics.end() && !approx_le(v, pv->second))
                    throw SchemaViolation(p + "/metrics/" + id, "child inclusive value exceeds its parent's");
            }
        }

        if (auto ch = j.find("children"); ch != j.end()) {
            if (!ch->is_array()) throw SchemaViolation(p + "/children", "must be an array");
            for (std::size_t i = 0; i < ch->size(); ++i)
                n.children.push_back(node((*ch)[i], p + "/children/" + std::to_string(i), &n));
        }
        return n;
    }

    void compute_totals() {
        for (const auto& [id, info] : tree_.metric_catalog) {
            if (info.kind == MetricKind::Exclusive) {
                tree_.total[id] = sum_over_nodes(tree_, id);
            } else if (info.kind == MetricKind::Inclusive) {
                double s = 0.0;
                bool any = false;
                for (const auto& r : tree_.roots) {
                    if (auto it = r.metrics.find(id); it != r.metrics.end()) {
                        s += it->second;
                        any = true;
                    }
                }
                if (any) tree_.total[id] = s;
            }
        }
    }

    ProfileTree tree_;
};

void preorder(const ProfileNode& n, std::vector<Frame>& path,
              const std::function<void(const ProfileNode&, const std::vector<Frame>&)>& fn) {
    path.push_back(n.frame);
    fn(n, path);
    for (const auto& c : n.children) preorder(c, path, fn);
    path.pop_back();
}

nlohmann::json export_node(const ProfileNode& n, const std::vector<std::string>& order) {
    nlohmann::json metrics = nlohmann::json::object();
    for (const auto& id : order)
        if (auto it = n.metrics.find(id); it != n.metrics.end()) metrics[id] = it->second;
    nlohmann::json children = nlohmann::json::array();
    for (const auto& c : n.children) children.push_back(export_node(c, order));
    return {{"frame", {{"fn", n.frame.function}, {"file", n.frame.file}, {"line", n.frame.line}}},
            {"metrics", metrics},
            {"children", children}};
}

}  // namespace

std::string_view to_string(MetricKind k) {
    switch (k) {
        case MetricKind::Inclusive: return "inclusive";
        case MetricKind::Exclusive: return "exclusive";
        case MetricKind::Rate: return "rate";
    }
    return "?";
}

double sum_over_nodes(const ProfileTree& tree, const std::string& metric_id) {
    double sum = 0.0;
    std::vector<Frame> path;
    for (const auto& r : tree.roots)
        preorder(r, path, [&](const ProfileNode& n, const std::vector<Frame>&) {
            if (auto it = n.metrics.find(metric_id); it != n.metrics.end()) sum += it->second;
        });
    return sum;
}

ProfileTree import_profile(const nlohmann::json& document) { return Importer{}.run(document); }

ProfileTree import_profile(std::string_view document) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(document);
    } catch (const nlohmann::json::parse_error& e) {
        throw SchemaViolation("/", std::string("invalid JSON: ") + e.what());
    }
    return import_profile(doc);
}

nlohmann::json export_profile(const ProfileTree& tree) {
    std::vector<std::string> order = tree.metric_order;
    for (const auto& [id, _] : tree.metric_catalog)
        if (std::find(order.begin(), order.end(), id) == order.end()) order.push_back(id);
    nlohmann::json metrics = nlohmann::json::array();
    for (const auto& id : order) {
        const auto& info = tree.metric_catalog.at(id);
        metrics.push_back({{"id", id}, {"unit", info.unit}, {"kind", to_string(info.kind)}});
    }
    nlohmann::json roots = nlohmann::json::array();
    for (const auto& r : tree.roots) roots.push_back(export_node(r, order));
    nlohmann::json totals = nlohmann::json::object();
    for (const auto& [id, v] : tree.total) totals[id] = v;
    return {{"schema", kProfileSchema}, {"metrics", metrics}, {"roots", roots}, {"totals", totals}};
}

std::vector<HotspotReport> rank_nodes(const ProfileTree& tree, const std::string& metric_id) {
    auto info = tree.metric_catalog.find(metric_id);
    if (info == tree.metric_catalog.end() || info->second.kind != MetricKind::Exclusive)
        throw UnknownMetric(metric_id);
    double total = tree.total.contains(metric_id) ? tree.total.at(metric_id) : sum_over_nodes(tree, metric_id);
    std::vector<HotspotReport> out;
    std::vector<Frame> path;
    for (const auto& r : tree.roots)
        preorder(r, path, [&](const ProfileNode& n, const std::vector<Frame>& p) {
            auto it = n.metrics.find(metric_id);
            if (it == n.metrics.end()) return;
            HotspotReport h;
            h.path = p;
            h.metric_id = metric_id;
            h.value = it->second;
            h.share = total > 0 ? it->second / total : 0.0;
            h.node_metrics = n.metrics;
            out.push_back(std::move(h));
        });
    std::stable_sort(out.begin(), out.end(),
                     [](const HotspotReport& a, const HotspotReport& b) { return a.value > b.value; });
    return out;
}

HotspotReport hotspot(const ProfileTree& tree, const std::string& metric_id) {
    auto ranked = rank_nodes(tree, metric_id);
    if (ranked.empty() || !(ranked.front().value > 0))
        throw UnknownMetric(metric_id + " (no node carries a positive value)");
    return ranked.front();
}

std::string summarize_for_model(const ProfileTree& tree, const RunContext& env, const SummaryOptions& opts) {
    if (opts.top_k < 1) throw Error("summarize_for_model: top_k must be >= 1");
    std::vector<std::string> lines;
    auto ranked = rank_nodes(tree, opts.metric_id);
    std::string unit = tree.metric_catalog.at(opts.metric_id).unit;
    double total = tree.total.contains(opts.metric_id) ? tree.total.at(opts.metric_id) : 0.0;
    lines.push_back("Hotspots by " + opts.metric_id + " (total " + fmt_num(total) + (unit.empty() ? "" : " " + unit) +
                    "):");
    for (std::size_t i = 0; i < ranked.size() && i < opts.top_k; ++i) {
        const auto& h = ranked[i];
        const auto& f = h.frame();
        std::string line = std::to_string(i + 1) + ". " + f.function + " (" + (f.file.empty() ? "?" : f.file) + ":" +
                           std::to_string(f.line) + ") " + fmt_pct(h.share) + " of " + opts.metric_id + " [" +
                           fmt_num(h.value) + (unit.empty() ? "" : " " + unit) + "]";
        for (const auto& id : tree.metric_order) {
            if (id == opts.metric_id) continue;
            if (auto it = h.node_metrics.find(id); it != h.node_metrics.end())
                line += " " + id + "=" + fmt_num(it->second);
        }
        lines.push_back(std::move(line));
    }
    if (!env.empty()) {
        lines.push_back("Execution context:");
        if (env.threads) lines.push_back("  threads: " + std::to_string(*env.threads));
        if (env.ranks) lines.push_back("  ranks: " + std::to_string(*env.ranks));
        if (env.iterations) lines.push_back("  iterations: " + std::to_string(*env.iterations));
        if (!env.hardware.empty()) lines.push_back("  hardware: " + env.hardware);
    }

    std::string full;
    for (const auto& l : lines) full += l + "\n";
    if (full.size() <= opts.char_budget) return full;

    std::string out;
    for (const auto& l : lines) {
        if (out.size() + l.size() + 1 + kTruncationMarker.size() + 1 > opts.char_budget) break;
        out += l + "\n";
    }
    out += std::string(kTruncationMarker) + "\n";
    return out;
}

namespace {

const ProfileNode* find_by_chain(const std::vector<ProfileNode>& nodes, const std::vector<std::string>& chain,
                                 std::size_t depth) {
    for (const auto& n : nodes) {
        if (n.frame.function != chain[depth]) continue;
        if (depth + 1 == chain.size()) return &n;
        if (auto* hit = find_by_chain(n.children, chain, depth + 1)) return hit;
    }
    return nullptr;
}

std::string join_chain(const std::vector<std::string>& chain) {
    std::string s;
    for (const auto& c : chain) s += (s.empty() ? "" : "/") + c;
    return s;
}

}  // namespace

std::vector<std::string> function_chain(const HotspotReport& h) {
    std::vector<std::string> out;
    for (const auto& f : h.path) out.push_back(f.function);
    return out;
}

MetricDelta diff_metrics(const ProfileTree& before, const ProfileTree& after, const std::vector<std::string>& path) {
    if (path.empty()) throw NodeNotFound("<empty path>");
    const ProfileNode* b = find_by_chain(before.roots, path, 0);
    if (!b) throw NodeNotFound(join_chain(path) + " (before)");
    const ProfileNode* a = find_by_chain(after.roots, path, 0);
    if (!a) throw NodeNotFound(join_chain(path) + " (after)");
    MetricDelta d;
    for (const auto& [id, bv] : b->metrics) {
        auto it = a->metrics.find(id);
        if (it == a->metrics.end()) continue;
        MetricChange c{bv, it->second, std::nullopt};
        if (bv != 0.0) c.relative_change = (it->second - bv) / bv;
        d[id] = c;
    }
    return d;
}

}  // namespace perfagent
