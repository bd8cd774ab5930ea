#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "perfagent/experiments.hpp"
#include "perfagent/json_io.hpp"

namespace perfagent {

namespace {

constexpr int kCsvThreadColumns[] = {4, 8, 16, 32};

std::string num(double v, const char* f = "%.6f") {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string joined_labels(const AttemptRecord& r, const char* sep) {
    std::string out;
    for (const auto& l : r.labels) {
        if (!out.empty()) out += sep;
        out += to_string(l.label);
    }
    return out;
}

std::string_view outcome_label(CorrectnessCategory c) {
    switch (c) {
        case CorrectnessCategory::CompilationError: return "Compilation errors";
        case CorrectnessCategory::NoGeneratedCode: return "No generated code";
        case CorrectnessCategory::OutputMismatch: return "Incorrect results - output mismatch";
        case CorrectnessCategory::FailedToFollowInstructions: return "Failed to follow instructions";
        case CorrectnessCategory::Correct: return "Correct";
    }
    return "?";
}

using Column = std::pair<Experiment, std::string>;  // experiment, tool

std::vector<Column> columns_of(const ResultsTable& t) {
    std::set<Column> cols;
    for (const auto& r : t.rows) cols.emplace(r.experiment, r.tool_id);
    return {cols.begin(), cols.end()};
}

std::string md_row(const std::vector<std::string>& cells) {
    std::string out = "|";
    for (const auto& c : cells) out += " " + c + " |";
    return out + "\n";
}

std::string md_rule(std::size_t n) {
    std::string out = "|";
    for (std::size_t i = 0; i < n; ++i) out += (i == 0 ? " --- |" : " ---: |");
    return out + "\n";
}

MeanKind summaries_mean_kind(const std::vector<SummaryRow>& s) {
    return s.empty() ? MeanKind::Arithmetic : s.front().mean_kind;
}

nlohmann::json summary_json(const SummaryRow& s) {
    nlohmann::json group = nlohmann::json::object();
    for (const auto& [k, v] : s.group) group[k] = v;
    nlohmann::json counts = nlohmann::json::object();
    for (const auto& [c, n] : s.category_counts) counts[std::string(to_string(c))] = n;
    return {{"group", group},
            {"mean_speedup", s.mean_speedup},
            {"mean_kind", to_string(s.mean_kind)},
            {"pass_at_1", s.pass_at_1},
            {"n", s.n},
            {"category_counts", counts}};
}

}  // namespace

std::optional<ReportFormat> report_format_from_string(std::string_view s) {
    if (s == "csv") return ReportFormat::Csv;
    if (s == "markdown" || s == "md") return ReportFormat::Markdown;
    if (s == "json") return ReportFormat::Json;
    return std::nullopt;
}

std::string_view extension(ReportFormat f) {
    switch (f) {
        case ReportFormat::Csv: return "csv";
        case ReportFormat::Markdown: return "md";
        case ReportFormat::Json: return "json";
    }
    return "txt";
}

std::string render_csv(const ResultsTable& table) {
    std::string out =
        "benchmark_id,motif,level,experiment,tool_id,variant_tag,category,speedup,na_flag,"
        "thread_4,thread_8,thread_16,thread_32,labels\n";
    for (const auto& r : table.rows) {
        std::vector<std::string> cells{csv_field(r.benchmark_id),
                                       csv_field(std::string(to_string(r.motif))),
                                       std::to_string(r.level),
                                       std::string(to_string(r.experiment)),
                                       csv_field(r.tool_id),
                                       csv_field(r.variant_tag),
                                       std::string(to_string(r.category)),
                                       num(r.speedup),
                                       r.na() ? "1" : "0"};
        for (int c : kCsvThreadColumns) {
            std::string cell;
            if (r.thread_results) {
                auto it = r.thread_results->find(c);
                if (it != r.thread_results->end()) cell = it->second ? num(*it->second) : "NA";
            }
            cells.push_back(cell);
        }
        cells.push_back(csv_field(joined_labels(r, ";")));
        for (std::size_t i = 0; i < cells.size(); ++i) out += (i ? "," : "") + cells[i];
        out += "\n";
    }
    return out;
}

std::string render_markdown(const ResultsTable& table, const std::vector<SummaryRow>& summaries) {
    std::string out = "# Optimization results\n\n";
    auto cols = columns_of(table);

    // Correctness taxonomy: failure rows, Correct, Total; one column per
    // (experiment, tool) plus an overall total.
    out += "## Correctness\n\n";
    std::vector<std::string> head{"Outcome"};
    for (const auto& [e, tool] : cols) head.push_back(std::string(to_string(e)) + " " + tool);
    head.push_back("Total");
    out += md_row(head) + md_rule(head.size());
    std::map<Column, std::map<CorrectnessCategory, std::size_t>> counts;
    for (const auto& r : table.rows) ++counts[{r.experiment, r.tool_id}][r.category];
    auto count_row = [&](const std::string& label, auto pred) {
        std::vector<std::string> cells{label};
        std::size_t total = 0;
        for (const auto& col : cols) {
            std::size_t n = 0;
            for (const auto& [c, k] : counts[col])
                if (pred(c)) n += k;
            total += n;
            cells.push_back(std::to_string(n));
        }
        cells.push_back(std::to_string(total));
        out += md_row(cells);
    };
    count_row("**Incorrect**", [](CorrectnessCategory c) { return c != CorrectnessCategory::Correct; });
    for (auto cat : all_categories()) {
        if (cat == CorrectnessCategory::Correct) continue;
        count_row("- " + std::string(outcome_label(cat)), [cat](CorrectnessCategory c) { return c == cat; });
    }
    count_row("**Correct**", [](CorrectnessCategory c) { return c == CorrectnessCategory::Correct; });
    count_row("**Total**", [](CorrectnessCategory) { return true; });
    out += "\n";

    // Mean speedup per motif for each (experiment, tool).
    const MeanKind kind = summaries_mean_kind(summaries);
    out += "## Mean speedup by motif\n\n";
    std::vector<std::string> mhead{"Motif"};
    for (const auto& [e, tool] : cols) mhead.push_back(std::string(to_string(e)) + " " + tool);
    out += md_row(mhead) + md_rule(mhead.size());
    std::map<std::string, std::map<Column, std::vector<double>>> by_motif;
    for (const auto& r : table.rows)
        by_motif[std::string(to_string(r.motif))][{r.experiment, r.tool_id}].push_back(r.na() ? 1.0 : r.speedup);
    for (const auto& [motif, per_col] : by_motif) {
        std::vector<std::string> cells{motif};
        for (const auto& col : cols) {
            auto it = per_col.find(col);
            cells.push_back(it == per_col.end() ? "-" : num(mean_of(it->second, kind), "%.2f"));
        }
        out += md_row(cells);
    }
    out += "\n";

    out += "## Summary\n\n";
    std::vector<std::string> shead{"Group", "n", "Mean speedup", "pass@1"};
    out += md_row(shead) + md_rule(shead.size());
    for (const auto& s : summaries) {
        std::string g;
        for (const auto& [k, v] : s.group) g += (g.empty() ? "" : ", ") + k + "=" + v;
        if (g.empty()) g = "all";
        out += md_row({g, std::to_string(s.n), num(s.mean_speedup, "%.2f"), num(s.pass_at_1, "%.2f")});
    }
    out += "\n";
    out += "Means are " + std::string(to_string(kind)) +
           " over benchmarks; attempts that are not Correct count as 1.0 (the original code). "
           "The instruction-following check is heuristic.\n";
    return out;
}

std::string render_json(const ResultsTable& table, const std::vector<SummaryRow>& summaries) {
    nlohmann::json doc = to_json(table);
    nlohmann::json s = nlohmann::json::array();
    for (const auto& row : summaries) s.push_back(summary_json(row));
    doc["summaries"] = s;
    doc["mean_kind"] = to_string(summaries_mean_kind(summaries));
    return doc.dump(2) + "\n";
}

fs::path emit_report(const ResultsTable& table, const std::vector<SummaryRow>& summaries, ReportFormat format,
                     const fs::path& out_stem) {
    fs::path path = out_stem;
    path += "." + std::string(extension(format));
    std::string text;
    switch (format) {
        case ReportFormat::Csv: text = render_csv(table); break;
        case ReportFormat::Markdown: text = render_markdown(table, summaries); break;
        case ReportFormat::Json: text = render_json(table, summaries); break;
    }
    std::error_code ec;
    if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw UnwritablePath(path);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw UnwritablePath(path);
    return path;
}

}  // namespace perfagent
