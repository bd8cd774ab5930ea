// Prompt experiments and external-tool import, plus aggregation and reports.
#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "perfagent/llm_gateway.hpp"
#include "perfagent/manifest.hpp"
#include "perfagent/provider.hpp"
#include "perfagent/toolchain.hpp"
#include "perfagent/verify.hpp"

namespace perfagent {

struct AttemptRecord {
    std::string benchmark_id;
    Motif motif = Motif::DenseLinearAlgebra;
    int level = 1;
    Experiment experiment = Experiment::EX1;
    std::string tool_id;
    std::string variant_tag;
    CorrectnessCategory category = CorrectnessCategory::NoGeneratedCode;
    /// Measured ratio for Correct rows; exactly 1.0 otherwise.
    double speedup = 1.0;
    std::optional<SpeedupStat> speedup_stat;
    std::vector<OptimizationLabel> labels;
    /// EX3 only: thread count -> speedup against the 1-thread original
    /// (absent value when that count did not produce matching output).
    std::optional<std::map<int, std::optional<double>>> thread_results;
    std::string wallclock_log;
    std::string note;

    bool na() const { return category != CorrectnessCategory::Correct; }
};

nlohmann::json to_json(const AttemptRecord& r);
AttemptRecord attempt_from_json(const nlohmann::json& j);

class DuplicateRow : public Error {
public:
    explicit DuplicateRow(const std::string& key) : Error("duplicate results row: " + key) {}
};

struct ResultsTable {
    std::vector<AttemptRecord> rows;
    nlohmann::json provenance = nlohmann::json::object();

    /// Appends, enforcing (benchmark_id, experiment, tool_id, variant_tag) uniqueness.
    void add(AttemptRecord r);
    void merge(const ResultsTable& other);
};

nlohmann::json to_json(const ResultsTable& t);
ResultsTable table_from_json(const nlohmann::json& j);
ResultsTable load_results(const fs::path& file);
void save_results(const fs::path& file, const ResultsTable& t);

struct ExperimentOptions {
    fs::path work_root = "work";
    PromptEnv prompt_env;
    std::optional<std::string> compiler_id;
    /// EX3 thread ladder.
    std::vector<int> thread_counts = {4, 8, 16, 32};
    /// Benchmarks processed concurrently (compile/validate overlap; timed runs
    /// still serialize). Replay transcripts consumed in order need 1.
    int jobs = 1;
    /// Timestamp written into provenance; empty means "now".
    std::string timestamp;
};

class EmptySelection : public Error {
public:
    EmptySelection() : Error("benchmark selection is empty") {}
};

ResultsTable run_ex1(const std::vector<BenchmarkSpec>& selection, Provider& provider,
                     const ToolchainConfig& toolchain, const ExperimentOptions& opts = {});
ResultsTable run_ex2(const std::vector<BenchmarkSpec>& selection, Provider& provider,
                     const ToolchainConfig& toolchain, const ExperimentOptions& opts = {});
ResultsTable run_ex3(const std::vector<BenchmarkSpec>& selection, Provider& provider,
                     const ToolchainConfig& toolchain, const ExperimentOptions& opts = {});

/// `dir/<benchmark_id>/` holds an externally optimized copy of that
/// benchmark's sources; each goes through the same build and validation as a model variant.
/// Benchmarks without a directory are skipped.
ResultsTable import_external_tool_results(const fs::path& dir, const std::string& tool_id,
                                          const std::vector<BenchmarkSpec>& selection,
                                          const ToolchainConfig& toolchain, const ExperimentOptions& opts = {},
                                          Experiment experiment = Experiment::EX1);

enum class GroupKey { Tool, Motif, Experiment };
enum class MeanKind { Arithmetic, Geometric };

std::string_view to_string(GroupKey k);
std::string_view to_string(MeanKind k);
std::optional<GroupKey> group_key_from_string(std::string_view s);

struct SummaryRow {
    /// Group key values in the order of the requested keys, e.g. {"tool": "o1", "motif": "Stencils"}.
    std::vector<std::pair<std::string, std::string>> group;
    double mean_speedup = 1.0;
    double pass_at_1 = 0.0;
    std::size_t n = 0;
    std::map<CorrectnessCategory, std::size_t> category_counts;
    MeanKind mean_kind = MeanKind::Arithmetic;
};

class EmptyTable : public Error {
public:
    EmptyTable() : Error("cannot aggregate an empty results table") {}
};

/// NA rows contribute 1.0 to the mean. Groups come out sorted by key values.
std::vector<SummaryRow> aggregate(const ResultsTable& table, const std::vector<GroupKey>& group_by,
                                  MeanKind mean = MeanKind::Arithmetic);

double mean_of(const std::vector<double>& xs, MeanKind kind);

enum class ReportFormat { Csv, Markdown, Json };
std::optional<ReportFormat> report_format_from_string(std::string_view s);
std::string_view extension(ReportFormat f);

class UnwritablePath : public Error {
public:
    explicit UnwritablePath(const fs::path& p) : Error("cannot write " + p.string()), path(p) {}
    fs::path path;
};

std::string render_csv(const ResultsTable& table);
std::string render_markdown(const ResultsTable& table, const std::vector<SummaryRow>& summaries);
std::string render_json(const ResultsTable& table, const std::vector<SummaryRow>& summaries);

/// Writes `<out_stem>.<ext>`; returns the written path.
fs::path emit_report(const ResultsTable& table, const std::vector<SummaryRow>& summaries, ReportFormat format,
                     const fs::path& out_stem);

}  // namespace perfagent
