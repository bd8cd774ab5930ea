// Compiling benchmark variants and timing their execution.
#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "perfagent/manifest.hpp"
#include "perfagent/process.hpp"

namespace perfagent {

struct CompilerEntry {
    std::string c_path;
    std::string cxx_path;
    std::string version_string;
    std::vector<std::string> default_flags;
};

struct ToolchainConfig {
    std::map<std::string, CompilerEntry> compilers;

    /// Probe PATH for gcc/g++ and clang/clang++.
    static ToolchainConfig detect();
    static ToolchainConfig from_json(const nlohmann::json& doc);
    static ToolchainConfig load(const fs::path& file);
    nlohmann::json to_json() const;

    const CompilerEntry& resolve(const std::string& compiler_id) const;
};

enum class BuildStatus { Ok, CompileError };

struct BuildOutcome {
    BuildStatus status = BuildStatus::CompileError;
    std::optional<fs::path> binary_path;
    std::string command_line;
    std::string stderr_text;
    double elapsed_s = 0.0;
    bool timed_out = false;

    bool ok() const { return status == BuildStatus::Ok; }
};

class BuildTimeout : public Error {
public:
    explicit BuildTimeout(const std::string& what) : Error(what) {}
};

/// `<work>/<bench_id>/<variant_tag>/{src,bin,logs}`. Tags may contain '/'
/// to nest (e.g. "agent/iter1").
struct VariantLayout {
    fs::path dir;
    fs::path src() const { return dir / "src"; }
    fs::path bin() const { return dir / "bin"; }
    fs::path logs() const { return dir / "logs"; }
};

VariantLayout variant_layout(const fs::path& work_root, const std::string& bench_id,
                             const std::string& variant_tag);

/// Build the spec's translation units from `src_dir`. Sources are snapshotted
/// into the variant's src/ directory first unless `src_dir` already is it.
/// A compile failure is reported in the outcome; ToolNotFound and BuildTimeout
/// are thrown.
BuildOutcome compile(const BenchmarkSpec& spec, const fs::path& src_dir, const ToolchainConfig& toolchain,
                     const fs::path& work_root, const std::string& variant_tag,
                     const std::optional<std::string>& compiler_override = std::nullopt);

enum class RunStatus { Ok, Crash, Timeout };

std::string_view to_string(RunStatus s);

struct RunSample {
    std::vector<double> wall_times_s;
    std::string stdout_text;  // first repetition (or result_file contents)
    std::string stderr_text;
    RunStatus status = RunStatus::Ok;
    int exit_code = 0;
    int term_signal = 0;
    std::optional<int> thread_count;

    bool ok() const { return status == RunStatus::Ok; }
    double mean() const;
    double min() const;
    double stddev() const;
};

/// Name of the environment variable that carries the OpenMP thread count.
inline constexpr const char* kThreadEnvVar = "OMP_NUM_THREADS";

struct RunOptions {
    std::optional<int> thread_count;
    std::optional<fs::path> working_dir;
};

/// Execute `binary` `run.repetitions` times, sequentially, under the
/// harness-wide execution lock. Stops at the first failing repetition.
RunSample run_timed(const fs::path& binary, const RunRecipe& run, const RunOptions& opts = {});

/// Serializes timed runs across the process.
std::mutex& execution_lock();

struct SpeedupStat {
    double baseline_mean_s = 0.0;
    double candidate_mean_s = 0.0;
    double speedup = 1.0;
    double baseline_min_s = 0.0;
    double candidate_min_s = 0.0;
    double baseline_stddev_s = 0.0;
    double candidate_stddev_s = 0.0;
};

class EmptySample : public Error {
public:
    EmptySample() : Error("speedup requires non-empty samples") {}
};

SpeedupStat measure_speedup(const RunSample& baseline, const RunSample& candidate);
/// Same ratio from raw means (used for reporting and replayed figures).
double speedup_from_means(double baseline_mean_s, double candidate_mean_s);

/// One sample per count, ascending order. Failing counts are recorded in the
/// corresponding sample's status.
std::map<int, RunSample> thread_sweep(const fs::path& binary, const RunRecipe& run, std::vector<int> counts,
                                      const std::optional<fs::path>& working_dir = std::nullopt);

}  // namespace perfagent
