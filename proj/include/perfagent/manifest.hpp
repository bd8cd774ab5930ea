// Benchmark registry: manifest schema and selection, plus source prep.
#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "perfagent/error.hpp"

namespace perfagent {

namespace fs = std::filesystem;

enum class Motif {
    DenseLinearAlgebra,
    SparseLinearAlgebra,
    SpectralMethods,
    MonteCarlo,
    DynamicProgramming,
    StructuredGrids,
    NBody,
    Stencils,
    RadiationTransport,
};

enum class Language { C, Cpp };

enum class ValidationMode { ExactBytes, NumericTokens };

std::string_view to_string(Motif m);
std::string_view to_string(Language l);
std::string_view to_string(ValidationMode m);
std::optional<Motif> motif_from_string(std::string_view s);
std::optional<Language> language_from_string(std::string_view s);
std::optional<ValidationMode> validation_mode_from_string(std::string_view s);

struct BuildRecipe {
    std::string compiler_id = "gcc";
    std::vector<std::string> flags;
    std::vector<std::string> extra_objects;
    double timeout_s = 120.0;

    bool operator==(const BuildRecipe&) const = default;
};

struct RunRecipe {
    std::vector<std::string> args;
    std::optional<std::string> stdin_file;
    int repetitions = 10;
    double timeout_s = 60.0;
    std::map<std::string, std::string> env;
    /// When set, validation reads this file (relative to the run directory)
    /// instead of stdout. Intended for benchmarks with nondeterministic stdout.
    std::optional<std::string> result_file;

    bool operator==(const RunRecipe&) const = default;
};

struct ValidationPolicy {
    ValidationMode mode = ValidationMode::ExactBytes;
    double abs_tol = 0.0;
    double rel_tol = 0.0;
    std::vector<std::string> ignore_patterns;

    bool operator==(const ValidationPolicy&) const = default;
};

struct PrepOptions {
    bool strip_omp_pragmas = false;
    bool expand_macros = false;

    bool operator==(const PrepOptions&) const = default;
};

struct BenchmarkSpec {
    std::string id;
    Motif motif = Motif::DenseLinearAlgebra;
    int level = 1;
    Language language = Language::C;
    std::vector<std::string> source_files;
    std::optional<std::string> entry_hotspot;
    BuildRecipe build;
    RunRecipe run;
    ValidationPolicy validation;
    PrepOptions prep;
    /// Directory holding the manifest; source paths are relative to it.
    fs::path root;

    bool operator==(const BenchmarkSpec&) const = default;
};

/// Name of the per-benchmark manifest file looked up by load_manifest.
inline constexpr std::string_view kManifestFileName = "benchmark.json";

class MalformedManifest : public Error {
public:
    MalformedManifest(const fs::path& path, const std::string& reason);
    fs::path path;
    std::string reason;
};

class MissingSource : public Error {
public:
    explicit MissingSource(const fs::path& path);
    fs::path path;
};

class DuplicateId : public Error {
public:
    explicit DuplicateId(const std::string& id);
    std::string id;
};

class PreprocessFailure : public Error {
public:
    explicit PreprocessFailure(const std::string& stderr_excerpt);
    std::string stderr_excerpt;
};

/// Parse one manifest document. `manifest_dir` anchors relative paths and is
/// used for the source-existence checks.
BenchmarkSpec parse_manifest(const nlohmann::json& doc, const fs::path& manifest_dir,
                             const fs::path& origin_for_errors = {});
nlohmann::json to_json(const BenchmarkSpec& spec);

BenchmarkSpec load_benchmark(const fs::path& manifest_file);

/// Walk `root` recursively, loading every `benchmark.json`. Result is sorted
/// by id.
std::vector<BenchmarkSpec> load_manifest(const fs::path& root);

struct SelectFilter {
    std::optional<std::set<int>> levels;
    std::optional<std::set<Motif>> motifs;
    std::optional<std::set<std::string>> ids;

    bool empty() const { return !levels && !motifs && !ids; }
};

std::vector<BenchmarkSpec> select(const std::vector<BenchmarkSpec>& specs,
                                  const SelectFilter& filter);

/// Parse "level=1,2;motif=Stencils;id=matmul" style selectors used by the CLI.
SelectFilter parse_select(std::string_view text);

/// Remove every line whose first non-blank characters are `#pragma omp`.
std::string strip_omp_pragmas(std::string_view source);

struct PrepareOptions {
    /// Preprocessor command used for macro expansion; sources are passed as
    /// the last argument and the expanded text is read from stdout.
    std::vector<std::string> preprocessor = {"cpp", "-P", "-undef", "-nostdinc"};
};

/// Copy the benchmark's sources into `work_dir`, applying the manifest's prep
/// options. Returns `work_dir`.
fs::path prepare_sources(const BenchmarkSpec& spec, const fs::path& work_dir,
                         const PrepareOptions& opts = {});

/// The file that carries the entry hotspot, or the first listed source.
std::string primary_source(const BenchmarkSpec& spec);

}  // namespace perfagent
