// Prompt rendering, response extraction, instruction-following checks and
// optimization-label classification.
#pragma once

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "perfagent/manifest.hpp"
#include "perfagent/verify.hpp"

namespace perfagent {

enum class Experiment { EX1, EX2, EX3, Agent };

std::string_view to_string(Experiment e);
std::optional<Experiment> experiment_from_string(std::string_view s);

/// Environment fields substituted into the system prompt.
struct PromptEnv {
    std::string os = "Linux system (Rocky Linux 8.5 Green Obsidian)";
    std::string cpu = "AMD EPYC 7543 32-Core CPU";
    std::string compilers = "GCC/G++ v14.2.0 and CLANG/CLANG++ v19.1.5";
};

/// Agent-only inputs.
struct AgentPromptContext {
    std::string hotspot_name;
    std::string profile_summary;
    std::string memory_digest;
    std::string decline_sentinel;
};

struct PromptBundle {
    std::string system_text;
    std::string user_text;
    Experiment experiment = Experiment::EX1;
    std::string attached_code;

    bool operator==(const PromptBundle&) const = default;
};

std::string render_system_prompt(const PromptEnv& env);
/// The fixed instruction sentence for an experiment (agent: the agent's task text).
std::string instruction_text(Experiment e, const AgentPromptContext* agent = nullptr);

PromptBundle render_prompt(Experiment experiment, const BenchmarkSpec& spec, std::string_view code,
                           const PromptEnv& env, const AgentPromptContext* agent = nullptr);

enum class ExtractionRule { FencedBlock, WholeMessage, None };
std::string_view to_string(ExtractionRule r);

struct ExtractionResult {
    std::optional<std::string> code;
    std::optional<std::string> explanation;
    ExtractionRule rule = ExtractionRule::None;
    /// The response looked cut off (unclosed fence or unbalanced braces).
    bool truncated = false;
    /// Byte offset of `code` within the raw response.
    std::size_t code_offset = 0;

    ExtractionSummary summary() const { return {code.has_value()}; }
};

ExtractionResult extract_code(std::string_view raw_text);

class UnparseableCandidate : public Error {
public:
    explicit UnparseableCandidate(const std::string& why) : Error("unparseable candidate: " + why) {}
};

/// Flags the ways `candidate` departs from the prompt's editing rules relative
/// to `original`. MissingParallelConstruct is only checked for EX3.
std::set<ConstraintFlag> check_constraints(std::string_view original, std::string_view candidate,
                                           Experiment experiment);

/// True when the text contains an OpenMP pragma, a thread-library call or a
/// parallel STL execution policy.
bool has_parallel_construct(std::string_view source);

enum class OptimizationKind {
    LoopInterchange,
    LoopFusion,
    LoopFission,
    LoopTiling,
    LoopUnrolling,
    FusedMultiplyAdd,
    PrecisionChange,
    MathSimplification,
    OmpParallelFor,
    OmpScoping,
    OmpSimd,
    Prefetch,
    MemoryAccessPattern,
    PrecomputeConstants,
    FunctionOverheadReduction,
    AlgorithmicChange,
    Other,
};

std::string_view to_string(OptimizationKind k);
std::optional<OptimizationKind> optimization_kind_from_string(std::string_view s);

struct OptimizationLabel {
    OptimizationKind label = OptimizationKind::Other;
    std::string evidence;

    bool operator==(const OptimizationLabel&) const = default;
};

/// Case-insensitive phrase matching over the optimization taxonomy. Labels are
/// returned in taxonomy order, each at most once; no match yields [Other].
std::vector<OptimizationLabel> classify_explanation(std::string_view explanation);

}  // namespace perfagent
