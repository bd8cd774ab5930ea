// Output comparison and the correctness taxonomy behind pass@1.
#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "perfagent/manifest.hpp"
#include "perfagent/toolchain.hpp"

namespace perfagent {

enum class CorrectnessCategory {
    Correct,
    CompilationError,
    NoGeneratedCode,
    OutputMismatch,
    FailedToFollowInstructions,
};

std::string_view to_string(CorrectnessCategory c);
std::optional<CorrectnessCategory> category_from_string(std::string_view s);
/// All categories in reporting order: failures first (table row order), then Correct.
const std::vector<CorrectnessCategory>& all_categories();

struct Divergence {
    std::size_t line = 0;         // 1-based, in the filtered output
    std::size_t token_index = 0;  // 1-based token (NumericTokens) or byte column (ExactBytes)
    std::string reference_excerpt;
    std::string candidate_excerpt;
};

struct MatchReport {
    bool matched = true;
    std::optional<Divergence> first_divergence;
    std::size_t compared_tokens = 0;
};

nlohmann::json to_json(const MatchReport& r);

/// Drop every line matched (regex_search) by any of `patterns`.
std::string filter_lines(std::string_view text, const std::vector<std::string>& patterns);

MatchReport compare_outputs(std::string_view reference, std::string_view candidate, const ValidationPolicy& policy);

enum class ConstraintFlag {
    RemovedFunction,
    RemovedHeader,
    AddedFunction,
    AddedPrintStatement,
    MissingParallelConstruct,
};

std::string_view to_string(ConstraintFlag f);

/// What extraction produced, as far as classification cares.
struct ExtractionSummary {
    bool has_code = false;
};

class InconsistentInputs : public Error {
public:
    explicit InconsistentInputs(const std::string& why) : Error("inconsistent attempt inputs: " + why) {}
};

/// Precedence: NoGeneratedCode > CompilationError > FailedToFollowInstructions
/// > OutputMismatch > Correct.
CorrectnessCategory classify_attempt(const std::optional<BuildOutcome>& build, ExtractionSummary extraction,
                                     const std::optional<RunSample>& run, const std::optional<MatchReport>& match,
                                     const std::set<ConstraintFlag>& constraint_flags);

class EmptyList : public Error {
public:
    EmptyList() : Error("pass@1 of an empty attempt list") {}
};

double pass_at_1(const std::vector<CorrectnessCategory>& categories);

}  // namespace perfagent
