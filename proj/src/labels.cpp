#include <array>
#include <regex>

#include "perfagent/llm_gateway.hpp"

namespace perfagent {

namespace {

struct PhraseRule {
    OptimizationKind kind;
    const char* pattern;
};

// Word-bounded, case-insensitive. Evidence is the first matching span.
const std::array<PhraseRule, 16> kRules{{
    {OptimizationKind::LoopInterchange,
     R"(\bloop[- ]interchang\w*|\binterchang\w* (the |of )?(two |nested |inner and outer )?loops?\b|\bloop[- ]reorder\w*|\breorder\w* (the )?(nested )?loops\b|\bloop order\b|\bswap\w* (the )?loops\b|\bi-k-j\b|\bikj\b)"},
    {OptimizationKind::LoopFusion,
     R"(\bloop[- ]fusion\b|\bfus(e|ed|ing) (the |two |adjacent )*loops\b|\bmerg(e|ed|ing) (the |two |adjacent )*loops\b)"},
    {OptimizationKind::LoopFission,
     R"(\bloop[- ]fission\b|\bloop[- ]distribution\b|\bloop[- ]splitting\b|\bsplit(ting)? (the |a )?loops?\b)"},
    {OptimizationKind::LoopTiling, R"(\bloop[- ]tiling\b|\btil(e|ed|ing)\b|\bcache[- ]block\w*|\bloop[- ]blocking\b)"},
    {OptimizationKind::LoopUnrolling, R"(\bunroll\w*)"},
    {OptimizationKind::FusedMultiplyAdd,
     R"(\bfused[- ]multiply[- ]add\b|\bfma\b|\bfuse[sd]? multiply and add\b|\bmultiply[- ]add\b)"},
    {OptimizationKind::PrecisionChange,
     R"(\bchange of precision\b|\bprecision change\b|\b(single|lower|reduced|mixed)[- ]precision\b|\bdouble to float\b)"},
    {OptimizationKind::MathSimplification,
     R"(\bmath(ematical)? simplification\b|\bstrength reduction\b|\balgebraic simplification\b|\bsimplif(y|ied|ying) (the )?(math|arithmetic|expression|computation)s?\b)"},
    {OptimizationKind::OmpParallelFor,
     R"(\bomp (parallel )?for\b|\bparallel for\b|\bparalleli[sz](e|ed|ing|ation)\b|\bmulti-?thread\w*)"},
    {OptimizationKind::OmpScoping,
     R"(\bopenmp scoping\b|\b(data|variable) scoping\b|\bfirstprivate\b|\bprivate\(|\bshared\(|\bdefault\(none\))"},
    {OptimizationKind::OmpSimd, R"(\bomp simd\b|\bsimd\b|\bvectori[sz]\w*)"},
    {OptimizationKind::Prefetch, R"(\bprefetch\w*)"},
    {OptimizationKind::MemoryAccessPattern,
     R"(\bmemory access pattern\w*|\baccess pattern\w*|\bmemory layout\b|\bdata layout\b|\bcontiguous (memory )?access\w*|\bunit[- ]stride\b|\bmemory optimi[sz]ation\w*)"},
    {OptimizationKind::PrecomputeConstants,
     R"(\bpre-?comput\w*|\bhoist\w*|\bloop[- ]invariant\b|\bconstant folding\b)"},
    {OptimizationKind::FunctionOverheadReduction,
     R"(\binlin(e|ed|ing)\b|\bfunction[- ]call overhead\b|\bfunction overhead\b|\bcall overhead\b)"},
    {OptimizationKind::AlgorithmicChange,
     R"(\bbinary search\b|\balgorithmic\b|\bdifferent algorithm\b|\btime complexity\b)"},
}};

constexpr std::array<std::string_view, 17> kNames{
    "LoopInterchange", "LoopFusion",    "LoopFission",         "LoopTiling",          "LoopUnrolling",
    "FusedMultiplyAdd", "PrecisionChange", "MathSimplification", "OmpParallelFor",     "OmpScoping",
    "OmpSimd",         "Prefetch",      "MemoryAccessPattern", "PrecomputeConstants", "FunctionOverheadReduction",
    "AlgorithmicChange", "Other"};

}  // namespace

std::string_view to_string(OptimizationKind k) { return kNames[static_cast<std::size_t>(k)]; }

std::optional<OptimizationKind> optimization_kind_from_string(std::string_view s) {
    for (std::size_t i = 0; i < kNames.size(); ++i)
        if (kNames[i] == s) return static_cast<OptimizationKind>(i);
    return std::nullopt;
}

std::vector<OptimizationLabel> classify_explanation(std::string_view explanation) {
    static const std::vector<std::regex> compiled = [] {
        std::vector<std::regex> v;
        for (const auto& r : kRules) v.emplace_back(r.pattern, std::regex::ECMAScript | std::regex::icase);
        return v;
    }();
    std::string text(explanation);
    std::vector<OptimizationLabel> out;
    for (std::size_t i = 0; i < kRules.size(); ++i) {
        std::smatch m;
        if (std::regex_search(text, m, compiled[i])) out.push_back({kRules[i].kind, m.str(0)});
    }
    if (out.empty()) out.push_back({OptimizationKind::Other, {}});
    return out;
}

}  // namespace perfagent
