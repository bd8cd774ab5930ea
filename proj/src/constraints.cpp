#include <algorithm>
#include <regex>

#include "perfagent/llm_gateway.hpp"
#include "perfagent/patch.hpp"

namespace perfagent {

namespace {

std::size_t count_print_tokens(const std::vector<std::string>& tokens) {
    static const std::set<std::string> kPrint{"printf", "fprintf", "puts",  "fputs", "putchar",
                                              "cout",   "cerr",    "clog",  "print", "println",
                                              "vprintf", "vfprintf", "perror"};
    return static_cast<std::size_t>(
        std::count_if(tokens.begin(), tokens.end(), [](const std::string& t) { return kPrint.contains(t); }));
}

std::string normalize_include(std::string s) {
    s.erase(std::remove_if(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); }), s.end());
    return s;
}

}  // namespace

bool has_parallel_construct(std::string_view source) {
    static const std::regex omp(R"(^\s*#\s*pragma\s+omp\b)");
    std::vector<std::string> directives;
    std::vector<std::string> toks;
    try {
        directives = list_directives(source);
        toks = code_tokens(source);
    } catch (const PatchError&) {
        return false;
    }
    for (const auto& d : directives)
        if (std::regex_search(d, omp)) return true;
    for (std::size_t i = 0; i < toks.size(); ++i) {
        const auto& t = toks[i];
        if (t == "pthread_create" || t == "thrd_create") return true;
        if (t == "_Pragma" && i + 2 < toks.size() && toks[i + 2].find("omp") != std::string::npos) return true;
        if (i + 2 < toks.size() && toks[i + 1] == "::") {
            const auto& n = toks[i + 2];
            if (t == "std" && (n == "thread" || n == "jthread" || n == "async")) return true;
            if (t == "execution" && (n == "par" || n == "par_unseq")) return true;
            if (t == "tbb" && (n == "parallel_for" || n == "parallel_reduce" || n == "parallel_invoke")) return true;
        }
    }
    return false;
}

std::set<ConstraintFlag> check_constraints(std::string_view original, std::string_view candidate,
                                           Experiment experiment) {
    std::vector<FunctionSpan> cand_fns;
    std::vector<std::string> cand_tokens;
    std::vector<std::string> cand_includes;
    try {
        cand_fns = list_functions(candidate);
        cand_tokens = code_tokens(candidate);
        cand_includes = list_includes(candidate);
    } catch (const PatchError& e) {
        throw UnparseableCandidate(e.what());
    }
    const auto orig_fns = list_functions(original);
    const auto orig_tokens = code_tokens(original);
    const auto orig_includes = list_includes(original);

    std::set<std::string> orig_names, cand_names, orig_inc, cand_inc;
    for (const auto& f : orig_fns) orig_names.insert(f.name);
    for (const auto& f : cand_fns) cand_names.insert(f.name);
    for (const auto& i : orig_includes) orig_inc.insert(normalize_include(i));
    for (const auto& i : cand_includes) cand_inc.insert(normalize_include(i));

    std::set<ConstraintFlag> flags;
    if (std::any_of(orig_names.begin(), orig_names.end(), [&](const auto& n) { return !cand_names.contains(n); }))
        flags.insert(ConstraintFlag::RemovedFunction);
    if (std::any_of(cand_names.begin(), cand_names.end(), [&](const auto& n) { return !orig_names.contains(n); }))
        flags.insert(ConstraintFlag::AddedFunction);
    if (std::any_of(orig_inc.begin(), orig_inc.end(), [&](const auto& n) { return !cand_inc.contains(n); }))
        flags.insert(ConstraintFlag::RemovedHeader);
    if (count_print_tokens(cand_tokens) > count_print_tokens(orig_tokens))
        flags.insert(ConstraintFlag::AddedPrintStatement);
    if (experiment == Experiment::EX3 && !has_parallel_construct(candidate))
        flags.insert(ConstraintFlag::MissingParallelConstruct);
    return flags;
}

}  // namespace perfagent
