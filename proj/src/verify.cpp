#include "perfagent/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <regex>

namespace perfagent {

std::string_view to_string(CorrectnessCategory c) {
    switch (c) {
        case CorrectnessCategory::Correct: return "Correct";
        case CorrectnessCategory::CompilationError: return "CompilationError";
        case CorrectnessCategory::NoGeneratedCode: return "NoGeneratedCode";
        case CorrectnessCategory::OutputMismatch: return "OutputMismatch";
        case CorrectnessCategory::FailedToFollowInstructions: return "FailedToFollowInstructions";
    }
    return "?";
}

const std::vector<CorrectnessCategory>& all_categories() {
    static const std::vector<CorrectnessCategory> k{
        CorrectnessCategory::CompilationError, CorrectnessCategory::NoGeneratedCode,
        CorrectnessCategory::OutputMismatch, CorrectnessCategory::FailedToFollowInstructions,
        CorrectnessCategory::Correct};
    return k;
}

std::optional<CorrectnessCategory> category_from_string(std::string_view s) {
    for (auto c : all_categories())
        if (to_string(c) == s) return c;
    return std::nullopt;
}

std::string_view to_string(ConstraintFlag f) {
    switch (f) {
        case ConstraintFlag::RemovedFunction: return "RemovedFunction";
        case ConstraintFlag::RemovedHeader: return "RemovedHeader";
        case ConstraintFlag::AddedFunction: return "AddedFunction";
        case ConstraintFlag::AddedPrintStatement: return "AddedPrintStatement";
        case ConstraintFlag::MissingParallelConstruct: return "MissingParallelConstruct";
    }
    return "?";
}

nlohmann::json to_json(const MatchReport& r) {
    nlohmann::json j{{"matched", r.matched}, {"compared_tokens", r.compared_tokens}};
    if (r.first_divergence) {
        const auto& d = *r.first_divergence;
        j["first_divergence"] = {{"line", d.line},
                                 {"token_index", d.token_index},
                                 {"reference", d.reference_excerpt},
                                 {"candidate", d.candidate_excerpt}};
    }
    return j;
}

std::string filter_lines(std::string_view text, const std::vector<std::string>& patterns) {
    if (patterns.empty()) return std::string(text);
    std::vector<std::regex> res;
    res.reserve(patterns.size());
    for (const auto& p : patterns) res.emplace_back(p);
    std::string out;
    size_t pos = 0;
    while (pos < text.size()) {
        size_t nl = text.find('\n', pos);
        size_t end = nl == std::string_view::npos ? text.size() : nl + 1;
        std::string line(text.substr(pos, end - pos));
        std::string body = line;
        if (!body.empty() && body.back() == '\n') body.pop_back();
        bool drop = std::any_of(res.begin(), res.end(), [&](const std::regex& r) { return std::regex_search(body, r); });
        if (!drop) out += line;
        pos = end;
    }
    return out;
}

namespace {

struct Tok {
    std::string_view text;
    std::size_t line;
};

std::vector<Tok> tokenize(std::string_view s) {
    std::vector<Tok> out;
    std::size_t line = 1;
    std::size_t i = 0;
    while (i < s.size()) {
        char c = s[i];
        if (c == '\n') {
            ++line;
            ++i;
            continue;
        }
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
        out.push_back({s.substr(i, j - i), line});
        i = j;
    }
    return out;
}

std::optional<double> parse_number(std::string_view t) {
    if (t.empty()) return std::nullopt;
    std::string buf(t);
    char* end = nullptr;
    errno = 0;
    double v = std::strtod(buf.c_str(), &end);
    if (end != buf.c_str() + buf.size()) return std::nullopt;
    return v;
}

std::string excerpt(std::string_view s, std::size_t at) {
    std::size_t from = at > 20 ? at - 20 : 0;
    return std::string(s.substr(from, 40));
}

MatchReport compare_exact(std::string_view ref, std::string_view cand) {
    MatchReport r;
    r.compared_tokens = std::min(ref.size(), cand.size());
    if (ref == cand) return r;
    r.matched = false;
    std::size_t i = 0;
    while (i < ref.size() && i < cand.size() && ref[i] == cand[i]) ++i;
    std::size_t line = 1 + static_cast<std::size_t>(std::count(ref.begin(), ref.begin() + static_cast<std::ptrdiff_t>(i), '\n'));
    std::size_t line_start = ref.rfind('\n', i == 0 ? 0 : i - 1);
    std::size_t col = (line_start == std::string_view::npos || i == 0) ? i + 1 : i - line_start;
    r.first_divergence = Divergence{line, col, excerpt(ref, i), excerpt(cand, i)};
    r.compared_tokens = i;
    return r;
}

MatchReport compare_numeric(std::string_view ref, std::string_view cand, const ValidationPolicy& p) {
    auto rt = tokenize(ref);
    auto ct = tokenize(cand);
    MatchReport r;
    std::size_t n = std::min(rt.size(), ct.size());
    for (std::size_t k = 0; k < n; ++k) {
        ++r.compared_tokens;
        bool ok;
        auto rv = parse_number(rt[k].text);
        auto cv = parse_number(ct[k].text);
        if (rv && cv) {
            if (std::isnan(*rv) || std::isnan(*cv)) ok = std::isnan(*rv) && std::isnan(*cv);
            else if (std::isinf(*rv) || std::isinf(*cv)) ok = *rv == *cv;
            else ok = std::fabs(*rv - *cv) <= p.abs_tol + p.rel_tol * std::fabs(*rv);
        } else {
            ok = rt[k].text == ct[k].text;
        }
        if (!ok) {
            r.matched = false;
            r.first_divergence = Divergence{rt[k].line, k + 1, std::string(rt[k].text), std::string(ct[k].text)};
            return r;
        }
    }
    if (rt.size() != ct.size()) {
        r.matched = false;
        Divergence d;
        d.token_index = n + 1;
        d.line = n < rt.size() ? rt[n].line : (n < ct.size() ? ct[n].line : 0);
        d.reference_excerpt = n < rt.size() ? std::string(rt[n].text) : "<end of output>";
        d.candidate_excerpt = n < ct.size() ? std::string(ct[n].text) : "<end of output>";
        r.first_divergence = d;
    }
    return r;
}

}  // namespace

MatchReport compare_outputs(std::string_view reference, std::string_view candidate, const ValidationPolicy& policy) {
    std::string ref = filter_lines(reference, policy.ignore_patterns);
    std::string cand = filter_lines(candidate, policy.ignore_patterns);
    if (policy.mode == ValidationMode::ExactBytes) return compare_exact(ref, cand);
    return compare_numeric(ref, cand, policy);
}

CorrectnessCategory classify_attempt(const std::optional<BuildOutcome>& build, ExtractionSummary extraction,
                                     const std::optional<RunSample>& run, const std::optional<MatchReport>& match,
                                     const std::set<ConstraintFlag>& constraint_flags) {
    if (match && !run) throw InconsistentInputs("match report without a run");
    if (run && (!build || !build->ok())) throw InconsistentInputs("run present without a successful build");
    if (match && run && !run->ok()) throw InconsistentInputs("match report for a failed run");

    if (!extraction.has_code) {
        if (build || run) throw InconsistentInputs("build or run without generated code");
        return CorrectnessCategory::NoGeneratedCode;
    }
    if (!build) throw InconsistentInputs("generated code was never built");
    if (!build->ok()) return CorrectnessCategory::CompilationError;
    if (!constraint_flags.empty()) return CorrectnessCategory::FailedToFollowInstructions;
    if (!run) throw InconsistentInputs("built code was never run");
    if (!run->ok()) return CorrectnessCategory::OutputMismatch;
    if (!match) throw InconsistentInputs("successful run without a match report");
    return match->matched ? CorrectnessCategory::Correct : CorrectnessCategory::OutputMismatch;
}

double pass_at_1(const std::vector<CorrectnessCategory>& categories) {
    if (categories.empty()) throw EmptyList();
    auto correct = std::count(categories.begin(), categories.end(), CorrectnessCategory::Correct);
    return static_cast<double>(correct) / static_cast<double>(categories.size());
}

}  // namespace perfagent
