#include "perfagent/patch.hpp"

#include <algorithm>
#include <cctype>
#include <optional>
#include <unordered_set>

namespace perfagent {

namespace {

enum class TokKind { Ident, Number, Literal, Punct };

struct Token {
    TokKind kind;
    std::string_view text;
    std::size_t offset;
};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$'; }

struct Scan {
    std::vector<Token> tokens;
    std::vector<std::pair<std::size_t, std::size_t>> directives;  // [start, end) of each directive line
};

std::size_t line_of(std::string_view s, std::size_t off) {
    return static_cast<std::size_t>(std::count(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(off), '\n')) + 1;
}

/// Skips a block comment starting at `i` ("/*"); returns the offset after "*/".
std::size_t skip_block_comment(std::string_view s, std::size_t i) {
    auto end = s.find("*/", i + 2);
    if (end == std::string_view::npos)
        throw UnbalancedBraces("unterminated comment at line " + std::to_string(line_of(s, i)));
    return end + 2;
}

std::size_t skip_line_comment(std::string_view s, std::size_t i) {
    while (i < s.size() && s[i] != '\n') {
        if (s[i] == '\\' && i + 1 < s.size() && s[i + 1] == '\n') ++i;
        ++i;
    }
    return i;
}

/// Skips a quoted literal starting at the opening quote; returns the offset
/// after the closing quote.
std::size_t skip_quoted(std::string_view s, std::size_t i) {
    char q = s[i];
    std::size_t j = i + 1;
    while (j < s.size()) {
        char c = s[j];
        if (c == '\\') {
            j += 2;
            continue;
        }
        if (c == q) return j + 1;
        if (c == '\n') break;
        ++j;
    }
    throw UnbalancedBraces(std::string("unterminated ") + (q == '"' ? "string" : "character") +
                           " literal at line " + std::to_string(line_of(s, i)));
}

/// Raw string R"delim( ... )delim"; `i` points at the opening quote.
std::size_t skip_raw_string(std::string_view s, std::size_t i) {
    auto paren = s.find('(', i + 1);
    if (paren == std::string_view::npos)
        throw UnbalancedBraces("malformed raw string at line " + std::to_string(line_of(s, i)));
    std::string close = ")" + std::string(s.substr(i + 1, paren - i - 1)) + "\"";
    auto end = s.find(close, paren + 1);
    if (end == std::string_view::npos)
        throw UnbalancedBraces("unterminated raw string at line " + std::to_string(line_of(s, i)));
    return end + close.size();
}

std::size_t skip_directive(std::string_view s, std::size_t i) {
    while (i < s.size() && s[i] != '\n') {
        if (s[i] == '\\' && i + 1 < s.size() && s[i + 1] == '\n') {
            i += 2;
            continue;
        }
        if (s[i] == '\\' && i + 2 < s.size() && s[i + 1] == '\r' && s[i + 2] == '\n') {
            i += 3;
            continue;
        }
        if (s[i] == '/' && i + 1 < s.size() && s[i + 1] == '*') {
            i = skip_block_comment(s, i);
            continue;
        }
        if (s[i] == '/' && i + 1 < s.size() && s[i + 1] == '/') return skip_line_comment(s, i);
        if (s[i] == '"' || s[i] == '\'') {
            // Stray apostrophes in #error text are not literals; be lenient.
            auto nl = s.find('\n', i);
            auto close = s.find(s[i], i + 1);
            if (close != std::string_view::npos && (nl == std::string_view::npos || close < nl)) {
                i = close + 1;
                continue;
            }
        }
        ++i;
    }
    return i;
}

Scan scan(std::string_view s) {
    Scan out;
    std::size_t i = 0;
    bool line_start = true;
    while (i < s.size()) {
        char c = s[i];
        if (c == '\n') {
            line_start = true;
            ++i;
            continue;
        }
        if (c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v') {
            ++i;
            continue;
        }
        if (c == '\\' && i + 1 < s.size() && s[i + 1] == '\n') {
            i += 2;
            continue;
        }
        if (c == '/' && i + 1 < s.size() && s[i + 1] == '/') {
            i = skip_line_comment(s, i);
            continue;
        }
        if (c == '/' && i + 1 < s.size() && s[i + 1] == '*') {
            i = skip_block_comment(s, i);
            continue;
        }
        if (c == '#' && line_start) {
            std::size_t end = skip_directive(s, i);
            out.directives.emplace_back(i, end);
            i = end;
            continue;
        }
        line_start = false;
        if (ident_start(c)) {
            std::size_t j = i + 1;
            while (j < s.size() && ident_char(s[j])) ++j;
            std::string_view word = s.substr(i, j - i);
            if (j < s.size() && s[j] == '"' &&
                (word == "R" || word == "LR" || word == "uR" || word == "UR" || word == "u8R")) {
                std::size_t end = skip_raw_string(s, j);
                out.tokens.push_back({TokKind::Literal, s.substr(i, end - i), i});
                i = end;
                continue;
            }
            if (j < s.size() && (s[j] == '"' || s[j] == '\'') &&
                (word == "L" || word == "u" || word == "U" || word == "u8")) {
                std::size_t end = skip_quoted(s, j);
                out.tokens.push_back({TokKind::Literal, s.substr(i, end - i), i});
                i = end;
                continue;
            }
            out.tokens.push_back({TokKind::Ident, word, i});
            i = j;
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '.' && i + 1 < s.size() && std::isdigit(static_cast<unsigned char>(s[i + 1])))) {
            std::size_t j = i + 1;
            while (j < s.size()) {
                char d = s[j];
                if ((d == '+' || d == '-') && (s[j - 1] == 'e' || s[j - 1] == 'E' || s[j - 1] == 'p' ||
                                               s[j - 1] == 'P')) {
                    ++j;
                    continue;
                }
                if (ident_char(d) || d == '.' || (d == '\'' && j + 1 < s.size() && ident_char(s[j + 1]))) {
                    ++j;
                    continue;
                }
                break;
            }
            out.tokens.push_back({TokKind::Number, s.substr(i, j - i), i});
            i = j;
            continue;
        }
        if (c == '"' || c == '\'') {
            std::size_t end = skip_quoted(s, i);
            out.tokens.push_back({TokKind::Literal, s.substr(i, end - i), i});
            i = end;
            continue;
        }
        if (i + 1 < s.size()) {
            std::string_view two = s.substr(i, 2);
            if (two == "->" || two == "::" || two == "&&" || two == "||" || two == "<<" || two == ">>" ||
                two == "==" || two == "!=" || two == "<=" || two == ">=" || two == "++" || two == "--") {
                out.tokens.push_back({TokKind::Punct, two, i});
                i += 2;
                continue;
            }
        }
        out.tokens.push_back({TokKind::Punct, s.substr(i, 1), i});
        ++i;
    }
    return out;
}

bool is_punct(const Token& t, std::string_view p) { return t.kind == TokKind::Punct && t.text == p; }

const std::unordered_set<std::string_view>& qualifier_calls() {
    static const std::unordered_set<std::string_view> k{"__attribute__", "__attribute", "noexcept",
                                                        "throw", "__declspec", "alignas", "decltype",
                                                        "__asm__", "asm", "__asm"};
    return k;
}

const std::unordered_set<std::string_view>& not_function_names() {
    static const std::unordered_set<std::string_view> k{"if", "for", "while", "switch", "catch",
                                                        "return", "sizeof", "do", "else", "case"};
    return k;
}

/// Index of the '(' matching the ')' at `close`, or nullopt.
std::optional<std::size_t> match_paren_back(const std::vector<Token>& t, std::size_t close) {
    int depth = 0;
    for (std::size_t k = close + 1; k-- > 0;) {
        if (is_punct(t[k], ")")) ++depth;
        else if (is_punct(t[k], "(")) {
            if (--depth == 0) return k;
        }
    }
    return std::nullopt;
}

/// If the '{' at index `open` starts a function body, returns the index of
/// the function-name token.
std::optional<std::size_t> function_name_before(const std::vector<Token>& t, std::size_t open) {
    std::size_t i = open;
    while (i-- > 0) {
        const Token& tok = t[i];
        if (is_punct(tok, ")")) {
            auto lp = match_paren_back(t, i);
            if (!lp || *lp == 0) return std::nullopt;
            const Token& prev = t[*lp - 1];
            if (prev.kind != TokKind::Ident) return std::nullopt;
            if (qualifier_calls().contains(prev.text)) {
                if (*lp - 1 == 0) return std::nullopt;
                i = *lp - 1;
                continue;
            }
            if (not_function_names().contains(prev.text)) return std::nullopt;
            std::size_t name = *lp - 1;
            if (name > 0) {
                const Token& before = t[name - 1];
                if (is_punct(before, ".") || is_punct(before, "->")) return std::nullopt;
            }
            return name;
        }
        if (tok.kind == TokKind::Ident) continue;
        if (tok.kind == TokKind::Punct &&
            (tok.text == "::" || tok.text == "<" || tok.text == ">" || tok.text == ">>" || tok.text == "*" ||
             tok.text == "&" || tok.text == "&&" || tok.text == "," || tok.text == "[" || tok.text == "]" ||
             tok.text == "->"))
            continue;
        return std::nullopt;
    }
    return std::nullopt;
}

/// `namespace x {`, `namespace {`, `extern "C" {` are scope-transparent.
bool is_transparent_open(const std::vector<Token>& t, std::size_t open) {
    if (open >= 1 && t[open - 1].kind == TokKind::Literal && open >= 2 && t[open - 2].kind == TokKind::Ident &&
        t[open - 2].text == "extern")
        return true;
    std::size_t i = open;
    while (i-- > 0) {
        const Token& tok = t[i];
        if (tok.kind == TokKind::Ident) {
            if (tok.text == "namespace") return true;
            continue;
        }
        if (is_punct(tok, "::")) continue;
        return false;
    }
    return false;
}

struct Structure {
    Scan scan;
    std::vector<FunctionSpan> functions;
};

Structure analyze(std::string_view source) {
    Structure st{scan(source), {}};
    const auto& t = st.scan.tokens;
    // Stack of open braces: (token index, transparent).
    std::vector<std::pair<std::size_t, bool>> stack;
    std::optional<std::size_t> current_name;  // name token of the body being scanned
    std::size_t body_depth = 0;

    auto at_file_scope = [&] {
        return std::all_of(stack.begin(), stack.end(), [](const auto& e) { return e.second; });
    };

    for (std::size_t i = 0; i < t.size(); ++i) {
        if (is_punct(t[i], "{")) {
            bool transparent = false;
            if (at_file_scope()) {
                transparent = is_transparent_open(t, i);
                if (!transparent) {
                    if (auto name = function_name_before(t, i)) {
                        current_name = *name;
                        body_depth = stack.size() + 1;
                    }
                }
            }
            stack.emplace_back(i, transparent);
        } else if (is_punct(t[i], "}")) {
            if (stack.empty())
                throw UnbalancedBraces("unexpected '}' at line " + std::to_string(line_of(source, t[i].offset)));
            if (current_name && stack.size() == body_depth) {
                std::size_t open_idx = stack.back().first;
                std::size_t name_idx = *current_name;
                // Walk back from the name to the end of the previous declaration.
                std::size_t first = name_idx;
                while (first > 0) {
                    const Token& p = t[first - 1];
                    if (is_punct(p, ";") || is_punct(p, "}") || is_punct(p, "{")) break;
                    --first;
                }
                FunctionSpan span;
                span.name = std::string(t[name_idx].text);
                span.byte_start = t[first].offset;
                span.byte_end = t[i].offset + 1;
                std::string_view sig = source.substr(span.byte_start, t[open_idx].offset - span.byte_start);
                while (!sig.empty() && std::isspace(static_cast<unsigned char>(sig.back()))) sig.remove_suffix(1);
                span.signature_text = std::string(sig);
                st.functions.push_back(std::move(span));
                current_name.reset();
            }
            stack.pop_back();
        }
    }
    if (!stack.empty())
        throw UnbalancedBraces("unclosed '{' at line " +
                               std::to_string(line_of(source, t[stack.back().first].offset)));
    return st;
}

}  // namespace

std::vector<FunctionSpan> list_functions(std::string_view source) { return analyze(source).functions; }

std::vector<std::string> list_includes(std::string_view source) {
    auto sc = scan(source);
    std::vector<std::string> out;
    for (auto [start, end] : sc.directives) {
        std::string_view d = source.substr(start + 1, end - start - 1);
        std::size_t k = 0;
        while (k < d.size() && (d[k] == ' ' || d[k] == '\t')) ++k;
        if (d.substr(k, 7) != "include") continue;
        k += 7;
        while (k < d.size() && (d[k] == ' ' || d[k] == '\t')) ++k;
        std::string_view target = d.substr(k);
        while (!target.empty() && std::isspace(static_cast<unsigned char>(target.back()))) target.remove_suffix(1);
        if (auto cut = target.find("//"); cut != std::string_view::npos) target = target.substr(0, cut);
        if (auto cut = target.find("/*"); cut != std::string_view::npos) target = target.substr(0, cut);
        while (!target.empty() && std::isspace(static_cast<unsigned char>(target.back()))) target.remove_suffix(1);
        out.emplace_back(target);
    }
    return out;
}

std::vector<std::string> list_directives(std::string_view source) {
    auto sc = scan(source);
    std::vector<std::string> out;
    for (auto [start, end] : sc.directives) out.emplace_back(source.substr(start, end - start));
    return out;
}

std::vector<std::string> code_tokens(std::string_view source) {
    auto sc = scan(source);
    std::vector<std::string> out;
    out.reserve(sc.tokens.size());
    for (const auto& t : sc.tokens) out.emplace_back(t.text);
    return out;
}

void check_balanced(std::string_view source) { (void)analyze(source); }

FunctionSpan locate_function(std::string_view source, std::string_view name) {
    auto fns = list_functions(source);
    std::vector<FunctionSpan> hits;
    for (auto& f : fns)
        if (f.name == name) hits.push_back(std::move(f));
    if (hits.empty()) throw NotFound(std::string(name));
    if (hits.size() > 1) throw Ambiguous(std::string(name), hits.size());
    return hits.front();
}

std::string replace_function(std::string_view source, std::string_view name, std::string_view new_definition) {
    auto span = locate_function(source, name);
    try {
        check_balanced(new_definition);
    } catch (const UnbalancedBraces& e) {
        throw UnbalancedReplacement(e.what());
    }
    std::string out;
    out.reserve(source.size() - span.size() + new_definition.size());
    out.append(source.substr(0, span.byte_start));
    out.append(new_definition);
    out.append(source.substr(span.byte_end));
    return out;
}

std::string extract_function(std::string_view source, std::string_view name) {
    auto span = locate_function(source, name);
    return std::string(source.substr(span.byte_start, span.size()));
}

}  // namespace perfagent
