#include "perfagent/llm_gateway.hpp"

#include <cctype>

#include "perfagent/patch.hpp"

namespace perfagent {

namespace {

struct Block {
    std::size_t fence_start;    // start of the opening fence line
    std::size_t content_start;  // first byte after the opening fence line
    std::size_t content_end;    // start of the closing fence line
    std::size_t fence_end;      // one past the closing fence line (incl. newline)
};

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

bool is_blank(std::string_view s) { return trim(s).empty(); }

bool starts_like_code(std::string_view t) {
    if (t.empty()) return false;
    if (t[0] == '#' || t.substr(0, 2) == "//" || t.substr(0, 2) == "/*") return true;
    static const std::vector<std::string_view> kw{
        "int",    "void",     "double",   "float",  "char",     "long",    "unsigned", "signed",
        "short",  "static",   "const",    "struct", "typedef",  "extern",  "inline",   "template",
        "namespace", "using", "class",    "bool",   "size_t",   "auto",    "enum",     "union",
        "constexpr", "volatile", "register", "uint64_t", "int64_t", "uint32_t", "int32_t", "std"};
    std::size_t n = 0;
    while (n < t.size() && (std::isalnum(static_cast<unsigned char>(t[n])) || t[n] == '_')) ++n;
    std::string_view word = t.substr(0, n);
    for (auto k : kw)
        if (word == k) return true;
    return false;
}

}  // namespace

std::string_view to_string(ExtractionRule r) {
    switch (r) {
        case ExtractionRule::FencedBlock: return "FencedBlock";
        case ExtractionRule::WholeMessage: return "WholeMessage";
        case ExtractionRule::None: return "None";
    }
    return "?";
}

ExtractionResult extract_code(std::string_view raw) {
    ExtractionResult res;
    std::vector<Block> blocks;
    bool open = false;
    Block cur{};
    std::size_t pos = 0;
    while (pos < raw.size()) {
        std::size_t nl = raw.find('\n', pos);
        std::size_t end = nl == std::string_view::npos ? raw.size() : nl + 1;
        std::string_view line = raw.substr(pos, end - pos);
        std::string_view t = trim(line);
        if (t.substr(0, 3) == "```") {
            if (!open) {
                open = true;
                cur.fence_start = pos;
                cur.content_start = end;
            } else if (trim(t.substr(3)).empty()) {
                cur.content_end = pos;
                cur.fence_end = end;
                blocks.push_back(cur);
                open = false;
            }
        }
        pos = end;
    }
    if (open) {
        res.truncated = true;
        return res;
    }

    if (!blocks.empty()) {
        const Block* best = nullptr;
        for (const auto& b : blocks) {
            std::string_view content = raw.substr(b.content_start, b.content_end - b.content_start);
            if (is_blank(content)) continue;
            if (!best || content.size() > best->content_end - best->content_start) best = &b;
        }
        if (!best) return res;
        res.rule = ExtractionRule::FencedBlock;
        res.code = std::string(raw.substr(best->content_start, best->content_end - best->content_start));
        res.code_offset = best->content_start;
        std::string outside = std::string(raw.substr(0, best->fence_start)) + std::string(raw.substr(best->fence_end));
        auto ex = trim(outside);
        if (!ex.empty()) res.explanation = std::string(ex);
        return res;
    }

    std::string_view t = trim(raw);
    if (starts_like_code(t)) {
        try {
            check_balanced(t);
        } catch (const UnbalancedBraces&) {
            res.truncated = true;
            return res;
        }
        res.rule = ExtractionRule::WholeMessage;
        res.code = std::string(t);
        res.code_offset = static_cast<std::size_t>(t.data() - raw.data());
        return res;
    }
    if (!t.empty()) res.explanation = std::string(t);
    return res;
}

}  // namespace perfagent
