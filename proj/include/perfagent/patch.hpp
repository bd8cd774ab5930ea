// Lexical location and replacement of C/C++ function definitions.
//
// The scanner understands comments, string and character literals (with
// escapes) and preprocessor directive lines; it does not evaluate
// preprocessor conditionals, so both branches of `#if` are scanned.
#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "perfagent/error.hpp"

namespace perfagent {

struct FunctionSpan {
    std::string name;
    std::size_t byte_start = 0;  // first token of the declaration (return type / template)
    std::size_t byte_end = 0;    // one past the closing brace
    std::string signature_text;  // declaration text up to, not including, the body

    std::size_t size() const { return byte_end - byte_start; }
    bool operator==(const FunctionSpan&) const = default;
};

class PatchError : public Error {
public:
    using Error::Error;
};

class NotFound : public PatchError {
public:
    explicit NotFound(const std::string& name)
        : PatchError("function not found: " + name), name(name) {}
    std::string name;
};

class Ambiguous : public PatchError {
public:
    Ambiguous(const std::string& name, std::size_t count)
        : PatchError("function '" + name + "' is defined " + std::to_string(count) + " times"),
          name(name), count(count) {}
    std::string name;
    std::size_t count;
};

class UnbalancedBraces : public PatchError {
public:
    explicit UnbalancedBraces(const std::string& detail) : PatchError("unbalanced braces: " + detail) {}
};

class UnbalancedReplacement : public PatchError {
public:
    explicit UnbalancedReplacement(const std::string& detail)
        : PatchError("replacement is not balanced: " + detail) {}
};

/// Every function definition whose body opens at file scope (namespace and
/// `extern "C"` blocks are transparent). Definitions are returned in source
/// order. Throws UnbalancedBraces for unterminated comments/literals or
/// mismatched braces.
std::vector<FunctionSpan> list_functions(std::string_view source);

/// Target lines of every `#include` directive, in source order, e.g. `<stdio.h>`.
std::vector<std::string> list_includes(std::string_view source);

/// Text of every preprocessor directive line (continuations joined as-is).
std::vector<std::string> list_directives(std::string_view source);

/// Identifier and punctuation tokens outside comments, literals and
/// preprocessor lines. Used for coarse code diffs.
std::vector<std::string> code_tokens(std::string_view source);

/// Throws UnbalancedBraces unless `source` scans cleanly with balanced braces.
void check_balanced(std::string_view source);

FunctionSpan locate_function(std::string_view source, std::string_view name);
std::string replace_function(std::string_view source, std::string_view name, std::string_view new_definition);
std::string extract_function(std::string_view source, std::string_view name);

}  // namespace perfagent
