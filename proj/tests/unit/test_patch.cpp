#include <gtest/gtest.h>

#include "perfagent/patch.hpp"
#include "support/properties.hpp"

using namespace perfagent;

namespace {

std::vector<std::string> names(std::string_view src) {
    std::vector<std::string> out;
    for (const auto& f : list_functions(src)) out.push_back(f.name);
    return out;
}

}  // namespace

TEST(Patch, FindsDefinitionsNotDeclarations) {
    const char* src = R"(#include <stdio.h>
int proto(int);
static const int tbl[] = {1, 2};
struct S { int (*fp)(int); };
/* int fake(void) { } */
int add(int a, int b) { return a + b; }
static inline double
scale(double x)
{
    const char *s = "}";
    return x * 2;
}
)";
    EXPECT_EQ(names(src), (std::vector<std::string>{"add", "scale"}));
    auto span = locate_function(src, "scale");
    EXPECT_EQ(std::string_view(src).substr(span.byte_start, 6), "static");
    EXPECT_EQ(src[span.byte_end - 1], '}');
}

TEST(Patch, NamespacesAndExternCAreTransparent) {
    const char* src = R"(namespace a { namespace b {
int f() { return 1; }
} }
extern "C" { void g(void) {} }
struct T { void method() {} };
auto lam = [](int x) { return x; };
int T2::out_of_line() const noexcept { return 0; }
)";
    EXPECT_EQ(names(src), (std::vector<std::string>{"f", "g", "out_of_line"}));
}

TEST(Patch, AttributesBeforeTheBody) {
    const char* src = "void h(int x) __attribute__((hot)) { x++; }\nint k(void) noexcept(true) { return 0; }\n";
    EXPECT_EQ(names(src), (std::vector<std::string>{"h", "k"}));
}

TEST(Patch, ControlFlowIsNotAFunction) {
    const char* src = "#define LOOP for (;;) {\nint main(void) { if (1) { while (0) {} } return 0; }\n";
    EXPECT_EQ(names(src), (std::vector<std::string>{"main"}));
}

TEST(Patch, ReplaceAndExtract) {
    std::string src = "int a(void) { return 1; }\n\nint b(void) { return 2; }\n";
    auto out = replace_function(src, "a", "int a(void) {\n    return 42;\n}");
    EXPECT_EQ(out, "int a(void) {\n    return 42;\n}\n\nint b(void) { return 2; }\n");
    EXPECT_EQ(extract_function(out, "b"), "int b(void) { return 2; }");
}

TEST(Patch, Errors) {
    std::string src = "int a(void) { return 1; }\nint a(void) { return 2; }\n";
    EXPECT_THROW(locate_function(src, "missing"), NotFound);
    try {
        locate_function(src, "a");
        FAIL();
    } catch (const Ambiguous& e) {
        EXPECT_EQ(e.count, 2u);
    }
    EXPECT_THROW(list_functions("int a(void) { return 1;\n"), UnbalancedBraces);
    EXPECT_THROW(list_functions("int a(void) { /* open \n"), UnbalancedBraces);
    EXPECT_THROW(replace_function("int a(void) { return 1; }", "a", "int a(void) { {"), UnbalancedReplacement);
}

TEST(Patch, RawStringsAndDigitSeparators) {
    const char* src = "auto s = R\"x(} { )\" )x\";\nint f() { int n = 1'000; return n; }\n";
    EXPECT_EQ(names(src), (std::vector<std::string>{"f"}));
}

TEST(Patch, IncludesDirectivesTokens) {
    const char* src = "#include <stdio.h>\n#  include \"x.h\"\n#define A 1\nint f() { return A; } // c\n";
    EXPECT_EQ(list_includes(src), (std::vector<std::string>{"<stdio.h>", "\"x.h\""}));
    EXPECT_EQ(list_directives(src).size(), 3u);
    auto toks = code_tokens(src);
    EXPECT_EQ(toks.front(), "int");
    EXPECT_EQ(std::count(toks.begin(), toks.end(), "c"), 0);
}

TEST(Patch, RandomizedRoundTrip) {
    auto rep = testsupport::patcher_properties(300, 7);
    EXPECT_EQ(rep.failures, 0) << rep.first_failure;
}
