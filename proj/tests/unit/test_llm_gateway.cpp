#include <gtest/gtest.h>

#include "perfagent/llm_gateway.hpp"
#include "support/support.hpp"

using namespace perfagent;
using K = OptimizationKind;

namespace {

std::vector<K> kinds(std::string_view text) {
    std::vector<K> out;
    for (const auto& l : classify_explanation(text)) out.push_back(l.label);
    return out;
}

}  // namespace

TEST(Prompt, SystemTextWithDefaults) {
    EXPECT_EQ(render_system_prompt(PromptEnv{}),
              "You are a code generation/optimization assistant. Given a prompt your output must only be a "
              "compilable source code. The computation environment is a Linux system (Rocky Linux 8.5 Green "
              "Obsidian) and a single AMD EPYC 7543 32-Core CPU. The C/C++ language compilers available are: "
              "GCC/G++ v14.2.0 and CLANG/CLANG++ v19.1.5");
    PromptEnv env{"Linux box", "toy CPU", "gcc 13"};
    EXPECT_NE(render_system_prompt(env).find("a Linux box and a single toy CPU."), std::string::npos);
}

TEST(Prompt, InstructionSentences) {
    EXPECT_EQ(instruction_text(Experiment::EX1),
              "Provide the C/C++ code with a single serial optimization without removing any of the existing "
              "functions or header files and without adding any new functions or print statements.");
    EXPECT_EQ(instruction_text(Experiment::EX2),
              "Propose an additional serial optimization that can be applied without removing any of the existing "
              "functions or header files and without adding any new functions or print statements.");
    EXPECT_EQ(instruction_text(Experiment::EX3),
              "Based on the original code, provide optimized parallel C/C++ code without removing any of the "
              "existing functions or header files and without adding any new functions or print statements.");
}

TEST(Prompt, AttachesCodeInLanguageFence) {
    auto spec = testsupport::fixture_bench("vecsum");
    auto b = render_prompt(Experiment::EX1, spec, "int x;", PromptEnv{});
    EXPECT_EQ(b.user_text, instruction_text(Experiment::EX1) + "\n\n```c\nint x;\n```\n");
    spec.language = Language::Cpp;
    EXPECT_NE(render_prompt(Experiment::EX3, spec, "int x;\n", PromptEnv{}).user_text.find("```cpp\nint x;\n```"),
              std::string::npos);
    EXPECT_THROW(render_prompt(Experiment::EX1, spec, "", PromptEnv{}), Error);
    EXPECT_EQ(render_prompt(Experiment::EX2, spec, "a", PromptEnv{}), render_prompt(Experiment::EX2, spec, "a", PromptEnv{}));
}

TEST(Prompt, AgentBlocks) {
    auto spec = testsupport::fixture_bench("vecsum");
    AgentPromptContext ctx{"dot", "Hotspots by time_excl", "Iteration 1: tiled", "STOP NOW"};
    auto b = render_prompt(Experiment::Agent, spec, "double dot(void) { return 0; }", PromptEnv{}, &ctx);
    EXPECT_NE(b.user_text.find("`dot`"), std::string::npos);
    EXPECT_NE(b.user_text.find("reply with exactly: STOP NOW"), std::string::npos);
    auto prof = b.user_text.find("Profile:\nHotspots by time_excl");
    auto mem = b.user_text.find("Previous iterations:\nIteration 1: tiled");
    auto code = b.user_text.find("```c\n");
    ASSERT_NE(prof, std::string::npos);
    ASSERT_NE(mem, std::string::npos);
    EXPECT_LT(prof, mem);
    EXPECT_LT(mem, code);
}

TEST(Extract, LargestFenceWins) {
    auto r = extract_code("Intro\n```bash\nmake\n```\nThen:\n```c\nint main(void) {\n  return 0;\n}\n```\nDone.");
    ASSERT_TRUE(r.code);
    EXPECT_EQ(*r.code, "int main(void) {\n  return 0;\n}\n");
    EXPECT_EQ(r.rule, ExtractionRule::FencedBlock);
    ASSERT_TRUE(r.explanation);
    EXPECT_NE(r.explanation->find("Intro"), std::string::npos);
    EXPECT_NE(r.explanation->find("Done."), std::string::npos);
}

TEST(Extract, WholeMessageCode) {
    auto r = extract_code("#include <stdio.h>\nint main(void) { return 0; }\n");
    ASSERT_TRUE(r.code);
    EXPECT_EQ(r.rule, ExtractionRule::WholeMessage);
    auto cut = extract_code("int main(void) { return 0;\n");
    EXPECT_FALSE(cut.code);
    EXPECT_TRUE(cut.truncated);
}

TEST(Extract, ProseAndTruncatedFence) {
    auto prose = extract_code("I would interchange the loops, but the code is fine.");
    EXPECT_FALSE(prose.code);
    EXPECT_FALSE(prose.truncated);
    EXPECT_EQ(prose.rule, ExtractionRule::None);
    EXPECT_FALSE(prose.summary().has_code);
    auto open = extract_code("Here:\n```c\nint main(void) {\n");
    EXPECT_FALSE(open.code);
    EXPECT_TRUE(open.truncated);
}

TEST(Constraints, DetectsEachViolation) {
    std::string orig = "#include <stdio.h>\n#include <math.h>\nint f(int a) { return a; }\nint main(void) { printf(\"%d\", f(1)); return 0; }\n";
    EXPECT_TRUE(check_constraints(orig, orig, Experiment::EX1).empty());
    auto removed = check_constraints(orig, "#include <stdio.h>\n#include <math.h>\nint main(void) { printf(\"1\"); return 0; }\n", Experiment::EX1);
    EXPECT_TRUE(removed.contains(ConstraintFlag::RemovedFunction));
    auto header = check_constraints(orig, testsupport::replace_once(orig, "#include <math.h>\n", ""), Experiment::EX1);
    EXPECT_TRUE(header.contains(ConstraintFlag::RemovedHeader));
    auto added = check_constraints(orig, orig + "int g(void) { return 2; }\n", Experiment::EX1);
    EXPECT_TRUE(added.contains(ConstraintFlag::AddedFunction));
    auto printed = check_constraints(orig, testsupport::replace_once(orig, "return a;", "puts(\"x\"); return a;"), Experiment::EX1);
    EXPECT_TRUE(printed.contains(ConstraintFlag::AddedPrintStatement));
    EXPECT_TRUE(check_constraints(orig, orig, Experiment::EX3).contains(ConstraintFlag::MissingParallelConstruct));
    auto par = testsupport::replace_once(orig, "int f(int a) {", "int f(int a) {\n#pragma omp parallel\n");
    EXPECT_TRUE(check_constraints(orig, par, Experiment::EX3).empty());
    EXPECT_THROW(check_constraints(orig, "int f( {", Experiment::EX1), UnparseableCandidate);
}

TEST(Constraints, ParallelConstructs) {
    EXPECT_TRUE(has_parallel_construct("#pragma omp parallel for\n"));
    EXPECT_TRUE(has_parallel_construct("  # pragma omp simd\n"));
    EXPECT_TRUE(has_parallel_construct("std::thread t(f);"));
    EXPECT_TRUE(has_parallel_construct("pthread_create(&t, 0, f, 0);"));
    EXPECT_TRUE(has_parallel_construct("std::for_each(std::execution::par, b, e, f);"));
    EXPECT_TRUE(has_parallel_construct("_Pragma(\"omp parallel for\")"));
    EXPECT_FALSE(has_parallel_construct("// #pragma omp parallel\nint x;"));
    EXPECT_FALSE(has_parallel_construct("const char* s = \"std::thread\";"));
}

TEST(Labels, Taxonomy) {
    EXPECT_EQ(kinds("Applied loop interchange for better locality."), (std::vector<K>{K::LoopInterchange}));
    EXPECT_EQ(kinds("Improved locality."), (std::vector<K>{K::Other}));
    EXPECT_EQ(kinds("we fuse multiply and add, and parallelize with omp for"),
              (std::vector<K>{K::FusedMultiplyAdd, K::OmpParallelFor}));
    EXPECT_EQ(kinds("Unrolled by 4 and hoisted the loop-invariant load; used FMA."),
              (std::vector<K>{K::LoopUnrolling, K::FusedMultiplyAdd, K::PrecomputeConstants}));
    EXPECT_EQ(kinds("Switched to single precision and a binary search."),
              (std::vector<K>{K::PrecisionChange, K::AlgorithmicChange}));
    auto l = classify_explanation("Cache blocking with 64x64 tiles");
    ASSERT_EQ(l.size(), 1u);
    EXPECT_EQ(l[0].label, K::LoopTiling);
    EXPECT_FALSE(l[0].evidence.empty());
    for (int i = 0; i <= static_cast<int>(K::Other); ++i)
        EXPECT_EQ(optimization_kind_from_string(to_string(static_cast<K>(i))), static_cast<K>(i));
}
