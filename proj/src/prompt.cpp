#include "perfagent/llm_gateway.hpp"

namespace perfagent {

namespace {

constexpr std::string_view kEx1 =
    "Provide the C/C++ code with a single serial optimization without removing any of the existing "
    "functions or header files and without adding any new functions or print statements.";
constexpr std::string_view kEx2 =
    "Propose an additional serial optimization that can be applied without removing any of the existing "
    "functions or header files and without adding any new functions or print statements.";
constexpr std::string_view kEx3 =
    "Based on the original code, provide optimized parallel C/C++ code without removing any of the "
    "existing functions or header files and without adding any new functions or print statements.";

}  // namespace

std::string_view to_string(Experiment e) {
    switch (e) {
        case Experiment::EX1: return "EX1";
        case Experiment::EX2: return "EX2";
        case Experiment::EX3: return "EX3";
        case Experiment::Agent: return "Agent";
    }
    return "?";
}

std::optional<Experiment> experiment_from_string(std::string_view s) {
    if (s == "EX1" || s == "ex1") return Experiment::EX1;
    if (s == "EX2" || s == "ex2") return Experiment::EX2;
    if (s == "EX3" || s == "ex3") return Experiment::EX3;
    if (s == "Agent" || s == "agent") return Experiment::Agent;
    return std::nullopt;
}

std::string render_system_prompt(const PromptEnv& env) {
    return "You are a code generation/optimization assistant. Given a prompt your output must only be a "
           "compilable source code. The computation environment is a " +
           env.os + " and a single " + env.cpu + ". The C/C++ language compilers available are: " + env.compilers;
}

std::string instruction_text(Experiment e, const AgentPromptContext* agent) {
    switch (e) {
        case Experiment::EX1: return std::string(kEx1);
        case Experiment::EX2: return std::string(kEx2);
        case Experiment::EX3: return std::string(kEx3);
        case Experiment::Agent: {
            std::string fn = agent && !agent->hotspot_name.empty() ? agent->hotspot_name : "the hotspot function";
            std::string sentinel = agent ? agent->decline_sentinel : std::string();
            std::string text =
                "Optimize the hotspot function `" + fn +
                "` shown below, using the profiling data and the results of previous iterations. Return the "
                "complete optimized definition of `" + fn +
                "` in a single fenced code block without removing any of the existing functions or header files "
                "and without adding any new functions or print statements. After the code, explain the "
                "optimizations you made and name any additional performance metrics you want measured in the "
                "next iteration.";
            if (!sentinel.empty())
                text += " If no further optimizations are worthwhile, reply with exactly: " + sentinel;
            return text;
        }
    }
    throw Error("unknown experiment");
}

PromptBundle render_prompt(Experiment experiment, const BenchmarkSpec& spec, std::string_view code,
                           const PromptEnv& env, const AgentPromptContext* agent) {
    if (code.empty()) throw Error("render_prompt: code must be non-empty");
    PromptBundle b;
    b.experiment = experiment;
    b.system_text = render_system_prompt(env);
    b.attached_code = std::string(code);

    std::string user = instruction_text(experiment, agent);
    user += "\n\n";
    if (experiment == Experiment::Agent && agent) {
        if (!agent->profile_summary.empty()) user += "Profile:\n" + agent->profile_summary + "\n\n";
        if (!agent->memory_digest.empty()) user += "Previous iterations:\n" + agent->memory_digest + "\n\n";
    }
    user += spec.language == Language::C ? "```c\n" : "```cpp\n";
    user += code;
    if (code.back() != '\n') user += '\n';
    user += "```\n";
    b.user_text = std::move(user);
    return b;
}

}  // namespace perfagent
