// Child-process execution with captured output, environment overrides and a
// wall-clock timeout.
#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "perfagent/error.hpp"

namespace perfagent {

class ToolNotFound : public Error {
public:
    explicit ToolNotFound(const std::string& tool)
        : Error("tool not found: " + tool), tool(tool) {}
    std::string tool;
};

struct ProcessRequest {
    std::vector<std::string> argv;
    std::map<std::string, std::string> env_overrides;
    std::optional<std::filesystem::path> stdin_file;
    std::optional<std::filesystem::path> working_dir;
    std::chrono::duration<double> timeout{60.0};
};

struct ProcessResult {
    int exit_code = 0;         // valid when !signaled && !timed_out
    int term_signal = 0;       // valid when signaled
    bool signaled = false;
    bool timed_out = false;
    std::string out;
    std::string err;
    double wall_s = 0.0;

    bool ok() const { return !signaled && !timed_out && exit_code == 0; }
};

/// Run argv[0] (resolved through PATH) to completion. Throws ToolNotFound when
/// the executable cannot be resolved; every other failure is reported in the
/// result.
ProcessResult run_process(const ProcessRequest& req);

/// Resolve an executable name through PATH. Absolute/relative paths containing
/// a slash are returned as-is when they exist and are executable.
std::optional<std::filesystem::path> find_executable(const std::string& name);

std::string shell_quote_join(const std::vector<std::string>& argv);

}  // namespace perfagent
