// Helpers shared by the unit and acceptance tests.
#pragma once

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "perfagent/manifest.hpp"
#include "perfagent/provider.hpp"

#ifndef PERFAGENT_FIXTURES
#error "PERFAGENT_FIXTURES must point at tests/fixtures"
#endif

namespace testsupport {

namespace fs = std::filesystem;

inline fs::path fixtures() { return fs::path(PERFAGENT_FIXTURES); }

inline std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void spit(const fs::path& p, const std::string& text) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream(p, std::ios::binary | std::ios::trunc) << text;
}

/// Fresh directory removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::atomic<int> counter{0};
        path_ = fs::temp_directory_path() /
                ("perfagent-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        if (!std::getenv("PERFAGENT_KEEP_TMP")) fs::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const fs::path& path() const { return path_; }

private:
    fs::path path_;
};

inline perfagent::BenchmarkSpec fixture_bench(const std::string& id) {
    return perfagent::load_benchmark(fixtures() / "bench" / id / perfagent::kManifestFileName);
}

/// A model reply: prose, one fenced block, trailing explanation.
inline std::string fenced_reply(const std::string& code, const std::string& explanation,
                                const std::string& lang = "c") {
    return "Here is the optimized code.\n\n```" + lang + "\n" + code + (code.ends_with('\n') ? "" : "\n") +
           "```\n\n" + explanation + "\n";
}

inline std::unique_ptr<perfagent::ReplayProvider> replay(const std::vector<std::string>& replies,
                                                         const std::string& id = "replay") {
    std::vector<perfagent::TranscriptEntry> entries;
    for (const auto& r : replies) entries.push_back({"", r, 0.5});
    return std::make_unique<perfagent::ReplayProvider>(id, std::move(entries));
}

inline std::string replace_once(std::string text, const std::string& from, const std::string& to) {
    auto pos = text.find(from);
    if (pos == std::string::npos) throw std::runtime_error("pattern not found: " + from);
    return text.replace(pos, from.size(), to);
}

}  // namespace testsupport
