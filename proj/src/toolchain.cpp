#include "perfagent/toolchain.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace perfagent {

namespace {

std::string first_line(const std::string& s) {
    auto nl = s.find('\n');
    return nl == std::string::npos ? s : s.substr(0, nl);
}

std::string probe_version(const std::string& exe) {
    ProcessRequest req;
    req.argv = {exe, "--version"};
    req.timeout = std::chrono::seconds(10);
    try {
        auto res = run_process(req);
        if (res.ok()) return first_line(res.out);
    } catch (const ToolNotFound&) {
    }
    return {};
}

bool is_translation_unit(const fs::path& p) {
    auto ext = p.extension().string();
    return ext == ".c" || ext == ".cc" || ext == ".cpp" || ext == ".cxx" || ext == ".C";
}

bool is_link_flag(const std::string& f) {
    return f.rfind("-l", 0) == 0 || f.rfind("-Wl,", 0) == 0 || f.rfind("-L", 0) == 0;
}

void write_text(const fs::path& p, const std::string& text) {
    fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out << text;
}

std::string read_text(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

ToolchainConfig ToolchainConfig::detect() {
    ToolchainConfig cfg;
    auto add = [&](const std::string& id, const std::string& cc, const std::string& cxx) {
        auto c = find_executable(cc);
        auto x = find_executable(cxx);
        if (!c || !x) return;
        cfg.compilers[id] = CompilerEntry{c->string(), x->string(), probe_version(c->string()), {}};
    };
    add("gcc", "gcc", "g++");
    add("clang", "clang", "clang++");
    return cfg;
}

ToolchainConfig ToolchainConfig::from_json(const nlohmann::json& doc) {
    ToolchainConfig cfg;
    if (!doc.is_object() || !doc.contains("compilers") || !doc["compilers"].is_object())
        throw Error("toolchain config must contain a 'compilers' object");
    for (const auto& [id, e] : doc["compilers"].items()) {
        CompilerEntry entry;
        entry.c_path = e.at("c_path").get<std::string>();
        entry.cxx_path = e.at("cxx_path").get<std::string>();
        entry.version_string = e.value("version_string", std::string());
        entry.default_flags = e.value("default_flags", std::vector<std::string>{});
        if (entry.version_string.empty()) entry.version_string = probe_version(entry.c_path);
        cfg.compilers[id] = std::move(entry);
    }
    return cfg;
}

ToolchainConfig ToolchainConfig::load(const fs::path& file) {
    std::ifstream in(file);
    if (!in) throw Error("cannot read toolchain config " + file.string());
    return from_json(nlohmann::json::parse(in));
}

nlohmann::json ToolchainConfig::to_json() const {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [id, e] : compilers) {
        j[id] = {{"c_path", e.c_path},
                 {"cxx_path", e.cxx_path},
                 {"version_string", e.version_string},
                 {"default_flags", e.default_flags}};
    }
    return {{"compilers", j}};
}

const CompilerEntry& ToolchainConfig::resolve(const std::string& compiler_id) const {
    auto it = compilers.find(compiler_id);
    if (it == compilers.end()) throw ToolNotFound(compiler_id);
    return it->second;
}

VariantLayout variant_layout(const fs::path& work_root, const std::string& bench_id, const std::string& variant_tag) {
    return VariantLayout{work_root / bench_id / variant_tag};
}

BuildOutcome compile(const BenchmarkSpec& spec, const fs::path& src_dir, const ToolchainConfig& toolchain,
                     const fs::path& work_root, const std::string& variant_tag,
                     const std::optional<std::string>& compiler_override) {
    const std::string compiler_id = compiler_override.value_or(spec.build.compiler_id);
    const CompilerEntry& cc = toolchain.resolve(compiler_id);
    const std::string& driver = spec.language == Language::C ? cc.c_path : cc.cxx_path;
    if (!find_executable(driver)) throw ToolNotFound(compiler_id);

    auto layout = variant_layout(work_root, spec.id, variant_tag);
    fs::create_directories(layout.bin());
    fs::create_directories(layout.logs());
    if (fs::weakly_canonical(src_dir) != fs::weakly_canonical(layout.src())) {
        fs::remove_all(layout.src());
        fs::create_directories(layout.src());
        fs::copy(src_dir, layout.src(), fs::copy_options::recursive | fs::copy_options::overwrite_existing);
    }

    auto binary = fs::absolute(layout.bin() / spec.id);
    std::vector<std::string> argv{driver};
    std::vector<std::string> link_flags;
    for (const auto& f : cc.default_flags) argv.push_back(f);
    for (const auto& f : spec.build.flags) {
        if (is_link_flag(f)) link_flags.push_back(f);
        else argv.push_back(f);
    }
    argv.push_back("-I" + fs::absolute(layout.src()).string());
    argv.push_back("-o");
    argv.push_back(binary.string());
    for (const auto& s : spec.source_files)
        if (is_translation_unit(s)) argv.push_back(fs::absolute(layout.src() / s).string());
    for (const auto& o : spec.build.extra_objects) argv.push_back(fs::absolute(spec.root / o).string());
    argv.insert(argv.end(), link_flags.begin(), link_flags.end());

    ProcessRequest req;
    req.argv = argv;
    req.working_dir = layout.src();
    req.timeout = std::chrono::duration<double>(spec.build.timeout_s);

    BuildOutcome outcome;
    outcome.command_line = shell_quote_join(argv);
    fs::remove(binary);
    auto res = run_process(req);
    outcome.elapsed_s = res.wall_s;
    outcome.stderr_text = "$ " + outcome.command_line + "\n" + res.err + res.out;
    write_text(layout.logs() / "build.log", outcome.stderr_text);
    if (res.timed_out) {
        outcome.timed_out = true;
        throw BuildTimeout("build of " + spec.id + "/" + variant_tag + " exceeded " +
                           std::to_string(spec.build.timeout_s) + " s");
    }
    if (res.ok() && fs::is_regular_file(binary)) {
        outcome.status = BuildStatus::Ok;
        outcome.binary_path = binary;
    } else {
        outcome.status = BuildStatus::CompileError;
    }
    return outcome;
}

std::string_view to_string(RunStatus s) {
    switch (s) {
        case RunStatus::Ok: return "Ok";
        case RunStatus::Crash: return "Crash";
        case RunStatus::Timeout: return "Timeout";
    }
    return "?";
}

double RunSample::mean() const {
    if (wall_times_s.empty()) throw EmptySample();
    return std::accumulate(wall_times_s.begin(), wall_times_s.end(), 0.0) /
           static_cast<double>(wall_times_s.size());
}

double RunSample::min() const {
    if (wall_times_s.empty()) throw EmptySample();
    return *std::min_element(wall_times_s.begin(), wall_times_s.end());
}

double RunSample::stddev() const {
    if (wall_times_s.size() < 2) return 0.0;
    double m = mean();
    double acc = 0.0;
    for (double t : wall_times_s) acc += (t - m) * (t - m);
    return std::sqrt(acc / static_cast<double>(wall_times_s.size() - 1));
}

std::mutex& execution_lock() {
    static std::mutex m;
    return m;
}

RunSample run_timed(const fs::path& binary, const RunRecipe& run, const RunOptions& opts) {
    RunSample sample;
    sample.thread_count = opts.thread_count;

    ProcessRequest req;
    req.argv.push_back(fs::absolute(binary).string());
    req.argv.insert(req.argv.end(), run.args.begin(), run.args.end());
    req.env_overrides = run.env;
    if (opts.thread_count) req.env_overrides[kThreadEnvVar] = std::to_string(*opts.thread_count);
    req.working_dir = opts.working_dir;
    if (run.stdin_file) {
        fs::path in = *run.stdin_file;
        if (in.is_relative() && opts.working_dir) in = *opts.working_dir / in;
        req.stdin_file = in;
    }
    req.timeout = std::chrono::duration<double>(run.timeout_s);

    std::lock_guard<std::mutex> guard(execution_lock());
    for (int rep = 0; rep < run.repetitions; ++rep) {
        auto res = run_process(req);
        if (rep == 0) {
            sample.stdout_text = std::move(res.out);
            sample.stderr_text = std::move(res.err);
        }
        if (res.timed_out) {
            sample.status = RunStatus::Timeout;
            break;
        }
        if (!res.ok()) {
            sample.status = RunStatus::Crash;
            sample.exit_code = res.exit_code;
            sample.term_signal = res.term_signal;
            if (rep != 0) sample.stderr_text = std::move(res.err);
            break;
        }
        sample.wall_times_s.push_back(std::max(res.wall_s, 1e-9));
        if (rep == 0 && run.result_file) {
            fs::path f = *run.result_file;
            if (f.is_relative() && opts.working_dir) f = *opts.working_dir / f;
            sample.stdout_text = read_text(f);
        }
    }
    return sample;
}

double speedup_from_means(double baseline_mean_s, double candidate_mean_s) {
    if (!(baseline_mean_s > 0) || !(candidate_mean_s > 0)) throw EmptySample();
    return baseline_mean_s / candidate_mean_s;
}

SpeedupStat measure_speedup(const RunSample& baseline, const RunSample& candidate) {
    if (baseline.wall_times_s.empty() || candidate.wall_times_s.empty()) throw EmptySample();
    SpeedupStat s;
    s.baseline_mean_s = baseline.mean();
    s.candidate_mean_s = candidate.mean();
    s.speedup = speedup_from_means(s.baseline_mean_s, s.candidate_mean_s);
    s.baseline_min_s = baseline.min();
    s.candidate_min_s = candidate.min();
    s.baseline_stddev_s = baseline.stddev();
    s.candidate_stddev_s = candidate.stddev();
    return s;
}

std::map<int, RunSample> thread_sweep(const fs::path& binary, const RunRecipe& run, std::vector<int> counts,
                                      const std::optional<fs::path>& working_dir) {
    if (counts.empty()) throw Error("thread_sweep: counts must be non-empty");
    for (int c : counts)
        if (c < 1) throw Error("thread_sweep: thread counts must be >= 1");
    std::sort(counts.begin(), counts.end());
    counts.erase(std::unique(counts.begin(), counts.end()), counts.end());
    std::map<int, RunSample> out;
    for (int c : counts) out.emplace(c, run_timed(binary, run, RunOptions{c, working_dir}));
    return out;
}

}  // namespace perfagent
