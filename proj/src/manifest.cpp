#include "perfagent/manifest.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <regex>
#include <sstream>
#include <utility>

#include <unistd.h>

#include "perfagent/patch.hpp"
#include "perfagent/process.hpp"

namespace perfagent {

namespace {

constexpr std::array<std::pair<Motif, std::string_view>, 9> kMotifNames{{
    {Motif::DenseLinearAlgebra, "DenseLinearAlgebra"},
    {Motif::SparseLinearAlgebra, "SparseLinearAlgebra"},
    {Motif::SpectralMethods, "SpectralMethods"},
    {Motif::MonteCarlo, "MonteCarlo"},
    {Motif::DynamicProgramming, "DynamicProgramming"},
    {Motif::StructuredGrids, "StructuredGrids"},
    {Motif::NBody, "NBody"},
    {Motif::Stencils, "Stencils"},
    {Motif::RadiationTransport, "RadiationTransport"},
}};

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error("cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& p, std::string_view data) {
    fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + p.string());
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
}

/// True when `rel` stays inside the manifest directory after normalization.
bool resolves_under(const fs::path&, const std::string& rel) {
    fs::path p(rel);
    if (p.is_absolute()) return false;
    auto norm = p.lexically_normal();
    if (norm.empty()) return false;
    auto first = *norm.begin();
    return first != "..";
}

class Reader {
public:
    Reader(const nlohmann::json& doc, fs::path origin) : doc_(doc), origin_(std::move(origin)) {}

    [[noreturn]] void fail(const std::string& why) const { throw MalformedManifest(origin_, why); }

    const nlohmann::json* find(const nlohmann::json& obj, const std::string& key) const {
        auto it = obj.find(key);
        return it == obj.end() ? nullptr : &*it;
    }

    std::string str(const nlohmann::json& obj, const std::string& key, const std::string& ctx) const {
        auto* v = find(obj, key);
        if (!v) fail("missing key '" + ctx + key + "'");
        if (!v->is_string()) fail("'" + ctx + key + "' must be a string");
        return v->get<std::string>();
    }

    std::optional<std::string> opt_str(const nlohmann::json& obj, const std::string& key,
                                       const std::string& ctx) const {
        auto* v = find(obj, key);
        if (!v || v->is_null()) return std::nullopt;
        if (!v->is_string()) fail("'" + ctx + key + "' must be a string");
        return v->get<std::string>();
    }

    std::vector<std::string> str_list(const nlohmann::json& obj, const std::string& key,
                                      const std::string& ctx, bool required = false) const {
        auto* v = find(obj, key);
        if (!v) {
            if (required) fail("missing key '" + ctx + key + "'");
            return {};
        }
        if (!v->is_array()) fail("'" + ctx + key + "' must be an array of strings");
        std::vector<std::string> out;
        for (const auto& e : *v) {
            if (!e.is_string()) fail("'" + ctx + key + "' must be an array of strings");
            out.push_back(e.get<std::string>());
        }
        return out;
    }

    double number(const nlohmann::json& obj, const std::string& key, const std::string& ctx,
                  double dflt) const {
        auto* v = find(obj, key);
        if (!v) return dflt;
        if (!v->is_number()) fail("'" + ctx + key + "' must be a number");
        return v->get<double>();
    }

    bool boolean(const nlohmann::json& obj, const std::string& key, const std::string& ctx,
                 bool dflt) const {
        auto* v = find(obj, key);
        if (!v) return dflt;
        if (!v->is_boolean()) fail("'" + ctx + key + "' must be a boolean");
        return v->get<bool>();
    }

    const nlohmann::json& section(const std::string& key) const {
        static const nlohmann::json empty = nlohmann::json::object();
        auto* v = find(doc_, key);
        if (!v) return empty;
        if (!v->is_object()) fail("'" + key + "' must be an object");
        return *v;
    }

    const nlohmann::json& doc() const { return doc_; }

private:
    const nlohmann::json& doc_;
    fs::path origin_;
};

bool is_translation_unit(const std::string& path) {
    auto ext = fs::path(path).extension().string();
    return ext == ".c" || ext == ".cc" || ext == ".cpp" || ext == ".cxx" || ext == ".C";
}

}  // namespace

std::string_view to_string(Motif m) {
    for (const auto& [k, v] : kMotifNames)
        if (k == m) return v;
    return "?";
}

std::string_view to_string(Language l) { return l == Language::C ? "C" : "Cpp"; }

std::string_view to_string(ValidationMode m) {
    return m == ValidationMode::ExactBytes ? "ExactBytes" : "NumericTokens";
}

std::optional<Motif> motif_from_string(std::string_view s) {
    for (const auto& [k, v] : kMotifNames)
        if (v == s) return k;
    return std::nullopt;
}

std::optional<Language> language_from_string(std::string_view s) {
    if (s == "C" || s == "c") return Language::C;
    if (s == "Cpp" || s == "C++" || s == "cpp" || s == "c++") return Language::Cpp;
    return std::nullopt;
}

std::optional<ValidationMode> validation_mode_from_string(std::string_view s) {
    if (s == "ExactBytes") return ValidationMode::ExactBytes;
    if (s == "NumericTokens") return ValidationMode::NumericTokens;
    return std::nullopt;
}

MalformedManifest::MalformedManifest(const fs::path& p, const std::string& r)
    : Error("malformed manifest " + p.string() + ": " + r), path(p), reason(r) {}

MissingSource::MissingSource(const fs::path& p)
    : Error("missing source file: " + p.string()), path(p) {}

DuplicateId::DuplicateId(const std::string& i) : Error("duplicate benchmark id: " + i), id(i) {}

PreprocessFailure::PreprocessFailure(const std::string& excerpt)
    : Error("preprocessing failed: " + excerpt), stderr_excerpt(excerpt) {}

BenchmarkSpec parse_manifest(const nlohmann::json& doc, const fs::path& manifest_dir,
                             const fs::path& origin_for_errors) {
    fs::path origin = origin_for_errors.empty() ? manifest_dir / kManifestFileName : origin_for_errors;
    Reader r(doc, origin);
    if (!doc.is_object()) r.fail("document must be an object");

    BenchmarkSpec spec;
    spec.root = manifest_dir;
    spec.id = r.str(doc, "id", "");
    if (spec.id.empty()) r.fail("'id' must be non-empty");

    auto motif = motif_from_string(r.str(doc, "motif", ""));
    if (!motif) r.fail("unknown motif '" + doc["motif"].get<std::string>() + "'");
    spec.motif = *motif;

    auto* level = r.find(doc, "level");
    if (!level || !level->is_number_integer()) r.fail("'level' must be an integer");
    spec.level = level->get<int>();
    if (spec.level < 1 || spec.level > 3) r.fail("'level' must be 1, 2 or 3");

    auto lang = language_from_string(r.str(doc, "language", ""));
    if (!lang) r.fail("unknown language '" + doc["language"].get<std::string>() + "'");
    spec.language = *lang;

    spec.source_files = r.str_list(doc, "sources", "", true);
    if (spec.source_files.empty()) r.fail("'sources' must be non-empty");
    for (const auto& s : spec.source_files)
        if (!resolves_under(manifest_dir, s)) r.fail("source '" + s + "' escapes the benchmark root");
    spec.entry_hotspot = r.opt_str(doc, "entry_hotspot", "");

    const auto& build = r.section("build");
    if (auto c = r.opt_str(build, "compiler_id", "build.")) spec.build.compiler_id = *c;
    spec.build.flags = r.str_list(build, "flags", "build.");
    spec.build.extra_objects = r.str_list(build, "extra_objects", "build.");
    spec.build.timeout_s = r.number(build, "timeout_s", "build.", spec.build.timeout_s);
    if (!(spec.build.timeout_s > 0)) r.fail("'build.timeout_s' must be > 0");

    const auto& run = r.section("run");
    spec.run.args = r.str_list(run, "args", "run.");
    spec.run.stdin_file = r.opt_str(run, "stdin_file", "run.");
    spec.run.result_file = r.opt_str(run, "result_file", "run.");
    if (auto* reps = r.find(run, "repetitions")) {
        if (!reps->is_number_integer()) r.fail("'run.repetitions' must be an integer");
        spec.run.repetitions = reps->get<int>();
    }
    if (spec.run.repetitions < 1) r.fail("'run.repetitions' must be >= 1");
    spec.run.timeout_s = r.number(run, "timeout_s", "run.", spec.run.timeout_s);
    if (!(spec.run.timeout_s > 0)) r.fail("'run.timeout_s' must be > 0");
    if (auto* env = r.find(run, "env")) {
        if (!env->is_object()) r.fail("'run.env' must be an object");
        for (const auto& [k, v] : env->items()) {
            if (!v.is_string()) r.fail("'run.env." + k + "' must be a string");
            spec.run.env[k] = v.get<std::string>();
        }
    }

    const auto& val = r.section("validation");
    if (auto m = r.opt_str(val, "mode", "validation.")) {
        auto mode = validation_mode_from_string(*m);
        if (!mode) r.fail("unknown validation mode '" + *m + "'");
        spec.validation.mode = *mode;
    }
    spec.validation.abs_tol = r.number(val, "abs_tol", "validation.", 0.0);
    spec.validation.rel_tol = r.number(val, "rel_tol", "validation.", 0.0);
    if (spec.validation.abs_tol < 0 || spec.validation.rel_tol < 0)
        r.fail("validation tolerances must be non-negative");
    spec.validation.ignore_patterns = r.str_list(val, "ignore_patterns", "validation.");
    for (const auto& pat : spec.validation.ignore_patterns) {
        try {
            std::regex re(pat);
        } catch (const std::regex_error& e) {
            r.fail("bad ignore pattern '" + pat + "': " + e.what());
        }
    }

    const auto& prep = r.section("prep");
    spec.prep.strip_omp_pragmas = r.boolean(prep, "strip_omp_pragmas", "prep.", false);
    spec.prep.expand_macros = r.boolean(prep, "expand_macros", "prep.", false);

    for (const auto& s : spec.source_files) {
        auto p = manifest_dir / s;
        if (!fs::is_regular_file(p)) throw MissingSource(p);
    }
    if (spec.run.stdin_file) {
        if (!resolves_under(manifest_dir, *spec.run.stdin_file))
            r.fail("stdin file escapes the benchmark root");
        auto p = manifest_dir / *spec.run.stdin_file;
        if (!fs::is_regular_file(p)) throw MissingSource(p);
    }

    if (spec.entry_hotspot) {
        int defining = 0;
        for (const auto& s : spec.source_files) {
            if (!is_translation_unit(s)) continue;
            auto text = read_file(manifest_dir / s);
            try {
                for (const auto& f : list_functions(text))
                    if (f.name == *spec.entry_hotspot) {
                        ++defining;
                        break;
                    }
            } catch (const PatchError&) {
                // Unscannable files cannot host the hotspot.
            }
        }
        if (defining != 1)
            r.fail("entry_hotspot '" + *spec.entry_hotspot + "' must be defined in exactly one source file (found " +
                   std::to_string(defining) + ")");
    }
    return spec;
}

nlohmann::json to_json(const BenchmarkSpec& spec) {
    nlohmann::json j;
    j["id"] = spec.id;
    j["motif"] = to_string(spec.motif);
    j["level"] = spec.level;
    j["language"] = to_string(spec.language);
    j["sources"] = spec.source_files;
    if (spec.entry_hotspot) j["entry_hotspot"] = *spec.entry_hotspot;
    j["build"] = {{"compiler_id", spec.build.compiler_id},
                  {"flags", spec.build.flags},
                  {"extra_objects", spec.build.extra_objects},
                  {"timeout_s", spec.build.timeout_s}};
    nlohmann::json run = {{"args", spec.run.args},
                          {"repetitions", spec.run.repetitions},
                          {"timeout_s", spec.run.timeout_s},
                          {"env", spec.run.env}};
    if (spec.run.stdin_file) run["stdin_file"] = *spec.run.stdin_file;
    if (spec.run.result_file) run["result_file"] = *spec.run.result_file;
    j["run"] = std::move(run);
    j["validation"] = {{"mode", to_string(spec.validation.mode)},
                       {"abs_tol", spec.validation.abs_tol},
                       {"rel_tol", spec.validation.rel_tol},
                       {"ignore_patterns", spec.validation.ignore_patterns}};
    j["prep"] = {{"strip_omp_pragmas", spec.prep.strip_omp_pragmas},
                 {"expand_macros", spec.prep.expand_macros}};
    return j;
}

BenchmarkSpec load_benchmark(const fs::path& manifest_file) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(read_file(manifest_file));
    } catch (const nlohmann::json::parse_error& e) {
        throw MalformedManifest(manifest_file, e.what());
    }
    return parse_manifest(doc, manifest_file.parent_path(), manifest_file);
}

std::vector<BenchmarkSpec> load_manifest(const fs::path& root) {
    if (!fs::is_directory(root)) throw Error("benchmark root is not a directory: " + root.string());
    std::vector<fs::path> files;
    for (const auto& entry : fs::recursive_directory_iterator(root)) {
        if (entry.is_regular_file() && entry.path().filename() == kManifestFileName)
            files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<BenchmarkSpec> specs;
    std::set<std::string> seen;
    for (const auto& f : files) {
        auto spec = load_benchmark(f);
        if (!seen.insert(spec.id).second) throw DuplicateId(spec.id);
        specs.push_back(std::move(spec));
    }
    std::sort(specs.begin(), specs.end(),
              [](const BenchmarkSpec& a, const BenchmarkSpec& b) { return a.id < b.id; });
    return specs;
}

std::vector<BenchmarkSpec> select(const std::vector<BenchmarkSpec>& specs, const SelectFilter& filter) {
    std::vector<BenchmarkSpec> out;
    for (const auto& s : specs) {
        if (filter.levels && !filter.levels->contains(s.level)) continue;
        if (filter.motifs && !filter.motifs->contains(s.motif)) continue;
        if (filter.ids && !filter.ids->contains(s.id)) continue;
        out.push_back(s);
    }
    return out;
}

SelectFilter parse_select(std::string_view text) {
    SelectFilter f;
    std::string s(text);
    std::stringstream clauses(s);
    std::string clause;
    while (std::getline(clauses, clause, ';')) {
        if (clause.empty()) continue;
        auto eq = clause.find('=');
        if (eq == std::string::npos) throw Error("bad selector clause '" + clause + "'");
        std::string key = clause.substr(0, eq);
        std::stringstream values(clause.substr(eq + 1));
        std::string v;
        while (std::getline(values, v, ',')) {
            if (v.empty()) continue;
            if (key == "level") {
                if (!f.levels) f.levels.emplace();
                try {
                    f.levels->insert(std::stoi(v));
                } catch (const std::exception&) {
                    throw Error("bad level '" + v + "'");
                }
            } else if (key == "motif") {
                auto m = motif_from_string(v);
                if (!m) throw Error("unknown motif '" + v + "'");
                if (!f.motifs) f.motifs.emplace();
                f.motifs->insert(*m);
            } else if (key == "id") {
                if (!f.ids) f.ids.emplace();
                f.ids->insert(v);
            } else {
                throw Error("unknown selector key '" + key + "'");
            }
        }
    }
    return f;
}

std::string strip_omp_pragmas(std::string_view source) {
    static const std::regex pragma(R"(^[ \t]*#[ \t]*pragma[ \t]+omp\b)");
    std::string out;
    out.reserve(source.size());
    size_t pos = 0;
    while (pos < source.size()) {
        size_t nl = source.find('\n', pos);
        size_t end = nl == std::string_view::npos ? source.size() : nl + 1;
        std::string line(source.substr(pos, end - pos));
        if (!std::regex_search(line, pragma)) out += line;
        pos = end;
    }
    return out;
}

namespace {

// Include lines are masked before running the preprocessor so that system
// headers are not inlined into the prepared source.
std::string expand_macros(const std::string& text, const fs::path& file, const PrepareOptions& opts) {
    static const std::regex include_line(R"(^[ \t]*#[ \t]*include\b.*$)");
    std::vector<std::string> includes;
    std::string masked;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (std::regex_match(line, include_line)) {
            masked += "__perfagent_include_" + std::to_string(includes.size()) + "__\n";
            includes.push_back(line);
        } else {
            masked += line + "\n";
        }
    }

    auto tmp = fs::temp_directory_path() /
               ("perfagent_pp_" + std::to_string(::getpid()) + "_" + file.filename().string());
    write_file(tmp, masked);
    ProcessRequest req;
    req.argv = opts.preprocessor;
    req.argv.push_back(tmp.string());
    req.timeout = std::chrono::seconds(60);
    ProcessResult res;
    try {
        res = run_process(req);
    } catch (const ToolNotFound& e) {
        fs::remove(tmp);
        throw PreprocessFailure(e.what());
    }
    fs::remove(tmp);
    if (!res.ok()) throw PreprocessFailure(res.err.substr(0, 2000));

    std::string out;
    std::istringstream pp(res.out);
    static const std::regex marker(R"(^\s*__perfagent_include_(\d+)__\s*$)");
    while (std::getline(pp, line)) {
        std::smatch m;
        if (std::regex_match(line, m, marker)) {
            auto idx = std::stoul(m[1].str());
            out += (idx < includes.size() ? includes[idx] : line) + "\n";
        } else {
            out += line + "\n";
        }
    }
    return out;
}

}  // namespace

fs::path prepare_sources(const BenchmarkSpec& spec, const fs::path& work_dir, const PrepareOptions& opts) {
    fs::create_directories(work_dir);
    for (const auto& rel : spec.source_files) {
        auto src = spec.root / rel;
        auto dst = work_dir / rel;
        if (!fs::is_regular_file(src)) throw MissingSource(src);
        if (!spec.prep.strip_omp_pragmas && !spec.prep.expand_macros) {
            fs::create_directories(dst.parent_path());
            fs::copy_file(src, dst, fs::copy_options::overwrite_existing);
            continue;
        }
        std::string text = read_file(src);
        if (spec.prep.expand_macros) text = expand_macros(text, src, opts);
        if (spec.prep.strip_omp_pragmas) text = strip_omp_pragmas(text);
        write_file(dst, text);
    }
    if (spec.run.stdin_file) {
        auto dst = work_dir / *spec.run.stdin_file;
        fs::create_directories(dst.parent_path());
        fs::copy_file(spec.root / *spec.run.stdin_file, dst, fs::copy_options::overwrite_existing);
    }
    return work_dir;
}

std::string primary_source(const BenchmarkSpec& spec) {
    if (spec.entry_hotspot) {
        for (const auto& s : spec.source_files) {
            if (!is_translation_unit(s)) continue;
            std::ifstream in(spec.root / s, std::ios::binary);
            std::ostringstream ss;
            ss << in.rdbuf();
            try {
                for (const auto& f : list_functions(ss.str()))
                    if (f.name == *spec.entry_hotspot) return s;
            } catch (const PatchError&) {
            }
        }
    }
    return spec.source_files.front();
}

}  // namespace perfagent
