#include "perfagent/provider.hpp"

#include <chrono>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <openssl/evp.h>

namespace perfagent {

std::string_view to_string(Role r) {
    switch (r) {
        case Role::System: return "system";
        case Role::User: return "user";
        case Role::Assistant: return "assistant";
    }
    return "?";
}

std::string canonical_messages(const std::vector<ChatMessage>& messages) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& m : messages) arr.push_back({{"content", m.content}, {"role", to_string(m.role)}});
    return arr.dump();
}

std::string request_digest(const std::vector<ChatMessage>& messages) {
    std::string canon = canonical_messages(messages);
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(canon.data(), canon.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw Error("sha256 digest failed");
    std::ostringstream hex;
    for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
    return hex.str();
}

std::vector<ChatMessage> build_messages(const PromptBundle& prompt, const std::vector<Exchange>& history) {
    std::vector<ChatMessage> msgs;
    msgs.push_back({Role::System, prompt.system_text});
    for (const auto& ex : history) {
        msgs.push_back({Role::User, ex.user_text});
        msgs.push_back({Role::Assistant, ex.assistant_text});
    }
    msgs.push_back({Role::User, prompt.user_text});
    return msgs;
}

ModelResponse request(Provider& provider, const PromptBundle& prompt, const std::vector<Exchange>& history) {
    auto msgs = build_messages(prompt, history);
    auto t0 = std::chrono::steady_clock::now();
    ModelResponse r = provider.complete(msgs);
    double measured = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    // Replayed responses carry their recorded latency.
    if (r.latency_s <= 0.0) r.latency_s = measured;
    if (r.provider_id.empty()) r.provider_id = provider.id();
    return r;
}

nlohmann::json transcript_to_json(const std::vector<TranscriptEntry>& entries) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& e : entries)
        arr.push_back({{"request_digest", e.request_digest},
                       {"response_text", e.response_text},
                       {"latency_s", e.latency_s}});
    return arr;
}

std::vector<TranscriptEntry> transcript_from_json(const nlohmann::json& doc) {
    if (!doc.is_array()) throw Error("transcript must be a JSON array");
    std::vector<TranscriptEntry> out;
    for (const auto& e : doc) {
        if (!e.is_object() || !e.contains("response_text") || !e["response_text"].is_string())
            throw Error("transcript entries need a string 'response_text'");
        TranscriptEntry t;
        t.response_text = e["response_text"].get<std::string>();
        t.request_digest = e.value("request_digest", std::string());
        t.latency_s = e.value("latency_s", 0.0);
        out.push_back(std::move(t));
    }
    return out;
}

std::vector<TranscriptEntry> load_transcript(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw Error("cannot read transcript " + file.string());
    return transcript_from_json(nlohmann::json::parse(in));
}

void save_transcript(const std::filesystem::path& file, const std::vector<TranscriptEntry>& entries) {
    if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
    std::ofstream out(file, std::ios::trunc);
    if (!out) throw Error("cannot write transcript " + file.string());
    out << transcript_to_json(entries).dump(2) << "\n";
}

ReplayProvider::ReplayProvider(std::string provider_id, std::vector<TranscriptEntry> entries, DigestPolicy policy)
    : id_(std::move(provider_id)), entries_(std::move(entries)), policy_(policy) {}

ModelResponse ReplayProvider::complete(const std::vector<ChatMessage>& messages) {
    std::lock_guard<std::mutex> lock(mu_);
    received_.push_back(messages);
    if (cursor_ >= entries_.size()) throw TranscriptExhausted();
    const auto& e = entries_[cursor_];
    if (!e.request_digest.empty()) {
        auto digest = request_digest(messages);
        if (digest != e.request_digest) {
            ++mismatches_;
            if (policy_ == DigestPolicy::Strict)
                throw TranscriptMismatch("request digest mismatch at transcript entry " + std::to_string(cursor_));
        }
    }
    ++cursor_;
    ModelResponse r;
    r.raw_text = e.response_text;
    r.provider_id = id_;
    r.latency_s = e.latency_s;
    return r;
}

nlohmann::json ReplayProvider::describe() const {
    std::lock_guard<std::mutex> lock(mu_);
    return {{"provider_id", id_},
            {"kind", "replay"},
            {"entries", entries_.size()},
            {"digest_policy", policy_ == DigestPolicy::Strict ? "strict" : "ignore"}};
}

std::vector<std::vector<ChatMessage>> ReplayProvider::received() const {
    std::lock_guard<std::mutex> lock(mu_);
    return received_;
}

std::size_t ReplayProvider::remaining() const {
    std::lock_guard<std::mutex> lock(mu_);
    return entries_.size() - cursor_;
}

std::size_t ReplayProvider::digest_mismatches() const {
    std::lock_guard<std::mutex> lock(mu_);
    return mismatches_;
}

RecordingProvider::RecordingProvider(std::unique_ptr<Provider> inner, std::filesystem::path transcript_file)
    : inner_(std::move(inner)), file_(std::move(transcript_file)) {}

ModelResponse RecordingProvider::complete(const std::vector<ChatMessage>& messages) {
    auto t0 = std::chrono::steady_clock::now();
    ModelResponse r = inner_->complete(messages);
    if (r.latency_s <= 0.0)
        r.latency_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::lock_guard<std::mutex> lock(mu_);
    entries_.push_back({request_digest(messages), r.raw_text, r.latency_s});
    save_transcript(file_, entries_);
    return r;
}

nlohmann::json RecordingProvider::describe() const {
    auto j = inner_->describe();
    j["recording_to"] = file_.string();
    return j;
}

std::vector<TranscriptEntry> RecordingProvider::entries() const {
    std::lock_guard<std::mutex> lock(mu_);
    return entries_;
}

namespace {

HttpProviderConfig http_config_from_json(const nlohmann::json& cfg) {
    HttpProviderConfig h;
    h.provider_id = cfg.value("provider_id", h.provider_id);
    h.base_url = cfg.value("base_url", h.base_url);
    h.model = cfg.value("model", h.model);
    h.api_key_env = cfg.value("api_key_env", h.api_key_env);
    h.max_output_tokens = cfg.value("max_output_tokens", h.max_output_tokens);
    h.temperature = cfg.value("temperature", h.temperature);
    h.timeout_s = cfg.value("timeout_s", h.timeout_s);
    return h;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    std::filesystem::path path(p);
    if (path.is_relative() && !base.empty()) return base / path;
    return path;
}

}  // namespace

std::unique_ptr<Provider> make_provider(const nlohmann::json& cfg, const std::filesystem::path& base_dir) {
    if (!cfg.is_object()) throw Error("provider config must be an object");
    std::string kind = cfg.value("kind", std::string("http"));
    std::string id = cfg.value("provider_id", kind);
    if (kind == "replay") {
        if (!cfg.contains("transcript")) throw Error("replay provider needs 'transcript'");
        auto policy = cfg.value("strict_digests", false) ? ReplayProvider::DigestPolicy::Strict
                                                         : ReplayProvider::DigestPolicy::Ignore;
        return std::make_unique<ReplayProvider>(
            id, load_transcript(resolve(base_dir, cfg["transcript"].get<std::string>())), policy);
    }
    if (kind == "http") return std::make_unique<HttpChatProvider>(http_config_from_json(cfg));
    if (kind == "record") {
        if (!cfg.contains("transcript")) throw Error("record provider needs 'transcript'");
        return std::make_unique<RecordingProvider>(std::make_unique<HttpChatProvider>(http_config_from_json(cfg)),
                                                   resolve(base_dir, cfg["transcript"].get<std::string>()));
    }
    throw Error("unknown provider kind '" + kind + "'");
}

std::unique_ptr<Provider> load_provider(const std::filesystem::path& config_file) {
    std::ifstream in(config_file);
    if (!in) throw Error("cannot read provider config " + config_file.string());
    return make_provider(nlohmann::json::parse(in), config_file.parent_path());
}

}  // namespace perfagent
