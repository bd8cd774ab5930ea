// Model providers: an OpenAI-compatible chat-completions client, a
// deterministic transcript replayer and a recording wrapper.
#pragma once

#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "perfagent/llm_gateway.hpp"

namespace perfagent {

enum class Role { System, User, Assistant };
std::string_view to_string(Role r);

struct ChatMessage {
    Role role = Role::User;
    std::string content;

    bool operator==(const ChatMessage&) const = default;
};

/// One completed turn of a conversation.
struct Exchange {
    std::string user_text;
    std::string assistant_text;
};

struct TokenCounts {
    long input = 0;
    long output = 0;
};

struct ModelResponse {
    std::string raw_text;
    std::string provider_id;
    double latency_s = 0.0;
    std::optional<TokenCounts> token_counts;
};

class ProviderError : public Error {
public:
    using Error::Error;
};
class ProviderUnreachable : public ProviderError {
public:
    using ProviderError::ProviderError;
};
class ProviderTimeout : public ProviderError {
public:
    using ProviderError::ProviderError;
};
class QuotaExceeded : public ProviderError {
public:
    using ProviderError::ProviderError;
};
class TranscriptExhausted : public ProviderTimeout {
public:
    TranscriptExhausted() : ProviderTimeout("replay transcript exhausted") {}
};
class TranscriptMismatch : public ProviderError {
public:
    using ProviderError::ProviderError;
};

class Provider {
public:
    virtual ~Provider() = default;
    virtual std::string id() const = 0;
    /// Send the full message list; implementations must be safe to call from
    /// several threads.
    virtual ModelResponse complete(const std::vector<ChatMessage>& messages) = 0;
    /// Sampling settings worth recording in report provenance.
    virtual nlohmann::json describe() const { return {{"provider_id", id()}}; }
};

/// Canonical JSON of the message list and its SHA-256 hex digest.
std::string canonical_messages(const std::vector<ChatMessage>& messages);
std::string request_digest(const std::vector<ChatMessage>& messages);

std::vector<ChatMessage> build_messages(const PromptBundle& prompt, const std::vector<Exchange>& history);

/// Render messages and call the provider, measuring latency around the call.
ModelResponse request(Provider& provider, const PromptBundle& prompt, const std::vector<Exchange>& history);

struct TranscriptEntry {
    std::string request_digest;  // empty matches any request
    std::string response_text;
    double latency_s = 0.0;
};

std::vector<TranscriptEntry> load_transcript(const std::filesystem::path& file);
void save_transcript(const std::filesystem::path& file, const std::vector<TranscriptEntry>& entries);
nlohmann::json transcript_to_json(const std::vector<TranscriptEntry>& entries);
std::vector<TranscriptEntry> transcript_from_json(const nlohmann::json& doc);

class ReplayProvider : public Provider {
public:
    enum class DigestPolicy {
        Ignore,  // consume entries in order regardless of digests
        Strict,  // a non-empty recorded digest must equal the request's digest
    };

    ReplayProvider(std::string provider_id, std::vector<TranscriptEntry> entries,
                   DigestPolicy policy = DigestPolicy::Ignore);

    std::string id() const override { return id_; }
    ModelResponse complete(const std::vector<ChatMessage>& messages) override;
    nlohmann::json describe() const override;

    /// Every message list received so far, in order.
    std::vector<std::vector<ChatMessage>> received() const;
    std::size_t remaining() const;
    std::size_t digest_mismatches() const;

private:
    std::string id_;
    std::vector<TranscriptEntry> entries_;
    DigestPolicy policy_;
    mutable std::mutex mu_;
    std::size_t cursor_ = 0;
    std::size_t mismatches_ = 0;
    std::vector<std::vector<ChatMessage>> received_;
};

struct HttpProviderConfig {
    std::string provider_id = "http";
    std::string base_url = "https://api.openai.com/v1";
    std::string model;
    std::string api_key_env = "OPENAI_API_KEY";
    int max_output_tokens = 4096;
    double temperature = 1.0;
    double timeout_s = 600.0;
};

/// OpenAI-compatible `POST {base_url}/chat/completions`.
class HttpChatProvider : public Provider {
public:
    explicit HttpChatProvider(HttpProviderConfig cfg);
    std::string id() const override { return cfg_.provider_id; }
    ModelResponse complete(const std::vector<ChatMessage>& messages) override;
    nlohmann::json describe() const override;

    /// Request body sent for `messages` (exposed for tests).
    nlohmann::json request_body(const std::vector<ChatMessage>& messages) const;

private:
    HttpProviderConfig cfg_;
};

/// Forwards to an inner provider and appends every exchange to a transcript
/// file that ReplayProvider can consume.
class RecordingProvider : public Provider {
public:
    RecordingProvider(std::unique_ptr<Provider> inner, std::filesystem::path transcript_file);
    std::string id() const override { return inner_->id(); }
    ModelResponse complete(const std::vector<ChatMessage>& messages) override;
    nlohmann::json describe() const override;
    std::vector<TranscriptEntry> entries() const;

private:
    std::unique_ptr<Provider> inner_;
    std::filesystem::path file_;
    mutable std::mutex mu_;
    std::vector<TranscriptEntry> entries_;
};

/// Provider config file: {provider_id, kind: "http"|"replay"|"record",
/// base_url, model, api_key_env, max_output_tokens, temperature, transcript}.
/// Relative transcript paths resolve against the config file's directory.
std::unique_ptr<Provider> make_provider(const nlohmann::json& cfg, const std::filesystem::path& base_dir = {});
std::unique_ptr<Provider> load_provider(const std::filesystem::path& config_file);

}  // namespace perfagent
