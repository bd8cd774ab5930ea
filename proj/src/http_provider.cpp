#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <chrono>
#include <cstdlib>
#include <regex>

#include "perfagent/provider.hpp"

namespace perfagent {

namespace {

struct Endpoint {
    std::string scheme_host_port;
    std::string path_prefix;
};

Endpoint split_url(const std::string& url) {
    static const std::regex re(R"(^(https?://[^/]+)(/.*)?$)");
    std::smatch m;
    if (!std::regex_match(url, m, re)) throw Error("bad provider base_url '" + url + "'");
    Endpoint e{m[1].str(), m[2].matched ? m[2].str() : std::string()};
    while (!e.path_prefix.empty() && e.path_prefix.back() == '/') e.path_prefix.pop_back();
    return e;
}

}  // namespace

HttpChatProvider::HttpChatProvider(HttpProviderConfig cfg) : cfg_(std::move(cfg)) {}

nlohmann::json HttpChatProvider::request_body(const std::vector<ChatMessage>& messages) const {
    nlohmann::json msgs = nlohmann::json::array();
    for (const auto& m : messages) msgs.push_back({{"role", to_string(m.role)}, {"content", m.content}});
    return {{"model", cfg_.model},
            {"messages", msgs},
            {"max_tokens", cfg_.max_output_tokens},
            {"temperature", cfg_.temperature}};
}

nlohmann::json HttpChatProvider::describe() const {
    return {{"provider_id", cfg_.provider_id},
            {"kind", "http"},
            {"base_url", cfg_.base_url},
            {"model", cfg_.model},
            {"max_output_tokens", cfg_.max_output_tokens},
            {"temperature", cfg_.temperature}};
}

ModelResponse HttpChatProvider::complete(const std::vector<ChatMessage>& messages) {
    auto ep = split_url(cfg_.base_url);
    httplib::Client cli(ep.scheme_host_port);
    auto secs = std::chrono::duration<double>(cfg_.timeout_s);
    cli.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(std::min(secs, std::chrono::duration<double>(30.0))));
    cli.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(secs));
    cli.set_write_timeout(std::chrono::duration_cast<std::chrono::microseconds>(std::min(secs, std::chrono::duration<double>(60.0))));

    httplib::Headers headers;
    if (const char* key = std::getenv(cfg_.api_key_env.c_str()); key && *key)
        headers.emplace("Authorization", std::string("Bearer ") + key);

    auto t0 = std::chrono::steady_clock::now();
    auto res = cli.Post(ep.path_prefix + "/chat/completions", headers, request_body(messages).dump(),
                        "application/json");
    double latency = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!res) {
        auto err = res.error();
        if (err == httplib::Error::Read || err == httplib::Error::Write)
            throw ProviderTimeout(cfg_.provider_id + ": " + httplib::to_string(err));
        throw ProviderUnreachable(cfg_.provider_id + ": " + httplib::to_string(err));
    }
    if (res->status == 429) throw QuotaExceeded(cfg_.provider_id + ": HTTP 429 " + res->body.substr(0, 500));
    if (res->status == 408 || res->status == 504) throw ProviderTimeout(cfg_.provider_id + ": HTTP " + std::to_string(res->status));
    if (res->status != 200)
        throw ProviderUnreachable(cfg_.provider_id + ": HTTP " + std::to_string(res->status) + " " +
                                  res->body.substr(0, 500));

    nlohmann::json body;
    try {
        body = nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::parse_error& e) {
        throw ProviderError(cfg_.provider_id + ": response is not JSON: " + e.what());
    }
    ModelResponse out;
    out.provider_id = cfg_.provider_id;
    out.latency_s = latency;
    try {
        const auto& content = body.at("choices").at(0).at("message").at("content");
        out.raw_text = content.is_string() ? content.get<std::string>() : std::string();
    } catch (const nlohmann::json::exception& e) {
        throw ProviderError(cfg_.provider_id + ": unexpected response shape: " + e.what());
    }
    if (body.contains("usage") && body["usage"].is_object()) {
        const auto& u = body["usage"];
        out.token_counts = TokenCounts{u.value("prompt_tokens", 0L), u.value("completion_tokens", 0L)};
    }
    return out;
}

}  // namespace perfagent
