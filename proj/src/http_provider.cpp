#include <algorithm>
#include <cstdlib>
#include <random>
#include <thread>

#include <httplib.h>

#include "verifact/provider.hpp"

namespace verifact {

namespace {

bool retryable_status(int status) {
    return status == 408 || status == 429 || status >= 500;
}

std::string body_excerpt(const std::string& body) {
    constexpr std::size_t kMax = 200;
    if (body.size() <= kMax) return body;
    return body.substr(0, kMax) + "...";
}

std::chrono::milliseconds jittered_delay(const HttpProviderOptions& options, int attempt) {
    double delay = static_cast<double>(options.initial_backoff.count());
    for (int i = 0; i < attempt; ++i) delay *= options.backoff_factor;
    if (options.jitter > 0.0) {
        thread_local std::mt19937 rng{std::random_device{}()};
        std::uniform_real_distribution<double> dist(1.0 - options.jitter, 1.0 + options.jitter);
        delay *= dist(rng);
    }
    return std::chrono::milliseconds(std::max<long long>(0, static_cast<long long>(delay)));
}

json build_request_body(const std::vector<ChatMessage>& messages,
                        const CompletionParams& params) {
    json msgs = json::array();
    for (const auto& m : messages) {
        msgs.push_back({{"role", to_string(m.role)}, {"content", m.content}});
    }
    return json{{"model", params.model_name},
                {"messages", std::move(msgs)},
                {"temperature", params.temperature},
                {"max_tokens", params.max_output_tokens}};
}

CompletionResult parse_envelope(const std::string& body) {
    json payload;
    try {
        payload = json::parse(body);
    } catch (const json::parse_error& e) {
        throw ProviderError(ProviderErrorKind::malformed_response,
                            std::string("response body is not JSON: ") + e.what() +
                                " (body: " + body_excerpt(body) + ")");
    }
    if (!payload.contains("choices") || !payload.at("choices").is_array() ||
        payload.at("choices").empty()) {
        throw ProviderError(ProviderErrorKind::malformed_response,
                            "response lacks a choices array (body: " + body_excerpt(body) + ")");
    }
    const auto& first = payload.at("choices").at(0);
    if (!first.contains("message") || !first.at("message").contains("content") ||
        !first.at("message").at("content").is_string()) {
        throw ProviderError(ProviderErrorKind::malformed_response,
                            "choices[0].message.content missing (body: " + body_excerpt(body) +
                                ")");
    }

    CompletionResult result;
    result.text = first.at("message").at("content").get<std::string>();
    if (payload.contains("usage") && payload.at("usage").is_object()) {
        const auto& usage = payload.at("usage");
        result.usage.prompt_tokens = usage.value("prompt_tokens", std::int64_t{0});
        result.usage.completion_tokens = usage.value("completion_tokens", std::int64_t{0});
    }
    return result;
}

}  // namespace

HttpProvider::HttpProvider(HttpProviderOptions options) : options_(std::move(options)) {
    if (options_.api_key.empty()) {
        if (const char* env = std::getenv("VERIFACT_API_KEY")) options_.api_key = env;
    }
}

CompletionResult HttpProvider::complete(const std::vector<ChatMessage>& messages,
                                        const CompletionParams& params,
                                        const std::string& /*stage_tag*/) {
    if (messages.empty()) {
        throw std::invalid_argument("complete() requires at least one message");
    }
    const std::string body = build_request_body(messages, params).dump();

    httplib::Headers headers;
    if (!options_.api_key.empty()) {
        headers.emplace("Authorization", "Bearer " + options_.api_key);
    }

    int attempt = 0;
    while (true) {
        httplib::Client client(options_.base_url);
        client.set_connection_timeout(params.request_timeout);
        client.set_read_timeout(params.request_timeout);
        client.set_write_timeout(params.request_timeout);

        const auto start = std::chrono::steady_clock::now();
        auto res = client.Post(options_.completions_path, headers, body, "application/json");
        const auto elapsed = std::chrono::steady_clock::now() - start;

        if (res) {
            if (res->status >= 200 && res->status < 300) {
                auto result = parse_envelope(res->body);
                result.retry_count = attempt;
                return result;
            }
            if (retryable_status(res->status) && attempt < params.max_retries) {
                std::this_thread::sleep_for(jittered_delay(options_, attempt));
                ++attempt;
                continue;
            }
            throw ProviderError(ProviderErrorKind::http_status,
                                "HTTP " + std::to_string(res->status) + " from provider (body: " +
                                    body_excerpt(res->body) + ")");
        }

        // Transport-level failure. httplib reports a read that ran out of
        // time as Error::Read, so classify by elapsed wall time as well.
        const auto err = res.error();
        const bool timed_out =
            err == httplib::Error::ConnectionTimeout ||
            ((err == httplib::Error::Read || err == httplib::Error::Write) &&
             elapsed >= params.request_timeout);
        if (attempt < params.max_retries) {
            std::this_thread::sleep_for(jittered_delay(options_, attempt));
            ++attempt;
            continue;
        }
        if (timed_out) {
            throw ProviderError(ProviderErrorKind::timeout,
                                "request timed out after " +
                                    std::to_string(params.request_timeout.count()) + " ms (" +
                                    httplib::to_string(err) + ")");
        }
        throw ProviderError(ProviderErrorKind::transport,
                            "transport failure after " + std::to_string(attempt) +
                                " retries: " + httplib::to_string(err));
    }
}

}  // namespace verifact
