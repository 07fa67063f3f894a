#pragma once

#include <chrono>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "verifact/core.hpp"

namespace verifact {

enum class Role { system, user, assistant };

std::string to_string(Role role);
Role role_from_string(const std::string& s);

struct ChatMessage {
    Role role = Role::user;
    std::string content;

    bool operator==(const ChatMessage&) const = default;
};

struct CompletionParams {
    std::string model_name = "mock-model";
    double temperature = 0.0;
    int max_output_tokens = 2048;
    std::chrono::milliseconds request_timeout{30000};
    int max_retries = 2;
};

struct CompletionResult {
    std::string text;
    TokenUsage usage;
    int retry_count = 0;  // transport retries before the returned attempt
};

enum class ProviderErrorKind {
    transport,            // connection-level failure after retries
    http_status,          // non-success HTTP status after retries
    timeout,              // request exceeded its time budget
    malformed_response,   // body did not carry the expected envelope
    unscripted_request,   // mock: no script entry matched
    ambiguous_script,     // mock: more than one script entry matched
};

std::string to_string(ProviderErrorKind kind);

class ProviderError : public std::runtime_error {
public:
    ProviderError(ProviderErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ProviderErrorKind kind() const { return kind_; }

private:
    ProviderErrorKind kind_;
};

/// Uniform chat-completion interface every pipeline stage runs over.
/// Implementations must be safely callable from concurrent workers.
/// `stage_tag` is a routing hint: the scripted mock keys on it, the HTTP
/// client ignores it.
class Provider {
public:
    virtual ~Provider() = default;
    virtual CompletionResult complete(const std::vector<ChatMessage>& messages,
                                      const CompletionParams& params,
                                      const std::string& stage_tag) = 0;
};

// ---------------------------------------------------------------------------
// Scripted mock provider
// ---------------------------------------------------------------------------

/// One script entry. Exactly one of the two match keys is set: either
/// (stage_tag, occurrence) — the occurrence being the 1-based count of
/// requests with that tag — or a literal substring of the rendered prompt.
struct ScriptedResponse {
    std::optional<std::pair<std::string, int>> stage_key;
    std::optional<std::string> contains;
    std::string response_text;

    bool operator==(const ScriptedResponse&) const = default;
};

class ScriptError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ScriptedProvider : public Provider {
public:
    explicit ScriptedProvider(std::vector<ScriptedResponse> script);

    CompletionResult complete(const std::vector<ChatMessage>& messages,
                              const CompletionParams& params,
                              const std::string& stage_tag) override;

private:
    std::vector<ScriptedResponse> script_;
    std::map<std::string, int> occurrences_;
    std::mutex mutex_;
};

/// Checks that match keys are unambiguous at load time (duplicate keys
/// rejected); substring collisions are detected per request.
std::vector<ScriptedResponse> parse_script(const std::string& content,
                                           const std::string& origin);

/// Loads a script file (JSON array, see docs/formats.md) into a provider;
/// deterministic across runs.
std::unique_ptr<ScriptedProvider> load_script(const std::string& path);

// ---------------------------------------------------------------------------
// HTTP provider
// ---------------------------------------------------------------------------

struct HttpProviderOptions {
    std::string base_url;                         // e.g. http://localhost:8080/v1
    std::string completions_path = "/chat/completions";
    std::string api_key;                          // bearer token; falls back to
                                                  // VERIFACT_API_KEY when empty
    std::chrono::milliseconds initial_backoff{500};
    double backoff_factor = 2.0;
    double jitter = 0.2;                          // +-20% around each delay
};

/// Speaks the prevailing chat-completion wire shape: the request carries
/// {model, messages, temperature, max_tokens}; the response carries
/// choices[0].message.content plus a usage object. Transient failures
/// (transport errors, timeouts, HTTP 408/429/5xx) are retried up to
/// params.max_retries with exponential backoff.
class HttpProvider : public Provider {
public:
    explicit HttpProvider(HttpProviderOptions options);

    CompletionResult complete(const std::vector<ChatMessage>& messages,
                              const CompletionParams& params,
                              const std::string& stage_tag) override;

private:
    HttpProviderOptions options_;
};

}  // namespace verifact
