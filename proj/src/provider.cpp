#include "verifact/provider.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace verifact {

std::string to_string(Role role) {
    switch (role) {
        case Role::system: return "system";
        case Role::user: return "user";
        case Role::assistant: return "assistant";
    }
    return "user";
}

Role role_from_string(const std::string& s) {
    if (s == "system") return Role::system;
    if (s == "user") return Role::user;
    if (s == "assistant") return Role::assistant;
    throw IoError("unknown role: '" + s + "'");
}

std::string to_string(ProviderErrorKind kind) {
    switch (kind) {
        case ProviderErrorKind::transport: return "transport";
        case ProviderErrorKind::http_status: return "http_status";
        case ProviderErrorKind::timeout: return "timeout";
        case ProviderErrorKind::malformed_response: return "malformed_response";
        case ProviderErrorKind::unscripted_request: return "unscripted_request";
        case ProviderErrorKind::ambiguous_script: return "ambiguous_script";
    }
    return "transport";
}

// ---------------------------------------------------------------------------
// ScriptedProvider
// ---------------------------------------------------------------------------

ScriptedProvider::ScriptedProvider(std::vector<ScriptedResponse> script)
    : script_(std::move(script)) {}

CompletionResult ScriptedProvider::complete(const std::vector<ChatMessage>& messages,
                                            const CompletionParams& params,
                                            const std::string& stage_tag) {
    (void)params;
    std::string prompt;
    for (const auto& m : messages) {
        prompt += m.content;
        prompt += '\n';
    }

    std::lock_guard<std::mutex> lock(mutex_);
    const int occurrence = ++occurrences_[stage_tag];

    const ScriptedResponse* match = nullptr;
    for (const auto& entry : script_) {
        bool hits = false;
        if (entry.stage_key) {
            hits = entry.stage_key->first == stage_tag && entry.stage_key->second == occurrence;
        } else if (entry.contains) {
            hits = prompt.find(*entry.contains) != std::string::npos;
        }
        if (!hits) continue;
        if (match != nullptr) {
            throw ProviderError(ProviderErrorKind::ambiguous_script,
                                "ambiguous script: more than one entry matches stage '" +
                                    stage_tag + "' occurrence " + std::to_string(occurrence));
        }
        match = &entry;
    }
    if (match == nullptr) {
        throw ProviderError(ProviderErrorKind::unscripted_request,
                            "unscripted request for stage '" + stage_tag + "' (occurrence " +
                                std::to_string(occurrence) + ")");
    }

    CompletionResult result;
    result.text = match->response_text;
    // Deterministic pseudo-usage so identical runs stay byte-identical.
    result.usage.prompt_tokens = static_cast<std::int64_t>(prompt.size() / 4);
    result.usage.completion_tokens = static_cast<std::int64_t>(result.text.size() / 4);
    return result;
}

std::vector<ScriptedResponse> parse_script(const std::string& content,
                                           const std::string& origin) {
    json root;
    try {
        root = json::parse(content);
    } catch (const json::parse_error& e) {
        // nlohmann reports "at line L, column C" in the message.
        throw ScriptError(origin + ": " + e.what());
    }
    if (!root.is_array()) {
        throw ScriptError(origin + ": script must be a JSON array of entries");
    }

    std::vector<ScriptedResponse> script;
    std::set<std::pair<std::string, int>> seen_stage_keys;
    std::set<std::string> seen_substrings;
    int index = 0;
    for (const auto& item : root) {
        ++index;
        const std::string where = origin + ": entry " + std::to_string(index);
        if (!item.is_object() || !item.contains("response")) {
            throw ScriptError(where + ": missing \"response\" field");
        }
        ScriptedResponse entry;
        entry.response_text = item.at("response").get<std::string>();

        const bool has_stage = item.contains("stage_tag");
        const bool has_contains = item.contains("contains");
        if (has_stage == has_contains) {
            throw ScriptError(where +
                              ": exactly one of \"stage_tag\" or \"contains\" is required");
        }
        if (has_stage) {
            const auto tag = item.at("stage_tag").get<std::string>();
            const int occurrence = item.value("occurrence", 1);
            if (occurrence < 1) {
                throw ScriptError(where + ": occurrence must be >= 1");
            }
            if (!seen_stage_keys.insert({tag, occurrence}).second) {
                throw ScriptError(where + ": duplicate match key (" + tag + ", " +
                                  std::to_string(occurrence) + ")");
            }
            entry.stage_key = {tag, occurrence};
        } else {
            const auto needle = item.at("contains").get<std::string>();
            if (needle.empty()) {
                throw ScriptError(where + ": \"contains\" must be nonempty");
            }
            if (!seen_substrings.insert(needle).second) {
                throw ScriptError(where + ": duplicate match key \"" + needle + "\"");
            }
            entry.contains = needle;
        }
        script.push_back(std::move(entry));
    }
    return script;
}

std::unique_ptr<ScriptedProvider> load_script(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ScriptError("cannot open script: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return std::make_unique<ScriptedProvider>(parse_script(buf.str(), path));
}

}  // namespace verifact
