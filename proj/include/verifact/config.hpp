#pragma once

#include <string>

#include "verifact/core.hpp"
#include "verifact/evaluation.hpp"

namespace verifact::cli {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class ProviderKind { mock, http };

std::string to_string(ProviderKind kind);
ProviderKind provider_kind_from_string(const std::string& s);

struct RunConfig {
    ProviderKind provider_kind = ProviderKind::mock;
    std::string provider_base_url;
    std::string provider_model = "mock-model";
    std::string provider_script_path;
    double provider_temperature = 0.0;
    Method method = Method::verifact;
    AblationConfig ablation;
    std::string dataset_path;
    std::string corpus_path;
    int retriever_k = 3;
    double matcher_threshold = 0.6;
    std::string prompts_dir;
    std::string out_path;
    int worker_count = 1;
    eval::ReportFormat format = eval::ReportFormat::plain_table;

    bool operator==(const RunConfig&) const = default;
};

/// Parses the key-value config format ("key = value" lines, '#' comments).
RunConfig parse_config(const std::string& content, const std::string& origin);
RunConfig parse_config_file(const std::string& path);

/// Canonical serialization; parse_config(serialize_config(c)) == c.
std::string serialize_config(const RunConfig& config);

/// Cross-field invariants: cot_rag requires a corpus, ablation flags are
/// only legal with the verifact method, mock needs a script, http a URL.
void validate_config(const RunConfig& config);

/// Parses the --ablate flag value: comma list drawn from
/// {claim-extraction, verification, refinement}.
AblationConfig parse_ablate_flag(const std::string& value);

}  // namespace verifact::cli
