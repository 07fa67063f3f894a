#include "verifact/config.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace verifact::cli {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

// Shortest decimal form that parses back to the same double.
std::string format_double(double value) {
    char buf[64];
    for (int precision = 1; precision <= 17; ++precision) {
        std::snprintf(buf, sizeof(buf), "%.*g", precision, value);
        if (std::stod(buf) == value) break;
    }
    return buf;
}

}  // namespace

std::string to_string(ProviderKind kind) {
    return kind == ProviderKind::mock ? "mock" : "http";
}

ProviderKind provider_kind_from_string(const std::string& s) {
    if (s == "mock") return ProviderKind::mock;
    if (s == "http") return ProviderKind::http;
    throw ConfigError("unknown provider.kind: '" + s + "' (expected mock or http)");
}

RunConfig parse_config(const std::string& content, const std::string& origin) {
    RunConfig config;
    std::istringstream in(content);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#') continue;
        const std::size_t eq = stripped.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(origin + ":" + std::to_string(line_no) +
                              ": expected 'key = value', got: " + stripped);
        }
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        try {
            if (key == "provider.kind") config.provider_kind = provider_kind_from_string(value);
            else if (key == "provider.base_url") config.provider_base_url = value;
            else if (key == "provider.model") config.provider_model = value;
            else if (key == "provider.script_path") config.provider_script_path = value;
            else if (key == "provider.temperature") config.provider_temperature = std::stod(value);
            else if (key == "method") config.method = method_from_string(value);
            else if (key == "ablate") config.ablation = parse_ablate_flag(value);
            else if (key == "dataset") config.dataset_path = value;
            else if (key == "corpus") config.corpus_path = value;
            else if (key == "k") config.retriever_k = std::stoi(value);
            else if (key == "threshold") config.matcher_threshold = std::stod(value);
            else if (key == "prompts.dir") config.prompts_dir = value;
            else if (key == "out") config.out_path = value;
            else if (key == "workers") config.worker_count = std::stoi(value);
            else if (key == "format") {
                if (value == "plain-table") config.format = eval::ReportFormat::plain_table;
                else if (value == "delimited") config.format = eval::ReportFormat::delimited;
                else throw ConfigError("unknown format: '" + value + "'");
            } else {
                throw ConfigError("unknown config key: '" + key + "'");
            }
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception& e) {
            throw ConfigError(origin + ":" + std::to_string(line_no) + ": bad value for '" +
                              key + "': " + e.what());
        }
    }
    return config;
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path);
}

std::string serialize_config(const RunConfig& config) {
    std::ostringstream out;
    out << "provider.kind = " << to_string(config.provider_kind) << '\n';
    out << "provider.base_url = " << config.provider_base_url << '\n';
    out << "provider.model = " << config.provider_model << '\n';
    out << "provider.script_path = " << config.provider_script_path << '\n';
    out << "provider.temperature = " << format_double(config.provider_temperature) << '\n';
    out << "method = " << to_string(config.method) << '\n';
    std::string ablate;
    if (config.ablation.skip_claim_extraction) ablate += "claim-extraction";
    if (config.ablation.skip_verification) ablate += (ablate.empty() ? "" : ",") + std::string("verification");
    if (config.ablation.skip_refinement) ablate += (ablate.empty() ? "" : ",") + std::string("refinement");
    out << "ablate = " << ablate << '\n';
    out << "dataset = " << config.dataset_path << '\n';
    out << "corpus = " << config.corpus_path << '\n';
    out << "k = " << config.retriever_k << '\n';
    out << "threshold = " << format_double(config.matcher_threshold) << '\n';
    out << "prompts.dir = " << config.prompts_dir << '\n';
    out << "out = " << config.out_path << '\n';
    out << "workers = " << config.worker_count << '\n';
    out << "format = "
        << (config.format == eval::ReportFormat::plain_table ? "plain-table" : "delimited")
        << '\n';
    return out.str();
}

void validate_config(const RunConfig& config) {
    if (config.method == Method::cot_rag && config.corpus_path.empty()) {
        throw ConfigError("method=cot_rag requires a corpus path");
    }
    if (config.ablation.any() && config.method != Method::verifact) {
        throw ConfigError("ablation flags are only legal with method=verifact");
    }
    if (config.provider_kind == ProviderKind::mock && config.provider_script_path.empty()) {
        throw ConfigError("provider.kind=mock requires provider.script_path");
    }
    if (config.provider_kind == ProviderKind::http && config.provider_base_url.empty()) {
        throw ConfigError("provider.kind=http requires provider.base_url");
    }
    if (config.worker_count < 1) {
        throw ConfigError("workers must be >= 1");
    }
    if (config.matcher_threshold <= 0.0 || config.matcher_threshold > 1.0) {
        throw ConfigError("threshold must be in (0, 1]");
    }
    if (config.retriever_k < 0) {
        throw ConfigError("k must be >= 0");
    }
}

AblationConfig parse_ablate_flag(const std::string& value) {
    AblationConfig ablation;
    std::istringstream in(value);
    std::string item;
    while (std::getline(in, item, ',')) {
        const std::string name = trim(item);
        if (name.empty()) continue;
        if (name == "claim-extraction") ablation.skip_claim_extraction = true;
        else if (name == "verification") ablation.skip_verification = true;
        else if (name == "refinement") ablation.skip_refinement = true;
        else {
            throw ConfigError("unknown ablation stage: '" + name +
                              "' (expected claim-extraction, verification, refinement)");
        }
    }
    return ablation;
}

}  // namespace verifact::cli
