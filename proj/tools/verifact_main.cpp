#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "verifact/cli_runtime.hpp"
#include "verifact/config.hpp"

namespace {

using namespace verifact;
using namespace verifact::cli;

struct CommonFlags {
    std::string config_path;
    std::string dataset;
    std::string corpus;
    std::string method;
    std::string ablate;
    std::string out_path;
    std::string prompts_dir;
    std::string format;
    double threshold = -1.0;
    int k = -1;
    int workers = -1;
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config_path, "Config file (key = value lines)");
    cmd->add_option("--dataset", flags.dataset, "Dataset file, one task per line");
    cmd->add_option("--corpus", flags.corpus, "Corpus file for the RAG baseline");
    cmd->add_option("--method", flags.method, "verifact | standard_cot | cot_rag");
    cmd->add_option("--ablate", flags.ablate,
                    "Comma list of claim-extraction|verification|refinement");
    cmd->add_option("--out", flags.out_path, "Output path");
    cmd->add_option("--prompts-dir", flags.prompts_dir, "Template override directory");
    cmd->add_option("--threshold", flags.threshold, "Gold matcher Jaccard threshold");
    cmd->add_option("--k", flags.k, "Retriever top-k");
    cmd->add_option("--workers", flags.workers, "Concurrent task workers");
    cmd->add_option("--format", flags.format, "plain-table | delimited");
}

// CLI flags override config-file values; the API key comes from the
// environment only.
RunConfig resolve_config(const CommonFlags& flags) {
    RunConfig config;
    if (!flags.config_path.empty()) config = parse_config_file(flags.config_path);
    if (!flags.dataset.empty()) config.dataset_path = flags.dataset;
    if (!flags.corpus.empty()) config.corpus_path = flags.corpus;
    if (!flags.method.empty()) config.method = method_from_string(flags.method);
    if (!flags.ablate.empty()) config.ablation = parse_ablate_flag(flags.ablate);
    if (!flags.out_path.empty()) config.out_path = flags.out_path;
    if (!flags.prompts_dir.empty()) config.prompts_dir = flags.prompts_dir;
    if (flags.threshold >= 0.0) config.matcher_threshold = flags.threshold;
    if (flags.k >= 0) config.retriever_k = flags.k;
    if (flags.workers >= 1) config.worker_count = flags.workers;
    if (!flags.format.empty()) {
        if (flags.format == "plain-table") config.format = eval::ReportFormat::plain_table;
        else if (flags.format == "delimited") config.format = eval::ReportFormat::delimited;
        else throw ConfigError("unknown format: '" + flags.format + "'");
    }
    return config;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"VeriFact-CoT: multi-stage self-verification pipeline for LLM factuality"};
    app.require_subcommand(1);

    CommonFlags run_flags;
    auto* run_cmd = app.add_subcommand("run", "Execute a method over a dataset");
    add_common_flags(run_cmd, run_flags);

    CommonFlags eval_flags;
    std::string eval_run_path, eval_report_path;
    auto* eval_cmd = app.add_subcommand("eval", "Score a run file against its dataset");
    add_common_flags(eval_cmd, eval_flags);
    eval_cmd->add_option("--run", eval_run_path, "Run file to score")->required();
    eval_cmd->add_option("--report", eval_report_path, "Report output path (JSON)");

    CommonFlags ablate_flags;
    std::string baseline_run;
    auto* ablate_cmd = app.add_subcommand("ablate", "Run and compare the ablation variants");
    add_common_flags(ablate_cmd, ablate_flags);
    ablate_cmd->add_option("--baseline", baseline_run,
                           "Run file evaluated as the Standard CoT baseline row");

    CommonFlags report_flags;
    std::vector<std::string> report_paths;
    auto* report_cmd = app.add_subcommand("report", "Merge report files into one table");
    add_common_flags(report_cmd, report_flags);
    report_cmd->add_option("--in", report_paths, "Report files to merge")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run_cmd->parsed()) {
            return cmd_run(resolve_config(run_flags), std::cout, std::cerr);
        }
        if (eval_cmd->parsed()) {
            const RunConfig config = resolve_config(eval_flags);
            if (config.dataset_path.empty()) throw ConfigError("eval requires --dataset");
            return cmd_eval(eval_run_path, config.dataset_path, config.matcher_threshold,
                            eval_report_path, config.format, std::cout, std::cerr);
        }
        if (ablate_cmd->parsed()) {
            return cmd_ablate(resolve_config(ablate_flags), baseline_run, std::cout, std::cerr);
        }
        if (report_cmd->parsed()) {
            const RunConfig config = resolve_config(report_flags);
            return cmd_report(report_paths, config.format, std::cout, std::cerr);
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    }
    return kExitOk;
}
