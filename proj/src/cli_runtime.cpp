#include "verifact/cli_runtime.hpp"

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include "verifact/evaluation.hpp"
#include "verifact/pipeline.hpp"
#include "verifact/prompting.hpp"
#include "verifact/provider.hpp"
#include "verifact/retrieval.hpp"

namespace verifact::cli {

namespace {

namespace fs = std::filesystem;

std::unique_ptr<Provider> build_provider(const RunConfig& config) {
    if (config.provider_kind == ProviderKind::mock) {
        return load_script(config.provider_script_path);
    }
    HttpProviderOptions options;
    options.base_url = config.provider_base_url;
    return std::make_unique<HttpProvider>(options);
}

CompletionParams completion_params(const RunConfig& config) {
    CompletionParams params;
    params.model_name = config.provider_model;
    params.temperature = config.provider_temperature;
    return params;
}

prompts::TemplateMap resolve_templates(const RunConfig& config) {
    if (config.prompts_dir.empty()) return prompts::default_templates();
    return prompts::load_template_dir(config.prompts_dir);
}

// Appends records to the run file in task order regardless of completion
// order; each line is flushed as soon as its prefix is complete.
class OrderedWriter {
public:
    OrderedWriter(std::ofstream out, std::size_t slots)
        : out_(std::move(out)), lines_(slots) {}

    void deliver(std::size_t index, std::string line) {
        std::lock_guard<std::mutex> lock(mutex_);
        lines_[index] = std::move(line);
        while (next_ < lines_.size() && lines_[next_].has_value()) {
            out_ << *lines_[next_] << '\n';
            out_.flush();
            ++next_;
        }
    }

private:
    std::ofstream out_;
    std::vector<std::optional<std::string>> lines_;
    std::size_t next_ = 0;
    std::mutex mutex_;
};

bool provider_unreachable(const RunRecord& record) {
    if (record.stages.empty()) return false;
    const auto& kind = record.stages.front().error_kind;
    return !record.stages.front().ok &&
           (kind == "transport" || kind == "timeout" || kind == "http_status");
}

RunRecord execute_task(pipeline::PipelineContext& ctx, const RunConfig& config,
                       const TaskInstance& task, const retrieval::CorpusIndex& index) {
    switch (config.method) {
        case Method::verifact:
            return pipeline::run_verifact(ctx, task, config.ablation);
        case Method::standard_cot:
            return pipeline::run_standard_cot(ctx, task);
        case Method::cot_rag:
            return pipeline::run_cot_rag(ctx, task, index, config.retriever_k);
    }
    return pipeline::run_verifact(ctx, task, config.ablation);
}

struct VariantSpec {
    std::string label;
    std::string suffix;
    AblationConfig ablation;
};

fs::path variant_path(const std::string& out_path, const std::string& suffix) {
    fs::path base(out_path);
    const std::string ext = base.extension().string();
    fs::path stem = base;
    stem.replace_extension();
    return stem.string() + "." + suffix + ext;
}

std::vector<MetricRow> score_run_file(const std::string& run_path,
                                      const std::map<std::string, TaskInstance>& tasks,
                                      double threshold, std::ostream& err) {
    const RunFile run_file = load_run_file(run_path);
    if (run_file.truncated_tail) {
        err << "warning: " << run_path << " ends in a partial line; ignoring it\n";
    }
    std::vector<MetricRow> rows;
    for (const auto& record : run_file.records) {
        const auto it = tasks.find(record.task_id);
        if (it == tasks.end()) {
            throw IoError("run references unknown task id '" + record.task_id + "'");
        }
        if (!record.final_output) {
            err << "warning: task '" << record.task_id << "' failed at stage "
                << record.failed_stage.value_or("?") << "; skipping row\n";
            continue;
        }
        rows.push_back(eval::score_run(record, it->second, threshold));
    }
    std::stable_sort(rows.begin(), rows.end(),
                     [](const MetricRow& a, const MetricRow& b) { return a.task_id < b.task_id; });
    return rows;
}

int run_over_dataset(const RunConfig& config, std::ostream& out, std::ostream& err) {
    auto tasks = load_dataset(config.dataset_path);
    const auto errors = validate_dataset(tasks);
    if (!errors.empty()) {
        for (const auto& e : errors) {
            err << "validation error: task '" << e.task_id << "' field '" << e.field
                << "': " << e.message << '\n';
        }
        return kExitValidation;
    }
    std::sort(tasks.begin(), tasks.end(),
              [](const TaskInstance& a, const TaskInstance& b) { return a.id < b.id; });

    // Resume: keep complete records from an interrupted run, drop a partial
    // trailing line, and execute only the tasks not yet recorded.
    std::set<std::string> done;
    if (fs::exists(config.out_path)) {
        const RunFile existing = load_run_file(config.out_path);
        for (const auto& record : existing.records) done.insert(record.task_id);
        if (existing.truncated_tail) {
            fs::resize_file(config.out_path, existing.clean_prefix_bytes);
            err << "warning: truncated partial line at end of " << config.out_path << '\n';
        }
    }
    std::vector<const TaskInstance*> pending;
    for (const auto& task : tasks) {
        if (!done.count(task.id)) pending.push_back(&task);
    }

    retrieval::CorpusIndex index;
    if (config.method == Method::cot_rag) {
        index = retrieval::index_corpus(load_corpus_file(config.corpus_path));
    }

    auto provider = build_provider(config);
    const auto templates = resolve_templates(config);
    const auto params = completion_params(config);

    std::ofstream file(config.out_path, std::ios::app);
    if (!file) throw IoError("cannot open run file for append: " + config.out_path);
    OrderedWriter writer(std::move(file), pending.size());

    std::atomic<int> failed{0};
    auto run_one = [&](const TaskInstance& task) {
        pipeline::PipelineContext ctx{*provider, templates, params};
        RunRecord record;
        try {
            record = execute_task(ctx, config, task, index);
        } catch (const std::exception& e) {
            record.task_id = task.id;
            record.method = config.method;
            record.ablation = config.ablation;
            record.failed_stage = "internal";
            err << "error: task '" << task.id << "': " << e.what() << '\n';
        }
        if (record.failed_stage) ++failed;
        return record;
    };

    std::size_t written = 0;
    if (!pending.empty()) {
        // The first task runs synchronously so an unreachable provider fails
        // fast instead of burning the whole dataset.
        RunRecord first = run_one(*pending.front());
        if (provider_unreachable(first)) {
            err << "provider unreachable: " << first.stages.front().error_message << '\n';
            return kExitProvider;
        }
        writer.deliver(0, run_record_line(first));
        ++written;

        const std::size_t rest = pending.size() - 1;
        if (rest > 0) {
            const int workers = std::min<int>(config.worker_count, static_cast<int>(rest));
            std::atomic<std::size_t> next{1};
            auto worker = [&]() {
                while (true) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= pending.size()) break;
                    writer.deliver(i, run_record_line(run_one(*pending[i])));
                }
            };
            std::vector<std::thread> threads;
            for (int t = 0; t < workers; ++t) threads.emplace_back(worker);
            for (auto& t : threads) t.join();
            written += rest;
        }
    }

    out << "ran " << written << " task(s) (" << done.size() << " already complete), "
        << (written - static_cast<std::size_t>(failed.load())) << " ok, " << failed.load()
        << " with stage failures -> " << config.out_path << '\n';
    return kExitOk;
}

}  // namespace

int cmd_run(const RunConfig& config, std::ostream& out, std::ostream& err) {
    try {
        validate_config(config);
        if (config.dataset_path.empty()) throw ConfigError("run requires a dataset path");
        if (config.out_path.empty()) throw ConfigError("run requires an output path");
        return run_over_dataset(config, out, err);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const ScriptError& e) {
        err << "script error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const IoError& e) {
        err << "io error: " << e.what() << '\n';
        return kExitConfig;
    }
}

int cmd_eval(const std::string& run_path, const std::string& dataset_path, double threshold,
             const std::string& report_path, eval::ReportFormat format, std::ostream& out,
             std::ostream& err) {
    try {
        const auto dataset = load_dataset(dataset_path);
        std::map<std::string, TaskInstance> tasks;
        for (const auto& task : dataset) tasks[task.id] = task;

        std::vector<MetricRow> rows;
        try {
            rows = score_run_file(run_path, tasks, threshold, err);
        } catch (const IoError& e) {
            err << "validation error: " << e.what() << '\n';
            return kExitValidation;
        }
        if (rows.empty()) {
            err << "warning: no scorable runs in " << run_path << '\n';
        }

        const EvalReport report = eval::aggregate(rows);
        if (!report_path.empty()) {
            std::ofstream file(report_path);
            if (!file) throw IoError("cannot write report: " + report_path);
            file << json(report).dump(2) << '\n';
        }
        out << eval::render_report(report, format);
        return kExitOk;
    } catch (const IoError& e) {
        err << "io error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const eval::EvalError& e) {
        err << "validation error: " << e.what() << '\n';
        return kExitValidation;
    }
}

int cmd_ablate(const RunConfig& config, const std::string& baseline_run_path, std::ostream& out,
               std::ostream& err) {
    if (config.method != Method::verifact) {
        err << "config error: ablate requires method=verifact\n";
        return kExitConfig;
    }

    const std::vector<VariantSpec> variants = {
        {"VeriFact-CoT w/o Claim Extraction", "no-claim-extraction", {true, false, false}},
        {"VeriFact-CoT w/o Verification Simulation", "no-verification", {false, true, false}},
        {"VeriFact-CoT w/o Refinement & Integration", "no-refinement", {false, false, true}},
        {"VeriFact-CoT (Full)", "full", {false, false, false}},
    };

    std::vector<std::pair<std::string, GroupRow>> table;
    try {
        std::map<std::string, TaskInstance> tasks;
        for (const auto& task : load_dataset(config.dataset_path)) tasks[task.id] = task;

        if (!baseline_run_path.empty()) {
            const auto rows = score_run_file(baseline_run_path, tasks, config.matcher_threshold,
                                             err);
            const auto report = eval::aggregate(rows);
            if (report.grand) table.emplace_back("Standard CoT (Baseline)", *report.grand);
        }

        for (const auto& variant : variants) {
            RunConfig variant_config = config;
            variant_config.ablation = variant.ablation;
            variant_config.out_path = variant_path(config.out_path, variant.suffix).string();
            std::error_code ec;
            fs::remove(variant_config.out_path, ec);

            const int rc = cmd_run(variant_config, out, err);
            if (rc != kExitOk) return rc;

            const auto rows =
                score_run_file(variant_config.out_path, tasks, config.matcher_threshold, err);
            const auto report = eval::aggregate(rows);
            if (report.grand) table.emplace_back(variant.label, *report.grand);
        }
    } catch (const IoError& e) {
        err << "io error: " << e.what() << '\n';
        return kExitConfig;
    }

    out << eval::render_ablation_table(table, config.format);
    return kExitOk;
}

int cmd_report(const std::vector<std::string>& report_paths, eval::ReportFormat format,
               std::ostream& out, std::ostream& err) {
    try {
        EvalReport merged;
        std::set<std::pair<std::string, std::string>> seen;
        for (const auto& path : report_paths) {
            std::ifstream in(path);
            if (!in) throw IoError("cannot open report: " + path);
            json j = json::parse(in, nullptr, true);
            const EvalReport report = j.get<EvalReport>();
            for (const auto& group : report.groups) {
                if (!seen.insert({group.method_label, group.task_type_label}).second) {
                    err << "conflict: duplicate group (" << group.method_label << ", "
                        << group.task_type_label << ") across reports\n";
                    return kExitValidation;
                }
                merged.groups.push_back(group);
            }
            merged.per_task.insert(merged.per_task.end(), report.per_task.begin(),
                                   report.per_task.end());
        }
        std::stable_sort(merged.groups.begin(), merged.groups.end(),
                         [](const GroupRow& a, const GroupRow& b) {
                             if (a.task_type_label != b.task_type_label) {
                                 return a.task_type_label < b.task_type_label;
                             }
                             return a.method_label < b.method_label;
                         });
        out << eval::render_report(merged, format);
        return kExitOk;
    } catch (const std::exception& e) {
        err << "io error: " << e.what() << '\n';
        return kExitConfig;
    }
}

}  // namespace verifact::cli
