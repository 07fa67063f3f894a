#include <doctest.h>

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "verifact/cli_runtime.hpp"
#include "verifact/core.hpp"

using namespace verifact;
using namespace verifact::cli;

namespace {

namespace fs = std::filesystem;

const std::string kFixtures = VERIFACT_FIXTURES_DIR;

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("verifact_cli_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }

    static int& counter() {
        static int n = 0;
        return n;
    }
};

RunConfig two_task_config(const TempDir& dir) {
    RunConfig config;
    config.provider_kind = ProviderKind::mock;
    config.provider_script_path = kFixtures + "/two_task_script.json";
    config.method = Method::standard_cot;
    config.dataset_path = kFixtures + "/two_task_dataset.jsonl";
    config.out_path = dir.file("run.jsonl");
    return config;
}

std::string normalized_run_file(const std::string& path) {
    const RunFile file = load_run_file(path);
    std::string out;
    for (const auto& record : file.records) {
        out += run_record_line(strip_volatile_fields(record));
        out += '\n';
    }
    return out;
}

}  // namespace

TEST_CASE("cmd_run writes one record per task in task order") {
    TempDir dir;
    std::ostringstream out, err;
    const int rc = cmd_run(two_task_config(dir), out, err);
    CHECK(rc == kExitOk);
    const RunFile file = load_run_file(dir.file("run.jsonl"));
    REQUIRE(file.records.size() == 2);
    CHECK(file.records[0].task_id == "task-a");
    CHECK(file.records[1].task_id == "task-b");
    CHECK(out.str().find("2 task(s)") != std::string::npos);
}

TEST_CASE("rerunning with the same script gives identical files modulo timing") {
    TempDir dir;
    std::ostringstream sink;
    RunConfig config = two_task_config(dir);
    CHECK(cmd_run(config, sink, sink) == kExitOk);
    const std::string first = normalized_run_file(config.out_path);

    config.out_path = dir.file("run2.jsonl");
    CHECK(cmd_run(config, sink, sink) == kExitOk);
    const std::string second = normalized_run_file(config.out_path);
    CHECK(first == second);
}

TEST_CASE("cot_rag without a corpus is a config error before any call") {
    TempDir dir;
    std::ostringstream out, err;
    RunConfig config = two_task_config(dir);
    config.method = Method::cot_rag;
    const int rc = cmd_run(config, out, err);
    CHECK(rc == kExitConfig);
    CHECK(err.str().find("corpus") != std::string::npos);
    CHECK_FALSE(fs::exists(config.out_path));
}

TEST_CASE("an invalid dataset exits with the validation code before any call") {
    TempDir dir;
    {
        std::ofstream bad(dir.file("bad.jsonl"));
        bad << R"({"id": "t1", "task_type": "factual_qa", "query": "", "gold_facts": []})"
            << '\n';
    }
    std::ostringstream out, err;
    RunConfig config = two_task_config(dir);
    config.dataset_path = dir.file("bad.jsonl");
    const int rc = cmd_run(config, out, err);
    CHECK(rc == kExitValidation);
    CHECK(err.str().find("query") != std::string::npos);
    CHECK_FALSE(fs::exists(config.out_path));
}

TEST_CASE("ablation flags outside verifact are rejected") {
    TempDir dir;
    std::ostringstream out, err;
    RunConfig config = two_task_config(dir);
    config.ablation.skip_verification = true;
    CHECK(cmd_run(config, out, err) == kExitConfig);
}

TEST_CASE("a mock provider with an unscripted first call fails per-task, not the process") {
    TempDir dir;
    std::ostringstream out, err;
    RunConfig config = two_task_config(dir);
    // Wrong script for this dataset: no entry matches either prompt.
    config.dataset_path = kFixtures + "/spanish_succession_dataset.jsonl";
    const int rc = cmd_run(config, out, err);
    CHECK(rc == kExitOk);
    const RunFile file = load_run_file(config.out_path);
    REQUIRE(file.records.size() == 1);
    CHECK(file.records[0].failed_stage.has_value());
    CHECK(file.records[0].stages[0].error_kind == "unscripted_request");
}

TEST_CASE("an unreachable http provider fails fast with exit code 2") {
    TempDir dir;
    std::ostringstream out, err;
    RunConfig config = two_task_config(dir);
    config.provider_kind = ProviderKind::http;
    config.provider_base_url = "http://127.0.0.1:9";  // nothing listens here
    const int rc = cmd_run(config, out, err);
    CHECK(rc == kExitProvider);
    CHECK(err.str().find("provider unreachable") != std::string::npos);
}

TEST_CASE("an interrupted run resumes from the clean prefix") {
    TempDir dir;
    std::ostringstream sink;
    RunConfig config = two_task_config(dir);
    CHECK(cmd_run(config, sink, sink) == kExitOk);

    // Chop the file mid-way through the second record.
    const RunFile complete = load_run_file(config.out_path);
    REQUIRE(complete.records.size() == 2);
    const std::string full = [&] {
        std::ifstream in(config.out_path, std::ios::binary);
        std::ostringstream buf;
        buf << in.rdbuf();
        return buf.str();
    }();
    const std::size_t first_line_end = full.find('\n') + 1;
    fs::resize_file(config.out_path, first_line_end + 10);

    std::ostringstream out, err;
    CHECK(cmd_run(config, out, err) == kExitOk);
    const RunFile resumed = load_run_file(config.out_path);
    REQUIRE(resumed.records.size() == 2);
    CHECK_FALSE(resumed.truncated_tail);
    CHECK(resumed.records[0].task_id == "task-a");
    CHECK(resumed.records[1].task_id == "task-b");
    CHECK(out.str().find("1 already complete") != std::string::npos);
}

TEST_CASE("worker pools preserve task-id output order") {
    TempDir dir;
    std::ostringstream sink;
    RunConfig config = two_task_config(dir);
    config.worker_count = 4;
    CHECK(cmd_run(config, sink, sink) == kExitOk);
    const RunFile file = load_run_file(config.out_path);
    REQUIRE(file.records.size() == 2);
    CHECK(file.records[0].task_id == "task-a");
    CHECK(file.records[1].task_id == "task-b");
}

TEST_CASE("cmd_eval writes a report and renders the table") {
    TempDir dir;
    std::ostringstream sink;
    RunConfig config = two_task_config(dir);
    REQUIRE(cmd_run(config, sink, sink) == kExitOk);

    std::ostringstream out, err;
    const int rc = cmd_eval(config.out_path, config.dataset_path, 0.6,
                            dir.file("report.json"), eval::ReportFormat::plain_table, out, err);
    CHECK(rc == kExitOk);
    CHECK(out.str().find("Task Type | Method") != std::string::npos);
    CHECK(out.str().find("Standard CoT") != std::string::npos);

    std::ifstream in(dir.file("report.json"));
    REQUIRE(in.good());
    const json report = json::parse(in);
    CHECK(report.at("per_task").size() == 2);
}

TEST_CASE("cmd_eval on the golden run reproduces the checked-in golden report") {
    TempDir dir;
    std::ostringstream out, err;
    const int rc = cmd_eval(kFixtures + "/golden_run.jsonl",
                            kFixtures + "/spanish_succession_dataset.jsonl", 0.6,
                            dir.file("report.json"), eval::ReportFormat::plain_table, out, err);
    REQUIRE(rc == kExitOk);

    auto slurp = [](const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        std::ostringstream buf;
        buf << in.rdbuf();
        return buf.str();
    };
    CHECK(slurp(dir.file("report.json")) == slurp(kFixtures + "/golden_report.json"));
    CHECK(out.str().find("Complex Factual QA | VeriFact-CoT | 100 | 0 | 1.00") !=
          std::string::npos);
}

TEST_CASE("cmd_eval on an empty run file warns and prints the header only") {
    TempDir dir;
    std::ofstream(dir.file("empty.jsonl")).close();
    std::ostringstream out, err;
    const int rc = cmd_eval(dir.file("empty.jsonl"), kFixtures + "/two_task_dataset.jsonl", 0.6,
                            dir.file("report.json"), eval::ReportFormat::plain_table, out, err);
    CHECK(rc == kExitOk);
    CHECK(err.str().find("warning") != std::string::npos);
    CHECK(out.str().find("Task Type") == 0);
}

TEST_CASE("cmd_eval rejects runs whose task id is missing from the dataset") {
    TempDir dir;
    std::ostringstream sink;
    RunConfig config = two_task_config(dir);
    REQUIRE(cmd_run(config, sink, sink) == kExitOk);

    std::ostringstream out, err;
    const int rc =
        cmd_eval(config.out_path, kFixtures + "/spanish_succession_dataset.jsonl", 0.6, "",
                 eval::ReportFormat::plain_table, out, err);
    CHECK(rc == kExitValidation);
    CHECK(err.str().find("task-a") != std::string::npos);
}

TEST_CASE("cmd_ablate renders one row per ablation variant") {
    TempDir dir;
    RunConfig config;
    config.provider_kind = ProviderKind::mock;
    config.provider_script_path = kFixtures + "/spanish_succession_script.json";
    config.method = Method::verifact;
    config.dataset_path = kFixtures + "/spanish_succession_dataset.jsonl";
    config.out_path = dir.file("ablate.jsonl");

    std::ostringstream out, err;
    const int rc = cmd_ablate(config, "", out, err);
    CHECK(rc == kExitOk);
    const std::string table = out.str();
    CHECK(table.find("Method Variant") != std::string::npos);
    CHECK(table.find("VeriFact-CoT w/o Claim Extraction") != std::string::npos);
    CHECK(table.find("VeriFact-CoT w/o Verification Simulation") != std::string::npos);
    CHECK(table.find("VeriFact-CoT w/o Refinement & Integration") != std::string::npos);
    CHECK(table.find("VeriFact-CoT (Full)") != std::string::npos);

    // One run file per variant, each with the stage count the law demands.
    const std::map<std::string, std::size_t> expected = {
        {"ablate.full.jsonl", 4},
        {"ablate.no-claim-extraction.jsonl", 3},
        {"ablate.no-verification.jsonl", 3},
        {"ablate.no-refinement.jsonl", 3},
    };
    for (const auto& [name, stages] : expected) {
        const RunFile file = load_run_file(dir.file(name));
        REQUIRE(file.records.size() == 1);
        CHECK(file.records[0].stages.size() == stages);
    }
}

TEST_CASE("cmd_ablate includes a baseline row when given a baseline run") {
    TempDir dir;
    std::ostringstream sink;

    RunConfig baseline = two_task_config(dir);
    baseline.provider_script_path = kFixtures + "/spanish_succession_script.json";
    baseline.dataset_path = kFixtures + "/spanish_succession_dataset.jsonl";
    baseline.out_path = dir.file("baseline.jsonl");
    REQUIRE(cmd_run(baseline, sink, sink) == kExitOk);

    RunConfig config = baseline;
    config.method = Method::verifact;
    config.out_path = dir.file("ablate.jsonl");
    std::ostringstream out, err;
    CHECK(cmd_ablate(config, baseline.out_path, out, err) == kExitOk);
    CHECK(out.str().find("Standard CoT (Baseline)") != std::string::npos);
}

TEST_CASE("cmd_report merges reports and rejects duplicate groups") {
    TempDir dir;
    std::ostringstream sink;

    auto write_report = [&](const std::string& name, const std::string& method_label,
                            const std::string& task_label) {
        EvalReport report;
        report.groups = {{method_label, task_label, 0.8, 0.1, 0.1, 0.9, 0.8, 0.85, 1}};
        std::ofstream out(dir.file(name));
        out << json(report).dump(2) << '\n';
    };
    write_report("r1.json", "Standard CoT", "Complex Factual QA");
    write_report("r2.json", "VeriFact-CoT", "Complex Factual QA");
    write_report("r3.json", "VeriFact-CoT", "Explanatory Content Generation");

    std::ostringstream out, err;
    const int rc = cmd_report({dir.file("r1.json"), dir.file("r2.json"), dir.file("r3.json")},
                              eval::ReportFormat::plain_table, out, err);
    CHECK(rc == kExitOk);
    CHECK(out.str().find("Standard CoT") != std::string::npos);
    CHECK(out.str().find("Explanatory Content Generation") != std::string::npos);

    std::ostringstream out2, err2;
    const int rc2 = cmd_report({dir.file("r2.json"), dir.file("r2.json")},
                               eval::ReportFormat::plain_table, out2, err2);
    CHECK(rc2 == kExitValidation);
    CHECK(err2.str().find("duplicate group") != std::string::npos);

    std::ostringstream out3, err3;
    CHECK(cmd_report({dir.file("r1.json")}, eval::ReportFormat::delimited, out3, err3) ==
          kExitOk);
    CHECK(out3.str().find('\t') != std::string::npos);
}

TEST_CASE("config serialization round-trips") {
    RunConfig config;
    config.provider_kind = ProviderKind::http;
    config.provider_base_url = "http://example.test/v1";
    config.provider_model = "a-model";
    config.provider_script_path = "/tmp/script.json";
    config.provider_temperature = 0.35;
    config.method = Method::verifact;
    config.ablation = {true, false, true};
    config.dataset_path = "/data/tasks.jsonl";
    config.corpus_path = "/data/corpus.jsonl";
    config.retriever_k = 7;
    config.matcher_threshold = 0.55;
    config.prompts_dir = "/prompts";
    config.out_path = "/out/run.jsonl";
    config.worker_count = 3;
    config.format = eval::ReportFormat::delimited;

    const RunConfig parsed = parse_config(serialize_config(config), "roundtrip");
    CHECK(parsed == config);
}

TEST_CASE("config parsing reports unknown keys with their line") {
    try {
        parse_config("method = verifact\nbogus_key = 1\n", "test.cfg");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("bogus_key") != std::string::npos);
    }
}

TEST_CASE("parse_ablate_flag understands the comma list") {
    const auto ablation = parse_ablate_flag("claim-extraction,refinement");
    CHECK(ablation.skip_claim_extraction);
    CHECK_FALSE(ablation.skip_verification);
    CHECK(ablation.skip_refinement);
    CHECK_THROWS_AS(parse_ablate_flag("everything"), ConfigError);
}
