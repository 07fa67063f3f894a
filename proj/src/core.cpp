#include "verifact/core.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

namespace verifact {

namespace {

template <typename E>
[[noreturn]] void throw_bad_enum(const char* what, const std::string& s) {
    throw IoError(std::string("unknown ") + what + " value: '" + s + "'");
}

}  // namespace

// ---------------------------------------------------------------------------
// Enum string mappings
// ---------------------------------------------------------------------------

std::string to_string(TaskType v) {
    switch (v) {
        case TaskType::factual_qa: return "factual_qa";
        case TaskType::summarization_cited: return "summarization_cited";
        case TaskType::explanatory: return "explanatory";
        case TaskType::controversial: return "controversial";
    }
    return "factual_qa";
}

TaskType task_type_from_string(const std::string& s) {
    if (s == "factual_qa") return TaskType::factual_qa;
    if (s == "summarization_cited") return TaskType::summarization_cited;
    if (s == "explanatory") return TaskType::explanatory;
    if (s == "controversial") return TaskType::controversial;
    throw_bad_enum<TaskType>("task_type", s);
}

std::string to_string(FactLabel v) {
    switch (v) {
        case FactLabel::supported: return "supported";
        case FactLabel::refuted: return "refuted";
        case FactLabel::neutral: return "neutral";
    }
    return "neutral";
}

FactLabel fact_label_from_string(const std::string& s) {
    if (s == "supported") return FactLabel::supported;
    if (s == "refuted") return FactLabel::refuted;
    if (s == "neutral") return FactLabel::neutral;
    throw_bad_enum<FactLabel>("label", s);
}

std::string to_string(Stage v) {
    return v == Stage::initial ? "initial" : "final";
}

Stage stage_from_string(const std::string& s) {
    if (s == "initial") return Stage::initial;
    if (s == "final") return Stage::final;
    throw_bad_enum<Stage>("stage", s);
}

std::string to_string(ClaimOrigin v) {
    return v == ClaimOrigin::chain ? "chain" : "answer";
}

ClaimOrigin claim_origin_from_string(const std::string& s) {
    if (s == "chain") return ClaimOrigin::chain;
    if (s == "answer") return ClaimOrigin::answer;
    throw_bad_enum<ClaimOrigin>("origin", s);
}

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::confirmed: return "confirmed";
        case Verdict::refuted: return "refuted";
        case Verdict::needs_context: return "needs_context";
        case Verdict::alternative: return "alternative";
    }
    return "needs_context";
}

Verdict verdict_from_string(const std::string& s) {
    if (s == "confirmed") return Verdict::confirmed;
    if (s == "refuted") return Verdict::refuted;
    if (s == "needs_context") return Verdict::needs_context;
    if (s == "alternative") return Verdict::alternative;
    throw_bad_enum<Verdict>("verdict", s);
}

std::string to_string(Method v) {
    switch (v) {
        case Method::verifact: return "verifact";
        case Method::standard_cot: return "standard_cot";
        case Method::cot_rag: return "cot_rag";
    }
    return "verifact";
}

Method method_from_string(const std::string& s) {
    if (s == "verifact") return Method::verifact;
    if (s == "standard_cot") return Method::standard_cot;
    if (s == "cot_rag") return Method::cot_rag;
    throw_bad_enum<Method>("method", s);
}

std::string to_string(StageTag v) {
    switch (v) {
        case StageTag::initial_cot: return "initial_cot";
        case StageTag::claim_extract: return "claim_extract";
        case StageTag::verify_simulate: return "verify_simulate";
        case StageTag::refine_integrate: return "refine_integrate";
        case StageTag::standard_cot: return "standard_cot";
        case StageTag::rag_cot: return "rag_cot";
    }
    return "initial_cot";
}

StageTag stage_tag_from_string(const std::string& s) {
    if (s == "initial_cot") return StageTag::initial_cot;
    if (s == "claim_extract") return StageTag::claim_extract;
    if (s == "verify_simulate") return StageTag::verify_simulate;
    if (s == "refine_integrate") return StageTag::refine_integrate;
    if (s == "standard_cot") return StageTag::standard_cot;
    if (s == "rag_cot") return StageTag::rag_cot;
    throw_bad_enum<StageTag>("stage_tag", s);
}

std::string method_label(Method m) {
    switch (m) {
        case Method::verifact: return "VeriFact-CoT";
        case Method::standard_cot: return "Standard CoT";
        case Method::cot_rag: return "CoT + Basic RAG";
    }
    return "VeriFact-CoT";
}

std::string task_type_label(TaskType t) {
    switch (t) {
        case TaskType::factual_qa: return "Complex Factual QA";
        case TaskType::summarization_cited: return "Summarization with Citations";
        case TaskType::explanatory: return "Explanatory Content Generation";
        case TaskType::controversial: return "Controversial Topic Analysis";
    }
    return "Complex Factual QA";
}

// ---------------------------------------------------------------------------
// JSON serialization
// ---------------------------------------------------------------------------

void to_json(json& j, const SourceDocument& v) {
    j = json{{"doc_id", v.doc_id}, {"text", v.text}};
}

void from_json(const json& j, SourceDocument& v) {
    j.at("doc_id").get_to(v.doc_id);
    j.at("text").get_to(v.text);
}

void to_json(json& j, const GoldFact& v) {
    j = json{{"fact_id", v.fact_id},
             {"statement", v.statement},
             {"label", to_string(v.label)},
             {"allowed_sources", v.allowed_sources},
             {"requires_citation", v.requires_citation}};
}

void from_json(const json& j, GoldFact& v) {
    j.at("fact_id").get_to(v.fact_id);
    j.at("statement").get_to(v.statement);
    v.label = fact_label_from_string(j.at("label").get<std::string>());
    v.allowed_sources = j.value("allowed_sources", std::vector<std::string>{});
    v.requires_citation = j.value("requires_citation", false);
}

void to_json(json& j, const TaskInstance& v) {
    j = json{{"id", v.id},
             {"task_type", to_string(v.task_type)},
             {"query", v.query},
             {"source_documents", v.source_documents},
             {"gold_facts", v.gold_facts}};
}

void from_json(const json& j, TaskInstance& v) {
    j.at("id").get_to(v.id);
    v.task_type = task_type_from_string(j.at("task_type").get<std::string>());
    j.at("query").get_to(v.query);
    v.source_documents = j.value("source_documents", std::vector<SourceDocument>{});
    v.gold_facts = j.value("gold_facts", std::vector<GoldFact>{});
}

void to_json(json& j, const ReasoningTrace& v) {
    j = json{{"steps", v.steps}, {"raw", v.raw}, {"stage", to_string(v.stage)}};
}

void from_json(const json& j, ReasoningTrace& v) {
    j.at("steps").get_to(v.steps);
    j.at("raw").get_to(v.raw);
    v.stage = stage_from_string(j.at("stage").get<std::string>());
}

void to_json(json& j, const CitationMarker& v) {
    j = json{{"marker_index", v.marker_index}, {"source_ref", v.source_ref}};
}

void from_json(const json& j, CitationMarker& v) {
    j.at("marker_index").get_to(v.marker_index);
    j.at("source_ref").get_to(v.source_ref);
}

void to_json(json& j, const CitedAnswer& v) {
    j = json{{"text", v.text}, {"markers", v.markers}, {"stage", to_string(v.stage)}};
}

void from_json(const json& j, CitedAnswer& v) {
    j.at("text").get_to(v.text);
    v.markers = j.value("markers", std::vector<CitationMarker>{});
    v.stage = stage_from_string(j.at("stage").get<std::string>());
}

void to_json(json& j, const FactualClaim& v) {
    j = json{{"claim_id", v.claim_id}, {"text", v.text}, {"origin", to_string(v.origin)}};
}

void from_json(const json& j, FactualClaim& v) {
    j.at("claim_id").get_to(v.claim_id);
    j.at("text").get_to(v.text);
    v.origin = claim_origin_from_string(j.at("origin").get<std::string>());
}

void to_json(json& j, const VerificationQuery& v) {
    j = json{{"claim_id", v.claim_id}, {"text", v.text}};
}

void from_json(const json& j, VerificationQuery& v) {
    j.at("claim_id").get_to(v.claim_id);
    j.at("text").get_to(v.text);
}

void to_json(json& j, const VerificationRecord& v) {
    j = json{{"claim_id", v.claim_id},
             {"verdict", to_string(v.verdict)},
             {"evidence", v.evidence},
             {"source", v.source}};
}

void from_json(const json& j, VerificationRecord& v) {
    j.at("claim_id").get_to(v.claim_id);
    v.verdict = verdict_from_string(j.at("verdict").get<std::string>());
    j.at("evidence").get_to(v.evidence);
    j.at("source").get_to(v.source);
}

void to_json(json& j, const AblationConfig& v) {
    j = json{{"skip_claim_extraction", v.skip_claim_extraction},
             {"skip_verification", v.skip_verification},
             {"skip_refinement", v.skip_refinement}};
}

void from_json(const json& j, AblationConfig& v) {
    v.skip_claim_extraction = j.value("skip_claim_extraction", false);
    v.skip_verification = j.value("skip_verification", false);
    v.skip_refinement = j.value("skip_refinement", false);
}

void to_json(json& j, const TokenUsage& v) {
    j = json{{"prompt_tokens", v.prompt_tokens}, {"completion_tokens", v.completion_tokens}};
}

void from_json(const json& j, TokenUsage& v) {
    v.prompt_tokens = j.value("prompt_tokens", std::int64_t{0});
    v.completion_tokens = j.value("completion_tokens", std::int64_t{0});
}

void to_json(json& j, const StageOutcome& v) {
    json msgs = json::array();
    for (const auto& [role, content] : v.messages) {
        msgs.push_back(json{{"role", role}, {"content", content}});
    }
    j = json{{"stage_tag", to_string(v.stage_tag)},
             {"messages", std::move(msgs)},
             {"raw", v.raw},
             {"ok", v.ok},
             {"error_kind", v.error_kind},
             {"error_message", v.error_message},
             {"retry_count", v.retry_count},
             {"repair_used", v.repair_used},
             {"duration_ms", v.duration_ms},
             {"usage", v.usage}};
}

void from_json(const json& j, StageOutcome& v) {
    v.stage_tag = stage_tag_from_string(j.at("stage_tag").get<std::string>());
    v.messages.clear();
    for (const auto& m : j.at("messages")) {
        v.messages.emplace_back(m.at("role").get<std::string>(),
                                m.at("content").get<std::string>());
    }
    j.at("raw").get_to(v.raw);
    j.at("ok").get_to(v.ok);
    v.error_kind = j.value("error_kind", std::string{});
    v.error_message = j.value("error_message", std::string{});
    v.retry_count = j.value("retry_count", 0);
    v.repair_used = j.value("repair_used", false);
    v.duration_ms = j.value("duration_ms", std::int64_t{0});
    v.usage = j.value("usage", TokenUsage{});
}

void to_json(json& j, const StagePair& v) {
    j = json{{"trace", v.trace}, {"answer", v.answer}};
}

void from_json(const json& j, StagePair& v) {
    j.at("trace").get_to(v.trace);
    j.at("answer").get_to(v.answer);
}

void to_json(json& j, const RunRecord& v) {
    j = json{{"task_id", v.task_id},
             {"method", to_string(v.method)},
             {"ablation", v.ablation},
             {"stages", v.stages},
             {"initial", v.initial ? json(*v.initial) : json(nullptr)},
             {"claims", v.claims},
             {"queries", v.queries},
             {"verifications", v.verifications},
             {"final", v.final_output ? json(*v.final_output) : json(nullptr)},
             {"no_claims", v.no_claims},
             {"verification_attached", v.verification_attached},
             {"failed_stage", v.failed_stage ? json(*v.failed_stage) : json(nullptr)},
             {"retrieved_doc_ids", v.retrieved_doc_ids}};
}

void from_json(const json& j, RunRecord& v) {
    j.at("task_id").get_to(v.task_id);
    v.method = method_from_string(j.at("method").get<std::string>());
    v.ablation = j.value("ablation", AblationConfig{});
    v.stages = j.value("stages", std::vector<StageOutcome>{});
    v.initial.reset();
    if (j.contains("initial") && !j.at("initial").is_null()) {
        v.initial = j.at("initial").get<StagePair>();
    }
    v.claims = j.value("claims", std::vector<FactualClaim>{});
    v.queries = j.value("queries", std::vector<VerificationQuery>{});
    v.verifications = j.value("verifications", std::vector<VerificationRecord>{});
    v.final_output.reset();
    if (j.contains("final") && !j.at("final").is_null()) {
        v.final_output = j.at("final").get<StagePair>();
    }
    v.no_claims = j.value("no_claims", false);
    v.verification_attached = j.value("verification_attached", false);
    v.failed_stage.reset();
    if (j.contains("failed_stage") && !j.at("failed_stage").is_null()) {
        v.failed_stage = j.at("failed_stage").get<std::string>();
    }
    v.retrieved_doc_ids = j.value("retrieved_doc_ids", std::vector<std::string>{});
}

void to_json(json& j, const MetricRow& v) {
    j = json{{"task_id", v.task_id},
             {"method", to_string(v.method)},
             {"task_type", to_string(v.task_type)},
             {"factual_accuracy", v.factual_accuracy},
             {"hallucination_rate", v.hallucination_rate},
             {"neutral_rate", v.neutral_rate},
             {"citation_precision", v.citation_precision},
             {"citation_recall", v.citation_recall},
             {"citation_f1", v.citation_f1},
             {"empty_claim_set", v.empty_claim_set}};
}

void from_json(const json& j, MetricRow& v) {
    j.at("task_id").get_to(v.task_id);
    v.method = method_from_string(j.at("method").get<std::string>());
    v.task_type = task_type_from_string(j.at("task_type").get<std::string>());
    j.at("factual_accuracy").get_to(v.factual_accuracy);
    j.at("hallucination_rate").get_to(v.hallucination_rate);
    j.at("neutral_rate").get_to(v.neutral_rate);
    j.at("citation_precision").get_to(v.citation_precision);
    j.at("citation_recall").get_to(v.citation_recall);
    j.at("citation_f1").get_to(v.citation_f1);
    v.empty_claim_set = j.value("empty_claim_set", false);
}

void to_json(json& j, const GroupRow& v) {
    j = json{{"method_label", v.method_label},
             {"task_type_label", v.task_type_label},
             {"factual_accuracy", v.factual_accuracy},
             {"hallucination_rate", v.hallucination_rate},
             {"neutral_rate", v.neutral_rate},
             {"citation_precision", v.citation_precision},
             {"citation_recall", v.citation_recall},
             {"citation_f1", v.citation_f1},
             {"row_count", v.row_count}};
}

void from_json(const json& j, GroupRow& v) {
    j.at("method_label").get_to(v.method_label);
    j.at("task_type_label").get_to(v.task_type_label);
    j.at("factual_accuracy").get_to(v.factual_accuracy);
    j.at("hallucination_rate").get_to(v.hallucination_rate);
    j.at("neutral_rate").get_to(v.neutral_rate);
    j.at("citation_precision").get_to(v.citation_precision);
    j.at("citation_recall").get_to(v.citation_recall);
    j.at("citation_f1").get_to(v.citation_f1);
    v.row_count = j.value("row_count", 0);
}

void to_json(json& j, const EvalReport& v) {
    j = json{{"per_task", v.per_task},
             {"groups", v.groups},
             {"grand", v.grand ? json(*v.grand) : json(nullptr)}};
}

void from_json(const json& j, EvalReport& v) {
    v.per_task = j.value("per_task", std::vector<MetricRow>{});
    v.groups = j.value("groups", std::vector<GroupRow>{});
    v.grand.reset();
    if (j.contains("grand") && !j.at("grand").is_null()) {
        v.grand = j.at("grand").get<GroupRow>();
    }
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

std::vector<ValidationError> validate_dataset(const std::vector<TaskInstance>& tasks) {
    std::vector<ValidationError> errors;
    std::set<std::string> seen_ids;

    for (const auto& task : tasks) {
        if (task.id.empty()) {
            errors.push_back({task.id, "id", "task id is empty"});
        } else if (!seen_ids.insert(task.id).second) {
            errors.push_back({task.id, "id", "duplicate task id '" + task.id + "'"});
        }
        if (task.query.empty()) {
            errors.push_back({task.id, "query", "query is empty"});
        }

        std::set<std::string> fact_ids;
        for (const auto& fact : task.gold_facts) {
            if (fact.fact_id.empty()) {
                errors.push_back({task.id, "fact_id", "gold fact has empty fact_id"});
            } else if (!fact_ids.insert(fact.fact_id).second) {
                errors.push_back(
                    {task.id, "fact_id", "duplicate fact_id '" + fact.fact_id + "'"});
            }
            if (fact.statement.empty()) {
                errors.push_back({task.id, "statement",
                                  "gold fact '" + fact.fact_id + "' has empty statement"});
            }
            if (fact.requires_citation) {
                if (fact.label != FactLabel::supported) {
                    errors.push_back({task.id, "requires_citation",
                                      "gold fact '" + fact.fact_id +
                                          "' requires citation but is not supported"});
                }
                if (fact.allowed_sources.empty()) {
                    errors.push_back({task.id, "allowed_sources",
                                      "gold fact '" + fact.fact_id +
                                          "' requires citation but allowed_sources is empty"});
                }
            }
        }
    }
    return errors;
}

std::vector<int> extract_marker_indices(const std::string& text) {
    static const std::regex marker_re(R"(\[(\d+)\])");
    std::set<int> indices;
    for (auto it = std::sregex_iterator(text.begin(), text.end(), marker_re);
         it != std::sregex_iterator(); ++it) {
        indices.insert(std::stoi((*it)[1].str()));
    }
    return {indices.begin(), indices.end()};
}

bool markers_contiguous(const std::string& text) {
    auto indices = extract_marker_indices(text);
    for (std::size_t i = 0; i < indices.size(); ++i) {
        if (indices[i] != static_cast<int>(i) + 1) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// File IO
// ---------------------------------------------------------------------------

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

std::vector<TaskInstance> load_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open dataset: " + path);
    std::vector<TaskInstance> tasks;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            tasks.push_back(json::parse(line).get<TaskInstance>());
        } catch (const std::exception& e) {
            throw IoError(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return tasks;
}

RunFile load_run_file(const std::string& path) {
    const std::string content = read_file(path);
    RunFile result;
    std::size_t pos = 0;
    while (pos < content.size()) {
        const std::size_t nl = content.find('\n', pos);
        if (nl == std::string::npos) {
            // Partial trailing line: the writer appends '\n' after every
            // record, so this is an interrupted tail. Keep the clean prefix.
            result.truncated_tail = true;
            break;
        }
        const std::string line = content.substr(pos, nl - pos);
        if (!line.empty()) {
            try {
                result.records.push_back(json::parse(line).get<RunRecord>());
            } catch (const std::exception& e) {
                throw IoError(path + ": malformed run record at byte " +
                              std::to_string(pos) + ": " + e.what());
            }
        }
        pos = nl + 1;
        result.clean_prefix_bytes = pos;
    }
    return result;
}

void append_run_record(std::ostream& out, const RunRecord& record) {
    out << run_record_line(record) << '\n';
    out.flush();
}

std::vector<std::pair<std::string, std::string>> load_corpus_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open corpus: " + path);
    std::vector<std::pair<std::string, std::string>> docs;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            json j = json::parse(line);
            docs.emplace_back(j.at("doc_id").get<std::string>(), j.at("text").get<std::string>());
        } catch (const std::exception& e) {
            throw IoError(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return docs;
}

std::string run_record_line(const RunRecord& record) {
    return json(record).dump();
}

RunRecord strip_volatile_fields(RunRecord record) {
    for (auto& stage : record.stages) {
        stage.duration_ms = 0;
        stage.usage = TokenUsage{};
    }
    return record;
}

}  // namespace verifact
