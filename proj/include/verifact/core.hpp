#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace verifact {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Enums shared across the library
// ---------------------------------------------------------------------------

enum class TaskType { factual_qa, summarization_cited, explanatory, controversial };
enum class FactLabel { supported, refuted, neutral };
enum class Stage { initial, final };
enum class ClaimOrigin { chain, answer };
enum class Verdict { confirmed, refuted, needs_context, alternative };
enum class Method { verifact, standard_cot, cot_rag };

/// The six prompt/parse stages. The first four realize the generative
/// pipeline; the last two drive the baselines.
enum class StageTag {
    initial_cot,
    claim_extract,
    verify_simulate,
    refine_integrate,
    standard_cot,
    rag_cot,
};

std::string to_string(TaskType v);
std::string to_string(FactLabel v);
std::string to_string(Stage v);
std::string to_string(ClaimOrigin v);
std::string to_string(Verdict v);
std::string to_string(Method v);
std::string to_string(StageTag v);

TaskType task_type_from_string(const std::string& s);
FactLabel fact_label_from_string(const std::string& s);
Stage stage_from_string(const std::string& s);
ClaimOrigin claim_origin_from_string(const std::string& s);
Verdict verdict_from_string(const std::string& s);
Method method_from_string(const std::string& s);
StageTag stage_tag_from_string(const std::string& s);

/// Human-readable method label used in report tables.
std::string method_label(Method m);
/// Human-readable task-type label used in report tables.
std::string task_type_label(TaskType t);

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

struct SourceDocument {
    std::string doc_id;
    std::string text;

    bool operator==(const SourceDocument&) const = default;
};

struct GoldFact {
    std::string fact_id;
    std::string statement;
    FactLabel label = FactLabel::neutral;
    std::vector<std::string> allowed_sources;
    bool requires_citation = false;

    bool operator==(const GoldFact&) const = default;
};

struct TaskInstance {
    std::string id;
    TaskType task_type = TaskType::factual_qa;
    std::string query;
    std::vector<SourceDocument> source_documents;
    std::vector<GoldFact> gold_facts;

    bool operator==(const TaskInstance&) const = default;
};

struct ReasoningTrace {
    std::vector<std::string> steps;
    std::string raw;  // verbatim fence body the steps were parsed from
    Stage stage = Stage::initial;

    bool operator==(const ReasoningTrace&) const = default;
};

struct CitationMarker {
    int marker_index = 0;   // the n of an inline [n] token, 1-based
    int source_ref = 0;     // index into the run's VerificationRecord list

    bool operator==(const CitationMarker&) const = default;
};

struct CitedAnswer {
    std::string text;
    std::vector<CitationMarker> markers;
    Stage stage = Stage::initial;

    bool operator==(const CitedAnswer&) const = default;
};

struct FactualClaim {
    int claim_id = 0;  // claims within one run are numbered 1..n
    std::string text;
    ClaimOrigin origin = ClaimOrigin::chain;

    bool operator==(const FactualClaim&) const = default;
};

struct VerificationQuery {
    int claim_id = 0;
    std::string text;

    bool operator==(const VerificationQuery&) const = default;
};

/// One verification outcome. claim_id 0 marks a synthesized "unattributed
/// source" record: a refined-answer marker whose SOURCES entry matched no
/// stage-3 record resolves here and is scored accordingly.
struct VerificationRecord {
    int claim_id = 0;
    Verdict verdict = Verdict::needs_context;
    std::string evidence;
    std::string source;

    bool operator==(const VerificationRecord&) const = default;
};

struct AblationConfig {
    bool skip_claim_extraction = false;
    bool skip_verification = false;
    bool skip_refinement = false;

    bool any() const { return skip_claim_extraction || skip_verification || skip_refinement; }
    bool operator==(const AblationConfig&) const = default;
};

struct ChatMessage;  // provider.hpp

struct TokenUsage {
    std::int64_t prompt_tokens = 0;
    std::int64_t completion_tokens = 0;

    bool operator==(const TokenUsage&) const = default;
};

/// Transcript of one pipeline stage: every message sent (including repair
/// rounds), the raw completion, and either success or a structured failure.
struct StageOutcome {
    StageTag stage_tag = StageTag::initial_cot;
    std::vector<std::pair<std::string, std::string>> messages;  // (role, content)
    std::string raw;                // last completion received, verbatim
    bool ok = false;
    std::string error_kind;         // empty iff ok
    std::string error_message;
    int retry_count = 0;            // transport retries, summed across repair rounds
    bool repair_used = false;
    std::int64_t duration_ms = 0;
    TokenUsage usage;

    bool operator==(const StageOutcome&) const = default;
};

struct StagePair {
    ReasoningTrace trace;
    CitedAnswer answer;

    bool operator==(const StagePair&) const = default;
};

struct RunRecord {
    std::string task_id;
    Method method = Method::verifact;
    AblationConfig ablation;
    std::vector<StageOutcome> stages;
    std::optional<StagePair> initial;
    std::vector<FactualClaim> claims;
    std::vector<VerificationQuery> queries;
    std::vector<VerificationRecord> verifications;
    std::optional<StagePair> final_output;
    bool no_claims = false;
    // Set when refinement was skipped: the verification report is attached
    // to the record but not integrated into the answer.
    bool verification_attached = false;
    std::optional<std::string> failed_stage;
    std::vector<std::string> retrieved_doc_ids;

    bool operator==(const RunRecord&) const = default;
};

/// One scored row. Fractions are kept in [0,1]; rendering converts to the
/// table presentation.
struct MetricRow {
    std::string task_id;
    Method method = Method::verifact;
    TaskType task_type = TaskType::factual_qa;
    double factual_accuracy = 0.0;
    double hallucination_rate = 0.0;
    double neutral_rate = 1.0;
    double citation_precision = 0.0;
    double citation_recall = 0.0;
    double citation_f1 = 0.0;
    bool empty_claim_set = false;

    bool operator==(const MetricRow&) const = default;
};

struct GroupRow {
    std::string method_label;
    std::string task_type_label;
    double factual_accuracy = 0.0;
    double hallucination_rate = 0.0;
    double neutral_rate = 0.0;
    double citation_precision = 0.0;
    double citation_recall = 0.0;
    double citation_f1 = 0.0;
    int row_count = 0;

    bool operator==(const GroupRow&) const = default;
};

struct EvalReport {
    std::vector<MetricRow> per_task;
    std::vector<GroupRow> groups;
    std::optional<GroupRow> grand;

    bool operator==(const EvalReport&) const = default;
};

// ---------------------------------------------------------------------------
// JSON serialization (field names match the schema in docs/formats.md)
// ---------------------------------------------------------------------------

void to_json(json& j, const SourceDocument& v);
void from_json(const json& j, SourceDocument& v);
void to_json(json& j, const GoldFact& v);
void from_json(const json& j, GoldFact& v);
void to_json(json& j, const TaskInstance& v);
void from_json(const json& j, TaskInstance& v);
void to_json(json& j, const ReasoningTrace& v);
void from_json(const json& j, ReasoningTrace& v);
void to_json(json& j, const CitationMarker& v);
void from_json(const json& j, CitationMarker& v);
void to_json(json& j, const CitedAnswer& v);
void from_json(const json& j, CitedAnswer& v);
void to_json(json& j, const FactualClaim& v);
void from_json(const json& j, FactualClaim& v);
void to_json(json& j, const VerificationQuery& v);
void from_json(const json& j, VerificationQuery& v);
void to_json(json& j, const VerificationRecord& v);
void from_json(const json& j, VerificationRecord& v);
void to_json(json& j, const AblationConfig& v);
void from_json(const json& j, AblationConfig& v);
void to_json(json& j, const TokenUsage& v);
void from_json(const json& j, TokenUsage& v);
void to_json(json& j, const StageOutcome& v);
void from_json(const json& j, StageOutcome& v);
void to_json(json& j, const StagePair& v);
void from_json(const json& j, StagePair& v);
void to_json(json& j, const RunRecord& v);
void from_json(const json& j, RunRecord& v);
void to_json(json& j, const MetricRow& v);
void from_json(const json& j, MetricRow& v);
void to_json(json& j, const GroupRow& v);
void from_json(const json& j, GroupRow& v);
void to_json(json& j, const EvalReport& v);
void from_json(const json& j, EvalReport& v);

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

struct ValidationError {
    std::string task_id;
    std::string field;
    std::string message;

    bool operator==(const ValidationError&) const = default;
};

/// Checks every TaskInstance/GoldFact invariant; one error per violation.
std::vector<ValidationError> validate_dataset(const std::vector<TaskInstance>& tasks);

/// Extracts the distinct [n] indices appearing in answer text, ascending.
std::vector<int> extract_marker_indices(const std::string& text);

/// True iff the distinct marker indices in `text` are exactly {1..m}.
bool markers_contiguous(const std::string& text);

// ---------------------------------------------------------------------------
// Line-delimited file IO
// ---------------------------------------------------------------------------

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::vector<TaskInstance> load_dataset(const std::string& path);

struct RunFile {
    std::vector<RunRecord> records;
    // Byte length of the clean prefix; anything past it is a partial
    // trailing line from an interrupted writer.
    std::uintmax_t clean_prefix_bytes = 0;
    bool truncated_tail = false;
};

RunFile load_run_file(const std::string& path);
void append_run_record(std::ostream& out, const RunRecord& record);

std::vector<std::pair<std::string, std::string>> load_corpus_file(const std::string& path);

/// Serializes a RunRecord as its canonical single-line JSON.
std::string run_record_line(const RunRecord& record);

/// Clears duration/usage fields so records can be compared across runs.
RunRecord strip_volatile_fields(RunRecord record);

}  // namespace verifact
