#pragma once

#include <string>
#include <utility>
#include <vector>

#include "verifact/core.hpp"

namespace verifact::wire {

// The fenced output grammar every stage prompt mandates. Fence keywords sit
// alone at line start; a literal fence keyword inside content is prefixed
// with "\" and unescaped on parse. Field values inside numbered lines escape
// the "||" separator the same way. docs/formats.md documents the grammar
// bit-exactly.

inline constexpr const char* kBeginReasoning = "BEGIN_REASONING";
inline constexpr const char* kEndReasoning = "END_REASONING";
inline constexpr const char* kBeginAnswer = "BEGIN_ANSWER";
inline constexpr const char* kEndAnswer = "END_ANSWER";
inline constexpr const char* kBeginClaims = "BEGIN_CLAIMS";
inline constexpr const char* kEndClaims = "END_CLAIMS";
inline constexpr const char* kBeginEvidence = "BEGIN_EVIDENCE";
inline constexpr const char* kEndEvidence = "END_EVIDENCE";
inline constexpr const char* kBeginSources = "BEGIN_SOURCES";
inline constexpr const char* kEndSources = "END_SOURCES";

enum class ParseErrorKind {
    missing_fence,
    empty_fence,
    bad_line,
    missing_separator,
    non_contiguous_numbering,
    duplicate_id,
    unknown_verdict,
    id_mismatch,
    missing_source,
    empty_field,
    marker_gap,
    source_count_short,
};

class ParseError : public std::runtime_error {
public:
    ParseError(ParseErrorKind kind, std::string detail, const std::string& message)
        : std::runtime_error(message), kind_(kind), detail_(std::move(detail)) {}

    ParseErrorKind kind() const { return kind_; }
    /// Kind-specific payload: fence name, offending token, expected number...
    const std::string& detail() const { return detail_; }

private:
    ParseErrorKind kind_;
    std::string detail_;
};

std::string to_string(ParseErrorKind kind);

// --- escaping ---------------------------------------------------------------

/// Escapes content for embedding in a fenced body: any line that starts with
/// backslashes followed by a fence keyword gains one more backslash.
std::string escape_text(const std::string& text);
/// Inverse of escape_text; unescape_text(escape_text(t)) == t for all t.
std::string unescape_text(const std::string& text);

/// Escapes a single-line field value: every backslash-run followed by "||"
/// gains one backslash, so no unescaped separator remains.
std::string escape_field(const std::string& field);
std::string unescape_field(const std::string& field);

/// Collapses whitespace runs to single spaces and trims; used for source
/// matching between SOURCES entries and verification records.
std::string normalize_ws(const std::string& s);

// --- parsers ----------------------------------------------------------------

/// Parses a CoT completion (initial/standard/rag stages): reasoning fence
/// split into steps, answer fence body, markers empty.
std::pair<ReasoningTrace, CitedAnswer> parse_cot(const std::string& raw);

struct ClaimsParse {
    std::vector<FactualClaim> claims;
    std::vector<VerificationQuery> queries;

    bool empty() const { return claims.empty(); }
};

/// Parses a claim-extraction completion. An empty fence body is the
/// zero-claims signal and yields empty lists rather than an error.
ClaimsParse parse_claims(const std::string& raw);

/// Parses a verification completion; exactly one record per expected id.
std::vector<VerificationRecord> parse_evidence(const std::string& raw,
                                               const std::vector<int>& expected_claim_ids);

struct RefinedParse {
    ReasoningTrace trace;    // stage = final
    CitedAnswer answer;      // stage = final, markers resolved
    // Synthesized records for SOURCES entries matching no verification;
    // marker source_refs already point past the verification list into these.
    std::vector<VerificationRecord> unattributed;
};

/// Parses a refinement completion against the stage-3 records: extracts [n]
/// markers, reads the SOURCES block, and resolves each marker to the record
/// whose source matches the entry exactly after whitespace normalization.
RefinedParse parse_refined(const std::string& raw,
                           const std::vector<VerificationRecord>& verifications);

/// One corrective user message quoting the parse error and restating the
/// stage grammar. The pipeline grants at most one repair round per stage.
std::string repair_prompt_text(StageTag stage, const ParseError& error);

/// The fence grammar a stage's completion must follow, as shown in prompts.
std::string grammar_spec(StageTag stage);

// --- canonical serializers ---------------------------------------------------
// These render prior-stage artifacts back into grammar blocks for embedding
// in later prompts; parse(render(x)) == x for valid single-line field texts.

std::string render_claims_block(const std::vector<FactualClaim>& claims,
                                const std::vector<VerificationQuery>& queries);
std::string render_queries_block(const std::vector<VerificationQuery>& queries);
std::string render_evidence_block(const std::vector<VerificationRecord>& records);
std::string render_refined_block(const ReasoningTrace& trace, const CitedAnswer& answer,
                                 const std::vector<std::string>& sources);

}  // namespace verifact::wire
