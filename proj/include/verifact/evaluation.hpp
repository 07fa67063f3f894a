#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "verifact/core.hpp"

namespace verifact::eval {

enum class Bucket { correct, hallucinated, neutral };

std::string to_string(Bucket b);

struct ClaimMatch {
    int claim_id = 0;
    std::optional<std::string> matched_fact_id;
    double overlap_score = 0.0;  // best Jaccard overlap seen across gold facts
    Bucket bucket = Bucket::hallucinated;

    bool operator==(const ClaimMatch&) const = default;
};

/// Lowercase, non-alphanumerics to spaces, whitespace collapsed.
std::string normalize_text(const std::string& s);
std::set<std::string> token_set(const std::string& s);
/// |A n B| / |A u B|; 0.0 when the union is empty.
double jaccard(const std::set<std::string>& a, const std::set<std::string>& b);

/// Matches one claim against the gold facts: argmax Jaccard overlap subject
/// to overlap >= threshold, ties broken by first fact in file order. The
/// bucket follows the matched fact's label; unmatched claims are
/// hallucinated.
ClaimMatch match_claim(const FactualClaim& claim, const std::vector<GoldFact>& gold_facts,
                       double threshold);

/// Splits answer text into sentence claims: boundaries are . ! or ? followed
/// by whitespace and a capital letter. Used for runs without an extracted
/// claim list (the baselines and the claim-extraction ablation).
std::vector<FactualClaim> segment_sentences(const std::string& text);

class EvalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Scores one run against its task. Degenerate conventions: with zero
/// claims the row is (0, 0, 1) and flagged; citation F1 is 1.0 when both
/// the marker set and the required-citation set are empty, and 0.0 whenever
/// precision or recall is 0.
MetricRow score_run(const RunRecord& run, const TaskInstance& task, double threshold);

/// Unweighted per-(method, task_type) means plus a grand row.
EvalReport aggregate(const std::vector<MetricRow>& rows);

enum class ReportFormat { plain_table, delimited };

/// Renders the report table: accuracy and hallucination as integer
/// percentages, citation quality as a two-decimal fraction.
std::string render_report(const EvalReport& report, ReportFormat format);

/// The ablation comparison table, one row per variant label.
std::string render_ablation_table(
    const std::vector<std::pair<std::string, GroupRow>>& variants, ReportFormat format);

}  // namespace verifact::eval
