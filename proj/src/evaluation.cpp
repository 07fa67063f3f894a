#include "verifact/evaluation.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

namespace verifact::eval {

namespace {

std::string format_percent(double fraction) {
    return std::to_string(static_cast<long long>(std::llround(fraction * 100.0)));
}

std::string format_quality(double fraction) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", fraction);
    return buf;
}

std::string trim_copy(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

struct CitationTally {
    int total_markers = 0;
    int correct_markers = 0;
    std::set<std::string> covered_required;  // fact_ids
};

}  // namespace

std::string to_string(Bucket b) {
    switch (b) {
        case Bucket::correct: return "correct";
        case Bucket::hallucinated: return "hallucinated";
        case Bucket::neutral: return "neutral";
    }
    return "hallucinated";
}

std::string normalize_text(const std::string& s) {
    std::string out;
    bool in_space = true;
    for (char c : s) {
        if (std::isalnum(static_cast<unsigned char>(c))) {
            out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
            in_space = false;
        } else if (!in_space) {
            out += ' ';
            in_space = true;
        }
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    return out;
}

std::set<std::string> token_set(const std::string& s) {
    std::set<std::string> tokens;
    std::istringstream in(normalize_text(s));
    std::string tok;
    while (in >> tok) tokens.insert(tok);
    return tokens;
}

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
    if (a.empty() && b.empty()) return 0.0;
    std::size_t intersection = 0;
    for (const auto& tok : a) {
        if (b.count(tok)) ++intersection;
    }
    const std::size_t union_size = a.size() + b.size() - intersection;
    return static_cast<double>(intersection) / static_cast<double>(union_size);
}

ClaimMatch match_claim(const FactualClaim& claim, const std::vector<GoldFact>& gold_facts,
                       double threshold) {
    ClaimMatch match;
    match.claim_id = claim.claim_id;

    const auto claim_tokens = token_set(claim.text);
    double best = -1.0;
    const GoldFact* best_fact = nullptr;
    for (const auto& fact : gold_facts) {
        const double score = jaccard(claim_tokens, token_set(fact.statement));
        if (score > best) {  // strict: ties keep the first fact in file order
            best = score;
            best_fact = &fact;
        }
    }
    match.overlap_score = std::max(best, 0.0);

    if (best_fact != nullptr && best >= threshold) {
        match.matched_fact_id = best_fact->fact_id;
        switch (best_fact->label) {
            case FactLabel::supported: match.bucket = Bucket::correct; break;
            case FactLabel::refuted: match.bucket = Bucket::hallucinated; break;
            case FactLabel::neutral: match.bucket = Bucket::neutral; break;
        }
    } else {
        match.bucket = Bucket::hallucinated;
    }
    return match;
}

std::vector<FactualClaim> segment_sentences(const std::string& text) {
    std::vector<FactualClaim> claims;
    std::string current;
    for (std::size_t i = 0; i < text.size(); ++i) {
        current += text[i];
        if (text[i] == '.' || text[i] == '!' || text[i] == '?') {
            // Boundary only when followed by whitespace and a capital.
            std::size_t j = i + 1;
            while (j < text.size() && std::isspace(static_cast<unsigned char>(text[j]))) ++j;
            const bool boundary = j > i + 1 && j < text.size() &&
                                  std::isupper(static_cast<unsigned char>(text[j]));
            if (boundary) {
                if (!normalize_text(current).empty()) {
                    claims.push_back({static_cast<int>(claims.size()) + 1, trim_copy(current),
                                      ClaimOrigin::answer});
                }
                current.clear();
                i = j - 1;
            }
        }
    }
    if (!normalize_text(current).empty()) {
        claims.push_back({static_cast<int>(claims.size()) + 1, trim_copy(current),
                          ClaimOrigin::answer});
    }
    return claims;
}

namespace {

// Sentence containing the first occurrence of "[n]"; used to attribute a
// marker to a claim when claims came from segmentation.
const FactualClaim* sentence_for_marker(const std::vector<FactualClaim>& sentences, int n) {
    const std::string token = "[" + std::to_string(n) + "]";
    for (const auto& claim : sentences) {
        if (claim.text.find(token) != std::string::npos) return &claim;
    }
    return nullptr;
}

bool source_matches_fact(const std::string& source, const GoldFact& fact) {
    const std::string norm_source = normalize_text(source);
    for (const auto& allowed : fact.allowed_sources) {
        const std::string norm_allowed = normalize_text(allowed);
        if (!norm_allowed.empty() && norm_source.find(norm_allowed) != std::string::npos) {
            return true;
        }
    }
    return false;
}

}  // namespace

MetricRow score_run(const RunRecord& run, const TaskInstance& task, double threshold) {
    if (!run.final_output) {
        throw EvalError("run for task '" + run.task_id + "' has no final output");
    }

    MetricRow row;
    row.task_id = run.task_id;
    row.method = run.method;
    row.task_type = task.task_type;

    // Claims: the run's extracted list when present, otherwise sentences of
    // the final answer (baselines carry no claim list).
    const bool segmented = run.claims.empty();
    const std::vector<FactualClaim> claims =
        segmented ? segment_sentences(run.final_output->answer.text) : run.claims;

    std::map<int, ClaimMatch> matches;
    int correct = 0, hallucinated = 0, neutral = 0;
    for (const auto& claim : claims) {
        const auto match = match_claim(claim, task.gold_facts, threshold);
        matches[claim.claim_id] = match;
        switch (match.bucket) {
            case Bucket::correct: ++correct; break;
            case Bucket::hallucinated: ++hallucinated; break;
            case Bucket::neutral: ++neutral; break;
        }
    }

    const int total = static_cast<int>(claims.size());
    if (total == 0) {
        row.factual_accuracy = 0.0;
        row.hallucination_rate = 0.0;
        row.neutral_rate = 1.0;
        row.empty_claim_set = true;
    } else {
        row.factual_accuracy = static_cast<double>(correct) / total;
        row.hallucination_rate = static_cast<double>(hallucinated) / total;
        row.neutral_rate = static_cast<double>(neutral) / total;
    }

    // Citation tally over the final answer's markers.
    CitationTally tally;
    for (const auto& marker : run.final_output->answer.markers) {
        ++tally.total_markers;
        if (marker.source_ref < 0 ||
            marker.source_ref >= static_cast<int>(run.verifications.size())) {
            continue;
        }
        const auto& record = run.verifications[static_cast<std::size_t>(marker.source_ref)];

        const FactualClaim* claim = nullptr;
        if (segmented) {
            claim = sentence_for_marker(claims, marker.marker_index);
        } else if (record.claim_id >= 1) {
            for (const auto& c : claims) {
                if (c.claim_id == record.claim_id) {
                    claim = &c;
                    break;
                }
            }
        }
        if (claim == nullptr) continue;  // unattributed records earn no credit

        const auto it = matches.find(claim->claim_id);
        if (it == matches.end() || it->second.bucket != Bucket::correct ||
            !it->second.matched_fact_id) {
            continue;
        }
        const GoldFact* fact = nullptr;
        for (const auto& f : task.gold_facts) {
            if (f.fact_id == *it->second.matched_fact_id) {
                fact = &f;
                break;
            }
        }
        if (fact == nullptr || !source_matches_fact(record.source, *fact)) continue;

        ++tally.correct_markers;
        if (fact->requires_citation) tally.covered_required.insert(fact->fact_id);
    }

    int required = 0;
    for (const auto& fact : task.gold_facts) {
        if (fact.requires_citation) ++required;
    }

    if (tally.total_markers == 0 && required == 0) {
        row.citation_precision = 1.0;
        row.citation_recall = 1.0;
        row.citation_f1 = 1.0;
    } else {
        row.citation_precision =
            tally.total_markers == 0
                ? 0.0
                : static_cast<double>(tally.correct_markers) / tally.total_markers;
        row.citation_recall =
            required == 0 ? 1.0
                          : static_cast<double>(tally.covered_required.size()) / required;
        const double pr = row.citation_precision + row.citation_recall;
        row.citation_f1 =
            pr == 0.0 ? 0.0 : 2.0 * row.citation_precision * row.citation_recall / pr;
    }
    return row;
}

EvalReport aggregate(const std::vector<MetricRow>& rows) {
    EvalReport report;
    report.per_task = rows;

    auto mean_of = [](const std::vector<const MetricRow*>& group) {
        GroupRow out;
        out.row_count = static_cast<int>(group.size());
        for (const MetricRow* row : group) {
            out.factual_accuracy += row->factual_accuracy;
            out.hallucination_rate += row->hallucination_rate;
            out.neutral_rate += row->neutral_rate;
            out.citation_precision += row->citation_precision;
            out.citation_recall += row->citation_recall;
            out.citation_f1 += row->citation_f1;
        }
        const double n = static_cast<double>(group.size());
        out.factual_accuracy /= n;
        out.hallucination_rate /= n;
        out.neutral_rate /= n;
        out.citation_precision /= n;
        out.citation_recall /= n;
        out.citation_f1 /= n;
        return out;
    };

    // Grouping keys follow a stable (task_type, method) order.
    std::map<std::pair<int, int>, std::vector<const MetricRow*>> groups;
    std::vector<const MetricRow*> all;
    for (const auto& row : rows) {
        groups[{static_cast<int>(row.task_type), static_cast<int>(row.method)}].push_back(&row);
        all.push_back(&row);
    }
    for (const auto& [key, group] : groups) {
        GroupRow out = mean_of(group);
        out.task_type_label = task_type_label(static_cast<TaskType>(key.first));
        out.method_label = method_label(static_cast<Method>(key.second));
        report.groups.push_back(std::move(out));
    }
    if (!all.empty()) {
        GroupRow grand = mean_of(all);
        grand.task_type_label = "All Tasks";
        grand.method_label = "(mean)";
        report.grand = std::move(grand);
    }
    return report;
}

std::string render_report(const EvalReport& report, ReportFormat format) {
    const char* sep = format == ReportFormat::delimited ? "\t" : " | ";
    std::ostringstream out;
    out << "Task Type" << sep << "Method" << sep << "Factual ACC" << sep << "Hallucination (↓)"
        << sep << "Citation Quality" << '\n';

    auto emit = [&](const GroupRow& row) {
        out << row.task_type_label << sep << row.method_label << sep
            << format_percent(row.factual_accuracy) << sep
            << format_percent(row.hallucination_rate) << sep << format_quality(row.citation_f1)
            << '\n';
    };
    for (const auto& row : report.groups) emit(row);
    if (report.grand && report.groups.size() > 1) emit(*report.grand);
    return out.str();
}

std::string render_ablation_table(
    const std::vector<std::pair<std::string, GroupRow>>& variants, ReportFormat format) {
    const char* sep = format == ReportFormat::delimited ? "\t" : " | ";
    std::ostringstream out;
    out << "Method Variant" << sep << "Factual ACC" << sep << "Hallucination (↓)" << sep
        << "Citation Quality" << '\n';
    for (const auto& [label, row] : variants) {
        out << label << sep << format_percent(row.factual_accuracy) << sep
            << format_percent(row.hallucination_rate) << sep << format_quality(row.citation_f1)
            << '\n';
    }
    return out.str();
}

}  // namespace verifact::eval
