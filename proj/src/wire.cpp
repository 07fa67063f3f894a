#include "verifact/wire.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <regex>
#include <set>
#include <sstream>

namespace verifact::wire {

namespace {

constexpr std::array<const char*, 10> kFenceKeywords = {
    kBeginReasoning, kEndReasoning, kBeginAnswer,   kEndAnswer,  kBeginClaims,
    kEndClaims,      kBeginEvidence, kEndEvidence,  kBeginSources, kEndSources,
};

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::size_t pos = 0;
    while (true) {
        const std::size_t nl = text.find('\n', pos);
        if (nl == std::string::npos) {
            lines.push_back(text.substr(pos));
            break;
        }
        lines.push_back(text.substr(pos, nl - pos));
        pos = nl + 1;
    }
    // CRLF completions are normalized to LF.
    for (auto& line : lines) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
    }
    return lines;
}

std::string join_lines(const std::vector<std::string>& lines) {
    std::string out;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (i) out += '\n';
        out += lines[i];
    }
    return out;
}

std::string rtrim(std::string s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
    return s;
}

std::string trim(std::string s) {
    std::size_t b = 0;
    while (b < s.size() && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    s.erase(0, b);
    return rtrim(std::move(s));
}

// Backslash run followed by a fence keyword at line start?
bool line_carries_keyword(const std::string& line) {
    std::size_t i = 0;
    while (i < line.size() && line[i] == '\\') ++i;
    for (const char* kw : kFenceKeywords) {
        const std::size_t len = std::char_traits<char>::length(kw);
        if (line.size() - i >= len && line.compare(i, len, kw) == 0) return true;
    }
    return false;
}

bool is_fence_line(const std::string& line, const char* keyword) {
    return rtrim(line) == keyword;
}

struct FenceSpan {
    std::size_t begin_line;  // line index of the opening keyword
    std::size_t end_line;    // line index of the closing keyword
};

FenceSpan find_fence(const std::vector<std::string>& lines, const char* begin_kw,
                     const char* end_kw, std::size_t search_from) {
    std::size_t b = search_from;
    while (b < lines.size() && !is_fence_line(lines[b], begin_kw)) ++b;
    if (b >= lines.size()) {
        throw ParseError(ParseErrorKind::missing_fence, begin_kw,
                         std::string("missing fence: ") + begin_kw);
    }
    std::size_t e = b + 1;
    while (e < lines.size() && !is_fence_line(lines[e], end_kw)) ++e;
    if (e >= lines.size()) {
        throw ParseError(ParseErrorKind::missing_fence, end_kw,
                         std::string("missing fence: ") + end_kw);
    }
    return {b, e};
}

// Fence body, line-unescaped, with leading/trailing blank lines dropped.
std::string fence_body(const std::vector<std::string>& lines, const FenceSpan& span) {
    std::vector<std::string> body(lines.begin() + static_cast<std::ptrdiff_t>(span.begin_line) + 1,
                                  lines.begin() + static_cast<std::ptrdiff_t>(span.end_line));
    while (!body.empty() && trim(body.front()).empty()) body.erase(body.begin());
    while (!body.empty() && trim(body.back()).empty()) body.pop_back();
    for (auto& line : body) line = unescape_text(line);
    return join_lines(body);
}

[[noreturn]] void throw_empty_fence(const char* what) {
    throw ParseError(ParseErrorKind::empty_fence, what, std::string("empty fence: ") + what);
}

// Splits a line on unescaped "||" separators.
std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::string current;
    std::size_t i = 0;
    while (i < line.size()) {
        if (line[i] == '|' && i + 1 < line.size() && line[i + 1] == '|' &&
            (current.empty() || current.back() != '\\')) {
            fields.push_back(current);
            current.clear();
            i += 2;
        } else {
            current += line[i];
            ++i;
        }
    }
    fields.push_back(current);
    return fields;
}

// "k. rest" -> (k, rest); returns false if the line carries no number prefix.
bool split_numbered(const std::string& line, int& number, std::string& rest) {
    static const std::regex numbered_re(R"(^\s*(\d+)\.\s*(.*)$)");
    std::smatch m;
    if (!std::regex_match(line, m, numbered_re)) return false;
    number = std::stoi(m[1].str());
    rest = m[2].str();
    return true;
}

std::string strip_prefix(const std::string& s, const char* prefix) {
    const std::size_t len = std::char_traits<char>::length(prefix);
    if (s.compare(0, len, prefix) != 0) return {};
    return trim(s.substr(len));
}

std::vector<std::string> reasoning_steps(const std::string& body) {
    const auto lines = split_lines(body);
    std::vector<std::string> steps;
    bool saw_numbered = false;
    std::string current;
    int n;
    std::string rest;
    for (const auto& line : lines) {
        if (split_numbered(line, n, rest)) {
            saw_numbered = true;
            if (!trim(current).empty()) steps.push_back(trim(current));
            current = rest;
        } else if (!trim(line).empty()) {
            if (!current.empty()) current += ' ';
            current += trim(line);
        }
    }
    if (!trim(current).empty()) steps.push_back(trim(current));

    if (!saw_numbered) {
        // No numbering: split on paragraph breaks instead.
        steps.clear();
        current.clear();
        for (const auto& line : lines) {
            if (trim(line).empty()) {
                if (!current.empty()) steps.push_back(current);
                current.clear();
            } else {
                if (!current.empty()) current += ' ';
                current += trim(line);
            }
        }
        if (!current.empty()) steps.push_back(current);
    }
    return steps;
}

void check_single_line(const std::string& text, const char* what) {
    if (text.find('\n') != std::string::npos) {
        throw std::invalid_argument(std::string(what) + " must be single-line");
    }
}

}  // namespace

std::string to_string(ParseErrorKind kind) {
    switch (kind) {
        case ParseErrorKind::missing_fence: return "missing_fence";
        case ParseErrorKind::empty_fence: return "empty_fence";
        case ParseErrorKind::bad_line: return "bad_line";
        case ParseErrorKind::missing_separator: return "missing_separator";
        case ParseErrorKind::non_contiguous_numbering: return "non_contiguous_numbering";
        case ParseErrorKind::duplicate_id: return "duplicate_id";
        case ParseErrorKind::unknown_verdict: return "unknown_verdict";
        case ParseErrorKind::id_mismatch: return "id_mismatch";
        case ParseErrorKind::missing_source: return "missing_source";
        case ParseErrorKind::empty_field: return "empty_field";
        case ParseErrorKind::marker_gap: return "marker_gap";
        case ParseErrorKind::source_count_short: return "source_count_short";
    }
    return "parse_error";
}

// ---------------------------------------------------------------------------
// Escaping
// ---------------------------------------------------------------------------

std::string escape_text(const std::string& text) {
    auto lines = split_lines(text);
    for (auto& line : lines) {
        if (line_carries_keyword(line)) line.insert(line.begin(), '\\');
    }
    return join_lines(lines);
}

std::string unescape_text(const std::string& text) {
    auto lines = split_lines(text);
    for (auto& line : lines) {
        if (!line.empty() && line.front() == '\\' && line_carries_keyword(line)) {
            line.erase(line.begin());
        }
    }
    return join_lines(lines);
}

std::string escape_field(const std::string& field) {
    std::string out;
    std::size_t i = 0;
    while (i < field.size()) {
        std::size_t b = 0;
        while (i + b < field.size() && field[i + b] == '\\') ++b;
        if (field.compare(i + b, 2, "||") == 0) {
            out.append(b + 1, '\\');
            out += "||";
            i += b + 2;
        } else if (b > 0) {
            out.append(b, '\\');
            i += b;
        } else {
            out += field[i];
            ++i;
        }
    }
    return out;
}

std::string unescape_field(const std::string& field) {
    std::string out;
    std::size_t i = 0;
    while (i < field.size()) {
        std::size_t b = 0;
        while (i + b < field.size() && field[i + b] == '\\') ++b;
        if (b > 0 && field.compare(i + b, 2, "||") == 0) {
            out.append(b - 1, '\\');
            out += "||";
            i += b + 2;
        } else if (b > 0) {
            out.append(b, '\\');
            i += b;
        } else {
            out += field[i];
            ++i;
        }
    }
    return out;
}

std::string normalize_ws(const std::string& s) {
    std::string out;
    bool in_space = true;  // trims leading whitespace
    for (char c : s) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            if (!in_space) out += ' ';
            in_space = true;
        } else {
            out += c;
            in_space = false;
        }
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    return out;
}

// ---------------------------------------------------------------------------
// Parsers
// ---------------------------------------------------------------------------

std::pair<ReasoningTrace, CitedAnswer> parse_cot(const std::string& raw) {
    const auto lines = split_lines(raw);
    const auto reasoning = find_fence(lines, kBeginReasoning, kEndReasoning, 0);
    const auto answer = find_fence(lines, kBeginAnswer, kEndAnswer, reasoning.end_line + 1);

    const std::string reasoning_body = fence_body(lines, reasoning);
    if (trim(reasoning_body).empty()) throw_empty_fence("REASONING");
    const std::string answer_body = fence_body(lines, answer);
    if (trim(answer_body).empty()) throw_empty_fence("ANSWER");

    ReasoningTrace trace;
    trace.steps = reasoning_steps(reasoning_body);
    trace.raw = reasoning_body;
    trace.stage = Stage::initial;

    CitedAnswer cited;
    cited.text = answer_body;
    cited.stage = Stage::initial;
    return {std::move(trace), std::move(cited)};
}

ClaimsParse parse_claims(const std::string& raw) {
    const auto lines = split_lines(raw);
    const auto span = find_fence(lines, kBeginClaims, kEndClaims, 0);

    ClaimsParse out;
    int expected = 1;
    for (std::size_t i = span.begin_line + 1; i < span.end_line; ++i) {
        const std::string line = unescape_text(lines[i]);
        if (trim(line).empty()) continue;

        int number;
        std::string rest;
        if (!split_numbered(line, number, rest)) {
            throw ParseError(ParseErrorKind::bad_line, line,
                             "claim line lacks 'k.' numbering: " + trim(line));
        }
        if (number != expected) {
            throw ParseError(ParseErrorKind::non_contiguous_numbering, std::to_string(expected),
                             "non-contiguous claim numbering: got " + std::to_string(number) +
                                 ", expected " + std::to_string(expected));
        }
        auto fields = split_fields(rest);
        if (fields.size() < 2) {
            throw ParseError(ParseErrorKind::missing_separator, trim(line),
                             "claim line missing '||' separator: " + trim(line));
        }
        if (fields.size() > 3) {
            throw ParseError(ParseErrorKind::bad_line, trim(line),
                             "claim line has too many fields: " + trim(line));
        }

        const std::string claim_text = strip_prefix(trim(fields[0]), "CLAIM:");
        const std::string query_text = strip_prefix(trim(fields[1]), "QUERY:");
        if (trim(fields[0]).rfind("CLAIM:", 0) != 0 || trim(fields[1]).rfind("QUERY:", 0) != 0) {
            throw ParseError(ParseErrorKind::bad_line, trim(line),
                             "claim line fields must be 'CLAIM: ... || QUERY: ...': " + trim(line));
        }
        ClaimOrigin origin = ClaimOrigin::chain;
        if (fields.size() == 3) {
            const std::string from = strip_prefix(trim(fields[2]), "FROM:");
            if (from == "ANSWER") {
                origin = ClaimOrigin::answer;
            } else if (from == "CHAIN") {
                origin = ClaimOrigin::chain;
            } else {
                throw ParseError(ParseErrorKind::bad_line, trim(fields[2]),
                                 "claim FROM field must be CHAIN or ANSWER: " + trim(fields[2]));
            }
        }
        if (claim_text.empty()) {
            throw ParseError(ParseErrorKind::empty_field, "CLAIM",
                             "claim " + std::to_string(number) + " has empty CLAIM text");
        }
        if (query_text.empty()) {
            throw ParseError(ParseErrorKind::empty_field, "QUERY",
                             "claim " + std::to_string(number) + " has empty QUERY text");
        }

        out.claims.push_back({number, unescape_field(claim_text), origin});
        out.queries.push_back({number, unescape_field(query_text)});
        ++expected;
    }
    return out;
}

std::vector<VerificationRecord> parse_evidence(const std::string& raw,
                                               const std::vector<int>& expected_claim_ids) {
    const auto lines = split_lines(raw);
    const auto span = find_fence(lines, kBeginEvidence, kEndEvidence, 0);

    std::map<int, VerificationRecord> by_id;
    for (std::size_t i = span.begin_line + 1; i < span.end_line; ++i) {
        const std::string line = unescape_text(lines[i]);
        if (trim(line).empty()) continue;

        int number;
        std::string rest;
        if (!split_numbered(line, number, rest)) {
            throw ParseError(ParseErrorKind::bad_line, line,
                             "evidence line lacks 'k.' numbering: " + trim(line));
        }
        auto fields = split_fields(rest);
        if (fields.size() == 2 && trim(fields[1]).rfind("EVIDENCE:", 0) == 0) {
            throw ParseError(ParseErrorKind::missing_source, std::to_string(number),
                             "evidence line " + std::to_string(number) + " missing SOURCE field");
        }
        if (fields.size() != 3) {
            throw ParseError(ParseErrorKind::missing_separator, trim(line),
                             "evidence line must be 'VERDICT: ... || EVIDENCE: ... || SOURCE: ...': " +
                                 trim(line));
        }

        const std::string verdict_tok = strip_prefix(trim(fields[0]), "VERDICT:");
        const std::string evidence = strip_prefix(trim(fields[1]), "EVIDENCE:");
        const std::string source = strip_prefix(trim(fields[2]), "SOURCE:");
        if (trim(fields[0]).rfind("VERDICT:", 0) != 0 ||
            trim(fields[1]).rfind("EVIDENCE:", 0) != 0) {
            throw ParseError(ParseErrorKind::bad_line, trim(line),
                             "evidence line fields out of order: " + trim(line));
        }
        if (trim(fields[2]).rfind("SOURCE:", 0) != 0 || source.empty()) {
            throw ParseError(ParseErrorKind::missing_source, std::to_string(number),
                             "evidence line " + std::to_string(number) + " missing SOURCE field");
        }

        Verdict verdict;
        if (verdict_tok == "CONFIRMED") verdict = Verdict::confirmed;
        else if (verdict_tok == "REFUTED") verdict = Verdict::refuted;
        else if (verdict_tok == "NEEDS_CONTEXT") verdict = Verdict::needs_context;
        else if (verdict_tok == "ALTERNATIVE") verdict = Verdict::alternative;
        else {
            throw ParseError(ParseErrorKind::unknown_verdict, verdict_tok,
                             "unknown verdict token '" + verdict_tok +
                                 "' (allowed: CONFIRMED, REFUTED, NEEDS_CONTEXT, ALTERNATIVE)");
        }
        if (evidence.empty()) {
            throw ParseError(ParseErrorKind::empty_field, "EVIDENCE",
                             "evidence line " + std::to_string(number) + " has empty EVIDENCE");
        }
        if (by_id.count(number)) {
            throw ParseError(ParseErrorKind::duplicate_id, std::to_string(number),
                             "duplicate evidence id " + std::to_string(number));
        }
        by_id[number] = {number, verdict, unescape_field(evidence), unescape_field(source)};
    }

    const std::set<int> expected(expected_claim_ids.begin(), expected_claim_ids.end());
    std::vector<int> missing, extra;
    for (int id : expected) {
        if (!by_id.count(id)) missing.push_back(id);
    }
    for (const auto& [id, rec] : by_id) {
        if (!expected.count(id)) extra.push_back(id);
    }
    if (!missing.empty() || !extra.empty()) {
        std::ostringstream msg;
        msg << "evidence ids do not match claims:";
        std::string detail;
        if (!missing.empty()) {
            msg << " missing {";
            for (std::size_t i = 0; i < missing.size(); ++i) {
                if (i) msg << ", ";
                msg << missing[i];
                detail += (i ? "," : "") + std::to_string(missing[i]);
            }
            msg << "}";
        }
        if (!extra.empty()) {
            msg << " extra {";
            for (std::size_t i = 0; i < extra.size(); ++i) {
                if (i) msg << ", ";
                msg << extra[i];
            }
            msg << "}";
        }
        throw ParseError(ParseErrorKind::id_mismatch, detail, msg.str());
    }

    std::vector<VerificationRecord> records;
    records.reserve(by_id.size());
    for (auto& [id, rec] : by_id) records.push_back(std::move(rec));
    return records;
}

RefinedParse parse_refined(const std::string& raw,
                           const std::vector<VerificationRecord>& verifications) {
    const auto lines = split_lines(raw);
    const auto reasoning = find_fence(lines, kBeginReasoning, kEndReasoning, 0);
    const auto answer = find_fence(lines, kBeginAnswer, kEndAnswer, reasoning.end_line + 1);
    const auto sources = find_fence(lines, kBeginSources, kEndSources, answer.end_line + 1);

    const std::string reasoning_body = fence_body(lines, reasoning);
    if (trim(reasoning_body).empty()) throw_empty_fence("REASONING");
    const std::string answer_body = fence_body(lines, answer);
    if (trim(answer_body).empty()) throw_empty_fence("ANSWER");

    // SOURCES entries: "n. <source text>", contiguous from 1. May be empty.
    std::vector<std::string> entries;
    for (std::size_t i = sources.begin_line + 1; i < sources.end_line; ++i) {
        const std::string line = unescape_text(lines[i]);
        if (trim(line).empty()) continue;
        int number;
        std::string rest;
        if (!split_numbered(line, number, rest)) {
            throw ParseError(ParseErrorKind::bad_line, line,
                             "SOURCES line lacks 'n.' numbering: " + trim(line));
        }
        if (number != static_cast<int>(entries.size()) + 1) {
            throw ParseError(ParseErrorKind::non_contiguous_numbering,
                             std::to_string(entries.size() + 1),
                             "non-contiguous SOURCES numbering: got " + std::to_string(number) +
                                 ", expected " + std::to_string(entries.size() + 1));
        }
        if (trim(rest).empty()) {
            throw ParseError(ParseErrorKind::empty_field, "SOURCES",
                             "SOURCES entry " + std::to_string(number) + " is empty");
        }
        entries.push_back(trim(rest));
    }

    const auto marker_indices = extract_marker_indices(answer_body);
    for (std::size_t i = 0; i < marker_indices.size(); ++i) {
        if (marker_indices[i] != static_cast<int>(i) + 1) {
            throw ParseError(ParseErrorKind::marker_gap, std::to_string(i + 1),
                             "citation markers have a gap: [" + std::to_string(i + 1) +
                                 "] is missing");
        }
    }
    if (!marker_indices.empty() &&
        static_cast<int>(entries.size()) < marker_indices.back()) {
        throw ParseError(ParseErrorKind::source_count_short, std::to_string(entries.size()),
                         "SOURCES lists " + std::to_string(entries.size()) +
                             " entries but markers go up to [" +
                             std::to_string(marker_indices.back()) + "]");
    }

    RefinedParse out;
    out.trace.steps = reasoning_steps(reasoning_body);
    out.trace.raw = reasoning_body;
    out.trace.stage = Stage::final;
    out.answer.text = answer_body;
    out.answer.stage = Stage::final;

    for (int n : marker_indices) {
        const std::string& entry = entries[static_cast<std::size_t>(n) - 1];
        const std::string norm_entry = normalize_ws(entry);
        int ref = -1;
        for (std::size_t i = 0; i < verifications.size(); ++i) {
            if (normalize_ws(verifications[i].source) == norm_entry) {
                ref = static_cast<int>(i);
                break;
            }
        }
        if (ref < 0) {
            // claim_id 0 flags the record as unattributed for evaluation.
            out.unattributed.push_back(
                {0, Verdict::needs_context, "unattributed source", entry});
            ref = static_cast<int>(verifications.size() + out.unattributed.size() - 1);
        }
        out.answer.markers.push_back({n, ref});
    }
    return out;
}

std::string repair_prompt_text(StageTag stage, const ParseError& error) {
    std::string hint;
    switch (error.kind()) {
        case ParseErrorKind::non_contiguous_numbering:
        case ParseErrorKind::duplicate_id:
            hint = "Please renumber claims contiguously starting at 1, one item per line.";
            break;
        case ParseErrorKind::unknown_verdict:
            hint = "The only allowed verdict tokens are CONFIRMED, REFUTED, NEEDS_CONTEXT, "
                   "ALTERNATIVE.";
            break;
        case ParseErrorKind::missing_fence:
            hint = "The " + error.detail() + " fence line is required and must appear alone "
                   "at the start of a line.";
            break;
        case ParseErrorKind::id_mismatch:
            hint = "Emit exactly one line per numbered query, using the same numbers.";
            break;
        case ParseErrorKind::missing_source:
            hint = "Every evidence line must end with '|| SOURCE: <citation source>'.";
            break;
        case ParseErrorKind::marker_gap:
            hint = "Citation markers must be [1], [2], ... with no gaps.";
            break;
        case ParseErrorKind::source_count_short:
            hint = "The SOURCES block must list one entry per citation marker.";
            break;
        default:
            hint = "Follow the output format exactly.";
            break;
    }
    return "Your previous reply could not be parsed: " + std::string(error.what()) + "\n" +
           hint + "\nReply again using exactly this format:\n" + grammar_spec(stage);
}

std::string grammar_spec(StageTag stage) {
    switch (stage) {
        case StageTag::initial_cot:
        case StageTag::standard_cot:
        case StageTag::rag_cot:
            return "BEGIN_REASONING\n"
                   "1. <first reasoning step>\n"
                   "2. <next reasoning step>\n"
                   "END_REASONING\n"
                   "BEGIN_ANSWER\n"
                   "<final answer text>\n"
                   "END_ANSWER";
        case StageTag::claim_extract:
            return "BEGIN_CLAIMS\n"
                   "1. CLAIM: <declarative statement> || QUERY: <one verification question>\n"
                   "2. CLAIM: <...> || QUERY: <...>\n"
                   "END_CLAIMS";
        case StageTag::verify_simulate:
            return "BEGIN_EVIDENCE\n"
                   "1. VERDICT: <CONFIRMED|REFUTED|NEEDS_CONTEXT|ALTERNATIVE> || "
                   "EVIDENCE: <decisive evidence> || SOURCE: <citation source>\n"
                   "END_EVIDENCE";
        case StageTag::refine_integrate:
            return "BEGIN_REASONING\n"
                   "1. <refined reasoning step>\n"
                   "END_REASONING\n"
                   "BEGIN_ANSWER\n"
                   "<refined answer with [n] citation markers>\n"
                   "END_ANSWER\n"
                   "BEGIN_SOURCES\n"
                   "1. <source text for marker 1>\n"
                   "END_SOURCES";
    }
    return {};
}

// ---------------------------------------------------------------------------
// Canonical serializers
// ---------------------------------------------------------------------------

std::string render_claims_block(const std::vector<FactualClaim>& claims,
                                const std::vector<VerificationQuery>& queries) {
    if (claims.size() != queries.size()) {
        throw std::invalid_argument("claims and queries must pair one-to-one");
    }
    std::ostringstream out;
    out << kBeginClaims << '\n';
    for (std::size_t i = 0; i < claims.size(); ++i) {
        check_single_line(claims[i].text, "claim text");
        check_single_line(queries[i].text, "query text");
        out << claims[i].claim_id << ". CLAIM: " << escape_field(claims[i].text)
            << " || QUERY: " << escape_field(queries[i].text);
        if (claims[i].origin == ClaimOrigin::answer) out << " || FROM: ANSWER";
        out << '\n';
    }
    out << kEndClaims;
    return out.str();
}

std::string render_queries_block(const std::vector<VerificationQuery>& queries) {
    std::ostringstream out;
    for (std::size_t i = 0; i < queries.size(); ++i) {
        check_single_line(queries[i].text, "query text");
        if (i) out << '\n';
        out << queries[i].claim_id << ". QUERY: " << escape_field(queries[i].text);
    }
    return out.str();
}

std::string render_evidence_block(const std::vector<VerificationRecord>& records) {
    std::ostringstream out;
    out << kBeginEvidence << '\n';
    for (const auto& rec : records) {
        check_single_line(rec.evidence, "evidence text");
        check_single_line(rec.source, "source text");
        std::string verdict;
        switch (rec.verdict) {
            case Verdict::confirmed: verdict = "CONFIRMED"; break;
            case Verdict::refuted: verdict = "REFUTED"; break;
            case Verdict::needs_context: verdict = "NEEDS_CONTEXT"; break;
            case Verdict::alternative: verdict = "ALTERNATIVE"; break;
        }
        out << rec.claim_id << ". VERDICT: " << verdict
            << " || EVIDENCE: " << escape_field(rec.evidence)
            << " || SOURCE: " << escape_field(rec.source) << '\n';
    }
    out << kEndEvidence;
    return out.str();
}

std::string render_refined_block(const ReasoningTrace& trace, const CitedAnswer& answer,
                                 const std::vector<std::string>& sources) {
    std::ostringstream out;
    out << kBeginReasoning << '\n';
    // Steps sit after the "k. " prefix, never at line start, so fence
    // escaping does not apply to them.
    for (std::size_t i = 0; i < trace.steps.size(); ++i) {
        check_single_line(trace.steps[i], "reasoning step");
        out << (i + 1) << ". " << trace.steps[i] << '\n';
    }
    out << kEndReasoning << '\n';
    out << kBeginAnswer << '\n' << escape_text(answer.text) << '\n' << kEndAnswer << '\n';
    out << kBeginSources << '\n';
    for (std::size_t i = 0; i < sources.size(); ++i) {
        check_single_line(sources[i], "source entry");
        out << (i + 1) << ". " << sources[i] << '\n';
    }
    out << kEndSources;
    return out.str();
}

}  // namespace verifact::wire
