#include "verifact/prompting.hpp"

#include <algorithm>
#include <array>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "verifact/wire.hpp"

namespace verifact::prompts {

namespace {

constexpr std::array<const char*, 7> kAllPlaceholders = {
    "query",       "chain",          "answer",        "claims_block",
    "queries_block", "evidence_block", "retrieved_docs",
};

const std::set<std::string> kScalarPlaceholders = {"query", "chain", "answer"};

TemplateMap build_defaults() {
    TemplateMap map;

    const std::string cot_grammar = wire::grammar_spec(StageTag::initial_cot);

    map[StageTag::initial_cot] = {
        StageTag::initial_cot,
        "You are a careful assistant that reasons step by step before answering. "
        "Follow the requested output format exactly.",
        "Answer the question below. First lay out your reasoning as numbered steps, "
        "then give your final answer.\n"
        "\n"
        "Question: {query}\n"
        "\n"
        "Output format, exactly:\n" +
            cot_grammar,
    };

    map[StageTag::standard_cot] = {
        StageTag::standard_cot,
        "You are a careful assistant that reasons step by step before answering. "
        "Follow the requested output format exactly.",
        "Answer the question below using your own knowledge. Think step by step, "
        "then give your final answer.\n"
        "\n"
        "Question: {query}\n"
        "\n"
        "Output format, exactly:\n" +
            cot_grammar,
    };

    map[StageTag::rag_cot] = {
        StageTag::rag_cot,
        "You are a careful assistant that reasons step by step before answering. "
        "Ground your answer in the retrieved documents where they are relevant. "
        "Follow the requested output format exactly.",
        "Answer the question below. Retrieved documents that may be relevant are "
        "listed first; use them where they help. Think step by step, then give "
        "your final answer.\n"
        "\n"
        "Retrieved documents:\n"
        "{retrieved_docs}\n"
        "\n"
        "Question: {query}\n"
        "\n"
        "Output format, exactly:\n" +
            cot_grammar,
    };

    map[StageTag::claim_extract] = {
        StageTag::claim_extract,
        "You audit your own output for factual content. Follow the requested "
        "output format exactly.",
        "Below are a reasoning chain and an answer you produced earlier. Extract "
        "every objectively checkable declarative statement (dates, names, "
        "quantities, causal relationships); one claim per line. Pair each claim "
        "with one concise, precise, and unambiguous verification question.\n"
        "\n"
        "Reasoning chain:\n"
        "{chain}\n"
        "\n"
        "Answer:\n"
        "{answer}\n"
        "\n"
        "Output format, exactly:\n" +
            wire::grammar_spec(StageTag::claim_extract) +
            "\n"
            "Append ' || FROM: ANSWER' to claims taken from the answer rather than "
            "the reasoning chain. If there are no checkable claims, emit "
            "BEGIN_CLAIMS and END_CLAIMS with nothing between them.",
    };

    map[StageTag::verify_simulate] = {
        StageTag::verify_simulate,
        "You act as an internal fact checker. Judge each query against your own "
        "knowledge. Follow the requested output format exactly.",
        "For each verification query below, give a verdict, the decisive piece of "
        "evidence (confirming truthfulness, identifying an inaccuracy, supplying "
        "missing context, or offering an alternative perspective), and one "
        "plausible citation source. A source may be the title of an authoritative "
        "reference work, a book with its author, the name of a credible "
        "institution, or a hypothetical URL to an academic paper.\n"
        "\n"
        "Queries:\n"
        "{queries_block}\n"
        "\n"
        "Output format, exactly, using the same numbering as the queries:\n" +
            wire::grammar_spec(StageTag::verify_simulate),
    };

    map[StageTag::refine_integrate] = {
        StageTag::refine_integrate,
        "You revise your own earlier output using verification evidence. Follow "
        "the requested output format exactly.",
        "Rewrite the reasoning chain and answer below using the verification "
        "evidence: correct any statement the evidence refutes, work in richer or "
        "more precise details the evidence supplies, and attach a bracketed "
        "citation marker like [1] to each key factual statement in the answer. "
        "List the cited sources in the SOURCES block, one entry per marker, "
        "repeating the SOURCE text from the evidence verbatim.\n"
        "\n"
        "Original reasoning chain:\n"
        "{chain}\n"
        "\n"
        "Original answer:\n"
        "{answer}\n"
        "\n"
        "Verification evidence:\n"
        "{evidence_block}\n"
        "\n"
        "Output format, exactly:\n" +
            wire::grammar_spec(StageTag::refine_integrate),
    };

    return map;
}

}  // namespace

const TemplateMap& default_templates() {
    static const TemplateMap map = build_defaults();
    return map;
}

const std::vector<std::string>& required_placeholders(StageTag stage) {
    static const std::map<StageTag, std::vector<std::string>> required = {
        {StageTag::initial_cot, {"query"}},
        {StageTag::standard_cot, {"query"}},
        {StageTag::rag_cot, {"query", "retrieved_docs"}},
        {StageTag::claim_extract, {"chain", "answer"}},
        {StageTag::verify_simulate, {"queries_block"}},
        {StageTag::refine_integrate, {"chain", "answer", "evidence_block"}},
    };
    return required.at(stage);
}

std::vector<ChatMessage> render(const StageTemplate& tpl, const PlaceholderMap& context) {
    // Single pass over the template: substituted values are never rescanned,
    // so a value containing "{query}" cannot trigger a second substitution.
    std::string user;
    user.reserve(tpl.user_template.size());
    std::size_t pos = 0;
    while (pos < tpl.user_template.size()) {
        const std::size_t open = tpl.user_template.find('{', pos);
        if (open == std::string::npos) {
            user.append(tpl.user_template, pos, std::string::npos);
            break;
        }
        user.append(tpl.user_template, pos, open - pos);
        const std::size_t close = tpl.user_template.find('}', open);
        bool substituted = false;
        if (close != std::string::npos) {
            const std::string name = tpl.user_template.substr(open + 1, close - open - 1);
            const bool known =
                std::find_if(kAllPlaceholders.begin(), kAllPlaceholders.end(),
                             [&](const char* p) { return name == p; }) != kAllPlaceholders.end();
            if (known) {
                const auto it = context.find(name);
                if (it == context.end()) {
                    throw PromptError("missing placeholder '" + name + "' for stage " +
                                      to_string(tpl.stage_tag));
                }
                user += kScalarPlaceholders.count(name) ? wire::escape_text(it->second)
                                                        : it->second;
                pos = close + 1;
                substituted = true;
            }
        }
        if (!substituted) {
            user += '{';
            pos = open + 1;
        }
    }
    return {{Role::system, tpl.system_text}, {Role::user, user}};
}

std::vector<ChatMessage> render(const TemplateMap& templates, StageTag stage,
                                const PlaceholderMap& context) {
    const auto it = templates.find(stage);
    if (it == templates.end()) {
        throw PromptError("no template for stage " + to_string(stage));
    }
    return render(it->second, context);
}

TemplateMap load_template_dir(const std::string& dir) {
    TemplateMap map = default_templates();
    for (auto& [tag, tpl] : map) {
        const std::filesystem::path path = std::filesystem::path(dir) / (to_string(tag) + ".txt");
        if (!std::filesystem::exists(path)) continue;
        std::ifstream in(path);
        if (!in) throw PromptError("cannot open template override: " + path.string());
        std::string line, system_text, user_template;
        bool in_user = false;
        bool first = true;
        while (std::getline(in, line)) {
            if (!in_user && line == "---") {
                in_user = true;
                first = true;
                continue;
            }
            auto& target = in_user ? user_template : system_text;
            if (!first) target += '\n';
            target += line;
            first = false;
        }
        if (!in_user) {
            throw PromptError("template override " + path.string() +
                              " lacks the '---' system/user separator");
        }
        tpl = {tag, system_text, user_template};
    }
    return map;
}

}  // namespace verifact::prompts
