#include "verifact/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <functional>

#include "verifact/wire.hpp"

namespace verifact::pipeline {

namespace {

using Clock = std::chrono::steady_clock;

std::vector<std::pair<std::string, std::string>> message_transcript(
    const std::vector<ChatMessage>& messages) {
    std::vector<std::pair<std::string, std::string>> out;
    out.reserve(messages.size());
    for (const auto& m : messages) out.emplace_back(to_string(m.role), m.content);
    return out;
}

/// Runs one stage: render, complete, parse; on a parse failure, one repair
/// round (assistant reply + corrective user message) before giving up.
template <typename T>
StageRun<T> run_stage(PipelineContext& ctx, StageTag tag,
                      const prompts::PlaceholderMap& context,
                      const std::function<T(const std::string&)>& parse) {
    StageRun<T> run;
    run.outcome.stage_tag = tag;
    const auto start = Clock::now();

    auto finish = [&](void) {
        run.outcome.duration_ms =
            std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start).count();
    };

    std::vector<ChatMessage> messages;
    try {
        messages = prompts::render(ctx.templates, tag, context);
    } catch (const prompts::PromptError& e) {
        run.outcome.error_kind = "prompt";
        run.outcome.error_message = e.what();
        finish();
        return run;
    }
    run.outcome.messages = message_transcript(messages);

    for (int round = 0; round < 2; ++round) {
        CompletionResult completion;
        try {
            completion = ctx.provider.complete(messages, ctx.params, to_string(tag));
        } catch (const ProviderError& e) {
            run.outcome.error_kind = to_string(e.kind());
            run.outcome.error_message = e.what();
            finish();
            return run;
        }
        run.outcome.raw = completion.text;
        run.outcome.retry_count += completion.retry_count;
        run.outcome.usage.prompt_tokens += completion.usage.prompt_tokens;
        run.outcome.usage.completion_tokens += completion.usage.completion_tokens;

        try {
            run.value = parse(completion.text);
            run.outcome.ok = true;
            run.outcome.error_kind.clear();
            run.outcome.error_message.clear();
            finish();
            return run;
        } catch (const wire::ParseError& e) {
            run.outcome.error_kind = "parse_" + wire::to_string(e.kind());
            run.outcome.error_message = e.what();
            if (round == 0) {
                run.outcome.repair_used = true;
                messages.push_back({Role::assistant, completion.text});
                messages.push_back({Role::user, wire::repair_prompt_text(tag, e)});
                run.outcome.messages = message_transcript(messages);
            }
        }
    }
    finish();
    return run;
}

std::string render_docs_block(const retrieval::CorpusIndex& index,
                              const std::vector<retrieval::ScoredDoc>& docs) {
    std::string block;
    for (const auto& doc : docs) {
        if (!block.empty()) block += "\n\n";
        block += "Document " + doc.doc_id + ":\n";
        // Third-party text: fence-escape so a document cannot smuggle
        // grammar keywords into the prompt.
        block += wire::escape_text(index.docs.at(doc.doc_id));
    }
    return block;
}

StagePair as_final(const StagePair& initial) {
    StagePair out = initial;
    out.trace.stage = Stage::final;
    out.answer.stage = Stage::final;
    return out;
}

void record_failure(RunRecord& record, const StageOutcome& outcome) {
    record.failed_stage = to_string(outcome.stage_tag);
}

}  // namespace

StageRun<StagePair> run_initial_cot(PipelineContext& ctx, const TaskInstance& task) {
    return run_stage<StagePair>(ctx, StageTag::initial_cot, {{"query", task.query}},
                                [](const std::string& raw) {
                                    auto [trace, answer] = wire::parse_cot(raw);
                                    return StagePair{std::move(trace), std::move(answer)};
                                });
}

StageRun<ClaimsAndQueries> extract_claims(PipelineContext& ctx, const ReasoningTrace& chain,
                                          const CitedAnswer& answer) {
    return run_stage<ClaimsAndQueries>(
        ctx, StageTag::claim_extract, {{"chain", chain.raw}, {"answer", answer.text}},
        [](const std::string& raw) {
            auto parsed = wire::parse_claims(raw);
            return ClaimsAndQueries{std::move(parsed.claims), std::move(parsed.queries)};
        });
}

StageRun<std::vector<VerificationRecord>> simulate_verification(
    PipelineContext& ctx, const std::vector<VerificationQuery>& queries) {
    std::vector<int> expected_ids;
    expected_ids.reserve(queries.size());
    for (const auto& q : queries) expected_ids.push_back(q.claim_id);

    return run_stage<std::vector<VerificationRecord>>(
        ctx, StageTag::verify_simulate,
        {{"queries_block", wire::render_queries_block(queries)}},
        [expected_ids](const std::string& raw) {
            return wire::parse_evidence(raw, expected_ids);
        });
}

StageRun<RefinedOutput> refine_and_cite(PipelineContext& ctx, const ReasoningTrace& chain,
                                        const CitedAnswer& answer,
                                        const std::vector<VerificationRecord>& verifications) {
    return run_stage<RefinedOutput>(
        ctx, StageTag::refine_integrate,
        {{"chain", chain.raw},
         {"answer", answer.text},
         {"evidence_block", wire::render_evidence_block(verifications)}},
        [&verifications](const std::string& raw) {
            auto parsed = wire::parse_refined(raw, verifications);
            return RefinedOutput{std::move(parsed.trace), std::move(parsed.answer),
                                 std::move(parsed.unattributed)};
        });
}

std::string whole_text_query(const CitedAnswer& answer) {
    // Query texts are single-line in the wire grammar.
    std::string flattened = answer.text;
    std::replace(flattened.begin(), flattened.end(), '\n', ' ');
    return "Verify all factual content of the following answer: " + flattened;
}

RunRecord run_verifact(PipelineContext& ctx, const TaskInstance& task,
                       const AblationConfig& ablation) {
    RunRecord record;
    record.task_id = task.id;
    record.method = Method::verifact;
    record.ablation = ablation;

    // Stage 1: initial reasoning chain and answer.
    auto initial = run_initial_cot(ctx, task);
    record.stages.push_back(initial.outcome);
    if (!initial.ok()) {
        record_failure(record, initial.outcome);
        return record;
    }
    record.initial = *initial.value;

    // Stage 2: claim extraction, or a synthetic whole-text query when ablated.
    if (ablation.skip_claim_extraction) {
        record.queries.push_back({1, whole_text_query(initial.value->answer)});
    } else {
        auto claims = extract_claims(ctx, initial.value->trace, initial.value->answer);
        record.stages.push_back(claims.outcome);
        if (!claims.ok()) {
            record_failure(record, claims.outcome);
            return record;
        }
        record.claims = claims.value->claims;
        record.queries = claims.value->queries;

        if (record.claims.empty()) {
            // Nothing to verify: stages 3-4 are skipped and the initial
            // output is carried through unchanged.
            record.no_claims = true;
            record.final_output = as_final(*initial.value);
            return record;
        }
    }

    // Stage 3: simulated verification over all queries.
    if (!ablation.skip_verification) {
        auto verification = simulate_verification(ctx, record.queries);
        record.stages.push_back(verification.outcome);
        if (!verification.ok()) {
            record_failure(record, verification.outcome);
            return record;
        }
        record.verifications = *verification.value;
    }

    // Stage 4: refinement and citation integration.
    if (ablation.skip_refinement) {
        record.final_output = as_final(*initial.value);
        record.verification_attached = !record.verifications.empty();
        return record;
    }

    auto refined =
        refine_and_cite(ctx, initial.value->trace, initial.value->answer, record.verifications);
    record.stages.push_back(refined.outcome);
    if (!refined.ok()) {
        record_failure(record, refined.outcome);
        return record;
    }
    for (auto& rec : refined.value->unattributed) {
        record.verifications.push_back(rec);
    }
    record.final_output = StagePair{refined.value->trace, refined.value->answer};
    return record;
}

RunRecord run_standard_cot(PipelineContext& ctx, const TaskInstance& task) {
    RunRecord record;
    record.task_id = task.id;
    record.method = Method::standard_cot;

    auto run = run_stage<StagePair>(ctx, StageTag::standard_cot, {{"query", task.query}},
                                    [](const std::string& raw) {
                                        auto [trace, answer] = wire::parse_cot(raw);
                                        return StagePair{std::move(trace), std::move(answer)};
                                    });
    record.stages.push_back(run.outcome);
    if (!run.ok()) {
        record_failure(record, run.outcome);
        return record;
    }
    record.initial = *run.value;
    record.final_output = as_final(*run.value);
    return record;
}

RunRecord run_cot_rag(PipelineContext& ctx, const TaskInstance& task,
                      const retrieval::CorpusIndex& index, int k) {
    RunRecord record;
    record.task_id = task.id;
    record.method = Method::cot_rag;

    const auto retrieved = retrieval::retrieve(index, task.query, k);
    for (const auto& doc : retrieved) record.retrieved_doc_ids.push_back(doc.doc_id);

    auto run = run_stage<StagePair>(
        ctx, StageTag::rag_cot,
        {{"query", task.query}, {"retrieved_docs", render_docs_block(index, retrieved)}},
        [](const std::string& raw) {
            auto [trace, answer] = wire::parse_cot(raw);
            return StagePair{std::move(trace), std::move(answer)};
        });
    record.stages.push_back(run.outcome);
    if (!run.ok()) {
        record_failure(record, run.outcome);
        return record;
    }
    record.initial = *run.value;
    record.final_output = as_final(*run.value);
    return record;
}

}  // namespace verifact::pipeline
