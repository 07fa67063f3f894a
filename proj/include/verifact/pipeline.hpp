#pragma once

#include <optional>
#include <string>
#include <vector>

#include "verifact/core.hpp"
#include "verifact/prompting.hpp"
#include "verifact/provider.hpp"
#include "verifact/retrieval.hpp"

namespace verifact::pipeline {

struct PipelineContext {
    Provider& provider;
    const prompts::TemplateMap& templates;
    CompletionParams params;
};

/// Result of one stage: the parsed artifact when the stage succeeded, plus
/// the full transcript either way.
template <typename T>
struct StageRun {
    std::optional<T> value;
    StageOutcome outcome;

    bool ok() const { return value.has_value(); }
};

struct ClaimsAndQueries {
    std::vector<FactualClaim> claims;
    std::vector<VerificationQuery> queries;
};

struct RefinedOutput {
    ReasoningTrace trace;
    CitedAnswer answer;
    std::vector<VerificationRecord> unattributed;
};

// The four generative stages. Each makes exactly one provider call, plus at
// most one repair round when the completion fails to parse.

StageRun<StagePair> run_initial_cot(PipelineContext& ctx, const TaskInstance& task);

StageRun<ClaimsAndQueries> extract_claims(PipelineContext& ctx, const ReasoningTrace& chain,
                                          const CitedAnswer& answer);

StageRun<std::vector<VerificationRecord>> simulate_verification(
    PipelineContext& ctx, const std::vector<VerificationQuery>& queries);

StageRun<RefinedOutput> refine_and_cite(PipelineContext& ctx, const ReasoningTrace& chain,
                                        const CitedAnswer& answer,
                                        const std::vector<VerificationRecord>& verifications);

/// Query text used for stage 3 when claim extraction is ablated: the whole
/// answer is verified as one unit.
std::string whole_text_query(const CitedAnswer& answer);

/// Executes the four-stage pipeline (or an ablated variant of it) over one
/// task. Stage failures are recorded in the returned RunRecord; no
/// provider or parse exception escapes.
RunRecord run_verifact(PipelineContext& ctx, const TaskInstance& task,
                       const AblationConfig& ablation);

/// Single-stage baseline: one standard_cot completion, final = initial.
RunRecord run_standard_cot(PipelineContext& ctx, const TaskInstance& task);

/// RAG baseline: top-k retrieval for the task query prepended to one rag_cot
/// completion. Retrieved doc ids are recorded; an empty index runs with
/// zero docs.
RunRecord run_cot_rag(PipelineContext& ctx, const TaskInstance& task,
                      const retrieval::CorpusIndex& index, int k);

}  // namespace verifact::pipeline
