#include <doctest.h>

#include <atomic>

#include "verifact/pipeline.hpp"
#include "verifact/wire.hpp"

using namespace verifact;
using namespace verifact::pipeline;

namespace {

const std::string kFixtures = VERIFACT_FIXTURES_DIR;

class CountingProvider : public Provider {
public:
    explicit CountingProvider(Provider& inner) : inner_(inner) {}

    CompletionResult complete(const std::vector<ChatMessage>& messages,
                              const CompletionParams& params,
                              const std::string& stage_tag) override {
        calls_.fetch_add(1);
        return inner_.complete(messages, params, stage_tag);
    }

    int calls() const { return calls_.load(); }

private:
    Provider& inner_;
    std::atomic<int> calls_{0};
};

TaskInstance fixture_task() {
    return load_dataset(kFixtures + "/spanish_succession_dataset.jsonl").at(0);
}

std::unique_ptr<ScriptedProvider> fixture_provider() {
    return load_script(kFixtures + "/spanish_succession_script.json");
}

std::string user_prompt(const StageOutcome& outcome) {
    for (const auto& [role, content] : outcome.messages) {
        if (role == "user") return content;
    }
    return {};
}

}  // namespace

TEST_CASE("initial stage reproduces the scripted walkthrough texts") {
    auto provider = fixture_provider();
    PipelineContext ctx{*provider, prompts::default_templates(), {}};
    const auto run = run_initial_cot(ctx, fixture_task());
    REQUIRE(run.ok());
    CHECK(run.value->trace.steps.size() == 4);
    CHECK(run.value->trace.steps[0] ==
          "The War of the Spanish Succession began because King Charles II of Spain died "
          "without an heir.");
    CHECK(run.value->answer.text.find("succession crisis in Spain") != std::string::npos);
    CHECK(run.value->answer.markers.empty());
    CHECK(run.value->trace.stage == Stage::initial);
}

TEST_CASE("claim extraction pairs the walkthrough claim with its query") {
    auto provider = fixture_provider();
    PipelineContext ctx{*provider, prompts::default_templates(), {}};
    const auto initial = run_initial_cot(ctx, fixture_task());
    REQUIRE(initial.ok());
    const auto claims = extract_claims(ctx, initial.value->trace, initial.value->answer);
    REQUIRE(claims.ok());
    REQUIRE(claims.value->claims.size() == 3);
    CHECK(claims.value->claims[0].text == "King Charles II of Spain died without an heir");
    CHECK(claims.value->queries[0].text == "When did King Charles II of Spain die?");
    CHECK(claims.value->queries.size() == claims.value->claims.size());
}

TEST_CASE("verification returns the walkthrough evidence for claim 2") {
    auto provider = fixture_provider();
    PipelineContext ctx{*provider, prompts::default_templates(), {}};
    const auto initial = run_initial_cot(ctx, fixture_task());
    const auto claims = extract_claims(ctx, initial.value->trace, initial.value->answer);
    const auto verification = simulate_verification(ctx, claims.value->queries);
    REQUIRE(verification.ok());
    REQUIRE(verification.value->size() == 3);
    const auto& second = verification.value->at(1);
    CHECK(second.claim_id == 2);
    CHECK(second.verdict == Verdict::needs_context);
    CHECK(second.evidence.find("crowns of France and Spain must never be united") !=
          std::string::npos);
    CHECK(second.source == "John A. Lynn, 'The Wars of Louis XIV'");
}

TEST_CASE("refinement integrates the dates and alliance the initial answer lacked") {
    auto provider = fixture_provider();
    PipelineContext ctx{*provider, prompts::default_templates(), {}};
    const auto initial = run_initial_cot(ctx, fixture_task());
    const auto claims = extract_claims(ctx, initial.value->trace, initial.value->answer);
    const auto verification = simulate_verification(ctx, claims.value->queries);
    const auto refined = refine_and_cite(ctx, initial.value->trace, initial.value->answer,
                                         *verification.value);
    REQUIRE(refined.ok());
    CHECK(initial.value->answer.text.find("1 November 1700") == std::string::npos);
    CHECK(refined.value->answer.text.find("1 November 1700") != std::string::npos);
    CHECK(refined.value->answer.text.find("Grand Alliance of 1701") != std::string::npos);
    REQUIRE(refined.value->answer.markers.size() == 3);
    for (const auto& marker : refined.value->answer.markers) {
        CHECK(marker.source_ref >= 0);
        CHECK(marker.source_ref < 3);
    }
    CHECK(refined.value->unattributed.empty());
}

TEST_CASE("full run records four stage outcomes and a refined final") {
    auto provider = fixture_provider();
    PipelineContext ctx{*provider, prompts::default_templates(), {}};
    const RunRecord record = run_verifact(ctx, fixture_task(), {});
    CHECK(record.stages.size() == 4);
    CHECK(record.method == Method::verifact);
    CHECK_FALSE(record.failed_stage.has_value());
    REQUIRE(record.final_output.has_value());
    CHECK(record.final_output->trace.stage == Stage::final);
    CHECK(record.claims.size() == 3);
    CHECK(record.queries.size() == 3);
    CHECK(record.verifications.size() == 3);
    for (const auto& outcome : record.stages) CHECK(outcome.ok);
}

TEST_CASE("stage-count law holds for all eight ablation combinations") {
    for (int mask = 0; mask < 8; ++mask) {
        AblationConfig ablation;
        ablation.skip_claim_extraction = (mask & 1) != 0;
        ablation.skip_verification = (mask & 2) != 0;
        ablation.skip_refinement = (mask & 4) != 0;
        const int flags = (mask & 1 ? 1 : 0) + (mask & 2 ? 1 : 0) + (mask & 4 ? 1 : 0);

        auto provider = fixture_provider();
        CountingProvider counter(*provider);
        PipelineContext ctx{counter, prompts::default_templates(), {}};
        const RunRecord record = run_verifact(ctx, fixture_task(), ablation);

        CAPTURE(mask);
        CHECK_FALSE(record.failed_stage.has_value());
        CHECK(record.stages.size() == static_cast<std::size_t>(4 - flags));
        CHECK(counter.calls() == 4 - flags);
    }
}

TEST_CASE("skip_refinement copies initial to final and flags the attached report") {
    auto provider = fixture_provider();
    PipelineContext ctx{*provider, prompts::default_templates(), {}};
    const RunRecord record = run_verifact(ctx, fixture_task(), {false, false, true});
    REQUIRE(record.final_output.has_value());
    CHECK(record.final_output->answer.text == record.initial->answer.text);
    CHECK(record.final_output->answer.stage == Stage::final);
    CHECK(record.verification_attached);
    CHECK(record.verifications.size() == 3);  // attached, not integrated
    CHECK(record.final_output->answer.markers.empty());
}

TEST_CASE("skip_claim_extraction verifies the answer as one whole-text query") {
    auto provider = fixture_provider();
    PipelineContext ctx{*provider, prompts::default_templates(), {}};
    const RunRecord record = run_verifact(ctx, fixture_task(), {true, false, false});
    CHECK(record.claims.empty());
    REQUIRE(record.queries.size() == 1);
    CHECK(record.queries[0].claim_id == 1);
    CHECK(record.queries[0].text.find("Verify all factual content of the following answer") == 0);
    CHECK(record.queries[0].text.find("succession crisis in Spain") != std::string::npos);
    // The scripted whole-text verification yields exactly one record.
    const std::size_t base_records = 1;
    CHECK(record.verifications.size() >= base_records);
}

TEST_CASE("zero extracted claims short-circuits to a passthrough final") {
    ScriptedProvider provider({
        {{{"initial_cot", 1}},
         {},
         "BEGIN_REASONING\n1. Nothing factual here.\nEND_REASONING\n"
         "BEGIN_ANSWER\nA matter of taste.\nEND_ANSWER"},
        {{{"claim_extract", 1}}, {}, "BEGIN_CLAIMS\nEND_CLAIMS"},
    });
    PipelineContext ctx{provider, prompts::default_templates(), {}};
    const RunRecord record = run_verifact(ctx, fixture_task(), {});
    CHECK(record.no_claims);
    CHECK(record.stages.size() == 2);
    REQUIRE(record.final_output.has_value());
    CHECK(record.final_output->answer.text == record.initial->answer.text);
    CHECK_FALSE(record.failed_stage.has_value());
}

TEST_CASE("stage prompts carry the upstream artifacts verbatim") {
    auto provider = fixture_provider();
    PipelineContext ctx{*provider, prompts::default_templates(), {}};
    const RunRecord record = run_verifact(ctx, fixture_task(), {});
    REQUIRE(record.stages.size() == 4);

    const std::string verify_prompt = user_prompt(record.stages[2]);
    for (const auto& query : record.queries) {
        CHECK(verify_prompt.find(query.text) != std::string::npos);
    }

    const std::string refine_prompt = user_prompt(record.stages[3]);
    CHECK(refine_prompt.find(record.initial->trace.raw) != std::string::npos);
    CHECK(refine_prompt.find(record.initial->answer.text) != std::string::npos);
    for (const auto& rec : record.verifications) {
        CHECK(refine_prompt.find(rec.evidence) != std::string::npos);
        CHECK(refine_prompt.find(rec.source) != std::string::npos);
    }

    const std::string claim_prompt = user_prompt(record.stages[1]);
    CHECK(claim_prompt.find(record.initial->trace.raw) != std::string::npos);
    CHECK(claim_prompt.find(record.initial->answer.text) != std::string::npos);
}

TEST_CASE("identical scripted runs are identical modulo timing fields") {
    auto run_once = [&] {
        auto provider = fixture_provider();
        PipelineContext ctx{*provider, prompts::default_templates(), {}};
        return strip_volatile_fields(run_verifact(ctx, fixture_task(), {}));
    };
    const json a = run_once();
    const json b = run_once();
    CHECK(a.dump() == b.dump());
}

TEST_CASE("standard CoT baseline is a single uncited stage") {
    auto provider = fixture_provider();
    PipelineContext ctx{*provider, prompts::default_templates(), {}};
    const RunRecord record = run_standard_cot(ctx, fixture_task());
    CHECK(record.method == Method::standard_cot);
    CHECK(record.stages.size() == 1);
    CHECK(record.stages[0].stage_tag == StageTag::standard_cot);
    REQUIRE(record.final_output.has_value());
    CHECK(record.final_output->answer.markers.empty());
    CHECK(record.final_output->answer.text == record.initial->answer.text);
    CHECK(record.claims.empty());
    CHECK(record.verifications.empty());
}

TEST_CASE("RAG baseline retrieves the succession document and records its id") {
    auto provider = fixture_provider();
    PipelineContext ctx{*provider, prompts::default_templates(), {}};
    const auto index =
        retrieval::index_corpus(load_corpus_file(kFixtures + "/corpus.jsonl"));

    const RunRecord record = run_cot_rag(ctx, fixture_task(), index, 2);
    CHECK(record.method == Method::cot_rag);
    REQUIRE_FALSE(record.retrieved_doc_ids.empty());
    CHECK(record.retrieved_doc_ids[0] == "d-succession");
    const std::string prompt = user_prompt(record.stages[0]);
    CHECK(prompt.find("Document d-succession:") != std::string::npos);
    CHECK(prompt.find("Grand Alliance opposed the Bourbon succession") != std::string::npos);
}

TEST_CASE("RAG baseline over an empty index runs with zero documents") {
    auto provider = fixture_provider();
    PipelineContext ctx{*provider, prompts::default_templates(), {}};
    const auto index = retrieval::index_corpus({});
    const RunRecord record = run_cot_rag(ctx, fixture_task(), index, 3);
    CHECK(record.retrieved_doc_ids.empty());
    CHECK_FALSE(record.failed_stage.has_value());
    REQUIRE(record.final_output.has_value());
}

TEST_CASE("RAG baseline with k = 0 renders an empty retrieved block") {
    auto provider = fixture_provider();
    PipelineContext ctx{*provider, prompts::default_templates(), {}};
    const auto index =
        retrieval::index_corpus(load_corpus_file(kFixtures + "/corpus.jsonl"));
    const RunRecord record = run_cot_rag(ctx, fixture_task(), index, 0);
    CHECK(record.retrieved_doc_ids.empty());
    const std::string prompt = user_prompt(record.stages[0]);
    CHECK(prompt.find("Retrieved documents:") != std::string::npos);
    CHECK(prompt.find("Document ") == std::string::npos);
}

TEST_CASE("one repair round recovers from a malformed completion") {
    ScriptedProvider provider({
        {{{"initial_cot", 1}},
         {},
         "BEGIN_REASONING\n1. step\nEND_REASONING\nBEGIN_ANSWER\nmissing the closing fence"},
        {{{"initial_cot", 2}},
         {},
         "BEGIN_REASONING\n1. step\nEND_REASONING\nBEGIN_ANSWER\nrepaired\nEND_ANSWER"},
    });
    PipelineContext ctx{provider, prompts::default_templates(), {}};
    const auto run = run_initial_cot(ctx, fixture_task());
    REQUIRE(run.ok());
    CHECK(run.outcome.repair_used);
    CHECK(run.value->answer.text == "repaired");
    // The transcript includes the repair exchange.
    REQUIRE(run.outcome.messages.size() == 4);
    CHECK(run.outcome.messages[2].first == "assistant");
    CHECK(run.outcome.messages[3].second.find("END_ANSWER") != std::string::npos);
}

TEST_CASE("a second malformed completion records a stage failure") {
    ScriptedProvider provider({
        {{{"initial_cot", 1}}, {}, "no fences at all"},
        {{{"initial_cot", 2}}, {}, "still no fences"},
    });
    PipelineContext ctx{provider, prompts::default_templates(), {}};
    const RunRecord record = run_verifact(ctx, fixture_task(), {});
    REQUIRE(record.failed_stage.has_value());
    CHECK(*record.failed_stage == "initial_cot");
    CHECK(record.stages.size() == 1);
    CHECK_FALSE(record.stages[0].ok);
    CHECK(record.stages[0].repair_used);
    CHECK(record.stages[0].error_kind.find("parse_") == 0);
    CHECK_FALSE(record.final_output.has_value());
}

TEST_CASE("transport retries surface in the recorded stage outcome") {
    class FlakyProvider : public Provider {
    public:
        CompletionResult complete(const std::vector<ChatMessage>&, const CompletionParams&,
                                  const std::string&) override {
            CompletionResult result;
            result.text =
                "BEGIN_REASONING\n1. step\nEND_REASONING\nBEGIN_ANSWER\nok\nEND_ANSWER";
            result.retry_count = 2;  // as an HTTP provider reports after 2 retries
            return result;
        }
    };
    FlakyProvider provider;
    PipelineContext ctx{provider, prompts::default_templates(), {}};
    const auto run = run_initial_cot(ctx, fixture_task());
    REQUIRE(run.ok());
    CHECK(run.outcome.retry_count == 2);
}

TEST_CASE("provider errors are recorded, not thrown") {
    ScriptedProvider provider({});  // everything is unscripted
    PipelineContext ctx{provider, prompts::default_templates(), {}};
    const RunRecord record = run_verifact(ctx, fixture_task(), {});
    REQUIRE(record.failed_stage.has_value());
    CHECK(*record.failed_stage == "initial_cot");
    CHECK(record.stages[0].error_kind == "unscripted_request");
    CHECK(record.stages[0].error_message.find("initial_cot") != std::string::npos);
}
