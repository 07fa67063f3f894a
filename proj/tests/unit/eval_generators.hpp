#pragma once

// Random small scoring instances shared by the unit suite and the
// acceptance suite's oracle-equivalence criterion.

#include <random>
#include <string>
#include <vector>

#include "verifact/core.hpp"

namespace gen {

struct ScoringInstance {
    verifact::RunRecord run;
    verifact::TaskInstance task;
    double threshold = 0.6;
};

inline std::string pick_words(std::mt19937& rng, int min_words, int max_words) {
    static const std::vector<std::string> vocab = {
        "king",  "died",   "1700", "heir",  "treaty", "alliance",
        "spain", "france", "will", "crown", "europe", "power",
    };
    std::uniform_int_distribution<int> len(min_words, max_words);
    std::string out;
    const int n = len(rng);
    for (int i = 0; i < n; ++i) {
        if (i) out += ' ';
        out += vocab[rng() % vocab.size()];
    }
    return out;
}

inline ScoringInstance random_instance(std::mt19937& rng) {
    static const std::vector<std::string> source_pool = {
        "Britannica", "Lynn", "History.com", "Acta Historica", "Royal Archive",
    };
    std::uniform_int_distribution<int> coin(0, 1);

    ScoringInstance instance;
    auto& task = instance.task;
    auto& run = instance.run;

    task.id = "rand-task";
    task.task_type = static_cast<verifact::TaskType>(rng() % 4);
    task.query = "random scoring instance";

    const int n_facts = static_cast<int>(rng() % 7);  // up to 6
    for (int f = 0; f < n_facts; ++f) {
        verifact::GoldFact fact;
        fact.fact_id = "f" + std::to_string(f + 1);
        fact.statement = pick_words(rng, 2, 6);
        fact.label = static_cast<verifact::FactLabel>(rng() % 3);
        if (coin(rng)) fact.allowed_sources.push_back(source_pool[rng() % source_pool.size()]);
        fact.requires_citation = fact.label == verifact::FactLabel::supported &&
                                 !fact.allowed_sources.empty() && coin(rng) == 1;
        task.gold_facts.push_back(std::move(fact));
    }

    static const std::vector<double> thresholds = {0.2, 0.4, 0.5, 0.6, 0.8, 1.0};
    instance.threshold = thresholds[rng() % thresholds.size()];

    run.task_id = task.id;
    run.method = static_cast<verifact::Method>(rng() % 3);

    // Claims: sometimes copied (or lightly mutated) from a fact statement so
    // matches actually occur, sometimes unrelated.
    const bool segmented = rng() % 4 == 0;
    const int n_claims = static_cast<int>(rng() % 7);  // up to 6
    std::vector<std::string> claim_texts;
    for (int c = 0; c < n_claims; ++c) {
        std::string text;
        if (!task.gold_facts.empty() && coin(rng)) {
            text = task.gold_facts[rng() % task.gold_facts.size()].statement;
            if (coin(rng)) text += " " + pick_words(rng, 1, 2);
        } else {
            text = pick_words(rng, 2, 6);
        }
        claim_texts.push_back(text);
    }

    verifact::StagePair final_pair;
    final_pair.trace = {{"step"}, "step", verifact::Stage::final};
    final_pair.answer.stage = verifact::Stage::final;

    if (!segmented) {
        for (int c = 0; c < n_claims; ++c) {
            run.claims.push_back({c + 1, claim_texts[static_cast<std::size_t>(c)],
                                  verifact::ClaimOrigin::chain});
            run.queries.push_back({c + 1, "query " + std::to_string(c + 1)});
        }
    }

    // One verification record per claim; the source sometimes contains an
    // allowed source string so citation credit is reachable.
    for (int c = 0; c < n_claims; ++c) {
        verifact::VerificationRecord rec;
        rec.claim_id = c + 1;
        rec.verdict = static_cast<verifact::Verdict>(rng() % 4);
        rec.evidence = pick_words(rng, 1, 4);
        if (coin(rng)) {
            rec.source = source_pool[rng() % source_pool.size()] + ", " + pick_words(rng, 1, 3);
        } else {
            rec.source = pick_words(rng, 1, 3);
        }
        run.verifications.push_back(std::move(rec));
    }

    // Answer text: one sentence per claim, each possibly carrying a marker.
    int next_marker = 1;
    for (int c = 0; c < n_claims; ++c) {
        std::string sentence = claim_texts[static_cast<std::size_t>(c)];
        sentence[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(sentence[0])));
        if (coin(rng)) {
            sentence += " [" + std::to_string(next_marker) + "]";
            // Mostly the matching record, occasionally any record.
            const int ref = coin(rng) ? c : static_cast<int>(rng() % n_claims);
            final_pair.answer.markers.push_back({next_marker, ref});
            ++next_marker;
        }
        final_pair.answer.text += sentence + ". ";
    }
    if (final_pair.answer.text.empty()) final_pair.answer.text = "Nothing to say.";

    run.initial = final_pair;
    run.initial->trace.stage = verifact::Stage::initial;
    run.initial->answer.stage = verifact::Stage::initial;
    run.initial->answer.markers.clear();
    run.final_output = final_pair;
    return instance;
}

}  // namespace gen
