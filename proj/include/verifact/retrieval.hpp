#pragma once

#include <map>
#include <string>
#include <vector>

#include "verifact/core.hpp"

namespace verifact::retrieval {

/// Immutable term-frequency index over a small local corpus. Plain TF
/// cosine, no IDF: the RAG baseline is intentionally basic.
struct CorpusIndex {
    std::map<std::string, std::string> docs;
    std::map<std::string, std::map<std::string, int>> term_freqs;
    std::map<std::string, double> doc_norms;  // only docs with tokens appear
    std::vector<std::string> vocabulary;
};

struct ScoredDoc {
    std::string doc_id;
    double score = 0.0;

    bool operator==(const ScoredDoc&) const = default;
};

/// Lowercase alphanumeric runs.
std::vector<std::string> tokenize(const std::string& text);

/// Builds the index. Throws IoError on duplicate doc ids; an empty corpus
/// yields an empty index. Documents with no tokens get no norm entry and
/// are never retrieved.
CorpusIndex index_corpus(const std::vector<std::pair<std::string, std::string>>& docs);

/// Cosine similarity between raw term-frequency vectors of query and doc,
/// descending by score with ties broken by ascending doc_id; at most k
/// results; zero-score docs excluded.
std::vector<ScoredDoc> retrieve(const CorpusIndex& index, const std::string& query, int k);

}  // namespace verifact::retrieval
