#include "verifact/retrieval.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

namespace verifact::retrieval {

std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> tokens;
    std::string current;
    for (char c : text) {
        if (std::isalnum(static_cast<unsigned char>(c))) {
            current += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

CorpusIndex index_corpus(const std::vector<std::pair<std::string, std::string>>& docs) {
    CorpusIndex index;
    std::set<std::string> vocab;
    for (const auto& [doc_id, text] : docs) {
        if (index.docs.count(doc_id)) {
            throw IoError("duplicate doc_id '" + doc_id + "'");
        }
        index.docs[doc_id] = text;

        std::map<std::string, int> freqs;
        for (const auto& tok : tokenize(text)) {
            ++freqs[tok];
            vocab.insert(tok);
        }
        double norm_sq = 0.0;
        for (const auto& [tok, count] : freqs) {
            norm_sq += static_cast<double>(count) * count;
        }
        index.term_freqs[doc_id] = std::move(freqs);
        if (norm_sq > 0.0) index.doc_norms[doc_id] = std::sqrt(norm_sq);
    }
    index.vocabulary.assign(vocab.begin(), vocab.end());
    return index;
}

std::vector<ScoredDoc> retrieve(const CorpusIndex& index, const std::string& query, int k) {
    if (k <= 0) return {};

    std::map<std::string, int> query_freqs;
    for (const auto& tok : tokenize(query)) ++query_freqs[tok];
    double query_norm_sq = 0.0;
    for (const auto& [tok, count] : query_freqs) {
        query_norm_sq += static_cast<double>(count) * count;
    }
    if (query_norm_sq == 0.0) return {};
    const double query_norm = std::sqrt(query_norm_sq);

    std::vector<ScoredDoc> scored;
    for (const auto& [doc_id, freqs] : index.term_freqs) {
        const auto norm_it = index.doc_norms.find(doc_id);
        if (norm_it == index.doc_norms.end()) continue;  // zero vector
        double dot = 0.0;
        for (const auto& [tok, count] : query_freqs) {
            const auto it = freqs.find(tok);
            if (it != freqs.end()) dot += static_cast<double>(count) * it->second;
        }
        if (dot <= 0.0) continue;
        scored.push_back({doc_id, dot / (query_norm * norm_it->second)});
    }

    std::sort(scored.begin(), scored.end(), [](const ScoredDoc& a, const ScoredDoc& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.doc_id < b.doc_id;
    });
    if (scored.size() > static_cast<std::size_t>(k)) scored.resize(static_cast<std::size_t>(k));
    return scored;
}

}  // namespace verifact::retrieval
