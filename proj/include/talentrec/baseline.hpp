#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "talentrec/embed.hpp"
#include "talentrec/error.hpp"
#include "talentrec/features.hpp"

namespace talentrec {

// Score-based heuristic recommender: cosine similarity of the semantic
// centroids, penalized by absolute differences of the min-max-normalized
// centralities.
struct BaselineWeights {
    double alpha_s = 0.8;
    double alpha_d = 0.05;
    double alpha_c = 0.05;
    double alpha_b = 0.05;
    double alpha_e = 0.05;

    void validate() const {
        if (alpha_s < 0 || alpha_d < 0 || alpha_c < 0 || alpha_b < 0 || alpha_e < 0) {
            throw ConfigError("baseline: weights must be >= 0");
        }
    }
};

// Normalized centrality columns are read straight from the assembled feature
// matrix so the 0.05 penalties act on a common [0,1] scale. A node without
// any pooled email contributes Sim = 0.
inline double heuristic_score(int i, int j, const NodeSemantics& sem, const NodeFeatures& features,
                              const BaselineWeights& w = {}) {
    const bool zero_coverage = sem.coverage[i] == 0 || sem.coverage[j] == 0;
    const double sim = zero_coverage ? 0.0 : cosine(sem.centroid.row(i), sem.centroid.row(j));
    double score = w.alpha_s * sim;
    const double alphas[] = {w.alpha_d, w.alpha_c, w.alpha_b, w.alpha_e};
    for (int c = 0; c < 4; ++c) {
        score -= alphas[c] * std::abs(features.x(i, features.centrality_column(c)) -
                                      features.x(j, features.centrality_column(c)));
    }
    return score;
}

inline bool heuristic_pair_flagged(int i, int j, const NodeSemantics& sem) {
    return sem.coverage[i] == 0 || sem.coverage[j] == 0;
}

struct RankedCandidate {
    EmployeeId id;
    double score;
};

// Descending score, ties by ascending employee id.
inline std::vector<RankedCandidate> heuristic_rank(const EmployeeId& query,
                                                   const std::vector<EmployeeId>& pool,
                                                   const NodeSemantics& sem,
                                                   const NodeFeatures& features,
                                                   const BaselineWeights& w = {}) {
    if (pool.empty()) throw DataError("heuristic rank: empty candidate pool");
    const int qi = sem.find(query);
    if (qi < 0) throw DataError("heuristic rank: unknown query id " + query);
    std::vector<RankedCandidate> ranked;
    ranked.reserve(pool.size());
    for (const auto& cand : pool) {
        if (cand == query) throw DataError("heuristic rank: pool must exclude the query");
        const int ci = sem.find(cand);
        if (ci < 0) throw DataError("heuristic rank: unknown candidate id " + cand);
        ranked.push_back({cand, heuristic_score(qi, ci, sem, features, w)});
    }
    std::sort(ranked.begin(), ranked.end(), [](const RankedCandidate& a, const RankedCandidate& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.id < b.id;
    });
    return ranked;
}

} // namespace talentrec
