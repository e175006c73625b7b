#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "talentrec/baseline.hpp"
#include "talentrec/error.hpp"
#include "talentrec/model.hpp"
#include "talentrec/orgdata.hpp"
#include "talentrec/trainer.hpp"

namespace talentrec {

struct RankingReport {
    std::string model_kind;
    std::uint64_t seed = 0;
    std::map<EmployeeId, std::vector<RankedCandidate>> per_query;
    std::map<int, double> hit_at;
    int skipped_queries = 0; // queries with no positive in the pool
};

// Strictly ordered candidate list: score descending, id ascending on ties.
// The query itself is excluded.
inline std::vector<RankedCandidate> rank_pool(const EmployeeId& query,
                                              const std::vector<EmployeeId>& pool,
                                              const std::function<double(const EmployeeId&)>& score) {
    std::vector<RankedCandidate> ranked;
    ranked.reserve(pool.size());
    for (const auto& cand : pool) {
        if (cand == query) continue;
        ranked.push_back({cand, score(cand)});
    }
    std::sort(ranked.begin(), ranked.end(), [](const RankedCandidate& a, const RankedCandidate& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.id < b.id;
    });
    return ranked;
}

inline bool query_hit(const std::vector<RankedCandidate>& ranked,
                      const std::set<EmployeeId>& positives, int k) {
    const int limit = std::min<int>(k, static_cast<int>(ranked.size()));
    for (int i = 0; i < limit; ++i) {
        if (positives.count(ranked[i].id)) return true;
    }
    return false;
}

// Evaluation positives mirror the weak-label definition: any pool node
// sharing the query's job family and role.
inline std::set<EmployeeId> evaluation_positives(const EmployeeId& query, const OrgRoster& roster,
                                                 const std::vector<EmployeeId>& pool) {
    const Employee* q = roster.find(query);
    if (!q) throw DataError("evaluate: unknown query id " + query);
    std::set<EmployeeId> positives;
    for (const auto& cand : pool) {
        if (cand == query) continue;
        const Employee* c = roster.find(cand);
        if (c && c->job_family == q->job_family && c->role == q->role) positives.insert(cand);
    }
    return positives;
}

// Hit@K over the split's query set for an arbitrary scorer. score(q, c) must
// be deterministic.
inline RankingReport hit_at_k(const std::function<double(const EmployeeId&, const EmployeeId&)>& score,
                              const Split& split, const OrgRoster& roster,
                              const std::vector<int>& ks, const std::string& model_kind,
                              std::uint64_t seed) {
    RankingReport report;
    report.model_kind = model_kind;
    report.seed = seed;
    std::map<int, int> hits;
    int evaluated = 0;
    for (const auto& query : split.query_nodes) {
        const auto positives = evaluation_positives(query, roster, split.candidate_pool);
        if (positives.empty()) {
            ++report.skipped_queries;
            continue;
        }
        auto ranked = rank_pool(query, split.candidate_pool,
                                [&](const EmployeeId& c) { return score(query, c); });
        for (int k : ks) {
            if (query_hit(ranked, positives, k)) ++hits[k];
        }
        report.per_query.emplace(query, std::move(ranked));
        ++evaluated;
    }
    for (int k : ks) {
        report.hit_at[k] = evaluated > 0 ? static_cast<double>(hits[k]) / evaluated : 0.0;
    }
    return report;
}

// Hit@K from a fused embedding matrix (GNN kinds).
inline RankingReport evaluate_embeddings(const Matrix& h, const NodeFeatures& features,
                                         const Split& split, const OrgRoster& roster,
                                         const std::vector<int>& ks, ModelKind kind,
                                         std::uint64_t seed) {
    std::map<EmployeeId, int> index;
    for (std::size_t i = 0; i < features.order.size(); ++i) {
        index[features.order[i]] = static_cast<int>(i);
    }
    return hit_at_k(
        [&](const EmployeeId& q, const EmployeeId& c) {
            return score_pair(h, index.at(q), index.at(c));
        },
        split, roster, ks, kind_name(kind), seed);
}

struct Recommendation {
    std::vector<RankedCandidate> candidates;
    // mean of the query's gate vector (structural share), gating models only
    std::optional<double> query_gate_mean;
};

// Top-k latent-space neighbors of a query under a trained model. Requesting
// more than the pool holds returns the full pool.
inline Recommendation recommend(const EmployeeId& query, const FusionModel& model,
                                const NodeFeatures& features, const OperatorSet& ops, int top_k) {
    std::map<EmployeeId, int> index;
    for (std::size_t i = 0; i < features.order.size(); ++i) {
        index[features.order[i]] = static_cast<int>(i);
    }
    auto it = index.find(query);
    if (it == index.end()) throw DataError("recommend: unknown query id " + query);
    const int qi = it->second;
    ForwardCache cache;
    const Matrix& h = forward(model, features.x, ops, cache);
    Recommendation rec;
    auto ranked = rank_pool(query, features.order,
                            [&](const EmployeeId& c) { return score_pair(h, qi, index.at(c)); });
    if (static_cast<int>(ranked.size()) > top_k) ranked.resize(top_k);
    rec.candidates = std::move(ranked);
    if (model.kind == ModelKind::gating) {
        auto row = cache.gate.row(qi);
        double mean = 0.0;
        for (double g : row) mean += g;
        rec.query_gate_mean = mean / row.size();
    }
    return rec;
}

struct GateReport {
    // structural share: the gate weights h_str, so mean(g) is the weight the
    // model puts on the structure view
    std::map<std::string, double> per_family_mean_gate;
    std::map<std::string, double> per_role_gate_variance;
};

// Recomputes node gates with a forward pass and aggregates: per family the
// mean over nodes of the node-mean gate, per role the population variance of
// node-mean gates.
inline GateReport gate_analysis(const FusionModel& model, const NodeFeatures& features,
                                const OperatorSet& ops, const OrgRoster& roster) {
    if (model.kind != ModelKind::gating) {
        throw ConfigError("gate analysis: checkpoint is not a gating model");
    }
    ForwardCache cache;
    forward(model, features.x, ops, cache);
    std::vector<double> node_mean(features.order.size(), 0.0);
    for (std::size_t i = 0; i < features.order.size(); ++i) {
        auto row = cache.gate.row(i);
        double mean = 0.0;
        for (double g : row) mean += g;
        node_mean[i] = mean / row.size();
    }
    std::map<std::string, std::vector<double>> by_family, by_role;
    for (std::size_t i = 0; i < features.order.size(); ++i) {
        const Employee* e = roster.find(features.order[i]);
        if (!e) throw DataError("gate analysis: node missing from roster");
        by_family[e->job_family].push_back(node_mean[i]);
        by_role[e->role].push_back(node_mean[i]);
    }
    GateReport report;
    for (const auto& [family, values] : by_family) {
        double mean = 0.0;
        for (double v : values) mean += v;
        report.per_family_mean_gate[family] = mean / values.size();
    }
    for (const auto& [role, values] : by_role) {
        double mean = 0.0;
        for (double v : values) mean += v;
        mean /= values.size();
        double var = 0.0;
        for (double v : values) var += (v - mean) * (v - mean);
        report.per_role_gate_variance[role] = var / values.size();
    }
    return report;
}

} // namespace talentrec
