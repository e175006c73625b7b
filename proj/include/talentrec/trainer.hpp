#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "talentrec/error.hpp"
#include "talentrec/features.hpp"
#include "talentrec/model.hpp"
#include "talentrec/orgdata.hpp"
#include "talentrec/rng.hpp"

namespace talentrec {

struct TrainConfig {
    double margin = 0.5;
    int negatives_per_positive = 5;
    // Full-batch Adam converges within a few dozen epochs at this scale, and
    // the gate stays in its interpretable regime before the shared head
    // drifts; longer runs keep shaving loss without changing rankings much.
    int epochs = 25;
    double learning_rate = 0.01;
    std::uint64_t seed = 1;
    double query_holdout_fraction = 0.2;
    int hidden_dim = 64;
    int out_dim = 64;

    void validate() const {
        if (!(margin > 0.0)) throw ConfigError("train: margin must be > 0");
        if (negatives_per_positive < 1) throw ConfigError("train: negatives must be >= 1");
        if (epochs < 0) throw ConfigError("train: epochs must be >= 0");
        if (!(learning_rate > 0.0)) throw ConfigError("train: learning rate must be > 0");
        if (!(query_holdout_fraction > 0.0 && query_holdout_fraction < 1.0)) {
            throw ConfigError("train: holdout fraction must lie in (0,1)");
        }
        if (hidden_dim < 1 || out_dim < 1) throw ConfigError("train: dims must be >= 1");
    }
};

// Simulated departures. Query nodes stay in the graph (transductive); only
// their positive pair labels are withheld from training.
struct Split {
    std::vector<EmployeeId> query_nodes;    // sorted
    std::vector<EmployeeId> candidate_pool; // all nodes, sorted

    bool is_query(const EmployeeId& id) const {
        return std::binary_search(query_nodes.begin(), query_nodes.end(), id);
    }
};

// Per (family, role) cell: ceil(holdout * cell size) seeded picks, always
// leaving at least one cell mate in the pool so every query has a positive
// partner. Singleton cells yield no queries.
inline Split make_split(const OrgRoster& roster, const TrainConfig& cfg) {
    cfg.validate();
    std::map<std::pair<std::string, std::string>, std::vector<EmployeeId>> cells;
    for (const auto& e : roster.employees) cells[{e.job_family, e.role}].push_back(e.id);
    Split split;
    Rng rng(cfg.seed);
    for (auto& [cell, members] : cells) {
        if (members.size() < 2) continue;
        const int want = static_cast<int>(
            std::ceil(cfg.query_holdout_fraction * static_cast<double>(members.size())));
        const int take = std::min(want, static_cast<int>(members.size()) - 1);
        std::vector<EmployeeId> shuffled = members;
        rng.shuffle(shuffled);
        for (int i = 0; i < take; ++i) split.query_nodes.push_back(shuffled[i]);
    }
    if (split.query_nodes.empty()) {
        throw DataError("split: no evaluable query nodes (every cell is a singleton)");
    }
    std::sort(split.query_nodes.begin(), split.query_nodes.end());
    for (const auto& e : roster.employees) split.candidate_pool.push_back(e.id);
    return split;
}

struct Triple {
    int anchor, positive, negative;
};

struct TripleSample {
    std::vector<Triple> triples;
    bool replacement_used = false; // some anchor had fewer valid negatives than requested
};

// For each positive pair (iterated in sorted order), k negatives n with
// (anchor, n) outside the supplied positive set and n != anchor. Anchors
// short of k distinct candidates reuse them with replacement; anchors with
// none skip their triples. Both degenerate paths set the flag.
inline TripleSample sample_triples(const std::set<std::pair<int, int>>& positives, int n_universe,
                                   int k, Rng& rng) {
    if (positives.empty()) throw DataError("triples: no positive pairs");
    std::map<int, std::set<int>> partners;
    for (const auto& [a, b] : positives) {
        partners[a].insert(b);
        partners[b].insert(a);
    }
    TripleSample sample;
    std::map<int, std::vector<int>> valid_cache;
    auto valid_negatives = [&](int anchor) -> const std::vector<int>& {
        auto it = valid_cache.find(anchor);
        if (it != valid_cache.end()) return it->second;
        std::vector<int> valid;
        const auto& pos = partners[anchor];
        for (int u = 0; u < n_universe; ++u) {
            if (u != anchor && !pos.count(u)) valid.push_back(u);
        }
        return valid_cache.emplace(anchor, std::move(valid)).first->second;
    };
    for (const auto& [a, p] : positives) {
        const auto& valid = valid_negatives(a);
        if (valid.empty()) {
            sample.replacement_used = true;
            continue;
        }
        if (static_cast<int>(valid.size()) < k) {
            sample.replacement_used = true;
            for (int i = 0; i < k; ++i) {
                sample.triples.push_back({a, p, valid[rng.below(valid.size())]});
            }
        } else {
            std::set<int> used;
            while (static_cast<int>(used.size()) < k) {
                const int cand = valid[rng.below(valid.size())];
                if (used.insert(cand).second) sample.triples.push_back({a, p, cand});
            }
        }
    }
    return sample;
}

struct LossGrad {
    double loss = 0.0;
    Matrix d_h;
};

namespace detail {

// Accumulates coeff * d cos(h_i, h_j) / d h into rows i and j. Zero rows
// score a constant 0, so they receive no gradient.
inline void add_cosine_gradient(const Matrix& h, int i, int j, double coeff, Matrix& d_h) {
    auto u = h.row(i);
    auto v = h.row(j);
    const double nu = norm2(u);
    const double nv = norm2(v);
    if (nu == 0.0 || nv == 0.0) return;
    const double c = dot(u, v) / (nu * nv);
    auto du = d_h.row(i);
    auto dv = d_h.row(j);
    for (std::size_t d = 0; d < u.size(); ++d) {
        du[d] += coeff * (v[d] / (nu * nv) - c * u[d] / (nu * nu));
        dv[d] += coeff * (u[d] / (nu * nv) - c * v[d] / (nv * nv));
    }
}

} // namespace detail

// Margin ranking loss, mean over triples of max(0, margin - s(a,p) + s(a,n))
// with s = cosine of fused embedding rows. Subgradient 0 at the hinge kink.
inline LossGrad ranking_loss(const Matrix& h, const std::vector<Triple>& triples, double margin) {
    LossGrad out;
    out.d_h = Matrix(h.rows(), h.cols(), 0.0);
    if (triples.empty()) return out;
    const double scale = 1.0 / triples.size();
    for (const auto& t : triples) {
        const double s_ap = score_pair(h, t.anchor, t.positive);
        const double s_an = score_pair(h, t.anchor, t.negative);
        const double l = margin - s_ap + s_an;
        if (l > 0.0) {
            out.loss += l * scale;
            detail::add_cosine_gradient(h, t.anchor, t.positive, -scale, out.d_h);
            detail::add_cosine_gradient(h, t.anchor, t.negative, scale, out.d_h);
        }
    }
    return out;
}

namespace detail {

// Adam over the flat parameter views; beta1 0.9, beta2 0.999, eps 1e-8.
class Adam {
public:
    Adam(std::size_t n_params, double lr) : lr_(lr), m_(n_params, 0.0), v_(n_params, 0.0) {}

    void step(std::vector<std::span<double>>& params, std::vector<std::span<double>>& grads) {
        ++t_;
        const double b1c = 1.0 - std::pow(0.9, t_);
        const double b2c = 1.0 - std::pow(0.999, t_);
        std::size_t offset = 0;
        for (std::size_t p = 0; p < params.size(); ++p) {
            auto theta = params[p];
            auto g = grads[p];
            for (std::size_t i = 0; i < theta.size(); ++i) {
                const std::size_t k = offset + i;
                m_[k] = 0.9 * m_[k] + 0.1 * g[i];
                v_[k] = 0.999 * v_[k] + 0.001 * g[i] * g[i];
                theta[i] -= lr_ * (m_[k] / b1c) / (std::sqrt(v_[k] / b2c) + 1e-8);
            }
            offset += theta.size();
        }
    }

private:
    double lr_;
    int t_ = 0;
    std::vector<double> m_, v_;
};

} // namespace detail

struct TrainResult {
    FusionModel model;
    std::vector<double> loss_curve; // loss at the parameters entering each epoch
    bool negative_replacement_used = false;
};

// Index-space training positives: every weak-label pair not touching a query
// node. Negative sampling validity is judged against this same set, so the
// trajectory never reads a query node's labels.
inline std::set<std::pair<int, int>> training_positives(const OrgRoster& roster,
                                                        const Split& split,
                                                        const std::map<EmployeeId, int>& index) {
    std::set<std::pair<int, int>> result;
    for (const auto& [a, b] : positive_pairs(roster)) {
        if (split.is_query(a) || split.is_query(b)) continue;
        const int ia = index.at(a);
        const int ib = index.at(b);
        result.insert({std::min(ia, ib), std::max(ia, ib)});
    }
    if (result.empty()) throw DataError("train: no training positives after holdout");
    return result;
}

// Full-batch Adam on the margin ranking loss. Negatives are freshly sampled
// each epoch from the seeded stream, so every positive keeps exerting
// pressure against new contrasts; everything downstream of the seed is
// deterministic.
inline TrainResult train(ModelKind kind, const NodeFeatures& features, const OperatorSet& ops,
                         const OrgRoster& roster, const Split& split, const TrainConfig& cfg) {
    cfg.validate();
    if (!kind_is_gnn(kind)) throw ConfigError("train: the heuristic baseline is not trained");
    std::map<EmployeeId, int> index;
    for (std::size_t i = 0; i < features.order.size(); ++i) {
        index[features.order[i]] = static_cast<int>(i);
    }
    const auto positives = training_positives(roster, split, index);
    Rng triple_rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);

    TrainResult result;
    result.model = FusionModel::init(kind, static_cast<int>(features.x.cols()), cfg.hidden_dim,
                                     cfg.out_dim, cfg.seed);

    auto params = parameter_views(result.model);
    std::size_t n_params = 0;
    for (const auto& v : params) n_params += v.size();
    detail::Adam adam(n_params, cfg.learning_rate);

    ForwardCache cache;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const TripleSample sample = sample_triples(
            positives, static_cast<int>(features.order.size()), cfg.negatives_per_positive,
            triple_rng);
        result.negative_replacement_used |= sample.replacement_used;
        const Matrix& h = forward(result.model, features.x, ops, cache);
        LossGrad lg = ranking_loss(h, sample.triples, cfg.margin);
        if (!std::isfinite(lg.loss)) {
            throw NumericError("train: non-finite loss at epoch " + std::to_string(epoch) +
                               " (kind " + kind_name(kind) + ", seed " +
                               std::to_string(cfg.seed) + ")");
        }
        result.loss_curve.push_back(lg.loss);
        FusionModel grad = backward(result.model, ops, cache, lg.d_h);
        auto grad_views = parameter_views(grad);
        adam.step(params, grad_views);
    }
    return result;
}

} // namespace talentrec
