#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "talentrec/error.hpp"
#include "talentrec/matrix.hpp"
#include "talentrec/orgdata.hpp"
#include "talentrec/rng.hpp"

namespace talentrec {

struct WordEmbeddings {
    std::vector<std::string> vocab; // ordered by (frequency desc, token asc)
    Matrix vectors;                 // |vocab| x dim
    int dim = 100;
    std::map<std::string, int> index;

    int find(const std::string& token) const {
        auto it = index.find(token);
        return it == index.end() ? -1 : it->second;
    }
};

struct SkipgramConfig {
    int dim = 100;
    int window = 5;
    int negatives = 5;
    int epochs = 10;
    double learning_rate = 0.025;
    double min_learning_rate = 1e-4;
    std::uint64_t seed = 1;
};

struct SkipgramResult {
    WordEmbeddings embeddings;
    std::vector<double> epoch_loss; // summed negative log-likelihood per epoch
};

namespace detail {

inline double stable_sigmoid(double x) {
    if (x >= 0.0) {
        const double z = std::exp(-x);
        return 1.0 / (1.0 + z);
    }
    const double z = std::exp(x);
    return z / (1.0 + z);
}

} // namespace detail

// Skip-gram with negative sampling, trained single-threaded so a fixed seed
// reproduces the matrices bit for bit. Sentences are the subject token lists,
// optionally extended by a supplementary corpus (e.g. job-description nouns).
inline SkipgramResult train_skipgram(const std::vector<EmailRecord>& records,
                                     const SkipgramConfig& cfg,
                                     const std::vector<std::vector<std::string>>& extra_sentences = {}) {
    std::vector<const std::vector<std::string>*> sentences;
    for (const auto& rec : records) sentences.push_back(&rec.subject_tokens);
    for (const auto& s : extra_sentences) sentences.push_back(&s);

    std::map<std::string, int> counts;
    for (const auto* s : sentences) {
        for (const auto& tok : *s) ++counts[tok];
    }
    if (counts.size() < 2) throw DataError("skipgram: vocabulary must contain >= 2 tokens");

    SkipgramResult result;
    WordEmbeddings& emb = result.embeddings;
    emb.dim = cfg.dim;
    {
        std::vector<std::pair<std::string, int>> ordered(counts.begin(), counts.end());
        std::sort(ordered.begin(), ordered.end(), [](const auto& a, const auto& b) {
            if (a.second != b.second) return a.second > b.second;
            return a.first < b.first;
        });
        for (const auto& [tok, cnt] : ordered) {
            emb.index[tok] = static_cast<int>(emb.vocab.size());
            emb.vocab.push_back(tok);
        }
    }
    const int v = static_cast<int>(emb.vocab.size());

    Rng rng(cfg.seed);
    emb.vectors = Matrix(v, cfg.dim);
    for (int i = 0; i < v; ++i) {
        for (int d = 0; d < cfg.dim; ++d) {
            emb.vectors(i, d) = rng.uniform(-0.5 / cfg.dim, 0.5 / cfg.dim);
        }
    }
    if (cfg.epochs == 0) return result;

    Matrix context(v, cfg.dim, 0.0);

    // Negative sampling from the unigram distribution raised to 3/4.
    std::vector<double> cumulative(v);
    {
        double acc = 0.0;
        for (int i = 0; i < v; ++i) {
            acc += std::pow(static_cast<double>(counts[emb.vocab[i]]), 0.75);
            cumulative[i] = acc;
        }
    }
    auto draw_negative = [&]() {
        const double x = rng.uniform() * cumulative.back();
        return static_cast<int>(std::lower_bound(cumulative.begin(), cumulative.end(), x) -
                                cumulative.begin());
    };

    std::size_t total_words = 0;
    for (const auto* s : sentences) total_words += s->size();
    const std::size_t words_in_run = total_words * cfg.epochs;

    std::vector<double> grad_center(cfg.dim);
    std::size_t words_done = 0;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        double loss = 0.0;
        for (const auto* sentence : sentences) {
            const double progress = static_cast<double>(words_done) / words_in_run;
            const double lr = std::max(cfg.min_learning_rate,
                                       cfg.learning_rate * (1.0 - progress));
            const auto& toks = *sentence;
            const int len = static_cast<int>(toks.size());
            for (int pos = 0; pos < len; ++pos) {
                const int center = emb.index[toks[pos]];
                const int reduced = rng.uniform_int(1, cfg.window);
                for (int off = -reduced; off <= reduced; ++off) {
                    if (off == 0) continue;
                    const int cpos = pos + off;
                    if (cpos < 0 || cpos >= len) continue;
                    const int target = emb.index[toks[cpos]];
                    std::fill(grad_center.begin(), grad_center.end(), 0.0);
                    auto center_row = emb.vectors.row(center);
                    for (int neg = 0; neg <= cfg.negatives; ++neg) {
                        int out;
                        double label;
                        if (neg == 0) {
                            out = target;
                            label = 1.0;
                        } else {
                            out = draw_negative();
                            if (out == target) continue;
                            label = 0.0;
                        }
                        auto out_row = context.row(out);
                        const double score = dot(center_row, out_row);
                        const double pred = detail::stable_sigmoid(score);
                        loss += label > 0.5 ? -std::log(std::max(pred, 1e-12))
                                            : -std::log(std::max(1.0 - pred, 1e-12));
                        const double g = (label - pred) * lr;
                        for (int d = 0; d < cfg.dim; ++d) {
                            grad_center[d] += g * out_row[d];
                            out_row[d] += g * center_row[d];
                        }
                    }
                    for (int d = 0; d < cfg.dim; ++d) center_row[d] += grad_center[d];
                }
            }
            words_done += toks.size();
        }
        result.epoch_loss.push_back(loss);
    }
    return result;
}

struct PooledSubject {
    std::vector<double> v;
    int in_vocab = 0; // 0 means every token was out of vocabulary
};

// Mean of the in-vocabulary token vectors; OOV tokens are skipped rather than
// zero-substituted so the mean is not pulled toward the origin.
inline PooledSubject pool_subject(const std::vector<std::string>& tokens,
                                  const WordEmbeddings& emb) {
    PooledSubject pooled;
    pooled.v.assign(emb.dim, 0.0);
    for (const auto& tok : tokens) {
        const int idx = emb.find(tok);
        if (idx < 0) continue;
        auto row = emb.vectors.row(idx);
        for (int d = 0; d < emb.dim; ++d) pooled.v[d] += row[d];
        ++pooled.in_vocab;
    }
    if (pooled.in_vocab > 0) {
        for (double& x : pooled.v) x /= pooled.in_vocab;
    }
    return pooled;
}

struct NodeSemantics {
    std::vector<EmployeeId> order; // sorted employee ids
    Matrix centroid;               // n x dim
    std::vector<int> coverage;     // emails pooled per node
    std::map<EmployeeId, int> index;
    int dim = 100;

    int find(const EmployeeId& id) const {
        auto it = index.find(id);
        return it == index.end() ? -1 : it->second;
    }
    std::span<const double> centroid_of(int idx) const { return centroid.row(idx); }
};

// s_i: mean over the pooled vectors of every email where i is sender or
// recipient. Nodes on no emails keep the zero vector with coverage 0.
inline NodeSemantics node_centroids(const std::vector<EmailRecord>& records,
                                    const WordEmbeddings& emb,
                                    const OrgRoster& roster) {
    NodeSemantics sem;
    sem.dim = emb.dim;
    for (const auto& e : roster.employees) {
        sem.index[e.id] = static_cast<int>(sem.order.size());
        sem.order.push_back(e.id);
    }
    const int n = static_cast<int>(sem.order.size());
    sem.centroid = Matrix(n, emb.dim, 0.0);
    sem.coverage.assign(n, 0);
    for (const auto& rec : records) {
        const PooledSubject pooled = pool_subject(rec.subject_tokens, emb);
        for (const EmployeeId* id : {&rec.sender, &rec.recipient}) {
            const int idx = sem.find(*id);
            if (idx < 0) throw DataError("centroids: employee '" + *id + "' not in roster");
            auto row = sem.centroid.row(idx);
            for (int d = 0; d < emb.dim; ++d) row[d] += pooled.v[d];
            ++sem.coverage[idx];
        }
    }
    for (int i = 0; i < n; ++i) {
        if (sem.coverage[i] > 0) {
            auto row = sem.centroid.row(i);
            for (int d = 0; d < emb.dim; ++d) row[d] /= sem.coverage[i];
        }
    }
    return sem;
}

} // namespace talentrec
