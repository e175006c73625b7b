#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "talentrec/error.hpp"
#include "talentrec/graph.hpp"
#include "talentrec/matrix.hpp"
#include "talentrec/rng.hpp"

namespace talentrec {

enum class ModelKind {
    heuristic,
    single_str,
    single_ssim,
    early_concat,
    late_concat,
    weighted_sum,
    attention,
    gating,
};

inline const char* kind_name(ModelKind k) {
    switch (k) {
        case ModelKind::heuristic: return "heuristic";
        case ModelKind::single_str: return "single-str";
        case ModelKind::single_ssim: return "single-ssim";
        case ModelKind::early_concat: return "early-concat";
        case ModelKind::late_concat: return "late-concat";
        case ModelKind::weighted_sum: return "weighted";
        case ModelKind::attention: return "attention";
        case ModelKind::gating: return "gating";
    }
    return "?";
}

inline ModelKind kind_from_name(const std::string& name) {
    const ModelKind all[] = {ModelKind::heuristic,   ModelKind::single_str,
                             ModelKind::single_ssim, ModelKind::early_concat,
                             ModelKind::late_concat, ModelKind::weighted_sum,
                             ModelKind::attention,   ModelKind::gating};
    for (ModelKind k : all) {
        if (name == kind_name(k)) return k;
    }
    throw ConfigError("unknown model kind '" + name + "'");
}

inline bool kind_is_gnn(ModelKind k) { return k != ModelKind::heuristic; }

// Late-fusion kinds run two independent towers; single and early kinds run
// one tower over one operator.
inline bool kind_uses_two_towers(ModelKind k) {
    switch (k) {
        case ModelKind::late_concat:
        case ModelKind::weighted_sum:
        case ModelKind::attention:
        case ModelKind::gating:
            return true;
        default:
            return false;
    }
}

struct GCNLayer {
    Matrix w;
    std::vector<double> b;
};

// Two propagation layers: H1 = relu(Ahat X W1 + b1), H2 = Ahat H1 W2 + b2.
struct GCNTower {
    GCNLayer l1, l2;
};

struct FusionModel {
    ModelKind kind = ModelKind::gating;
    int in_dim = 104;
    int hidden_dim = 64;
    int out_dim = 64;
    std::uint64_t seed = 1;

    GCNTower tower_str;  // also the single tower for single/early kinds
    GCNTower tower_ssim; // only populated for two-tower kinds

    double alpha = 0.8;               // weighted_sum mixing coefficient (fixed)
    std::vector<double> attn_w;       // attention: 2*out_dim
    double attn_b = 0.0;
    Matrix gate_w;                    // gating: out_dim x 2*out_dim
    std::vector<double> gate_b;       // out_dim

    int output_dim() const { return kind == ModelKind::late_concat ? 2 * out_dim : out_dim; }

    static FusionModel init(ModelKind kind, int in_dim, int hidden_dim, int out_dim,
                            std::uint64_t seed) {
        if (!kind_is_gnn(kind)) throw ConfigError("model init: heuristic has no parameters");
        FusionModel m;
        m.kind = kind;
        m.in_dim = in_dim;
        m.hidden_dim = hidden_dim;
        m.out_dim = out_dim;
        m.seed = seed;
        Rng rng(seed);
        auto glorot = [&](int fan_in, int fan_out) {
            Matrix w(fan_in, fan_out);
            const double limit = std::sqrt(6.0 / (fan_in + fan_out));
            for (auto& v : w.data()) v = rng.uniform(-limit, limit);
            return w;
        };
        auto init_tower = [&](GCNTower& t) {
            t.l1.w = glorot(in_dim, hidden_dim);
            t.l1.b.assign(hidden_dim, 0.0);
            t.l2.w = glorot(hidden_dim, out_dim);
            t.l2.b.assign(out_dim, 0.0);
        };
        init_tower(m.tower_str);
        if (kind_uses_two_towers(kind)) init_tower(m.tower_ssim);
        if (kind == ModelKind::attention) {
            const double limit = std::sqrt(6.0 / (2 * out_dim + 1));
            m.attn_w.assign(2 * out_dim, 0.0);
            for (auto& v : m.attn_w) v = rng.uniform(-limit, limit);
            m.attn_b = 0.0;
        } else if (kind == ModelKind::gating) {
            m.gate_w = glorot(out_dim, 2 * out_dim);
            m.gate_b.assign(out_dim, 0.0);
        }
        return m;
    }

    static FusionModel zeros_like(const FusionModel& m) {
        FusionModel z = m;
        auto clear_tower = [](GCNTower& t) {
            t.l1.w.fill(0.0);
            std::fill(t.l1.b.begin(), t.l1.b.end(), 0.0);
            t.l2.w.fill(0.0);
            std::fill(t.l2.b.begin(), t.l2.b.end(), 0.0);
        };
        clear_tower(z.tower_str);
        if (kind_uses_two_towers(m.kind)) clear_tower(z.tower_ssim);
        std::fill(z.attn_w.begin(), z.attn_w.end(), 0.0);
        z.attn_b = 0.0;
        z.gate_w.fill(0.0);
        std::fill(z.gate_b.begin(), z.gate_b.end(), 0.0);
        return z;
    }
};

// Flat views over every learnable tensor, in a fixed order shared by the
// model and its gradient twin. The optimizer walks these.
inline std::vector<std::span<double>> parameter_views(FusionModel& m) {
    std::vector<std::span<double>> views;
    auto add_tower = [&](GCNTower& t) {
        views.emplace_back(t.l1.w.data());
        views.emplace_back(t.l1.b);
        views.emplace_back(t.l2.w.data());
        views.emplace_back(t.l2.b);
    };
    add_tower(m.tower_str);
    if (kind_uses_two_towers(m.kind)) add_tower(m.tower_ssim);
    if (m.kind == ModelKind::attention) {
        views.emplace_back(m.attn_w);
        views.emplace_back(std::span<double>(&m.attn_b, 1));
    } else if (m.kind == ModelKind::gating) {
        views.emplace_back(m.gate_w.data());
        views.emplace_back(m.gate_b);
    }
    return views;
}

// The operators a forward pass may draw on; which one is used depends on the
// model kind. Pointers may be null when the kind does not need them.
struct OperatorSet {
    const NormalizedOperator* str = nullptr;
    const NormalizedOperator* ssim = nullptr;
    const NormalizedOperator* early = nullptr;
};

struct TowerCache {
    Matrix p0; // Ahat X
    Matrix z1; // p0 W1 + b1
    Matrix h1; // relu(z1)
    Matrix p1; // Ahat h1
    Matrix out; // p1 W2 + b2
};

struct ForwardCache {
    TowerCache str, ssim;
    Matrix h;                  // fused embedding
    Matrix gate;               // gating: n x out_dim, entries in (0,1)
    std::vector<double> attn;  // attention: per-node score in (0,1)
};

namespace detail {

inline const NormalizedOperator* operator_for(ModelKind kind, const OperatorSet& ops,
                                              bool second_tower) {
    const NormalizedOperator* op = nullptr;
    if (second_tower) {
        op = ops.ssim;
    } else {
        switch (kind) {
            case ModelKind::single_ssim: op = ops.ssim; break;
            case ModelKind::early_concat: op = ops.early; break;
            default: op = ops.str; break;
        }
    }
    if (!op) throw ConfigError(std::string("forward: missing operator for kind ") + kind_name(kind));
    return op;
}

inline void tower_forward(const GCNTower& t, const NormalizedOperator& op, const Matrix& x,
                          TowerCache& cache) {
    op.apply(x, cache.p0);
    cache.z1 = matmul(cache.p0, t.l1.w);
    add_row_vector(cache.z1, t.l1.b);
    cache.h1 = cache.z1;
    for (auto& v : cache.h1.data()) v = v > 0.0 ? v : 0.0;
    op.apply(cache.h1, cache.p1);
    cache.out = matmul(cache.p1, t.l2.w);
    add_row_vector(cache.out, t.l2.b);
}

inline void tower_backward(const GCNTower& t, const NormalizedOperator& op,
                           const TowerCache& cache, const Matrix& d_out, GCNTower& grad) {
    grad.l2.w = matmul_at_b(cache.p1, d_out);
    grad.l2.b = column_sums(d_out);
    const Matrix d_p1 = matmul_a_bt(d_out, t.l2.w);
    Matrix d_h1;
    op.apply(d_p1, d_h1); // Ahat is symmetric
    for (std::size_t i = 0; i < d_h1.data().size(); ++i) {
        if (cache.z1.data()[i] <= 0.0) d_h1.data()[i] = 0.0;
    }
    grad.l1.w = matmul_at_b(cache.p0, d_h1);
    grad.l1.b = column_sums(d_h1);
}

// Clamped so head activations keep the declared open-interval range even
// where double precision would round the sigmoid to exactly 0 or 1.
inline double sigmoid(double x) {
    double s;
    if (x >= 0.0) {
        s = 1.0 / (1.0 + std::exp(-x));
    } else {
        const double z = std::exp(x);
        s = z / (1.0 + z);
    }
    constexpr double eps = 1e-12;
    if (s < eps) return eps;
    if (s > 1.0 - eps) return 1.0 - eps;
    return s;
}

} // namespace detail

// Combines the two tower outputs according to the head. Fills cache.h and,
// for the adaptive kinds, the gate matrix / attention scores.
inline const Matrix& fuse(const FusionModel& m, const Matrix& ha, const Matrix& hb,
                          ForwardCache& cache) {
    if (ha.rows() != hb.rows() || ha.cols() != hb.cols()) {
        throw NumericError("fuse: tower output shapes differ");
    }
    const std::size_t n = ha.rows();
    const std::size_t d = ha.cols();
    switch (m.kind) {
        case ModelKind::late_concat: {
            cache.h = Matrix(n, 2 * d);
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = 0; j < d; ++j) {
                    cache.h(i, j) = ha(i, j);
                    cache.h(i, d + j) = hb(i, j);
                }
            }
            break;
        }
        case ModelKind::weighted_sum: {
            cache.h = Matrix(n, d);
            for (std::size_t i = 0; i < n * d; ++i) {
                cache.h.data()[i] = m.alpha * ha.data()[i] + (1.0 - m.alpha) * hb.data()[i];
            }
            break;
        }
        case ModelKind::attention: {
            cache.h = Matrix(n, d);
            cache.attn.assign(n, 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                double z = m.attn_b;
                for (std::size_t j = 0; j < d; ++j) {
                    z += m.attn_w[j] * ha(i, j) + m.attn_w[d + j] * hb(i, j);
                }
                const double a = detail::sigmoid(z);
                cache.attn[i] = a;
                for (std::size_t j = 0; j < d; ++j) {
                    cache.h(i, j) = a * ha(i, j) + (1.0 - a) * hb(i, j);
                }
            }
            break;
        }
        case ModelKind::gating: {
            cache.h = Matrix(n, d);
            cache.gate = Matrix(n, d);
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = 0; j < d; ++j) {
                    double z = m.gate_b[j];
                    for (std::size_t k = 0; k < d; ++k) {
                        z += m.gate_w(j, k) * ha(i, k) + m.gate_w(j, d + k) * hb(i, k);
                    }
                    const double g = detail::sigmoid(z);
                    cache.gate(i, j) = g;
                    cache.h(i, j) = g * ha(i, j) + (1.0 - g) * hb(i, j);
                }
            }
            break;
        }
        default:
            throw ConfigError("fuse: single-operator kinds bypass fusion");
    }
    return cache.h;
}

// Full forward pass. Returns a reference to cache.h, the fused embedding
// matrix (n x output_dim).
inline const Matrix& forward(const FusionModel& m, const Matrix& x, const OperatorSet& ops,
                             ForwardCache& cache) {
    if (static_cast<int>(x.cols()) != m.in_dim) throw NumericError("forward: feature dim mismatch");
    detail::tower_forward(m.tower_str, *detail::operator_for(m.kind, ops, false), x, cache.str);
    if (!kind_uses_two_towers(m.kind)) {
        cache.h = cache.str.out;
        return cache.h;
    }
    detail::tower_forward(m.tower_ssim, *detail::operator_for(m.kind, ops, true), x, cache.ssim);
    return fuse(m, cache.str.out, cache.ssim.out, cache);
}

// Cosine similarity of two embedding rows; rows of zero norm score 0.
inline double score_pair(const Matrix& h, int i, int j) {
    return cosine(h.row(i), h.row(j));
}

// Gradients of the fusion head parameters plus the loss gradient at each
// tower output, given the loss gradient at the fused embedding.
inline void fuse_backward(const FusionModel& m, const Matrix& ha, const Matrix& hb,
                          const ForwardCache& cache, const Matrix& d_h, Matrix& d_ha,
                          Matrix& d_hb, FusionModel& grad) {
    const std::size_t n = ha.rows();
    const std::size_t d = ha.cols();
    d_ha = Matrix(n, d, 0.0);
    d_hb = Matrix(n, d, 0.0);
    switch (m.kind) {
        case ModelKind::late_concat: {
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = 0; j < d; ++j) {
                    d_ha(i, j) = d_h(i, j);
                    d_hb(i, j) = d_h(i, d + j);
                }
            }
            break;
        }
        case ModelKind::weighted_sum: {
            for (std::size_t i = 0; i < n * d; ++i) {
                d_ha.data()[i] = m.alpha * d_h.data()[i];
                d_hb.data()[i] = (1.0 - m.alpha) * d_h.data()[i];
            }
            break;
        }
        case ModelKind::attention: {
            grad.attn_w.assign(2 * d, 0.0);
            grad.attn_b = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double a = cache.attn[i];
                double d_a = 0.0;
                for (std::size_t j = 0; j < d; ++j) {
                    d_a += d_h(i, j) * (ha(i, j) - hb(i, j));
                    d_ha(i, j) = a * d_h(i, j);
                    d_hb(i, j) = (1.0 - a) * d_h(i, j);
                }
                const double d_z = d_a * a * (1.0 - a);
                for (std::size_t j = 0; j < d; ++j) {
                    grad.attn_w[j] += d_z * ha(i, j);
                    grad.attn_w[d + j] += d_z * hb(i, j);
                    d_ha(i, j) += d_z * m.attn_w[j];
                    d_hb(i, j) += d_z * m.attn_w[d + j];
                }
                grad.attn_b += d_z;
            }
            break;
        }
        case ModelKind::gating: {
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = 0; j < d; ++j) {
                    const double g = cache.gate(i, j);
                    const double d_g = d_h(i, j) * (ha(i, j) - hb(i, j));
                    const double d_z = d_g * g * (1.0 - g);
                    for (std::size_t k = 0; k < d; ++k) {
                        grad.gate_w(j, k) += d_z * ha(i, k);
                        grad.gate_w(j, d + k) += d_z * hb(i, k);
                        d_ha(i, k) += d_z * m.gate_w(j, k);
                        d_hb(i, k) += d_z * m.gate_w(j, d + k);
                    }
                    grad.gate_b[j] += d_z;
                    d_ha(i, j) += g * d_h(i, j);
                    d_hb(i, j) += (1.0 - g) * d_h(i, j);
                }
            }
            break;
        }
        default:
            throw ConfigError("fuse_backward: single-operator kinds bypass fusion");
    }
}

// Exact reverse-mode gradients of every learnable parameter given the loss
// gradient at the fused embedding. The cache must come from the matching
// forward pass.
inline FusionModel backward(const FusionModel& m, const OperatorSet& ops,
                            const ForwardCache& cache, const Matrix& d_h) {
    FusionModel grad = FusionModel::zeros_like(m);
    if (!kind_uses_two_towers(m.kind)) {
        detail::tower_backward(m.tower_str, *detail::operator_for(m.kind, ops, false), cache.str,
                               d_h, grad.tower_str);
        return grad;
    }
    Matrix d_ha, d_hb;
    fuse_backward(m, cache.str.out, cache.ssim.out, cache, d_h, d_ha, d_hb, grad);
    detail::tower_backward(m.tower_str, *detail::operator_for(m.kind, ops, false), cache.str, d_ha,
                           grad.tower_str);
    detail::tower_backward(m.tower_ssim, *detail::operator_for(m.kind, ops, true), cache.ssim, d_hb,
                           grad.tower_ssim);
    return grad;
}

} // namespace talentrec
