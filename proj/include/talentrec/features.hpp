#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "talentrec/centrality.hpp"
#include "talentrec/embed.hpp"
#include "talentrec/error.hpp"
#include "talentrec/matrix.hpp"
#include "talentrec/rng.hpp"

namespace talentrec {

constexpr int kSemanticDim = 100;
constexpr int kFeatureDim = 104; // s_i (100) then degree, closeness, betweenness, eigenvector

// x_i = concat(s_i, d_i, c_i, b_i, e_i). The centrality columns are min-max
// normalized over nodes; the semantic block stays raw. The production layout
// is 100 + 4; the semantic width follows the embeddings so scaled-down
// configurations stay consistent end to end.
struct NodeFeatures {
    std::vector<EmployeeId> order;
    Matrix x; // n x (semantic_dim + 4)
    int semantic_dim = kSemanticDim;

    int centrality_column(int c) const { return semantic_dim + c; }
};

inline NodeFeatures assemble_features(const NodeSemantics& sem, const CentralityVector& cent) {
    if (sem.order != cent.order) throw DataError("features: node sets differ");
    const int n = static_cast<int>(sem.order.size());
    NodeFeatures f;
    f.order = sem.order;
    f.semantic_dim = sem.dim;
    f.x = Matrix(n, sem.dim + 4, 0.0);
    for (int i = 0; i < n; ++i) {
        auto s = sem.centroid.row(i);
        for (int d = 0; d < sem.dim; ++d) f.x(i, d) = s[d];
    }
    const std::vector<const std::vector<double>*> cols = {&cent.degree, &cent.closeness,
                                                          &cent.betweenness, &cent.eigenvector};
    for (std::size_t c = 0; c < cols.size(); ++c) {
        const auto& v = *cols[c];
        const double lo = *std::min_element(v.begin(), v.end());
        const double hi = *std::max_element(v.begin(), v.end());
        const double span = hi - lo;
        for (int i = 0; i < n; ++i) {
            f.x(i, sem.dim + c) = span > 0.0 ? (v[i] - lo) / span : 0.0;
        }
    }
    if (!f.x.all_finite()) throw NumericError("features: non-finite entry");
    return f;
}

// Mean silhouette with Euclidean distance. Points alone in their cluster
// contribute 0.
inline double silhouette(const Matrix& points, const std::vector<int>& labels) {
    const int n = static_cast<int>(points.rows());
    if (n < 2) throw DataError("silhouette: need at least 2 points");
    std::map<int, int> cluster_size;
    for (int l : labels) ++cluster_size[l];
    if (cluster_size.size() < 2) throw DataError("silhouette: need at least 2 labels");

    auto dist = [&](int i, int j) {
        double s = 0.0;
        for (std::size_t d = 0; d < points.cols(); ++d) {
            const double v = points(i, d) - points(j, d);
            s += v * v;
        }
        return std::sqrt(s);
    };

    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        if (cluster_size[labels[i]] == 1) continue; // contributes 0
        std::map<int, double> sum_by_label;
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            sum_by_label[labels[j]] += dist(i, j);
        }
        const double a = sum_by_label[labels[i]] / (cluster_size[labels[i]] - 1);
        double b = std::numeric_limits<double>::infinity();
        for (const auto& [l, s] : sum_by_label) {
            if (l == labels[i]) continue;
            b = std::min(b, s / cluster_size[l]);
        }
        const double m = std::max(a, b);
        total += m > 0.0 ? (b - a) / m : 0.0;
    }
    return total / n;
}

// Rank-based (Mann-Whitney) AUC of a scalar against binary labels, midranks
// for ties.
inline double role_auc(const std::vector<double>& scalar, const std::vector<bool>& positive) {
    const int n = static_cast<int>(scalar.size());
    int n_pos = 0;
    for (bool p : positive) n_pos += p ? 1 : 0;
    const int n_neg = n - n_pos;
    if (n_pos == 0 || n_neg == 0) throw DataError("auc: both classes must be non-empty");
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](int a, int b) { return scalar[a] < scalar[b]; });
    std::vector<double> rank(n);
    int i = 0;
    while (i < n) {
        int j = i;
        while (j + 1 < n && scalar[idx[j + 1]] == scalar[idx[i]]) ++j;
        const double mid = (i + j) / 2.0 + 1.0; // 1-based midrank
        for (int k = i; k <= j; ++k) rank[idx[k]] = mid;
        i = j + 1;
    }
    double rank_sum_pos = 0.0;
    for (int k = 0; k < n; ++k) {
        if (positive[k]) rank_sum_pos += rank[k];
    }
    return (rank_sum_pos - n_pos * (n_pos + 1.0) / 2.0) / (static_cast<double>(n_pos) * n_neg);
}

// Principal component scores by power iteration on the covariance matrix
// with deflation; deterministic start and sign convention (the largest-
// magnitude loading is made positive).
inline Matrix pca_scores(const Matrix& x, int n_components) {
    const int n = static_cast<int>(x.rows());
    const int d = static_cast<int>(x.cols());
    Matrix centered = x;
    for (int j = 0; j < d; ++j) {
        double mean = 0.0;
        for (int i = 0; i < n; ++i) mean += x(i, j);
        mean /= n;
        for (int i = 0; i < n; ++i) centered(i, j) -= mean;
    }
    Matrix cov = matmul_at_b(centered, centered);
    for (auto& v : cov.data()) v /= std::max(1, n - 1);

    Matrix scores(n, n_components, 0.0);
    std::vector<std::vector<double>> components;
    for (int c = 0; c < n_components; ++c) {
        std::vector<double> v(d);
        for (int j = 0; j < d; ++j) v[j] = 1.0 + 1e-3 * j; // asymmetric start
        for (const auto& prev : components) {
            const double proj = dot(std::span<const double>(v), std::span<const double>(prev));
            for (int j = 0; j < d; ++j) v[j] -= proj * prev[j];
        }
        double nv = norm2(v);
        if (nv == 0.0) nv = 1.0;
        for (double& e : v) e /= nv;
        std::vector<double> w(d);
        for (int it = 0; it < 5000; ++it) {
            for (int r = 0; r < d; ++r) {
                double acc = 0.0;
                for (int k = 0; k < d; ++k) acc += cov(r, k) * v[k];
                w[r] = acc;
            }
            for (const auto& prev : components) {
                const double proj = dot(std::span<const double>(w), std::span<const double>(prev));
                for (int j = 0; j < d; ++j) w[j] -= proj * prev[j];
            }
            double nw = norm2(w);
            if (nw == 0.0) break; // degenerate direction, keep current v
            double diff = 0.0;
            for (int j = 0; j < d; ++j) {
                w[j] /= nw;
                diff = std::max(diff, std::abs(w[j] - v[j]));
            }
            v.swap(w);
            if (diff < 1e-12) break;
        }
        int arg = 0;
        for (int j = 1; j < d; ++j) {
            if (std::abs(v[j]) > std::abs(v[arg])) arg = j;
        }
        if (v[arg] < 0.0) {
            for (double& e : v) e = -e;
        }
        for (int i = 0; i < n; ++i) {
            scores(i, c) = dot(centered.row(i), std::span<const double>(v));
        }
        components.push_back(std::move(v));
    }
    return scores;
}

// ---- Feature-combination classification (the 31-row table) ----

struct ComboF1Config {
    int folds = 5;
    int epochs = 500;
    double learning_rate = 0.1;
    double l2 = 1e-4;
    std::uint64_t seed = 1;
};

struct ComboF1Row {
    std::string combo; // e.g. "s+d+e"
    bool has_s = false, has_d = false, has_c = false, has_b = false, has_e = false;
    double f1_family = 0.0;
    double f1_role = 0.0;
};

namespace detail {

// Multinomial logistic regression by full-batch gradient descent.
class SoftmaxClassifier {
public:
    SoftmaxClassifier(int dim, int classes) : w_(dim, classes, 0.0), b_(classes, 0.0) {}

    void fit(const Matrix& x, const std::vector<int>& y, int epochs, double lr, double l2) {
        const int n = static_cast<int>(x.rows());
        const int d = static_cast<int>(x.cols());
        const int k = static_cast<int>(b_.size());
        Matrix probs(n, k);
        for (int epoch = 0; epoch < epochs; ++epoch) {
            predict_proba(x, probs);
            for (int i = 0; i < n; ++i) probs(i, y[i]) -= 1.0;
            Matrix grad_w = matmul_at_b(x, probs);
            std::vector<double> grad_b = column_sums(probs);
            for (int r = 0; r < d; ++r) {
                for (int c = 0; c < k; ++c) {
                    w_(r, c) -= lr * (grad_w(r, c) / n + l2 * w_(r, c));
                }
            }
            for (int c = 0; c < k; ++c) b_[c] -= lr * grad_b[c] / n;
        }
    }

    void predict_proba(const Matrix& x, Matrix& probs) const {
        probs = matmul(x, w_);
        add_row_vector(probs, b_);
        for (std::size_t i = 0; i < probs.rows(); ++i) {
            auto row = probs.row(i);
            double mx = row[0];
            for (double v : row) mx = std::max(mx, v);
            double z = 0.0;
            for (double& v : row) {
                v = std::exp(v - mx);
                z += v;
            }
            for (double& v : row) v /= z;
        }
    }

    std::vector<int> predict(const Matrix& x) const {
        Matrix probs;
        predict_proba(x, probs);
        std::vector<int> y(x.rows());
        for (std::size_t i = 0; i < x.rows(); ++i) {
            auto row = probs.row(i);
            int arg = 0;
            for (std::size_t c = 1; c < row.size(); ++c) {
                if (row[c] > row[arg]) arg = static_cast<int>(c);
            }
            y[i] = arg;
        }
        return y;
    }

private:
    Matrix w_;
    std::vector<double> b_;
};

inline double macro_f1(const std::vector<int>& truth, const std::vector<int>& pred, int classes) {
    double total = 0.0;
    for (int c = 0; c < classes; ++c) {
        int tp = 0, fp = 0, fn = 0;
        for (std::size_t i = 0; i < truth.size(); ++i) {
            if (pred[i] == c && truth[i] == c) ++tp;
            else if (pred[i] == c) ++fp;
            else if (truth[i] == c) ++fn;
        }
        const double denom = 2.0 * tp + fp + fn;
        total += denom > 0.0 ? 2.0 * tp / denom : 0.0;
    }
    return total / classes;
}

// Seeded stratified fold assignment; every class must populate every fold.
inline std::vector<int> stratified_folds(const std::vector<int>& y, int folds, Rng& rng) {
    std::map<int, std::vector<int>> by_class;
    for (std::size_t i = 0; i < y.size(); ++i) by_class[y[i]].push_back(static_cast<int>(i));
    std::vector<int> fold(y.size());
    for (auto& [cls, members] : by_class) {
        if (static_cast<int>(members.size()) < folds) {
            throw DataError("stratification: class " + std::to_string(cls) +
                            " has fewer members than folds");
        }
        rng.shuffle(members);
        for (std::size_t k = 0; k < members.size(); ++k) {
            fold[members[k]] = static_cast<int>(k % folds);
        }
    }
    return fold;
}

inline double cross_validated_f1(const Matrix& x, const std::vector<int>& y, int classes,
                                 const ComboF1Config& cfg, const std::vector<int>& fold) {
    double f1_sum = 0.0;
    for (int f = 0; f < cfg.folds; ++f) {
        std::vector<int> train_idx, test_idx;
        for (std::size_t i = 0; i < y.size(); ++i) {
            (fold[i] == f ? test_idx : train_idx).push_back(static_cast<int>(i));
        }
        Matrix xtr(train_idx.size(), x.cols()), xte(test_idx.size(), x.cols());
        std::vector<int> ytr(train_idx.size()), yte(test_idx.size());
        for (std::size_t i = 0; i < train_idx.size(); ++i) {
            for (std::size_t d = 0; d < x.cols(); ++d) xtr(i, d) = x(train_idx[i], d);
            ytr[i] = y[train_idx[i]];
        }
        for (std::size_t i = 0; i < test_idx.size(); ++i) {
            for (std::size_t d = 0; d < x.cols(); ++d) xte(i, d) = x(test_idx[i], d);
            yte[i] = y[test_idx[i]];
        }
        SoftmaxClassifier clf(static_cast<int>(x.cols()), classes);
        clf.fit(xtr, ytr, cfg.epochs, cfg.learning_rate, cfg.l2);
        f1_sum += macro_f1(yte, clf.predict(xte), classes);
    }
    return f1_sum / cfg.folds;
}

} // namespace detail

// Column selections of the feature layout for one subset of {s, d, c, b, e}.
inline std::vector<int> combo_columns(bool s, bool d, bool c, bool b, bool e, int semantic_dim) {
    std::vector<int> cols;
    if (s) {
        for (int i = 0; i < semantic_dim; ++i) cols.push_back(i);
    }
    if (d) cols.push_back(semantic_dim);
    if (c) cols.push_back(semantic_dim + 1);
    if (b) cols.push_back(semantic_dim + 2);
    if (e) cols.push_back(semantic_dim + 3);
    return cols;
}

// Macro F1 of a 5-fold cross-validated multinomial linear classifier, for
// every non-empty subset of {s, d, c, b, e}, against both label sets. Rows
// come back sorted by family F1 descending.
inline std::vector<ComboF1Row> combo_f1(const NodeFeatures& features,
                                        const std::vector<int>& family_labels,
                                        const std::vector<int>& role_labels,
                                        int n_families, int n_roles,
                                        const ComboF1Config& cfg = {}) {
    Rng rng(cfg.seed);
    const std::vector<int> family_fold = detail::stratified_folds(family_labels, cfg.folds, rng);
    const std::vector<int> role_fold = detail::stratified_folds(role_labels, cfg.folds, rng);
    std::vector<ComboF1Row> rows;
    for (int mask = 1; mask < 32; ++mask) {
        ComboF1Row row;
        row.has_s = mask & 1;
        row.has_d = mask & 2;
        row.has_c = mask & 4;
        row.has_b = mask & 8;
        row.has_e = mask & 16;
        const char* names[] = {"s", "d", "c", "b", "e"};
        for (int bit = 0; bit < 5; ++bit) {
            if (mask & (1 << bit)) {
                if (!row.combo.empty()) row.combo += '+';
                row.combo += names[bit];
            }
        }
        const auto cols = combo_columns(row.has_s, row.has_d, row.has_c, row.has_b, row.has_e,
                                        features.semantic_dim);
        Matrix sub(features.x.rows(), cols.size());
        for (std::size_t i = 0; i < features.x.rows(); ++i) {
            for (std::size_t k = 0; k < cols.size(); ++k) sub(i, k) = features.x(i, cols[k]);
        }
        row.f1_family = detail::cross_validated_f1(sub, family_labels, n_families, cfg, family_fold);
        row.f1_role = detail::cross_validated_f1(sub, role_labels, n_roles, cfg, role_fold);
        rows.push_back(std::move(row));
    }
    std::stable_sort(rows.begin(), rows.end(), [](const ComboF1Row& a, const ComboF1Row& b) {
        return a.f1_family > b.f1_family;
    });
    return rows;
}

// k x k mean pairwise cosine between family centroid sets; the diagonal
// averages over distinct intra-family pairs. Only covered nodes participate.
inline Matrix family_similarity_matrix(const NodeSemantics& sem,
                                       const std::vector<int>& family_labels,
                                       int n_families) {
    Matrix sums(n_families, n_families, 0.0);
    Matrix counts(n_families, n_families, 0.0);
    const int n = static_cast<int>(sem.order.size());
    for (int i = 0; i < n; ++i) {
        if (sem.coverage[i] == 0) continue;
        for (int j = i + 1; j < n; ++j) {
            if (sem.coverage[j] == 0) continue;
            const double sim = cosine(sem.centroid.row(i), sem.centroid.row(j));
            const int a = family_labels[i], b = family_labels[j];
            sums(a, b) += sim;
            counts(a, b) += 1.0;
            if (a != b) {
                sums(b, a) += sim;
                counts(b, a) += 1.0;
            }
        }
    }
    Matrix out(n_families, n_families, 0.0);
    for (int a = 0; a < n_families; ++a) {
        for (int b = 0; b < n_families; ++b) {
            out(a, b) = counts(a, b) > 0.0 ? sums(a, b) / counts(a, b) : 0.0;
        }
    }
    return out;
}

struct KmeansResult {
    std::vector<int> assignment;
    double inertia = 0.0;
};

// Lloyd's algorithm with k-means++ seeding; 10 restarts, best inertia kept.
inline KmeansResult kmeans(const Matrix& points, int k, std::uint64_t seed, int restarts = 10) {
    const int n = static_cast<int>(points.rows());
    const int d = static_cast<int>(points.cols());
    if (k > n) throw DataError("kmeans: k exceeds point count");
    Rng rng(seed);
    KmeansResult best;
    best.inertia = std::numeric_limits<double>::infinity();

    auto sqdist = [&](int i, const std::vector<double>& center) {
        double s = 0.0;
        for (int c = 0; c < d; ++c) {
            const double v = points(i, c) - center[c];
            s += v * v;
        }
        return s;
    };

    for (int restart = 0; restart < restarts; ++restart) {
        // k-means++ seeding
        std::vector<std::vector<double>> centers;
        {
            const int first = static_cast<int>(rng.below(n));
            centers.emplace_back(points.row(first).begin(), points.row(first).end());
            std::vector<double> d2(n);
            while (static_cast<int>(centers.size()) < k) {
                double total = 0.0;
                for (int i = 0; i < n; ++i) {
                    double m = std::numeric_limits<double>::infinity();
                    for (const auto& c : centers) m = std::min(m, sqdist(i, c));
                    d2[i] = m;
                    total += m;
                }
                int chosen = 0;
                if (total > 0.0) {
                    const double x = rng.uniform() * total;
                    double acc = 0.0;
                    for (int i = 0; i < n; ++i) {
                        acc += d2[i];
                        if (acc >= x) {
                            chosen = i;
                            break;
                        }
                    }
                } else {
                    chosen = static_cast<int>(rng.below(n));
                }
                centers.emplace_back(points.row(chosen).begin(), points.row(chosen).end());
            }
        }
        std::vector<int> assignment(n, -1);
        for (int iter = 0; iter < 100; ++iter) {
            bool changed = false;
            for (int i = 0; i < n; ++i) {
                int arg = 0;
                double m = sqdist(i, centers[0]);
                for (int c = 1; c < k; ++c) {
                    const double v = sqdist(i, centers[c]);
                    if (v < m) {
                        m = v;
                        arg = c;
                    }
                }
                if (assignment[i] != arg) {
                    assignment[i] = arg;
                    changed = true;
                }
            }
            if (!changed) break;
            for (int c = 0; c < k; ++c) {
                std::fill(centers[c].begin(), centers[c].end(), 0.0);
                int count = 0;
                for (int i = 0; i < n; ++i) {
                    if (assignment[i] != c) continue;
                    for (int j = 0; j < d; ++j) centers[c][j] += points(i, j);
                    ++count;
                }
                if (count > 0) {
                    for (double& v : centers[c]) v /= count;
                } else {
                    // reseed an empty cluster to the point farthest from its center
                    int far = 0;
                    double fd = -1.0;
                    for (int i = 0; i < n; ++i) {
                        const double v = sqdist(i, centers[assignment[i]]);
                        if (v > fd) {
                            fd = v;
                            far = i;
                        }
                    }
                    centers[c].assign(points.row(far).begin(), points.row(far).end());
                }
            }
        }
        double inertia = 0.0;
        for (int i = 0; i < n; ++i) inertia += sqdist(i, centers[assignment[i]]);
        if (inertia < best.inertia) {
            best.inertia = inertia;
            best.assignment = assignment;
        }
    }
    return best;
}

// clusters x labels count table.
inline std::vector<std::vector<int>> contingency_table(const std::vector<int>& clusters,
                                                       const std::vector<int>& labels,
                                                       int n_clusters, int n_labels) {
    std::vector<std::vector<int>> table(n_clusters, std::vector<int>(n_labels, 0));
    for (std::size_t i = 0; i < clusters.size(); ++i) {
        ++table[clusters[i]][labels[i]];
    }
    return table;
}

} // namespace talentrec
