#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "talentrec/embed.hpp"
#include "talentrec/error.hpp"
#include "talentrec/matrix.hpp"
#include "talentrec/orgdata.hpp"

namespace talentrec {

// Sparse undirected weighted graph over the roster. Edges are stored once
// with u < v; symmetry is implied. Node order is the sorted id order shared
// by every module.
struct WeightedGraph {
    struct Edge {
        int u, v;
        double w;
    };

    std::vector<EmployeeId> ids;
    std::map<EmployeeId, int> node_index;
    std::vector<Edge> edges; // canonical u < v, sorted by (u, v)

    int n() const { return static_cast<int>(ids.size()); }

    // Neighbor lists sorted by target index; both directions of each edge.
    std::vector<std::vector<std::pair<int, double>>> adjacency() const {
        std::vector<std::vector<std::pair<int, double>>> adj(ids.size());
        for (const auto& e : edges) {
            adj[e.u].emplace_back(e.v, e.w);
            adj[e.v].emplace_back(e.u, e.w);
        }
        for (auto& nb : adj) std::sort(nb.begin(), nb.end());
        return adj;
    }

    void validate() const {
        for (const auto& e : edges) {
            if (e.u == e.v) throw DataError("graph: self-loop stored on node " + ids[e.u]);
            if (!(e.w > 0.0) || !std::isfinite(e.w)) {
                throw DataError("graph: non-positive or non-finite edge weight");
            }
        }
    }
};

namespace detail {

inline WeightedGraph graph_with_roster_nodes(const OrgRoster& roster) {
    WeightedGraph g;
    for (const auto& e : roster.employees) {
        g.node_index[e.id] = static_cast<int>(g.ids.size());
        g.ids.push_back(e.id);
    }
    return g;
}

} // namespace detail

// Structure Network: weight(i, j) = count of emails in either direction.
// Every roster employee is a node even when isolated.
inline WeightedGraph build_structure_network(const std::vector<EmailRecord>& records,
                                             const OrgRoster& roster) {
    WeightedGraph g = detail::graph_with_roster_nodes(roster);
    std::map<std::pair<int, int>, double> weights;
    for (const auto& rec : records) {
        auto si = g.node_index.find(rec.sender);
        auto ri = g.node_index.find(rec.recipient);
        if (si == g.node_index.end() || ri == g.node_index.end()) {
            throw DataError("structure network: email id missing from roster");
        }
        int u = si->second, v = ri->second;
        if (u == v) continue;
        if (u > v) std::swap(u, v);
        weights[{u, v}] += 1.0;
    }
    for (const auto& [key, w] : weights) g.edges.push_back({key.first, key.second, w});
    return g;
}

// Semantic Similarity Network: edge iff cosine(s_i, s_j) >= tau and both
// nodes pooled at least one email. Weights are affinely rescaled so cosine
// tau maps to 0.5 and cosine 1 maps to 1.0.
inline WeightedGraph build_semantic_network(const NodeSemantics& sem, double tau = 0.75) {
    if (!(tau > 0.0 && tau < 1.0)) throw ConfigError("semantic network: tau must lie in (0,1)");
    WeightedGraph g;
    g.ids = sem.order;
    g.node_index = sem.index;
    const int n = sem.centroid.rows() ? static_cast<int>(sem.centroid.rows()) : 0;
    for (int i = 0; i < n; ++i) {
        if (sem.coverage[i] == 0) continue;
        for (int j = i + 1; j < n; ++j) {
            if (sem.coverage[j] == 0) continue;
            const double sim = cosine(sem.centroid.row(i), sem.centroid.row(j));
            if (sim >= tau) {
                const double w = 0.5 + 0.5 * (sim - tau) / (1.0 - tau);
                g.edges.push_back({i, j, w});
            }
        }
    }
    return g;
}

// GCN propagation operator: Ahat = D^{-1/2} (A + I) D^{-1/2} with D the
// weighted degree of A plus the unit self-loop. Stored CSR with columns
// ascending per row, diagonal included.
struct NormalizedOperator {
    int n = 0;
    std::vector<int> row_ptr;
    std::vector<int> col;
    std::vector<double> val;

    // y = Ahat * x
    void apply(const Matrix& x, Matrix& y) const {
        if (static_cast<int>(x.rows()) != n) throw NumericError("operator: row count mismatch");
        if (y.rows() != x.rows() || y.cols() != x.cols()) y = Matrix(x.rows(), x.cols());
        y.fill(0.0);
        const std::size_t cols = x.cols();
        for (int i = 0; i < n; ++i) {
            auto out = y.row(i);
            for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k) {
                const double a = val[k];
                auto in = x.row(col[k]);
                for (std::size_t d = 0; d < cols; ++d) out[d] += a * in[d];
            }
        }
    }

    Matrix apply(const Matrix& x) const {
        Matrix y;
        apply(x, y);
        return y;
    }
};

inline NormalizedOperator normalize(const WeightedGraph& g) {
    const int n = g.n();
    const auto adj = g.adjacency();
    std::vector<double> degree(n, 0.0);
    for (int i = 0; i < n; ++i) {
        for (const auto& [j, w] : adj[i]) degree[i] += w;
    }
    NormalizedOperator op;
    op.n = n;
    op.row_ptr.assign(n + 1, 0);
    for (int i = 0; i < n; ++i) {
        const double dpi = degree[i] + 1.0;
        bool diagonal_done = false;
        auto push = [&](int j, double a) {
            op.col.push_back(j);
            op.val.push_back(a);
        };
        for (const auto& [j, w] : adj[i]) {
            if (!diagonal_done && j > i) {
                push(i, 1.0 / std::sqrt(dpi * dpi));
                diagonal_done = true;
            }
            push(j, w / std::sqrt(dpi * (degree[j] + 1.0)));
        }
        if (!diagonal_done) push(i, 1.0 / std::sqrt(dpi * dpi));
        op.row_ptr[i + 1] = static_cast<int>(op.col.size());
    }
    return op;
}

// Early fusion: max-normalize each graph's weights to [0,1], then sum over
// the union of the edge sets so a single GCN sees one operator.
inline WeightedGraph early_fuse(const WeightedGraph& a, const WeightedGraph& b) {
    if (a.ids != b.ids) throw DataError("early fusion: node sets differ");
    auto max_weight = [](const WeightedGraph& g) {
        double m = 0.0;
        for (const auto& e : g.edges) m = std::max(m, e.w);
        return m;
    };
    const double ma = max_weight(a);
    const double mb = max_weight(b);
    std::map<std::pair<int, int>, double> weights;
    for (const auto& e : a.edges) weights[{e.u, e.v}] += ma > 0.0 ? e.w / ma : 0.0;
    for (const auto& e : b.edges) weights[{e.u, e.v}] += mb > 0.0 ? e.w / mb : 0.0;
    WeightedGraph fused;
    fused.ids = a.ids;
    fused.node_index = a.node_index;
    for (const auto& [key, w] : weights) {
        if (w > 0.0) fused.edges.push_back({key.first, key.second, w});
    }
    return fused;
}

} // namespace talentrec
