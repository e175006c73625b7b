#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <string>
#include <vector>

#include "talentrec/error.hpp"
#include "talentrec/graph.hpp"

namespace talentrec {

// The four structural features. degree / closeness / betweenness run on the
// unweighted skeleton (their formulas use edge counts, hop distances and
// path counts); eigenvector centrality keeps the weights, which appear in
// its defining relation.

// Number of edges incident to each node.
inline std::vector<double> degree_centrality(const WeightedGraph& g) {
    const auto adj = g.adjacency();
    std::vector<double> out(g.n());
    for (int i = 0; i < g.n(); ++i) out[i] = static_cast<double>(adj[i].size());
    return out;
}

namespace detail {

inline std::vector<int> bfs_distances(const std::vector<std::vector<std::pair<int, double>>>& adj,
                                      int source) {
    std::vector<int> dist(adj.size(), -1);
    std::deque<int> queue{source};
    dist[source] = 0;
    while (!queue.empty()) {
        const int u = queue.front();
        queue.pop_front();
        for (const auto& [v, w] : adj[u]) {
            if (dist[v] < 0) {
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
        }
    }
    return dist;
}

} // namespace detail

// Inverse of the summed shortest hop distances. On disconnected graphs the
// sum runs inside the node's component and the value is scaled by
// (|component|-1)/(n-1); isolated nodes score 0.
inline std::vector<double> closeness_centrality(const WeightedGraph& g) {
    const auto adj = g.adjacency();
    const int n = g.n();
    std::vector<double> out(n, 0.0);
    for (int v = 0; v < n; ++v) {
        const auto dist = detail::bfs_distances(adj, v);
        long long total = 0;
        int reachable = 0;
        for (int u = 0; u < n; ++u) {
            if (u != v && dist[u] >= 0) {
                total += dist[u];
                ++reachable;
            }
        }
        if (reachable == 0 || n == 1) continue;
        out[v] = (static_cast<double>(reachable) / (n - 1)) / static_cast<double>(total);
    }
    return out;
}

// Brandes' accumulation over unweighted shortest paths. Each unordered
// {s, t} pair is counted once.
inline std::vector<double> betweenness_centrality(const WeightedGraph& g) {
    const auto adj = g.adjacency();
    const int n = g.n();
    std::vector<double> bc(n, 0.0);
    std::vector<int> dist(n);
    std::vector<double> sigma(n), delta(n);
    std::vector<std::vector<int>> preds(n);
    std::vector<int> order;
    order.reserve(n);
    for (int s = 0; s < n; ++s) {
        std::fill(dist.begin(), dist.end(), -1);
        std::fill(sigma.begin(), sigma.end(), 0.0);
        std::fill(delta.begin(), delta.end(), 0.0);
        for (auto& p : preds) p.clear();
        order.clear();
        std::deque<int> queue{s};
        dist[s] = 0;
        sigma[s] = 1.0;
        while (!queue.empty()) {
            const int u = queue.front();
            queue.pop_front();
            order.push_back(u);
            for (const auto& [v, w] : adj[u]) {
                if (dist[v] < 0) {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
                if (dist[v] == dist[u] + 1) {
                    sigma[v] += sigma[u];
                    preds[v].push_back(u);
                }
            }
        }
        for (auto it = order.rbegin(); it != order.rend(); ++it) {
            const int w = *it;
            for (int p : preds[w]) {
                delta[p] += sigma[p] / sigma[w] * (1.0 + delta[w]);
            }
            if (w != s) bc[w] += delta[w];
        }
    }
    for (double& x : bc) x /= 2.0; // each unordered pair was seen from both endpoints
    return bc;
}

// Leading eigenvector of the weighted adjacency, computed per connected
// component by power iteration on (A + I) — the shift makes the dominant
// eigenvalue strictly largest in magnitude, so bipartite components still
// converge. Each component is scaled to unit max-norm; isolated nodes get 0.
inline std::vector<double> eigenvector_centrality(const WeightedGraph& g,
                                                  double tol = 1e-9,
                                                  int max_iter = 10000) {
    const auto adj = g.adjacency();
    const int n = g.n();
    std::vector<double> out(n, 0.0);
    std::vector<int> component(n, -1);
    for (int start = 0; start < n; ++start) {
        if (component[start] >= 0) continue;
        std::vector<int> members;
        std::deque<int> queue{start};
        component[start] = start;
        while (!queue.empty()) {
            const int u = queue.front();
            queue.pop_front();
            members.push_back(u);
            for (const auto& [v, w] : adj[u]) {
                if (component[v] < 0) {
                    component[v] = start;
                    queue.push_back(v);
                }
            }
        }
        if (members.size() == 1) continue; // isolated
        std::sort(members.begin(), members.end());
        std::vector<double> x(members.size(), 1.0), y(members.size());
        std::vector<int> local(n, -1);
        for (std::size_t k = 0; k < members.size(); ++k) local[members[k]] = static_cast<int>(k);
        double residual = 0.0;
        bool converged = false;
        for (int it = 0; it < max_iter; ++it) {
            for (std::size_t k = 0; k < members.size(); ++k) {
                double acc = x[k]; // the +I shift
                for (const auto& [v, w] : adj[members[k]]) acc += w * x[local[v]];
                y[k] = acc;
            }
            double mx = 0.0;
            for (double v : y) mx = std::max(mx, v);
            residual = 0.0;
            for (std::size_t k = 0; k < members.size(); ++k) {
                y[k] /= mx;
                residual = std::max(residual, std::abs(y[k] - x[k]));
            }
            x.swap(y);
            if (residual < tol) {
                converged = true;
                break;
            }
        }
        if (!converged) {
            throw NumericError("eigenvector centrality: no convergence, residual " +
                               std::to_string(residual));
        }
        for (std::size_t k = 0; k < members.size(); ++k) out[members[k]] = x[k];
    }
    return out;
}

struct CentralityVector {
    std::vector<EmployeeId> order;
    std::vector<double> degree, closeness, betweenness, eigenvector;
};

inline CentralityVector compute_centralities(const WeightedGraph& g,
                                             double tol = 1e-9, int max_iter = 10000) {
    CentralityVector c;
    c.order = g.ids;
    c.degree = degree_centrality(g);
    c.closeness = closeness_centrality(g);
    c.betweenness = betweenness_centrality(g);
    c.eigenvector = eigenvector_centrality(g, tol, max_iter);
    return c;
}

} // namespace talentrec
