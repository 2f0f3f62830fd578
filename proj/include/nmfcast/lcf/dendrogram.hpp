#pragma once

// Complete-linkage agglomerative clustering on l1 row distances, and the
// top-down cut that turns the tree into clusters of bounded size.

#include <algorithm>
#include <cstddef>
#include <limits>
#include <vector>

#include "nmfcast/errors.hpp"
#include "nmfcast/matrix_core.hpp"

namespace nmfcast {

struct DendrogramNode {
    Index left = -1;   ///< child node id, -1 for leaves
    Index right = -1;
    double height = 0.0;
    std::size_t size = 1;

    bool is_leaf() const noexcept { return left < 0; }
};

/// Merge tree over n leaves. Nodes 0..n-1 are the leaves (rows of the input),
/// nodes n..2n-2 the merges in the order they happened.
class Dendrogram {
public:
    Dendrogram() = default;
    explicit Dendrogram(std::vector<DendrogramNode> nodes, std::size_t leaves)
        : nodes_(std::move(nodes)), leaves_(leaves) {}

    std::size_t n_leaves() const noexcept { return leaves_; }
    std::size_t n_nodes() const noexcept { return nodes_.size(); }
    Index root() const noexcept { return static_cast<Index>(nodes_.size()) - 1; }
    const DendrogramNode& node(Index id) const { return nodes_.at(static_cast<std::size_t>(id)); }
    const std::vector<DendrogramNode>& nodes() const noexcept { return nodes_; }

    /// Leaf indices under `id`, ascending.
    std::vector<Index> leaves(Index id) const {
        std::vector<Index> out;
        std::vector<Index> stack{id};
        while (!stack.empty()) {
            const Index cur = stack.back();
            stack.pop_back();
            const DendrogramNode& nd = node(cur);
            if (nd.is_leaf()) {
                out.push_back(cur);
            } else {
                stack.push_back(nd.left);
                stack.push_back(nd.right);
            }
        }
        std::sort(out.begin(), out.end());
        return out;
    }

private:
    std::vector<DendrogramNode> nodes_;
    std::size_t leaves_ = 0;
};

inline Matrix l1_distances(const Matrix& x) {
    const Index n = x.rows();
    Matrix d = Matrix::Zero(n, n);
    for (Index i = 0; i < n; ++i) {
        for (Index j = i + 1; j < n; ++j) {
            d(i, j) = d(j, i) = (x.row(i) - x.row(j)).cwiseAbs().sum();
        }
    }
    return d;
}

/// Complete linkage on l1 distances between rows of `w0`. Clusters are
/// identified by their smallest leaf; among equal merge heights the pair
/// with the smallest (first id, second id) merges first.
inline Dendrogram build_dendrogram(const Matrix& w0) {
    const Index n = w0.rows();
    if (n == 0) {
        throw DimensionError("build_dendrogram: no rows");
    }
    if (!all_finite(w0)) {
        throw DimensionError("build_dendrogram: non-finite input");
    }
    std::vector<DendrogramNode> nodes(static_cast<std::size_t>(n));
    nodes.reserve(static_cast<std::size_t>(2 * n - 1));

    Matrix d = l1_distances(w0);
    std::vector<bool> active(static_cast<std::size_t>(n), true);
    std::vector<Index> node_of(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
        node_of[static_cast<std::size_t>(i)] = i;
    }
    std::vector<Index> nn(static_cast<std::size_t>(n), -1);
    std::vector<double> nn_dist(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());

    auto refresh = [&](Index i) {
        nn[static_cast<std::size_t>(i)] = -1;
        nn_dist[static_cast<std::size_t>(i)] = std::numeric_limits<double>::infinity();
        for (Index j = 0; j < n; ++j) {
            if (j != i && active[static_cast<std::size_t>(j)] && d(i, j) < nn_dist[static_cast<std::size_t>(i)]) {
                nn_dist[static_cast<std::size_t>(i)] = d(i, j);
                nn[static_cast<std::size_t>(i)] = j;
            }
        }
    };
    for (Index i = 0; i < n; ++i) {
        refresh(i);
    }

    for (Index step = 0; step + 1 < n; ++step) {
        Index a = -1;
        Index b = -1;
        double best = std::numeric_limits<double>::infinity();
        for (Index i = 0; i < n; ++i) {
            const auto ui = static_cast<std::size_t>(i);
            if (!active[ui] || nn[ui] < 0) {
                continue;
            }
            const Index lo = std::min(i, nn[ui]);
            const Index hi = std::max(i, nn[ui]);
            if (a < 0 || nn_dist[ui] < best || (nn_dist[ui] == best && (lo < a || (lo == a && hi < b)))) {
                best = nn_dist[ui];
                a = lo;
                b = hi;
            }
        }

        DendrogramNode merged;
        merged.left = node_of[static_cast<std::size_t>(a)];
        merged.right = node_of[static_cast<std::size_t>(b)];
        merged.height = best;
        merged.size = nodes[static_cast<std::size_t>(merged.left)].size + nodes[static_cast<std::size_t>(merged.right)].size;
        nodes.push_back(merged);
        node_of[static_cast<std::size_t>(a)] = static_cast<Index>(nodes.size()) - 1;
        active[static_cast<std::size_t>(b)] = false;

        for (Index j = 0; j < n; ++j) {
            if (active[static_cast<std::size_t>(j)] && j != a) {
                d(a, j) = d(j, a) = std::max(d(a, j), d(b, j));
            }
        }
        // Distances only grew, so only neighbours pointing at a or b are stale.
        for (Index j = 0; j < n; ++j) {
            const auto uj = static_cast<std::size_t>(j);
            if (active[uj] && (j == a || nn[uj] == a || nn[uj] == b)) {
                refresh(j);
            }
        }
    }
    return Dendrogram(std::move(nodes), static_cast<std::size_t>(n));
}

/// Top-down cut: every child of a visited node is emitted as a cluster when
/// it has at most `d` leaves and explored further otherwise. Small children
/// are emitted when their parent is visited; larger ones are explored
/// depth-first, left before right.
inline std::vector<std::vector<Index>> explore_dendrogram(const Dendrogram& tree, std::size_t d) {
    if (d == 0) {
        throw ConfigError("explore_dendrogram: maximal cluster size must be at least 1");
    }
    std::vector<std::vector<Index>> clusters;
    if (tree.n_nodes() == 0) {
        return clusters;
    }
    if (tree.node(tree.root()).is_leaf()) {
        clusters.push_back({tree.root()});
        return clusters;
    }
    std::vector<Index> stack{tree.root()};
    while (!stack.empty()) {
        const Index cur = stack.back();
        stack.pop_back();
        const DendrogramNode& nd = tree.node(cur);
        std::vector<Index> explore_later;
        for (Index child : {nd.left, nd.right}) {
            if (tree.node(child).size <= d) {
                clusters.push_back(tree.leaves(child));
            } else {
                explore_later.push_back(child);
            }
        }
        for (auto it = explore_later.rbegin(); it != explore_later.rend(); ++it) {
            stack.push_back(*it);
        }
    }
    return clusters;
}

}  // namespace nmfcast
