#pragma once

// Independent reference implementations used only by the tests: exhaustive
// active-set enumeration for the projections and NNLS, naive complete
// linkage, a literal recursive dendrogram cut and finite differences.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <set>
#include <vector>

#include <Eigen/Dense>

#include "nmfcast/nmfcast.hpp"

namespace oracle {

using nmfcast::Index;
using nmfcast::Matrix;
using nmfcast::Vector;

/// Simplex projection by enumerating every support: on support S the
/// optimum is v_S - theta with theta = (sum v_S - 1)/|S|.
inline Vector simplex_projection(const Vector& v) {
    const Index n = v.size();
    Vector best;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
        double s = 0.0;
        int cnt = 0;
        for (Index i = 0; i < n; ++i) {
            if (mask & (1u << i)) {
                s += v[i];
                ++cnt;
            }
        }
        const double theta = (s - 1.0) / cnt;
        Vector w = Vector::Zero(n);
        bool ok = true;
        for (Index i = 0; i < n; ++i) {
            if (mask & (1u << i)) {
                w[i] = v[i] - theta;
                ok = ok && w[i] >= -1e-15;
            }
        }
        if (!ok) continue;
        const double d = (w - v).squaredNorm();
        if (d < best_d) {
            best_d = d;
            best = w.cwiseMax(0.0);
        }
    }
    return best;
}

/// Squared distance from `x` to conv(rows of g): for each support of at
/// most dim+1 generators solve the equality-constrained least squares
/// (KKT system) and keep the best nonnegative solution.
inline double hull_squared_distance(const Vector& x, const Matrix& g) {
    const Index m = g.rows();
    double best = std::numeric_limits<double>::infinity();
    for (std::uint32_t mask = 1; mask < (1u << m); ++mask) {
        std::vector<Index> s;
        for (Index i = 0; i < m; ++i) {
            if (mask & (1u << i)) s.push_back(i);
        }
        if (static_cast<Index>(s.size()) > g.cols() + 1) continue;
        const Index k = static_cast<Index>(s.size());
        Matrix gs(k, g.cols());
        for (Index a = 0; a < k; ++a) gs.row(a) = g.row(s[a]);
        Matrix kkt = Matrix::Zero(k + 1, k + 1);
        kkt.topLeftCorner(k, k) = gs * gs.transpose();
        kkt.topRightCorner(k, 1).setOnes();
        kkt.bottomLeftCorner(1, k).setOnes();
        Vector rhs(k + 1);
        rhs.head(k) = gs * x;
        rhs[k] = 1.0;
        const Vector sol = Eigen::CompleteOrthogonalDecomposition<Matrix>(kkt).solve(rhs);
        const Vector w = sol.head(k);
        if (w.minCoeff() < -1e-12 || std::abs(w.sum() - 1.0) > 1e-9) continue;
        const Vector p = gs.transpose() * w.cwiseMax(0.0);
        best = std::min(best, (p - x).squaredNorm());
    }
    return best;
}

/// NNLS by enumerating passive sets; returns the optimal objective
/// ||target - basis^T c||^2.
inline double nnls_objective(const Vector& target, const Matrix& basis) {
    const Index k = basis.rows();
    double best = target.squaredNorm();  // c = 0
    for (std::uint32_t mask = 1; mask < (1u << k); ++mask) {
        std::vector<Index> s;
        for (Index i = 0; i < k; ++i) {
            if (mask & (1u << i)) s.push_back(i);
        }
        Matrix a(target.size(), static_cast<Index>(s.size()));
        for (std::size_t j = 0; j < s.size(); ++j) a.col(static_cast<Index>(j)) = basis.row(s[j]).transpose();
        const Vector c = Eigen::CompleteOrthogonalDecomposition<Matrix>(a).solve(target);
        if (c.minCoeff() < 0.0) continue;
        best = std::min(best, (target - a * c).squaredNorm());
    }
    return best;
}

struct Merge {
    std::vector<Index> a;  ///< sorted leaf set with the smaller minimum
    std::vector<Index> b;
    double height;
};

/// Naive complete linkage: every step recomputes all cluster distances from
/// the leaves and merges the pair with the smallest (distance, min leaf of
/// the first, min leaf of the second).
inline std::vector<Merge> naive_complete_linkage(const Matrix& x) {
    std::vector<std::vector<Index>> clusters;
    for (Index i = 0; i < x.rows(); ++i) clusters.push_back({i});
    auto dist = [&](Index i, Index j) { return (x.row(i) - x.row(j)).cwiseAbs().sum(); };
    std::vector<Merge> merges;
    while (clusters.size() > 1) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t ba = 0;
        std::size_t bb = 0;
        for (std::size_t p = 0; p < clusters.size(); ++p) {
            for (std::size_t q = p + 1; q < clusters.size(); ++q) {
                double d = 0.0;
                for (Index i : clusters[p]) {
                    for (Index j : clusters[q]) d = std::max(d, dist(i, j));
                }
                const bool pq = clusters[p].front() < clusters[q].front();
                const std::size_t lo = pq ? p : q;
                const std::size_t hi = pq ? q : p;
                const bool better = d < best || (d == best && (clusters[lo].front() < clusters[ba].front() ||
                                                               (clusters[lo].front() == clusters[ba].front() &&
                                                                clusters[hi].front() < clusters[bb].front())));
                if (better) {
                    best = d;
                    ba = lo;
                    bb = hi;
                }
            }
        }
        merges.push_back({clusters[ba], clusters[bb], best});
        std::vector<Index> merged = clusters[ba];
        merged.insert(merged.end(), clusters[bb].begin(), clusters[bb].end());
        std::sort(merged.begin(), merged.end());
        clusters[ba] = merged;
        clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(bb));
    }
    return merges;
}

/// Literal recursive reading of the exploration rule: if both children are
/// small return both; otherwise emit each small child and recurse into each
/// large one.
inline void explore_recursive(const nmfcast::Dendrogram& t, Index node, std::size_t d,
                              std::vector<std::vector<Index>>& out) {
    const auto& nd = t.node(node);
    const Index c1 = nd.left;
    const Index c2 = nd.right;
    if (t.node(c1).size <= d && t.node(c2).size <= d) {
        out.push_back(t.leaves(c1));
        out.push_back(t.leaves(c2));
        return;
    }
    for (Index c : {c1, c2}) {
        if (t.node(c).size <= d) {
            out.push_back(t.leaves(c));
        } else {
            explore_recursive(t, c, d, out);
        }
    }
}

/// Characterization of the cut: node c is a cluster iff size(c) <= d and
/// its parent is the root or has more than d leaves.
inline std::set<std::vector<Index>> emitted_by_rule(const nmfcast::Dendrogram& t, std::size_t d) {
    std::set<std::vector<Index>> out;
    const Index root = t.root();
    if (t.node(root).is_leaf()) {
        out.insert({root});
        return out;
    }
    std::vector<Index> parent(t.n_nodes(), -1);
    for (Index i = 0; i < static_cast<Index>(t.n_nodes()); ++i) {
        const auto& nd = t.node(i);
        if (!nd.is_leaf()) {
            parent[static_cast<std::size_t>(nd.left)] = i;
            parent[static_cast<std::size_t>(nd.right)] = i;
        }
    }
    for (Index c = 0; c < static_cast<Index>(t.n_nodes()); ++c) {
        if (c == root) continue;
        const Index p = parent[static_cast<std::size_t>(c)];
        if (t.node(c).size <= d && (p == root || t.node(p).size > d)) out.insert(t.leaves(c));
    }
    return out;
}

/// Random merge tree over n leaves (uniform random pairings).
inline nmfcast::Dendrogram random_tree(std::size_t n, std::mt19937_64& rng) {
    std::vector<nmfcast::DendrogramNode> nodes(n);
    std::vector<Index> roots;
    for (std::size_t i = 0; i < n; ++i) roots.push_back(static_cast<Index>(i));
    double h = 0.0;
    while (roots.size() > 1) {
        std::uniform_int_distribution<std::size_t> pick(0, roots.size() - 1);
        const std::size_t a = pick(rng);
        std::size_t b = pick(rng);
        while (b == a) b = pick(rng);
        nmfcast::DendrogramNode m;
        m.left = roots[a];
        m.right = roots[b];
        m.height = (h += 1.0);
        m.size = nodes[static_cast<std::size_t>(m.left)].size + nodes[static_cast<std::size_t>(m.right)].size;
        nodes.push_back(m);
        const Index id = static_cast<Index>(nodes.size()) - 1;
        roots.erase(roots.begin() + static_cast<std::ptrdiff_t>(std::max(a, b)));
        roots.erase(roots.begin() + static_cast<std::ptrdiff_t>(std::min(a, b)));
        roots.push_back(id);
    }
    return nmfcast::Dendrogram(std::move(nodes), n);
}

/// Central difference of f at t = 0.
inline double central_difference(const std::function<double(double)>& f, double h) {
    return (f(h) - f(-h)) / (2.0 * h);
}

inline Matrix random_simplex_rows(Index rows, Index k, std::mt19937_64& rng, double floor = 0.0) {
    std::exponential_distribution<double> e(1.0);
    Matrix w(rows, k);
    for (Index i = 0; i < rows; ++i) {
        for (Index j = 0; j < k; ++j) w(i, j) = e(rng) + floor;
        w.row(i) /= w.row(i).sum();
    }
    return w;
}

inline Matrix random_uniform(Index rows, Index cols, std::mt19937_64& rng, double lo = 0.0, double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    Matrix m(rows, cols);
    for (Index j = 0; j < cols; ++j) {
        for (Index i = 0; i < rows; ++i) m(i, j) = u(rng);
    }
    return m;
}

/// Separable factor: the K x K identity on top of random simplex rows.
inline Matrix separable_w(Index n, Index k, std::mt19937_64& rng) {
    Matrix w(n, k);
    w.topRows(k) = Matrix::Identity(k, k);
    w.bottomRows(n - k) = random_simplex_rows(n - k, k, rng);
    return w;
}

/// Recovery instance in series space: M* = W0 H0 with H0 rows repeating with
/// period P, so that the slid matrix has rank K.
struct SlidInstance {
    Matrix w0;
    Matrix h0_series;  ///< K x (T+F)
    Matrix m_star;     ///< N x (T+F)
    nmfcast::SlidingGeometry geometry;
    Matrix x_star;     ///< slid M*, fully known
    Matrix h0_slid;    ///< K x (W P), the rows of H in slid space
};

inline SlidInstance slid_instance(std::size_t n, std::size_t k, std::size_t total, std::size_t period, std::size_t window,
                                  std::size_t horizon, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const Matrix w0 = separable_w(static_cast<Index>(n), static_cast<Index>(k), rng);
    const Matrix base = random_uniform(static_cast<Index>(k), static_cast<Index>(period), rng, 0.1, 1.0);
    Matrix h0(static_cast<Index>(k), static_cast<Index>(total));
    for (std::size_t t = 0; t < total; ++t) h0.col(static_cast<Index>(t)) = base.col(static_cast<Index>(t % period));
    const Matrix m = w0 * h0;
    const auto g = nmfcast::SlidingGeometry::make(n, total - horizon, horizon, period, window, 1);
    const Matrix x = nmfcast::apply_sliding(m, g);
    const Matrix hs = h0.leftCols(static_cast<Index>(window * period));
    return {w0, h0, m, g, x, hs};
}

/// Sum over rows of h0 of the squared distance to the closest row of h.
inline double matched_row_error(const Matrix& h0, const Matrix& h) {
    double total = 0.0;
    for (Index l = 0; l < h0.rows(); ++l) {
        double best = std::numeric_limits<double>::infinity();
        for (Index m = 0; m < h.rows(); ++m) best = std::min(best, (h0.row(l) - h.row(m)).squaredNorm());
        total += best;
    }
    return total;
}

/// Least-squares slope of log(y) against log(x).
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double lx = std::log(x[i]);
        const double ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace oracle
