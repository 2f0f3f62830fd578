#pragma once

// Dense matrix aliases and the projection / least-squares kernels shared by
// every solver: Euclidean projection onto the standard simplex, projection
// onto the convex hull of a set of points, and active-set NNLS.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "nmfcast/errors.hpp"

namespace nmfcast {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
using Index = Eigen::Index;

template <typename Derived>
bool all_finite(const Eigen::DenseBase<Derived>& m) {
    return m.derived().array().isFinite().all();
}

/// Frobenius norm, sqrt(sum of squared entries).
template <typename Derived>
double frobenius(const Eigen::MatrixBase<Derived>& a) {
    return a.norm();
}

/// Nonnegative weights that sum to one.
class SimplexVector {
public:
    static constexpr double kTolerance = 1e-10;

    /// Validates the simplex invariant; throws DimensionError otherwise.
    static SimplexVector from_weights(Vector weights, double tolerance = kTolerance) {
        if (weights.size() == 0) {
            throw DimensionError("SimplexVector: empty weight vector");
        }
        if (!all_finite(weights) || weights.minCoeff() < 0.0 ||
            std::abs(weights.sum() - 1.0) > tolerance) {
            throw DimensionError("SimplexVector: weights are not on the standard simplex");
        }
        return SimplexVector(std::move(weights));
    }

    Index dim() const noexcept { return weights_.size(); }
    const Vector& weights() const noexcept { return weights_; }
    double operator[](Index i) const { return weights_[i]; }

private:
    explicit SimplexVector(Vector w) : weights_(std::move(w)) {}

    Vector weights_;
};

namespace detail {

// Sort-and-threshold projection (Held/Wolfe/Crowder, Duchi et al.).
// `scratch` is reused between calls to avoid reallocating per row.
template <typename Derived>
void project_simplex_inplace(Eigen::DenseBase<Derived>& v, std::vector<double>& scratch) {
    const Index n = v.size();
    scratch.resize(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
        scratch[static_cast<std::size_t>(i)] = v(i);
    }
    std::sort(scratch.begin(), scratch.end(), std::greater<>());
    double cumsum = 0.0;
    double theta = 0.0;
    for (std::size_t j = 0; j < scratch.size(); ++j) {
        cumsum += scratch[j];
        const double t = (cumsum - 1.0) / static_cast<double>(j + 1);
        if (scratch[j] - t > 0.0) {
            theta = t;
        }
    }
    for (Index i = 0; i < n; ++i) {
        v(i) = std::max(v(i) - theta, 0.0);
    }
}

}  // namespace detail

/// Euclidean projection of `v` onto {w >= 0, sum(w) = 1}.
inline SimplexVector project_simplex(const Eigen::Ref<const Vector>& v) {
    if (v.size() == 0) {
        throw DimensionError("project_simplex: empty vector");
    }
    if (!all_finite(v)) {
        throw DimensionError("project_simplex: non-finite input");
    }
    Vector w = v;
    std::vector<double> scratch;
    detail::project_simplex_inplace(w, scratch);
    // Rounding in the threshold can leave |sum - 1| at a few ulps.
    return SimplexVector::from_weights(std::move(w), 1e-9);
}

/// Projects every row of `m` onto the simplex in place.
inline void project_rows_to_simplex(Matrix& m) {
    std::vector<double> scratch;
    for (Index i = 0; i < m.rows(); ++i) {
        auto row = m.row(i);
        detail::project_simplex_inplace(row, scratch);
    }
}

struct HullProjectionOptions {
    double gap_tolerance = 1e-8;
    std::size_t max_iterations = 10000;
};

struct HullProjection {
    Vector projection;
    SimplexVector weights;
    double gap = 0.0;             ///< Frank-Wolfe duality gap at exit
    double squared_distance = 0.0;
    std::size_t iterations = 0;
};

/// Projects `point` onto conv(rows of `generators`) with away-step
/// Frank-Wolfe and exact line search. `warm_start`, when given, must be a
/// weight vector over the generator rows; it is projected to the simplex
/// before use.
inline HullProjection project_convex_hull(const Eigen::Ref<const Vector>& point,
                                          const Eigen::Ref<const Matrix>& generators,
                                          const HullProjectionOptions& opts = {},
                                          const Vector* warm_start = nullptr) {
    const Index m = generators.rows();
    const Index d = generators.cols();
    if (m == 0) {
        throw DimensionError("project_convex_hull: no generators");
    }
    if (point.size() != d) {
        throw DimensionError("project_convex_hull: point has dimension " + std::to_string(point.size()) +
                             ", generators have " + std::to_string(d) + " columns");
    }
    if (!all_finite(point) || !all_finite(generators)) {
        throw DimensionError("project_convex_hull: non-finite input");
    }

    Vector w = Vector::Zero(m);
    if (warm_start != nullptr && warm_start->size() == m && all_finite(*warm_start)) {
        w = *warm_start;
        std::vector<double> scratch;
        detail::project_simplex_inplace(w, scratch);
    } else {
        Index nearest = 0;
        (generators.rowwise() - point.transpose()).rowwise().squaredNorm().minCoeff(&nearest);
        w[nearest] = 1.0;
    }

    Vector x = generators.transpose() * w;
    Vector grad(d);
    Vector scores(m);
    Vector dir(d);
    double gap = std::numeric_limits<double>::infinity();
    std::size_t it = 0;
    for (; it < opts.max_iterations; ++it) {
        if (it > 0 && it % 64 == 0) {
            x.noalias() = generators.transpose() * w;  // limit drift of the running iterate
        }
        grad = x - point;
        scores.noalias() = generators * grad;
        const double gx = grad.dot(x);

        Index fw_vertex = 0;
        scores.minCoeff(&fw_vertex);
        gap = gx - scores[fw_vertex];
        if (gap <= opts.gap_tolerance) {
            break;
        }

        Index away_vertex = -1;
        double away_score = -std::numeric_limits<double>::infinity();
        for (Index j = 0; j < m; ++j) {
            if (w[j] > 0.0 && scores[j] > away_score) {
                away_score = scores[j];
                away_vertex = j;
            }
        }
        const double away_gap = away_score - gx;

        double step_max = 1.0;
        bool fw_step = true;
        if (away_vertex >= 0 && away_gap > gap && w[away_vertex] < 1.0) {
            fw_step = false;
            dir = x - generators.row(away_vertex).transpose();
            step_max = w[away_vertex] / (1.0 - w[away_vertex]);
        } else {
            dir = generators.row(fw_vertex).transpose() - x;
        }
        const double dd = dir.squaredNorm();
        if (dd <= 0.0) {
            break;
        }
        const double step = std::clamp(-grad.dot(dir) / dd, 0.0, step_max);
        if (step <= 0.0) {
            break;
        }
        if (fw_step) {
            w *= (1.0 - step);
            w[fw_vertex] += step;
        } else {
            w *= (1.0 + step);
            w[away_vertex] -= step;
            if (step == step_max) {
                w[away_vertex] = 0.0;  // drop step
            }
        }
        w = w.cwiseMax(0.0);
        x += step * dir;
    }
    w /= w.sum();
    x.noalias() = generators.transpose() * w;
    if (!std::isfinite(gap) || it == opts.max_iterations) {
        grad = x - point;
        scores.noalias() = generators * grad;
        gap = grad.dot(x) - scores.minCoeff();
    }

    HullProjection out{x, SimplexVector::from_weights(std::move(w), 1e-9), std::max(gap, 0.0),
                       (x - point).squaredNorm(), it};
    return out;
}

struct NnlsOptions {
    double tolerance = 1e-12;  ///< relative to max |A^T b|
    std::size_t max_iterations = 0;  ///< 0 selects 3 * K + 10
};

/// Active-set NNLS (Lawson-Hanson in the Bro-de Jong normal-equation form):
/// minimizes 0.5 x^T G x - x^T b over x >= 0, where G = A^T A and b = A^T y.
/// Rank-deficient G is handled by minimum-norm solves on the passive set.
inline Vector nnls_gram(const Eigen::Ref<const Matrix>& gram, const Eigen::Ref<const Vector>& atb,
                        const NnlsOptions& opts = {}) {
    const Index k = gram.rows();
    if (gram.cols() != k || atb.size() != k) {
        throw DimensionError("nnls_gram: gram must be square and match the right-hand side");
    }
    Vector x = Vector::Zero(k);
    if (k == 0) {
        return x;
    }
    const double tol = opts.tolerance * std::max(1.0, atb.cwiseAbs().maxCoeff());
    const std::size_t max_outer =
        opts.max_iterations > 0 ? opts.max_iterations : static_cast<std::size_t>(3 * k + 10);

    std::vector<bool> passive(static_cast<std::size_t>(k), false);
    Vector grad = atb;  // negative gradient at x = 0
    std::vector<Index> idx;
    idx.reserve(static_cast<std::size_t>(k));

    auto solve_passive = [&](Vector& s) {
        idx.clear();
        for (Index j = 0; j < k; ++j) {
            if (passive[static_cast<std::size_t>(j)]) {
                idx.push_back(j);
            }
        }
        const Index np = static_cast<Index>(idx.size());
        Matrix gp(np, np);
        Vector bp(np);
        for (Index a = 0; a < np; ++a) {
            bp[a] = atb[idx[a]];
            for (Index b = 0; b < np; ++b) {
                gp(a, b) = gram(idx[a], idx[b]);
            }
        }
        Vector zp = Eigen::CompleteOrthogonalDecomposition<Matrix>(gp).solve(bp);
        s.setZero(k);
        for (Index a = 0; a < np; ++a) {
            s[idx[a]] = zp[a];
        }
    };

    Vector s(k);
    for (std::size_t outer = 0; outer < max_outer; ++outer) {
        Index best = -1;
        double best_val = tol;
        for (Index j = 0; j < k; ++j) {
            if (!passive[static_cast<std::size_t>(j)] && grad[j] > best_val) {
                best_val = grad[j];
                best = j;
            }
        }
        if (best < 0) {
            break;
        }
        passive[static_cast<std::size_t>(best)] = true;

        for (std::size_t inner = 0; inner <= static_cast<std::size_t>(k); ++inner) {
            solve_passive(s);
            double alpha = std::numeric_limits<double>::infinity();
            for (Index j = 0; j < k; ++j) {
                if (passive[static_cast<std::size_t>(j)] && s[j] <= 0.0) {
                    const double denom = x[j] - s[j];
                    const double a = denom > 0.0 ? x[j] / denom : 0.0;
                    alpha = std::min(alpha, a);
                }
            }
            if (!std::isfinite(alpha)) {
                break;  // passive solution strictly feasible
            }
            x += alpha * (s - x);
            for (Index j = 0; j < k; ++j) {
                if (passive[static_cast<std::size_t>(j)] && x[j] <= tol * 1e-3) {
                    passive[static_cast<std::size_t>(j)] = false;
                    x[j] = 0.0;
                }
            }
        }
        for (Index j = 0; j < k; ++j) {
            x[j] = passive[static_cast<std::size_t>(j)] ? std::max(s[j], 0.0) : 0.0;
        }
        grad = atb - gram * x;
    }
    return x;
}

/// Coefficients c >= 0 minimizing ||target - basis^T c||_2, where the rows
/// of `basis` are the basis vectors.
inline Vector nnls_row(const Eigen::Ref<const Vector>& target, const Eigen::Ref<const Matrix>& basis,
                       const NnlsOptions& opts = {}) {
    if (basis.cols() != target.size()) {
        throw DimensionError("nnls_row: basis has " + std::to_string(basis.cols()) +
                             " columns, target has length " + std::to_string(target.size()));
    }
    const Matrix gram = basis * basis.transpose();
    const Vector atb = basis * target;
    return nnls_gram(gram, atb, opts);
}

}  // namespace nmfcast
