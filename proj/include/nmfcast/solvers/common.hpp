#pragma once

// Pieces shared by all solvers: random initialization, row/column
// subsampling, the archetypal distance term, the KKT residual and the
// stopping rule.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "nmfcast/masking.hpp"
#include "nmfcast/matrix_core.hpp"
#include "nmfcast/solvers/config.hpp"

namespace nmfcast {

using Rng = std::mt19937_64;

namespace detail {

inline Matrix random_simplex_rows(Index rows, Index k, Rng& rng) {
    std::exponential_distribution<double> expo(1.0);
    Matrix w(rows, k);
    for (Index i = 0; i < rows; ++i) {
        double s = 0.0;
        for (Index j = 0; j < k; ++j) {
            w(i, j) = expo(rng);
            s += w(i, j);
        }
        if (s > 0.0) {
            w.row(i) /= s;
        } else {
            w.row(i).setConstant(1.0 / static_cast<double>(k));
        }
    }
    return w;
}

inline Matrix random_uniform(Index rows, Index cols, double hi, Rng& rng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Matrix m(rows, cols);
    for (Index j = 0; j < cols; ++j) {
        for (Index i = 0; i < rows; ++i) {
            m(i, j) = hi * unif(rng);
        }
    }
    return m;
}

/// `count` distinct indices from [0, total) in increasing order; the
/// identity sequence when count >= total.
inline std::vector<Index> sample_indices(Index total, std::size_t count, Rng& rng) {
    std::vector<Index> idx(static_cast<std::size_t>(total));
    std::iota(idx.begin(), idx.end(), Index{0});
    if (count >= idx.size()) {
        return idx;
    }
    for (std::size_t i = 0; i < count; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
        std::swap(idx[i], idx[pick(rng)]);
    }
    idx.resize(count);
    std::sort(idx.begin(), idx.end());
    return idx;
}

inline double residual_sq(const Matrix& n, const Matrix& w, const Matrix& h) {
    return (n - w * h).squaredNorm();
}

inline void check_finite_objective(double value, const char* solver, std::size_t iteration) {
    if (!std::isfinite(value)) {
        throw DivergenceError(std::string(solver) + ": objective became non-finite at iteration " +
                              std::to_string(iteration));
    }
}

}  // namespace detail

/// Random starting point: H entries uniform on [0, init_scale], W rows on
/// the simplex, N = P_X(W H). Deterministic given cfg.seed.
inline Factorization init_random(const MaskedProblem& p, const SolverConfig& cfg) {
    if (cfg.rank == 0) {
        throw ConfigError("init_random: rank must be at least 1");
    }
    const auto k = static_cast<Index>(cfg.rank);
    Rng rng(cfg.seed);
    Factorization f;
    f.H = detail::random_uniform(k, p.cols(), cfg.init_scale, rng);
    if (cfg.w_init == WInit::barycentric) {
        f.W = Matrix::Constant(p.rows(), k, 1.0 / static_cast<double>(k));
    } else {
        f.W = detail::random_simplex_rows(p.rows(), k, rng);
    }
    f.N = cfg.profile.masked ? completion_projection(f.W, f.H, p) : p.observed();
    return f;
}

/// Sum over rows of H of the squared distance to conv(rows of N). Writes
/// the projections into `projections` (K x p) and refreshes the per-row
/// warm-start weights.
inline double archetypal_distance(const Matrix& h, const Matrix& n, const HullProjectionOptions& opts,
                                  std::vector<Vector>& weights, Matrix* projections = nullptr) {
    weights.resize(static_cast<std::size_t>(h.rows()));
    if (projections != nullptr) {
        projections->resize(h.rows(), h.cols());
    }
    double total = 0.0;
    for (Index k = 0; k < h.rows(); ++k) {
        Vector& warm = weights[static_cast<std::size_t>(k)];
        HullProjection pr =
            project_convex_hull(h.row(k).transpose(), n, opts, warm.size() == n.rows() ? &warm : nullptr);
        total += pr.squared_distance;
        if (projections != nullptr) {
            projections->row(k) = pr.projection.transpose();
        }
        warm = pr.weights.weights();
    }
    return total;
}

struct KktReport {
    double residual = 0.0;
    double w_part = 0.0;
    double h_part = 0.0;
    std::vector<Index> zero_w_rows;
};

/// KKT residual ||R(W)||_F + ||R(H)||_F of the factorization objective.
///
/// With G_W = (WH - N) H^T, the multiplier of row i's sum-to-one constraint
/// is estimated as t_i = -mean{ G_W(i,j) : W(i,j) > 0 }, and
/// R(W)(i,j) = |G_W(i,j) + t_i| on the support of W. R(H) is |W^T (WH - N)|
/// on the support of H when H >= 0 is enforced, everywhere otherwise; for
/// archetypal profiles the penalty gradient lambda (H - P_conv(N)(H)) is
/// added. `hull_points` and `wh`, when given, are the already computed
/// projections and product W H.
inline KktReport kkt_report(const Matrix& w, const Matrix& h, const Matrix& n, const ConstraintProfile& profile,
                            const HullProjectionOptions& hull_opts = {}, const Matrix* hull_points = nullptr,
                            const Matrix* wh = nullptr) {
    if (w.cols() != h.rows() || w.rows() != n.rows() || h.cols() != n.cols()) {
        throw DimensionError("kkt_residual: W, H and N are not conformable");
    }
    const Matrix resid = wh != nullptr ? Matrix(*wh - n) : Matrix(w * h - n);
    const Matrix gw = resid * h.transpose();
    Matrix gh = w.transpose() * resid;
    if (profile.archetypal_lambda > 0.0) {
        Matrix proj;
        if (hull_points == nullptr) {
            std::vector<Vector> weights;
            archetypal_distance(h, n, hull_opts, weights, &proj);
            hull_points = &proj;
        }
        gh += profile.archetypal_lambda * (h - *hull_points);
    }

    KktReport rep;
    double w_sq = 0.0;
    for (Index i = 0; i < w.rows(); ++i) {
        double t = 0.0;
        Index support = 0;
        for (Index j = 0; j < w.cols(); ++j) {
            if (w(i, j) > 0.0) {
                t -= gw(i, j);
                ++support;
            }
        }
        if (support == 0) {
            rep.zero_w_rows.push_back(i);
            continue;
        }
        t = profile.w_row_stochastic ? t / static_cast<double>(support) : 0.0;
        for (Index j = 0; j < w.cols(); ++j) {
            if (w(i, j) != 0.0) {
                const double r = gw(i, j) + t;
                w_sq += r * r;
            }
        }
    }
    double h_sq = 0.0;
    for (Index j = 0; j < h.cols(); ++j) {
        for (Index k = 0; k < h.rows(); ++k) {
            if (!profile.h_nonneg || h(k, j) != 0.0) {
                h_sq += gh(k, j) * gh(k, j);
            }
        }
    }
    rep.w_part = std::sqrt(w_sq);
    rep.h_part = std::sqrt(h_sq);
    rep.residual = rep.w_part + rep.h_part;
    return rep;
}

inline double kkt_residual(const Factorization& f, const ConstraintProfile& profile,
                           const HullProjectionOptions& hull_opts = {}) {
    return kkt_report(f.W, f.H, f.N, profile, hull_opts).residual;
}

struct StopDecision {
    bool stop = false;
    StopReason reason = StopReason::none;
};

/// Stopping rule: iteration cap, then iterate stall (both ||dW|| <= eps_w
/// and ||dH|| <= eps_h), then KKT residual <= eps_r.
inline StopDecision should_stop(std::size_t iterations, double delta_w, double delta_h, double kkt,
                                const SolverConfig& cfg) {
    if (iterations >= cfg.max_iters) {
        return {true, StopReason::max_iterations};
    }
    if (delta_w <= cfg.eps_w && delta_h <= cfg.eps_h) {
        return {true, StopReason::iterate_stall};
    }
    if (kkt <= cfg.eps_r) {
        return {true, StopReason::kkt};
    }
    return {};
}

inline StopDecision should_stop(const Factorization& current, const Factorization& previous,
                                const SolverConfig& cfg) {
    const double dw = (current.W - previous.W).norm();
    const double dh = (current.H - previous.H).norm();
    return should_stop(current.iterations, dw, dh, current.kkt_residual, cfg);
}

/// Row/column index sets drawn once per iteration. Inactive when the
/// requested count covers the whole dimension, in which case the solvers
/// use the full matrices and no random numbers are consumed.
class Sampler {
public:
    Sampler(const SolverConfig& cfg, Index rows, Index cols)
        : rng_(cfg.seed ^ 0x5bd1e9955bd1e995ULL), rows_(rows), cols_(cols),
          n_rows_(cfg.subsample_rows.value_or(static_cast<std::size_t>(rows))),
          n_cols_(cfg.subsample_cols.value_or(static_cast<std::size_t>(cols))) {}

    bool rows_active() const noexcept { return n_rows_ < static_cast<std::size_t>(rows_); }
    bool cols_active() const noexcept { return n_cols_ < static_cast<std::size_t>(cols_); }

    void draw() {
        if (rows_active()) {
            row_idx_ = detail::sample_indices(rows_, n_rows_, rng_);
        }
        if (cols_active()) {
            col_idx_ = detail::sample_indices(cols_, n_cols_, rng_);
        }
    }

    const std::vector<Index>& row_indices() const noexcept { return row_idx_; }
    const std::vector<Index>& col_indices() const noexcept { return col_idx_; }

    Matrix take_rows(const Matrix& m) const { return m(row_idx_, Eigen::all); }
    Matrix take_cols(const Matrix& m) const { return m(Eigen::all, col_idx_); }

private:
    Rng rng_;
    Index rows_;
    Index cols_;
    std::size_t n_rows_;
    std::size_t n_cols_;
    std::vector<Index> row_idx_;
    std::vector<Index> col_idx_;
};

/// Outcome of one outer iteration.
struct IterationResult {
    double objective = 0.0;
    const Matrix* hull_points = nullptr;  ///< projections of H rows onto conv(N), when computed
    const Matrix* wh = nullptr;           ///< W H of the new iterate, when computed
};

namespace detail {

inline void check_start(const MaskedProblem& p, const SolverConfig& cfg, const Factorization& f) {
    const auto k = static_cast<Index>(cfg.rank);
    if (f.W.rows() != p.rows() || f.W.cols() != k || f.H.rows() != k || f.H.cols() != p.cols() ||
        f.N.rows() != p.rows() || f.N.cols() != p.cols()) {
        throw DimensionError("solver: starting point does not match the problem and rank");
    }
}

/// N update shared by every solver: P_X for masked profiles, the data
/// itself otherwise.
inline Matrix complete(const Matrix& w, const Matrix& h, const MaskedProblem& p, const ConstraintProfile& profile) {
    return profile.masked ? completion_projection(w, h, p) : p.observed();
}

/// Outer loop: runs `step` until the stopping rule fires, recording the
/// objective and KKT traces.
template <typename Step>
Factorization run_iterations(const MaskedProblem& p, const SolverConfig& cfg, Factorization f, double initial_objective,
                             const char* name, Step&& step) {
    f.objective_trace.assign(1, initial_objective);
    f.kkt_trace.clear();
    f.iterations = 0;
    check_finite_objective(initial_objective, name, 0);
    if (cfg.max_iters == 0) {
        const KktReport k = kkt_report(f.W, f.H, f.N, cfg.profile, cfg.hull);
        f.kkt_residual = k.residual;
        f.zero_w_rows = k.zero_w_rows;
        f.stop_reason = StopReason::max_iterations;
        return f;
    }
    Sampler sampler(cfg, p.rows(), p.cols());
    Matrix w_old;
    Matrix h_old;
    for (;;) {
        w_old = f.W;
        h_old = f.H;
        sampler.draw();
        const IterationResult r = step(f, sampler);
        ++f.iterations;
        check_finite_objective(r.objective, name, f.iterations);
        f.objective_trace.push_back(r.objective);
        const KktReport k = kkt_report(f.W, f.H, f.N, cfg.profile, cfg.hull, r.hull_points, r.wh);
        f.kkt_residual = k.residual;
        f.zero_w_rows = k.zero_w_rows;
        f.kkt_trace.push_back(k.residual);
        const StopDecision d =
            should_stop(f.iterations, (f.W - w_old).norm(), (f.H - h_old).norm(), k.residual, cfg);
        if (d.stop) {
            f.stop_reason = d.reason;
            f.converged = d.reason != StopReason::max_iterations;
            break;
        }
    }
    return f;
}

}  // namespace detail

}  // namespace nmfcast
