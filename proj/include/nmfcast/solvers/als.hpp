#pragma once

// Alternating least squares: exact H and W block minimizations followed by
// the completion step.

#include <cmath>

#include <Eigen/Eigenvalues>

#include "nmfcast/solvers/common.hpp"

namespace nmfcast {

namespace detail {

/// Row-wise quadratic w B w^T - 2 w . A_i, the part of ||N_i - w H||^2 that
/// depends on w.
inline double row_quadratic(const Eigen::Ref<const RowVector>& w, const Matrix& b, const Eigen::Ref<const RowVector>& a) {
    return w.dot(w * b) - 2.0 * w.dot(a);
}

/// min_H ||N - W H||^2, column by column. Keeps a column of `h` unchanged
/// when the solve does not improve it (rounding in near-degenerate cases).
inline void als_update_h(Matrix& h, const Matrix& w, const Matrix& n, bool nonneg) {
    const Matrix gram = w.transpose() * w;
    const Matrix atb = w.transpose() * n;
    auto col_obj = [&](const Vector& x, Index j) { return x.dot(gram * x) - 2.0 * x.dot(atb.col(j)); };
    if (nonneg) {
        for (Index j = 0; j < h.cols(); ++j) {
            Vector x = nnls_gram(gram, atb.col(j));
            if (col_obj(x, j) <= col_obj(h.col(j), j)) {
                h.col(j) = x;
            }
        }
        return;
    }
    const Eigen::CompleteOrthogonalDecomposition<Matrix> cod(gram);
    const Matrix sol = cod.solve(atb);
    for (Index j = 0; j < h.cols(); ++j) {
        if (col_obj(sol.col(j), j) <= col_obj(h.col(j), j)) {
            h.col(j) = sol.col(j);
        }
    }
}

/// Simplex-constrained least squares for every row of W at once, by FISTA
/// with gradient-based restart. B = H H^T, A = N H^T.
inline void simplex_least_squares(Matrix& w, const Matrix& b, const Matrix& a, std::size_t max_iters, double tol) {
    const double lmax = Eigen::SelfAdjointEigenSolver<Matrix>(b, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
    if (!(lmax > 0.0)) {
        return;  // H = 0: every feasible W is optimal
    }
    const Matrix start = w;
    Matrix x = w;
    Matrix y = w;
    Matrix xn(w.rows(), w.cols());
    double t = 1.0;
    for (std::size_t k = 0; k < max_iters; ++k) {
        xn = y - (y * b - a) / lmax;
        project_rows_to_simplex(xn);
        if (lmax * (xn - y).norm() <= tol) {
            x = xn;
            break;
        }
        const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        if (((y * b - a).cwiseProduct(xn - x)).sum() > 0.0) {
            y = xn;  // momentum points uphill: restart
            t = 1.0;
        } else {
            y = xn + ((t - 1.0) / tn) * (xn - x);
            t = tn;
        }
        x = xn;
    }
    for (Index i = 0; i < w.rows(); ++i) {
        if (row_quadratic(x.row(i), b, a.row(i)) <= row_quadratic(start.row(i), b, a.row(i))) {
            w.row(i) = x.row(i);
        }
    }
}

/// min_{W >= 0} ||N - W H||^2 row by row.
inline void nonneg_least_squares_rows(Matrix& w, const Matrix& b, const Matrix& a) {
    for (Index i = 0; i < w.rows(); ++i) {
        Vector x = nnls_gram(b, a.row(i).transpose());
        if (row_quadratic(x.transpose(), b, a.row(i)) <= row_quadratic(w.row(i), b, a.row(i))) {
            w.row(i) = x.transpose();
        }
    }
}

}  // namespace detail

/// ALS from a given starting point.
inline Factorization solve_als(const MaskedProblem& p, const SolverConfig& cfg, Factorization start) {
    cfg.validate(p.rows(), p.cols());
    if (cfg.profile.archetypal_lambda > 0.0) {
        throw ConfigError("ALS does not handle the archetypal penalty; use PALM or iPALM");
    }
    detail::check_start(p, cfg, start);
    const double f0 = detail::residual_sq(start.N, start.W, start.H);
    Matrix wr;
    Matrix nr;
    Matrix hc;
    Matrix nc;
    Matrix wh;
    return detail::run_iterations(p, cfg, std::move(start), f0, "ALS", [&](Factorization& f, const Sampler& s) {
        const Matrix& w_rows = s.rows_active() ? (wr = s.take_rows(f.W)) : f.W;
        const Matrix& n_rows = s.rows_active() ? (nr = s.take_rows(f.N)) : f.N;
        detail::als_update_h(f.H, w_rows, n_rows, cfg.profile.h_nonneg);

        const Matrix& h_cols = s.cols_active() ? (hc = s.take_cols(f.H)) : f.H;
        const Matrix& n_cols = s.cols_active() ? (nc = s.take_cols(f.N)) : f.N;
        const Matrix b = h_cols * h_cols.transpose();
        const Matrix a = n_cols * h_cols.transpose();
        if (cfg.profile.w_row_stochastic) {
            detail::simplex_least_squares(f.W, b, a, cfg.w_inner_max_iters, cfg.w_inner_tolerance);
        } else {
            detail::nonneg_least_squares_rows(f.W, b, a);
        }

        f.N = detail::complete(f.W, f.H, p, cfg.profile);
        wh = f.W * f.H;
        return IterationResult{(f.N - wh).squaredNorm(), nullptr, &wh};
    });
}

inline Factorization solve_als(const MaskedProblem& p, const SolverConfig& cfg) {
    return solve_als(p, cfg, init_random(p, cfg));
}

}  // namespace nmfcast
