#pragma once

// Accelerated HALS: repeated exact coordinate sweeps over the columns of W
// and the rows of H, with inner repeat counts driven by the relative cost of
// forming the Gram matrices. Inner sweeps end early once they stop moving
// the block much. A row-stochastic W is additionally
// refined by exact pairwise steps that keep every row on the simplex.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "nmfcast/solvers/common.hpp"

namespace nmfcast {

struct HalsSweeps {
    std::size_t w = 1;
    std::size_t h = 1;
};

/// k_W = floor(1 + alpha rho_W), k_H = floor(1 + alpha rho_H) with
/// rho_W = 1 + n(m+K)/(m(K+1)) and rho_H = 1 + m(n+K)/(n(K+1)) for an
/// m x n matrix (m rows): each count is the cost of forming that block's
/// Gram matrices measured in sweeps.
inline HalsSweeps hals_sweeps(Index rows, Index cols, std::size_t k, double alpha) {
    const double dm = static_cast<double>(rows);
    const double dn = static_cast<double>(cols);
    const double dk = static_cast<double>(k);
    const double rho_w = 1.0 + dn * (dm + dk) / (dm * (dk + 1.0));
    const double rho_h = 1.0 + dm * (dn + dk) / (dn * (dk + 1.0));
    return {static_cast<std::size_t>(std::floor(1.0 + alpha * rho_w)),
            static_cast<std::size_t>(std::floor(1.0 + alpha * rho_h))};
}

namespace detail {

/// Moves each row of W from `start` toward its current value by the exact
/// minimizing step along the segment, so that the row objective never
/// increases even though the simplex projection is not a coordinate step.
inline void segment_safeguard(Matrix& w, const Matrix& start, const Matrix& b, const Matrix& a) {
    const Matrix d = w - start;
    const Matrix g = 2.0 * (start * b - a);
    for (Index i = 0; i < w.rows(); ++i) {
        const double gd = g.row(i).dot(d.row(i));
        const double dbd = d.row(i).dot(d.row(i) * b);
        double t = 0.0;
        if (dbd > 0.0) {
            t = std::clamp(-gd / (2.0 * dbd), 0.0, 1.0);
        } else {
            t = gd < 0.0 ? 1.0 : 0.0;
        }
        if (t < 1.0) {
            w.row(i) = start.row(i) + t * d.row(i);
        }
    }
}

/// Exact coordinate descent on the simplex for every row of W: each step
/// shifts weight between the maximal violating pair (l gaining, m losing)
/// by the exact minimizer along e_l - e_m. Rows stay feasible, the objective
/// never increases, and a row admits no step only at a stationary point.
inline void simplex_pair_sweeps(Matrix& w, const Matrix& b, const Matrix& a, std::size_t steps) {
    const Index k = w.cols();
    RowVector g(k);
    for (Index i = 0; i < w.rows(); ++i) {
        g.noalias() = 2.0 * (w.row(i) * b - a.row(i));
        for (std::size_t step = 0; step < steps; ++step) {
            Index lo = 0;
            Index hi = -1;
            double scale = 0.0;
            for (Index l = 0; l < k; ++l) {
                if (g(l) < g(lo)) lo = l;
                if (w(i, l) > 0.0 && (hi < 0 || g(l) > g(hi))) hi = l;
                scale = std::max(scale, std::abs(g(l)));
            }
            const double gap = g(hi) - g(lo);
            // Gaps at rounding level only shuffle weight without descending.
            if (hi == lo || !(gap > 1e-14 * (1.0 + scale))) break;
            const double curv = b(lo, lo) + b(hi, hi) - 2.0 * b(lo, hi);
            const double delta = curv > 0.0 ? std::min(gap / (2.0 * curv), w(i, hi)) : w(i, hi);
            w(i, lo) += delta;
            w(i, hi) -= delta;
            if (w(i, hi) < 0.0) w(i, hi) = 0.0;
            g.noalias() += 2.0 * delta * (b.row(lo) - b.row(hi));
        }
    }
}

}  // namespace detail

inline Factorization solve_hals(const MaskedProblem& p, const SolverConfig& cfg, Factorization start) {
    cfg.validate(p.rows(), p.cols());
    if (cfg.profile.archetypal_lambda > 0.0) {
        throw ConfigError("HALS does not handle the archetypal penalty; use PALM or iPALM");
    }
    detail::check_start(p, cfg, start);
    const HalsSweeps sweeps = hals_sweeps(p.rows(), p.cols(), cfg.rank, cfg.hals_alpha);
    const Index k = static_cast<Index>(cfg.rank);
    const bool stochastic = cfg.profile.w_row_stochastic;
    const double f0 = detail::residual_sq(start.N, start.W, start.H);

    Rng reinit_rng(cfg.seed ^ 0x2545f4914f6cdd1dULL);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Matrix wr;
    Matrix nr;
    Matrix hc;
    Matrix nc;
    Matrix wh;
    std::vector<double> scratch;

    return detail::run_iterations(p, cfg, std::move(start), f0, "HALS", [&](Factorization& f, const Sampler& s) {
        // W phase
        const Matrix& h_cols = s.cols_active() ? (hc = s.take_cols(f.H)) : f.H;
        const Matrix& n_cols = s.cols_active() ? (nc = s.take_cols(f.N)) : f.N;
        const Matrix b = h_cols * h_cols.transpose();
        const Matrix a = n_cols * h_cols.transpose();
        for (Index l = 0; l < k; ++l) {
            if (b(l, l) <= 0.0) {
                // H row l vanished: W column l no longer affects W H.
                for (Index i = 0; i < f.W.rows(); ++i) {
                    f.W(i, l) = unif(reinit_rng);
                }
                ++f.dead_column_resets;
            }
        }
        const Matrix w_start = f.W;
        double first_move = 0.0;
        for (std::size_t sweep = 0; sweep < sweeps.w; ++sweep) {
            const Matrix before = f.W;
            for (Index l = 0; l < k; ++l) {
                if (b(l, l) > 0.0) {
                    f.W.col(l) = (f.W.col(l) + (a.col(l) - f.W * b.col(l)) / b(l, l)).cwiseMax(0.0);
                }
            }
            const double move = (f.W - before).norm();
            if (sweep == 0) first_move = move;
            if (move <= cfg.hals_inner_epsilon * first_move) break;
        }
        if (stochastic) {
            for (Index i = 0; i < f.W.rows(); ++i) {
                auto row = f.W.row(i);
                detail::project_simplex_inplace(row, scratch);
            }
            detail::segment_safeguard(f.W, w_start, b, a);
            // Coordinate steps followed by a projection can stall away from a
            // stationary point; one round of pair steps always gets past it.
            detail::simplex_pair_sweeps(f.W, b, a, static_cast<std::size_t>(k));
        }

        // H phase
        const Matrix& w_rows = s.rows_active() ? (wr = s.take_rows(f.W)) : f.W;
        const Matrix& n_rows = s.rows_active() ? (nr = s.take_rows(f.N)) : f.N;
        const Matrix bh = w_rows.transpose() * w_rows;
        const Matrix ah = w_rows.transpose() * n_rows;
        double first_move_h = 0.0;
        for (std::size_t sweep = 0; sweep < sweeps.h; ++sweep) {
            const Matrix before = f.H;
            for (Index l = 0; l < k; ++l) {
                if (bh(l, l) <= 0.0) {
                    f.H.row(l).setZero();
                    continue;
                }
                f.H.row(l) += (ah.row(l) - bh.row(l) * f.H) / bh(l, l);
                if (cfg.profile.h_nonneg) {
                    f.H.row(l) = f.H.row(l).cwiseMax(0.0);
                }
            }
            const double move = (f.H - before).norm();
            if (sweep == 0) first_move_h = move;
            if (move <= cfg.hals_inner_epsilon * first_move_h) break;
        }

        f.N = detail::complete(f.W, f.H, p, cfg.profile);
        wh = f.W * f.H;
        return IterationResult{(f.N - wh).squaredNorm(), nullptr, &wh};
    });
}

inline Factorization solve_hals(const MaskedProblem& p, const SolverConfig& cfg) {
    return solve_hals(p, cfg, init_random(p, cfg));
}

}  // namespace nmfcast
