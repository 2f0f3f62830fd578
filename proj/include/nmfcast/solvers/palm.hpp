#pragma once

// PALM and inertial PALM for the (masked) archetypal program
//   Psi(H, W, N) = ||N - W H||^2 + lambda * sum_k dist^2(H_k, conv(rows of N)).
// Both use the gradients of 0.5 * Psi, i.e. grad_H = W^T (W H - N) and
// grad_W = (W H - N) H^T, with steps 1/gamma chosen above the block
// Lipschitz constants.

#include <algorithm>
#include <vector>

#include "nmfcast/solvers/common.hpp"

namespace nmfcast {

namespace detail {

struct PalmState {
    Matrix h_prev;
    Matrix w_prev;
    Matrix n_prev;
    double merit = 0.0;
    std::vector<Vector> prox_weights;   ///< warm starts for projecting H~
    std::vector<Vector> merit_weights;  ///< warm starts for projecting H
    Matrix hull_points;                 ///< P_conv(N)(rows of H) for the accepted iterate
    Matrix wh;                          ///< W H of the accepted iterate
};

inline double palm_merit(const Matrix& wh, const Matrix& h, const Matrix& n, const SolverConfig& cfg,
                         std::vector<Vector>& weights, Matrix& hull_points) {
    double value = (n - wh).squaredNorm();
    if (cfg.profile.archetypal_lambda > 0.0) {
        value += cfg.profile.archetypal_lambda * archetypal_distance(h, n, cfg.hull, weights, &hull_points);
    }
    return value;
}

struct PalmCandidate {
    Matrix h;
    Matrix w;
    Matrix n;
    Matrix wh;
    double merit = 0.0;
    std::vector<Vector> prox_weights;
    std::vector<Vector> merit_weights;
    Matrix hull_points;
};

/// x + coef (x - prev), or x itself when coef is zero (no copy).
inline const Matrix& extrapolate(const Matrix& x, const Matrix& prev, double coef, Matrix& buf) {
    if (coef == 0.0) {
        return x;
    }
    buf = x + coef * (x - prev);
    return buf;
}

/// One (i)PALM iteration from the current point `f` with extrapolation
/// coefficients `c`. All-zero coefficients give the plain PALM step.
inline PalmCandidate palm_step(const Factorization& f, const PalmState& st, const MaskedProblem& p,
                               const SolverConfig& cfg, const InertialCoefficients& c, const Sampler& s) {
    const double lambda = cfg.profile.archetypal_lambda;
    PalmCandidate out;
    out.prox_weights = st.prox_weights;
    out.merit_weights = st.merit_weights;

    // H block
    Matrix h1_buf;
    Matrix h2_buf;
    const Matrix& h1 = extrapolate(f.H, st.h_prev, c.alpha_h, h1_buf);
    const Matrix& h2 = extrapolate(f.H, st.h_prev, c.beta_h, h2_buf);
    Matrix wr_buf;
    Matrix nr_buf;
    const Matrix& wr = s.rows_active() ? (wr_buf = s.take_rows(f.W)) : f.W;
    const Matrix& nr = s.rows_active() ? (nr_buf = s.take_rows(f.N)) : f.N;
    const double gamma1 = cfg.step_safety * std::max((wr.transpose() * wr).norm(), cfg.step_floor);
    out.h = h1 - wr.transpose() * (wr * h2 - nr) / gamma1;
    if (lambda > 0.0) {
        Matrix proj;
        archetypal_distance(out.h, f.N, cfg.hull, out.prox_weights, &proj);
        out.h -= (lambda / (lambda + gamma1)) * (out.h - proj);
    }
    if (cfg.profile.h_nonneg) {
        out.h = out.h.cwiseMax(0.0);
    }

    // W block
    Matrix w1_buf;
    Matrix w2_buf;
    const Matrix& w1 = extrapolate(f.W, st.w_prev, c.alpha_w, w1_buf);
    const Matrix& w2 = extrapolate(f.W, st.w_prev, c.beta_w, w2_buf);
    Matrix hc_buf;
    Matrix nc_buf;
    const Matrix& hc = s.cols_active() ? (hc_buf = s.take_cols(out.h)) : out.h;
    const Matrix& nc = s.cols_active() ? (nc_buf = s.take_cols(f.N)) : f.N;
    const double gamma2 = cfg.step_safety * std::max((hc * hc.transpose()).norm(), cfg.step_floor);
    out.w = w1 - (w2 * hc - nc) * hc.transpose() / gamma2;
    if (cfg.profile.w_row_stochastic) {
        project_rows_to_simplex(out.w);
    } else {
        out.w = out.w.cwiseMax(0.0);
    }
    out.wh = out.w * out.h;

    // N block: relaxed step toward W H, then back onto T(N) = X. With the
    // archetypal term the hull moves with N, so the step is shortened (and
    // finally skipped) if it would raise the merit.
    if (!cfg.profile.masked || !p.has_hidden()) {
        out.n = p.observed();
        out.merit = palm_merit(out.wh, out.h, out.n, cfg, out.merit_weights, out.hull_points);
        return out;
    }
    Matrix n1_buf;
    Matrix n2_buf;
    const Matrix& n1 = extrapolate(f.N, st.n_prev, c.alpha_n, n1_buf);
    const Matrix& n2 = extrapolate(f.N, st.n_prev, c.beta_n, n2_buf);
    const double gamma3 = cfg.step_safety;
    double t = 1.0;
    for (int attempt = 0; attempt < 6; ++attempt, t *= 0.5) {
        // Only the hidden block of the relaxed step survives the projection.
        const Index rows = p.hidden_rows();
        const Index cols = p.hidden_cols();
        out.n = p.observed();
        out.n.bottomRightCorner(rows, cols) =
            n1.bottomRightCorner(rows, cols) +
            (t / gamma3) * (out.wh.bottomRightCorner(rows, cols) - n2.bottomRightCorner(rows, cols));
        std::vector<Vector> weights = out.merit_weights;
        Matrix points;
        const double m = palm_merit(out.wh, out.h, out.n, cfg, weights, points);
        if (lambda == 0.0 || m <= st.merit) {
            out.merit = m;
            out.merit_weights = std::move(weights);
            out.hull_points = std::move(points);
            return out;
        }
    }
    out.n = f.N;
    out.merit = palm_merit(out.wh, out.h, out.n, cfg, out.merit_weights, out.hull_points);
    return out;
}

inline Factorization run_palm(const MaskedProblem& p, const SolverConfig& cfg, Factorization start, bool inertial) {
    cfg.validate(p.rows(), p.cols());
    detail::check_start(p, cfg, start);
    PalmState st;
    st.h_prev = start.H;
    st.w_prev = start.W;
    st.n_prev = start.N;
    st.wh = start.W * start.H;
    st.merit = palm_merit(st.wh, start.H, start.N, cfg, st.merit_weights, st.hull_points);
    st.prox_weights = st.merit_weights;
    const char* name = inertial ? "iPALM" : "PALM";

    Factorization f = run_iterations(p, cfg, std::move(start), st.merit, name, [&](Factorization& cur, const Sampler& s) {
        const InertialCoefficients coeffs = inertial ? cfg.inertia_at(cur.iterations) : InertialCoefficients{};
        PalmCandidate cand = palm_step(cur, st, p, cfg, coeffs, s);
        if (!coeffs.is_zero() && cand.merit > st.merit) {
            // Extrapolation overshot: redo the iteration as a plain PALM step.
            cand = palm_step(cur, st, p, cfg, InertialCoefficients{}, s);
            ++cur.inertial_restarts;
        }
        st.h_prev = std::move(cur.H);
        st.w_prev = std::move(cur.W);
        st.n_prev = std::move(cur.N);
        cur.H = std::move(cand.h);
        cur.W = std::move(cand.w);
        cur.N = std::move(cand.n);
        st.merit = cand.merit;
        st.prox_weights = std::move(cand.prox_weights);
        st.merit_weights = std::move(cand.merit_weights);
        st.hull_points = std::move(cand.hull_points);
        st.wh = std::move(cand.wh);
        return IterationResult{st.merit, cfg.profile.archetypal_lambda > 0.0 ? &st.hull_points : nullptr, &st.wh};
    });
    if (cfg.profile.archetypal_lambda > 0.0) {
        f.hull_weights = st.merit_weights;
    }
    return f;
}

}  // namespace detail

inline Factorization solve_palm(const MaskedProblem& p, const SolverConfig& cfg, Factorization start) {
    return detail::run_palm(p, cfg, std::move(start), false);
}

inline Factorization solve_palm(const MaskedProblem& p, const SolverConfig& cfg) {
    return solve_palm(p, cfg, init_random(p, cfg));
}

inline Factorization solve_ipalm(const MaskedProblem& p, const SolverConfig& cfg, Factorization start) {
    return detail::run_palm(p, cfg, std::move(start), true);
}

inline Factorization solve_ipalm(const MaskedProblem& p, const SolverConfig& cfg) {
    return solve_ipalm(p, cfg, init_random(p, cfg));
}

}  // namespace nmfcast
