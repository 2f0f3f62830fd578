#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nmfcast/errors.hpp"
#include "nmfcast/matrix_core.hpp"

namespace nmfcast {

/// Which constraints of the factorization family are active.
///
/// W >= 0 always holds. `archetypal_lambda` > 0 adds the penalty
/// lambda * dist^2(rows of H, conv(rows of N)).
struct ConstraintProfile {
    bool h_nonneg = true;
    bool w_row_stochastic = true;
    double archetypal_lambda = 0.0;
    bool masked = true;

    static ConstraintProfile nmf() { return {true, false, 0.0, false}; }
    static ConstraintProfile snmf() { return {false, false, 0.0, false}; }
    static ConstraintProfile nnmf() { return {true, true, 0.0, false}; }
    static ConstraintProfile snnmf() { return {false, true, 0.0, false}; }
    static ConstraintProfile amf(double lambda) { return {false, true, lambda, false}; }
    static ConstraintProfile anmf(double lambda) { return {true, false, lambda, false}; }
    static ConstraintProfile annmf(double lambda) { return {true, true, lambda, false}; }
    static ConstraintProfile mnmf() { return {true, true, 0.0, true}; }
    static ConstraintProfile mamf(double lambda) { return {false, true, lambda, true}; }

    bool operator==(const ConstraintProfile&) const = default;
};

/// Extrapolation weights of one inertial iteration: alpha for the point
/// where the proximal step is anchored, beta for the gradient point.
struct InertialCoefficients {
    double alpha_h = 0.0;
    double beta_h = 0.0;
    double alpha_w = 0.0;
    double beta_w = 0.0;
    double alpha_n = 0.0;
    double beta_n = 0.0;

    bool is_zero() const noexcept {
        return alpha_h == 0.0 && beta_h == 0.0 && alpha_w == 0.0 && beta_w == 0.0 && alpha_n == 0.0 &&
               beta_n == 0.0;
    }

    static InertialCoefficients constant(double alpha, double beta) {
        return {alpha, beta, alpha, beta, alpha, beta};
    }
};

using InertialSchedule = std::function<InertialCoefficients(std::size_t iteration)>;

enum class WInit {
    random_simplex,  ///< rows i.i.d. uniform on the simplex
    barycentric,     ///< every entry 1/K; row-permutation equivariant
};

struct SolverConfig {
    ConstraintProfile profile = ConstraintProfile::mnmf();
    std::size_t rank = 1;
    std::size_t max_iters = 1000;
    double eps_w = 1e-9;
    double eps_h = 1e-9;
    double eps_r = 1e-9;

    /// Multiplier applied to the Lipschitz bounds; must exceed 1.
    double step_safety = 1.1;
    /// Floor for the Lipschitz bounds when W or H collapses.
    double step_floor = 1e-8;

    InertialSchedule inertia;  ///< empty means all coefficients zero
    double hals_alpha = 0.5;
    /// HALS inner sweeps stop once a sweep moves the block by at most this
    /// fraction of the first sweep's move; 0 always runs all sweeps.
    double hals_inner_epsilon = 0.01;

    std::optional<std::size_t> subsample_rows;
    std::optional<std::size_t> subsample_cols;

    std::uint64_t seed = 0;
    double init_scale = 1.0;
    WInit w_init = WInit::random_simplex;

    /// Inner solver of the ALS simplex-constrained W update.
    std::size_t w_inner_max_iters = 200;
    double w_inner_tolerance = 1e-10;

    HullProjectionOptions hull;

    InertialCoefficients inertia_at(std::size_t iteration) const {
        return inertia ? inertia(iteration) : InertialCoefficients{};
    }

    bool subsampling() const noexcept { return subsample_rows.has_value() || subsample_cols.has_value(); }

    /// Throws ConfigError on an invalid combination.
    void validate(Index rows, Index cols) const {
        if (rank == 0) {
            throw ConfigError("rank must be at least 1");
        }
        if (!(step_safety > 1.0)) {
            throw ConfigError("step_safety must be greater than 1");
        }
        if (!(step_floor > 0.0)) {
            throw ConfigError("step_floor must be positive");
        }
        if (profile.archetypal_lambda < 0.0 || !std::isfinite(profile.archetypal_lambda)) {
            throw ConfigError("archetypal lambda must be a nonnegative finite number");
        }
        if (init_scale < 0.0 || hals_alpha < 0.0 || !(hals_inner_epsilon >= 0.0)) {
            throw ConfigError("init_scale, hals_alpha and hals_inner_epsilon must be nonnegative");
        }
        if (subsample_rows && (*subsample_rows < rank || *subsample_rows > static_cast<std::size_t>(rows))) {
            throw ConfigError("subsample_rows must lie in [rank, rows]");
        }
        if (subsample_cols && (*subsample_cols < rank || *subsample_cols > static_cast<std::size_t>(cols))) {
            throw ConfigError("subsample_cols must lie in [rank, cols]");
        }
    }
};

enum class StopReason { none, max_iterations, iterate_stall, kkt };

inline std::string_view to_string(StopReason r) {
    switch (r) {
        case StopReason::none: return "none";
        case StopReason::max_iterations: return "max-iterations";
        case StopReason::iterate_stall: return "iterate-stall";
        case StopReason::kkt: return "kkt";
    }
    return "none";
}

enum class SolverKind { als, hals, palm, ipalm };

inline std::string_view to_string(SolverKind k) {
    switch (k) {
        case SolverKind::als: return "ALS";
        case SolverKind::hals: return "HALS";
        case SolverKind::palm: return "PALM";
        case SolverKind::ipalm: return "iPALM";
    }
    return "?";
}

inline SolverKind parse_solver_kind(std::string_view s) {
    if (s == "als" || s == "ALS") return SolverKind::als;
    if (s == "hals" || s == "HALS") return SolverKind::hals;
    if (s == "palm" || s == "PALM") return SolverKind::palm;
    if (s == "ipalm" || s == "iPALM" || s == "IPALM") return SolverKind::ipalm;
    throw ConfigError("unknown solver '" + std::string(s) + "'");
}

struct Factorization {
    Matrix W;  ///< n x K
    Matrix H;  ///< K x p
    Matrix N;  ///< completed n x p matrix

    /// Objective (ALS/HALS) or merit (PALM/iPALM); entry 0 is the initial point.
    std::vector<double> objective_trace;
    std::vector<double> kkt_trace;
    double kkt_residual = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
    StopReason stop_reason = StopReason::none;

    /// Per-row weights realizing the hull projection of each row of H
    /// (archetypal profiles only).
    std::vector<Vector> hull_weights;
    /// Rows of W that were entirely zero at the last KKT evaluation.
    std::vector<Index> zero_w_rows;
    /// iPALM iterations that fell back to a plain proximal step.
    std::size_t inertial_restarts = 0;
    /// HALS columns of W reinitialized because their H row vanished.
    std::size_t dead_column_resets = 0;

    double final_objective() const { return objective_trace.empty() ? 0.0 : objective_trace.back(); }
};

}  // namespace nmfcast
