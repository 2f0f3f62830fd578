#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nmfcast/matrix_core.hpp"
#include "nmfcast/metrics.hpp"
#include "nmfcast/solvers/config.hpp"

namespace nmfcast {

/// One point of the SMM hyperparameter grid.
struct SmmCandidate {
    std::size_t rank = 1;
    std::size_t window = 1;
    double lambda = 0.0;
    std::size_t period = 1;
    std::size_t stride = 1;

    bool operator==(const SmmCandidate&) const = default;
};

/// Tie-break order of the cross-validation: smaller K, then W, lambda, P, S.
inline bool candidate_less(const SmmCandidate& a, const SmmCandidate& b) {
    if (a.rank != b.rank) return a.rank < b.rank;
    if (a.window != b.window) return a.window < b.window;
    if (a.lambda != b.lambda) return a.lambda < b.lambda;
    if (a.period != b.period) return a.period < b.period;
    return a.stride < b.stride;
}

struct CandidateScore {
    SmmCandidate candidate;
    double score = 0.0;  ///< validation RRMSE; infinite when the fit failed
    std::string error;   ///< empty on success
};

struct SolverDiagnostics {
    std::string solver;
    std::size_t iterations = 0;
    bool converged = false;
    std::string stop_reason;
    double final_objective = 0.0;
    double kkt_residual = 0.0;
    std::size_t inertial_restarts = 0;
    std::size_t dead_column_resets = 0;
    std::size_t zero_w_rows = 0;

    static SolverDiagnostics from(const Factorization& f, SolverKind kind) {
        SolverDiagnostics d;
        d.solver = std::string(to_string(kind));
        d.iterations = f.iterations;
        d.converged = f.converged;
        d.stop_reason = std::string(to_string(f.stop_reason));
        d.final_objective = f.final_objective();
        d.kkt_residual = f.kkt_residual;
        d.inertial_restarts = f.inertial_restarts;
        d.dead_column_resets = f.dead_column_resets;
        d.zero_w_rows = f.zero_w_rows.size();
        return d;
    }
};

struct ForecastReport {
    std::string method;
    Matrix forecast;  ///< N x F, entrywise >= 0
    std::optional<double> rrmse;
    std::optional<double> rmpe;
    std::map<std::string, double> hyperparameters;
    std::optional<SmmCandidate> chosen;
    std::vector<CandidateScore> cv_scores;
    std::vector<SolverDiagnostics> diagnostics;
    std::size_t clamped_cells = 0;
    double wall_seconds = 0.0;
    std::vector<std::string> notes;

    /// Fills rrmse and rmpe against the realized future.
    void score(const Matrix& truth) {
        rrmse = nmfcast::rrmse(forecast, truth);
        rmpe = nmfcast::rmpe(forecast, truth);
    }
};

/// Sets negative entries to 0 and returns how many there were.
inline std::size_t clamp_nonnegative(Matrix& m) {
    std::size_t count = 0;
    for (Index j = 0; j < m.cols(); ++j) {
        for (Index i = 0; i < m.rows(); ++i) {
            if (m(i, j) < 0.0) {
                m(i, j) = 0.0;
                ++count;
            }
        }
    }
    return count;
}

}  // namespace nmfcast
