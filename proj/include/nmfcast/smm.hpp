#pragma once

// Sliding Mask Method: forecasting as completion of the slid series matrix.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nmfcast/masking.hpp"
#include "nmfcast/metrics.hpp"
#include "nmfcast/parallel.hpp"
#include "nmfcast/report.hpp"
#include "nmfcast/solvers/solvers.hpp"

namespace nmfcast {

enum class Program { mnmf, mamf };

inline std::string_view to_string(Program p) { return p == Program::mnmf ? "mNMF" : "mAMF"; }

inline Program parse_program(std::string_view s) {
    if (s == "mNMF" || s == "mnmf") return Program::mnmf;
    if (s == "mAMF" || s == "mamf") return Program::mamf;
    throw ConfigError("unknown program '" + std::string(s) + "' (expected mNMF or mAMF)");
}

struct GeometryCandidate {
    std::size_t period = 1;
    std::size_t window = 1;
    std::size_t stride = 1;
};

struct SmmConfig {
    std::vector<GeometryCandidate> geometries;
    std::vector<std::size_t> ranks{1};
    std::vector<double> lambdas{0.0};  ///< ignored by mNMF
    Program program = Program::mnmf;
    std::optional<SolverKind> solver;  ///< default: HALS for mNMF, PALM for mAMF
    SolverConfig solver_config;        ///< rank and profile are set per candidate
    std::size_t max_workers = 0;       ///< 0 uses the hardware concurrency

    SolverKind solver_kind() const {
        if (solver) {
            return *solver;
        }
        return program == Program::mnmf ? SolverKind::hals : SolverKind::palm;
    }

    void validate() const {
        if (geometries.empty() || ranks.empty() || lambdas.empty()) {
            throw ConfigError("SMM grids must be non-empty");
        }
        for (std::size_t k : ranks) {
            if (k == 0) {
                throw ConfigError("SMM rank grid contains 0");
            }
        }
        for (double l : lambdas) {
            if (!(l >= 0.0) || !std::isfinite(l)) {
                throw ConfigError("SMM lambda grid must hold nonnegative finite values");
            }
        }
        const SolverKind kind = solver_kind();
        if (program == Program::mamf && (kind == SolverKind::als || kind == SolverKind::hals)) {
            throw ConfigError("mAMF needs PALM or iPALM");
        }
    }

    /// Cartesian product of the grids in tie-break order.
    std::vector<SmmCandidate> candidates() const {
        std::vector<SmmCandidate> out;
        const std::vector<double> lam = program == Program::mnmf ? std::vector<double>{0.0} : lambdas;
        for (std::size_t k : ranks) {
            for (const GeometryCandidate& g : geometries) {
                for (double l : lam) {
                    out.push_back({k, g.window, l, g.period, g.stride});
                }
            }
        }
        std::stable_sort(out.begin(), out.end(), candidate_less);
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }

    SolverConfig solver_config_for(const SmmCandidate& c) const {
        SolverConfig sc = solver_config;
        sc.rank = c.rank;
        sc.profile = program == Program::mnmf ? ConstraintProfile::mnmf() : ConstraintProfile::mamf(c.lambda);
        return sc;
    }
};

inline SlidingGeometry candidate_geometry(const Matrix& observed, std::size_t horizon, const SmmCandidate& c) {
    return SlidingGeometry::make(static_cast<std::size_t>(observed.rows()), static_cast<std::size_t>(observed.cols()),
                                 horizon, c.period, c.window, c.stride);
}

inline bool geometry_valid(const Matrix& observed, std::size_t horizon, const SmmCandidate& c) {
    try {
        candidate_geometry(observed, horizon, c);
        return true;
    } catch (const GeometryError&) {
        return false;
    }
}

struct CandidateFit {
    Matrix forecast;  ///< N x horizon, clamped at 0
    std::size_t clamped_cells = 0;
    Factorization factorization;
};

/// Slides `observed` with the candidate geometry, completes the hidden
/// block and returns it as the forecast.
inline CandidateFit fit_candidate(const Matrix& observed, std::size_t horizon, const SmmCandidate& c,
                                  const SmmConfig& cfg) {
    const SlidingGeometry g = candidate_geometry(observed, horizon, c);
    const MaskedProblem problem = make_masked_problem(observed, g);
    CandidateFit fit;
    fit.factorization = solve(problem, cfg.solver_config_for(c), cfg.solver_kind());
    fit.forecast = extract_forecast(fit.factorization.N, problem);
    fit.clamped_cells = clamp_nonnegative(fit.forecast);
    return fit;
}

namespace detail {

inline void check_smm_input(const SeriesMatrix& m, std::size_t horizon) {
    if (horizon == 0) {
        throw GeometryError("forecast horizon must be positive");
    }
    if (m.values.size() == 0) {
        throw DimensionError("empty series matrix");
    }
    if (!all_finite(m.values) || m.values.minCoeff() < 0.0) {
        throw DimensionError("series values must be finite and nonnegative");
    }
}

inline ForecastReport finish_report(const SmmConfig& cfg, std::size_t horizon, const SmmCandidate& c, CandidateFit fit) {
    ForecastReport r;
    r.method = "SMM-" + std::string(to_string(cfg.program));
    r.forecast = std::move(fit.forecast);
    r.clamped_cells = fit.clamped_cells;
    r.chosen = c;
    r.hyperparameters = {{"K", static_cast<double>(c.rank)},
                         {"W", static_cast<double>(c.window)},
                         {"lambda", c.lambda},
                         {"P", static_cast<double>(c.period)},
                         {"S", static_cast<double>(c.stride)},
                         {"F", static_cast<double>(horizon)}};
    r.diagnostics.push_back(SolverDiagnostics::from(fit.factorization, cfg.solver_kind()));
    return r;
}

}  // namespace detail

/// Scores every candidate on the last `horizon` observed timestamps, picks
/// the lowest validation RRMSE (ties: smaller K, W, lambda, P, S) and refits
/// it on all observations.
inline ForecastReport cross_validate(const SeriesMatrix& m, std::size_t horizon, const SmmConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    detail::check_smm_input(m, horizon);
    cfg.validate();
    const Index t = m.values.cols();
    if (static_cast<Index>(horizon) >= t) {
        throw GeometryError("cross-validation: " + std::to_string(t) + " observations cannot hold out " +
                            std::to_string(horizon));
    }
    const Matrix train = m.values.leftCols(t - static_cast<Index>(horizon));
    const Matrix held_out = m.values.rightCols(static_cast<Index>(horizon));

    std::vector<SmmCandidate> valid;
    for (const SmmCandidate& c : cfg.candidates()) {
        if (geometry_valid(train, horizon, c) && geometry_valid(m.values, horizon, c)) {
            valid.push_back(c);
        }
    }
    if (valid.empty()) {
        throw GeometryError("no (P, W, S) candidate fits both the validation and the forecast timeline");
    }

    std::vector<CandidateScore> scores =
        detail::parallel_map(valid.size(), cfg.max_workers, [&](std::size_t i) {
            CandidateScore s{valid[i], std::numeric_limits<double>::infinity(), {}};
            try {
                const CandidateFit fit = fit_candidate(train, horizon, valid[i], cfg);
                const double denom = held_out.norm();
                s.score = denom > 0.0 ? rrmse(fit.forecast, held_out) : fit.forecast.norm();
            } catch (const DivergenceError& e) {
                s.error = e.what();
            }
            return s;
        });

    std::size_t best = scores.size();
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (!scores[i].error.empty()) {
            continue;
        }
        if (best == scores.size() || scores[i].score < scores[best].score ||
            (scores[i].score == scores[best].score && candidate_less(scores[i].candidate, scores[best].candidate))) {
            best = i;
        }
    }
    if (best == scores.size()) {
        throw DivergenceError("cross-validation: every candidate diverged (first: " + scores.front().error + ")");
    }

    const SmmCandidate chosen = scores[best].candidate;
    ForecastReport r = detail::finish_report(cfg, horizon, chosen, fit_candidate(m.values, horizon, chosen, cfg));
    r.cv_scores = std::move(scores);
    r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

/// Forecasts the next `horizon` timestamps of every series. A grid with a
/// single candidate is fitted directly; larger grids go through
/// cross_validate.
inline ForecastReport smm_forecast(const SeriesMatrix& m, std::size_t horizon, const SmmConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    detail::check_smm_input(m, horizon);
    cfg.validate();
    const std::vector<SmmCandidate> cands = cfg.candidates();
    if (cands.size() > 1) {
        return cross_validate(m, horizon, cfg);
    }
    ForecastReport r = detail::finish_report(cfg, horizon, cands.front(), fit_candidate(m.values, horizon, cands.front(), cfg));
    r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

}  // namespace nmfcast
