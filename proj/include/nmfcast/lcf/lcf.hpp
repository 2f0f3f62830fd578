#pragma once

// Latent Clustered Forecast: cluster the series by the rows of an initial
// weight matrix, factorize each cluster, forecast the cluster profiles and
// map them back through the cluster weights.

#include <algorithm>
#include <chrono>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "nmfcast/lcf/dendrogram.hpp"
#include "nmfcast/lcf/regressor.hpp"
#include "nmfcast/masking.hpp"
#include "nmfcast/parallel.hpp"
#include "nmfcast/report.hpp"
#include "nmfcast/solvers/solvers.hpp"

namespace nmfcast {

struct LcfConfig {
    std::size_t rank = 1;                         ///< K0 of the clustering factorization
    std::size_t cluster_rank = 1;                 ///< K_c of each cluster
    std::optional<std::size_t> max_cluster_size;  ///< d; defaults to K0
    RegressorSpec regressor;                      ///< horizon is overridden by the call
    SolverConfig solver_config;                   ///< rank, profile and W init are set per fit
    SolverKind solver = SolverKind::palm;
    std::size_t max_workers = 0;

    std::size_t cluster_limit() const { return max_cluster_size.value_or(rank); }

    SolverConfig factorization_config(std::size_t k) const {
        SolverConfig sc = solver_config;
        sc.rank = k;
        sc.profile = ConstraintProfile::snnmf();
        // Identical starting rows keep the result equivariant under row permutations.
        sc.w_init = WInit::barycentric;
        return sc;
    }
};

struct ClusterForecast {
    std::vector<Index> members;
    std::size_t rank = 0;
    Matrix forecast;  ///< members x F, before clamping
    Factorization factorization;
};

/// Weight matrix W0 of the rank-K0 SNNMF of the observed series.
inline Factorization lcf_initial_factorization(const Matrix& observed, const LcfConfig& cfg) {
    return solve(MaskedProblem::unmasked(observed), cfg.factorization_config(cfg.rank), cfg.solver);
}

inline std::vector<std::vector<Index>> lcf_clusters(const Matrix& w0, std::size_t d) {
    return explore_dendrogram(build_dendrogram(w0), d);
}

inline ClusterForecast forecast_cluster(const Matrix& observed, const std::vector<Index>& members, std::size_t horizon,
                                        const LcfConfig& cfg) {
    ClusterForecast out;
    out.members = members;
    out.rank = std::min(cfg.cluster_rank, members.size());
    const Matrix sub = observed(members, Eigen::all);
    out.factorization = solve(MaskedProblem::unmasked(sub), cfg.factorization_config(out.rank), cfg.solver);
    RegressorSpec spec = cfg.regressor;
    spec.horizon = horizon;
    out.forecast = out.factorization.W * fit_predict_profiles(out.factorization.H, spec);
    return out;
}

inline ForecastReport lcf_forecast(const SeriesMatrix& m, std::size_t horizon, const LcfConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    if (horizon == 0) {
        throw ConfigError("forecast horizon must be positive");
    }
    if (m.values.size() == 0 || !all_finite(m.values) || m.values.minCoeff() < 0.0) {
        throw DimensionError("series values must be finite and nonnegative");
    }
    if (cfg.rank == 0 || cfg.cluster_rank == 0) {
        throw ConfigError("LCF ranks must be at least 1");
    }
    const Factorization initial = lcf_initial_factorization(m.values, cfg);
    const std::vector<std::vector<Index>> clusters = lcf_clusters(initial.W, cfg.cluster_limit());

    std::vector<ClusterForecast> parts = detail::parallel_map(
        clusters.size(), cfg.max_workers, [&](std::size_t i) { return forecast_cluster(m.values, clusters[i], horizon, cfg); });

    ForecastReport r;
    r.method = "LCF";
    r.forecast = Matrix::Zero(m.values.rows(), static_cast<Index>(horizon));
    r.diagnostics.push_back(SolverDiagnostics::from(initial, cfg.solver));
    std::size_t reduced = 0;
    for (const ClusterForecast& c : parts) {
        for (std::size_t j = 0; j < c.members.size(); ++j) {
            r.forecast.row(c.members[j]) = c.forecast.row(static_cast<Index>(j));
        }
        if (c.rank < cfg.cluster_rank) {
            ++reduced;
        }
    }
    if (reduced > 0) {
        r.notes.push_back(std::to_string(reduced) + " cluster(s) smaller than the cluster rank; rank reduced to the cluster size");
    }
    r.clamped_cells = clamp_nonnegative(r.forecast);
    r.hyperparameters = {{"K0", static_cast<double>(cfg.rank)},
                         {"Kc", static_cast<double>(cfg.cluster_rank)},
                         {"d", static_cast<double>(cfg.cluster_limit())},
                         {"D", static_cast<double>(cfg.regressor.window)},
                         {"F", static_cast<double>(horizon)},
                         {"clusters", static_cast<double>(clusters.size())}};
    r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

}  // namespace nmfcast
