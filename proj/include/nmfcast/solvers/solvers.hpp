#pragma once

#include <optional>

#include "nmfcast/solvers/als.hpp"
#include "nmfcast/solvers/common.hpp"
#include "nmfcast/solvers/config.hpp"
#include "nmfcast/solvers/hals.hpp"
#include "nmfcast/solvers/palm.hpp"

namespace nmfcast {

inline Factorization solve(const MaskedProblem& p, const SolverConfig& cfg, SolverKind kind, Factorization start) {
    switch (kind) {
        case SolverKind::als: return solve_als(p, cfg, std::move(start));
        case SolverKind::hals: return solve_hals(p, cfg, std::move(start));
        case SolverKind::palm: return solve_palm(p, cfg, std::move(start));
        case SolverKind::ipalm: return solve_ipalm(p, cfg, std::move(start));
    }
    throw ConfigError("unknown solver");
}

inline Factorization solve(const MaskedProblem& p, const SolverConfig& cfg, SolverKind kind) {
    return solve(p, cfg, kind, init_random(p, cfg));
}

/// Large-scale variant: H updates see only `rows` sampled rows of N, W
/// updates only `cols` sampled columns. Either count may be omitted to keep
/// that dimension whole.
inline Factorization solve_subsampled(const MaskedProblem& p, SolverConfig cfg, SolverKind kind,
                                      std::optional<std::size_t> rows, std::optional<std::size_t> cols) {
    if (!rows && !cols) {
        throw ConfigError("solve_subsampled: at least one of the row and column counts is required");
    }
    cfg.subsample_rows = rows;
    cfg.subsample_cols = cols;
    return solve(p, cfg, kind);
}

}  // namespace nmfcast
