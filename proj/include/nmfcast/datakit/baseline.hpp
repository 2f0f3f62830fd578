#pragma once

#include <cstddef>
#include <limits>
#include <optional>

#include "nmfcast/errors.hpp"
#include "nmfcast/lcf/regressor.hpp"
#include "nmfcast/masking.hpp"

namespace nmfcast {

/// Sum of squared one-step-ahead errors of simple exponential smoothing.
inline double exs_one_step_sse(const Eigen::Ref<const RowVector>& y, double factor) {
    double level = y[0];
    double sse = 0.0;
    for (Index t = 1; t < y.size(); ++t) {
        const double e = y[t] - level;
        sse += e * e;
        level = factor * y[t] + (1.0 - factor) * level;
    }
    return sse;
}

/// Smoothing factor in {0.01, 0.02, ..., 1} with the smallest one-step SSE;
/// the smallest factor wins ties.
inline double select_exs_factor(const Eigen::Ref<const RowVector>& y) {
    double best = 1.0;
    double best_sse = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= 100; ++k) {
        const double a = k / 100.0;
        const double sse = exs_one_step_sse(y, a);
        if (sse < best_sse) {
            best_sse = sse;
            best = a;
        }
    }
    return best;
}

/// Per-series simple exponential smoothing; the forecast repeats the final
/// level. Without a factor, each series gets its own from select_exs_factor.
inline Matrix baseline_exs(const SeriesMatrix& m, std::size_t horizon, std::optional<double> factor = std::nullopt) {
    if (m.values.cols() == 0) {
        throw DimensionError("baseline_exs: series are empty");
    }
    if (factor && !(*factor > 0.0 && *factor <= 1.0)) {
        throw ConfigError("baseline_exs: smoothing factor must lie in (0, 1]");
    }
    Matrix out(m.values.rows(), static_cast<Index>(horizon));
    for (Index i = 0; i < m.values.rows(); ++i) {
        const RowVector y = m.values.row(i);
        const double a = factor ? *factor : select_exs_factor(y);
        out.row(i).setConstant(smoothed_level(y, a));
    }
    return out;
}

}  // namespace nmfcast
