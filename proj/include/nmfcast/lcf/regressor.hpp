#pragma once

// Forecasting of latent profiles (rows of H) from their own past.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include "nmfcast/errors.hpp"
#include "nmfcast/matrix_core.hpp"

namespace nmfcast {

enum class RegressorKind { lag_least_squares, exponential_smoothing };

inline std::string_view to_string(RegressorKind k) {
    return k == RegressorKind::lag_least_squares ? "lag-ls" : "exs";
}

inline RegressorKind parse_regressor_kind(std::string_view s) {
    if (s == "lag-ls" || s == "ridge" || s == "lag") return RegressorKind::lag_least_squares;
    if (s == "exs" || s == "smoothing") return RegressorKind::exponential_smoothing;
    throw ConfigError("unknown regressor '" + std::string(s) + "' (expected lag-ls or exs)");
}

struct RegressorSpec {
    RegressorKind kind = RegressorKind::lag_least_squares;
    std::size_t window = 1;   ///< D, number of lagged inputs
    std::size_t horizon = 1;  ///< F
    double ridge = 0.0;
    double smoothing = 0.5;   ///< in (0, 1]

    void validate() const {
        if (window == 0 || horizon == 0) {
            throw ConfigError("regressor window and horizon must be at least 1");
        }
        if (!(ridge >= 0.0) || !std::isfinite(ridge)) {
            throw ConfigError("ridge regularization must be a nonnegative finite number");
        }
        if (!(smoothing > 0.0 && smoothing <= 1.0)) {
            throw ConfigError("smoothing factor must lie in (0, 1]");
        }
    }
};

struct WindowDataset {
    Matrix inputs;   ///< samples x D
    Matrix outputs;  ///< samples x F
};

/// Sample j maps (h_j, ..., h_{j+D-1}) to (h_{j+D}, ..., h_{j+D+F-1}).
inline WindowDataset sliding_window_dataset(const Eigen::Ref<const RowVector>& h, std::size_t window, std::size_t horizon) {
    const auto t = static_cast<std::size_t>(h.size());
    if (window == 0 || horizon == 0) {
        throw ConfigError("sliding_window_dataset: window and horizon must be at least 1");
    }
    if (t < window + horizon) {
        throw DimensionError("sliding_window_dataset: length " + std::to_string(t) + " is shorter than window + horizon = " +
                             std::to_string(window + horizon));
    }
    const auto samples = static_cast<Index>(t - window - horizon + 1);
    const auto d = static_cast<Index>(window);
    const auto f = static_cast<Index>(horizon);
    WindowDataset ds{Matrix(samples, d), Matrix(samples, f)};
    for (Index j = 0; j < samples; ++j) {
        ds.inputs.row(j) = h.segment(j, d);
        ds.outputs.row(j) = h.segment(j + d, f);
    }
    return ds;
}

/// Final level of simple exponential smoothing started at the first value.
inline double smoothed_level(const Eigen::Ref<const RowVector>& h, double factor) {
    double level = h[0];
    for (Index t = 1; t < h.size(); ++t) {
        level = factor * h[t] + (1.0 - factor) * level;
    }
    return level;
}

namespace detail {

/// Direct multi-output lag regression with intercept; the ridge term acts on
/// the lag coefficients only.
inline RowVector lag_regression_forecast(const RowVector& z, const RegressorSpec& spec) {
    const WindowDataset ds = sliding_window_dataset(z, spec.window, spec.horizon);
    const Index s = ds.inputs.rows();
    const auto d = static_cast<Index>(spec.window);
    const Index extra = spec.ridge > 0.0 ? d : 0;
    Matrix x = Matrix::Zero(s + extra, d + 1);
    Matrix y = Matrix::Zero(s + extra, ds.outputs.cols());
    x.topLeftCorner(s, 1).setOnes();
    x.topRightCorner(s, d) = ds.inputs;
    y.topRows(s) = ds.outputs;
    if (extra > 0) {
        x.bottomRightCorner(d, d) = std::sqrt(spec.ridge) * Matrix::Identity(d, d);
    }
    const Matrix coef = Eigen::CompleteOrthogonalDecomposition<Matrix>(x).solve(y);
    RowVector last(d + 1);
    last[0] = 1.0;
    last.tail(d) = z.tail(d);
    return last * coef;
}

}  // namespace detail

/// Forecasts `spec.horizon` steps of every row of `h` (K x T). Each row is
/// standardized, regressed on its own lags (or smoothed) and mapped back; a
/// constant row continues as that constant.
inline Matrix fit_predict_profiles(const Matrix& h, const RegressorSpec& spec) {
    spec.validate();
    const auto f = static_cast<Index>(spec.horizon);
    Matrix out(h.rows(), f);
    for (Index k = 0; k < h.rows(); ++k) {
        const RowVector row = h.row(k);
        const auto t = static_cast<std::size_t>(row.size());
        const std::size_t need = spec.kind == RegressorKind::lag_least_squares ? spec.window + spec.horizon : 1;
        if (t < need) {
            throw DimensionError("profile row " + std::to_string(k) + ": length " + std::to_string(t) +
                                 " is shorter than the " + std::to_string(need) + " values the regressor needs");
        }
        if (!all_finite(row)) {
            throw DimensionError("profile row " + std::to_string(k) + ": non-finite values");
        }
        const double mean = row.mean();
        const double sd = std::sqrt((row.array() - mean).square().mean());
        if (!(sd > 1e-12 * std::max(1.0, std::abs(mean)))) {
            out.row(k).setConstant(mean);
            continue;
        }
        const RowVector z = (row.array() - mean) / sd;
        if (spec.kind == RegressorKind::lag_least_squares) {
            out.row(k) = (detail::lag_regression_forecast(z, spec).array() * sd + mean).matrix();
        } else {
            out.row(k).setConstant(smoothed_level(z, spec.smoothing) * sd + mean);
        }
    }
    return out;
}

}  // namespace nmfcast
