#pragma once

#include "nmfcast/errors.hpp"
#include "nmfcast/matrix_core.hpp"

namespace nmfcast {

namespace detail {

inline void check_metric_inputs(const Matrix& forecast, const Matrix& truth, const char* name) {
    if (forecast.rows() != truth.rows() || forecast.cols() != truth.cols()) {
        throw DimensionError(std::string(name) + ": forecast and truth differ in shape");
    }
}

}  // namespace detail

/// ||forecast - truth||_F / ||truth||_F
inline double rrmse(const Matrix& forecast, const Matrix& truth) {
    detail::check_metric_inputs(forecast, truth, "rrmse");
    const double denom = truth.norm();
    if (!(denom > 0.0)) {
        throw MetricError("rrmse: reference is identically zero");
    }
    return (forecast - truth).norm() / denom;
}

/// Entrywise l1 analogue of rrmse.
inline double rmpe(const Matrix& forecast, const Matrix& truth) {
    detail::check_metric_inputs(forecast, truth, "rmpe");
    const double denom = truth.cwiseAbs().sum();
    if (!(denom > 0.0)) {
        throw MetricError("rmpe: reference is identically zero");
    }
    return (forecast - truth).cwiseAbs().sum() / denom;
}

}  // namespace nmfcast
