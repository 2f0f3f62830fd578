#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>

#include "nmfcast/errors.hpp"
#include "nmfcast/masking.hpp"

namespace nmfcast {

struct SyntheticSpec {
    std::size_t n_base = 1;
    std::size_t base_length = 1;
    std::size_t replications = 1;
    double noise = 0.0;  ///< sigma
    std::uint64_t seed = 0;
};

struct SyntheticData {
    SeriesMatrix series;
    std::size_t clamped_cells = 0;
};

/// n_base series with entries uniform on [0, 1), each repeated
/// `replications` times along time, plus sigma * N(0, 1) noise per entry,
/// clamped at 0.
inline SyntheticData generate_synthetic(const SyntheticSpec& spec) {
    if (spec.n_base == 0 || spec.base_length == 0 || spec.replications == 0) {
        throw ConfigError("synthetic spec: counts must be at least 1");
    }
    if (!(spec.noise >= 0.0)) {
        throw ConfigError("synthetic spec: noise must be nonnegative");
    }
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const auto n = static_cast<Index>(spec.n_base);
    const auto len = static_cast<Index>(spec.base_length);
    Matrix base(n, len);
    for (Index i = 0; i < n; ++i) {
        for (Index t = 0; t < len; ++t) {
            base(i, t) = unif(rng);
        }
    }
    SyntheticData out;
    Matrix& m = out.series.values;
    m.resize(n, len * static_cast<Index>(spec.replications));
    for (std::size_t r = 0; r < spec.replications; ++r) {
        m.middleCols(static_cast<Index>(r) * len, len) = base;
    }
    if (spec.noise > 0.0) {
        for (Index i = 0; i < n; ++i) {
            for (Index t = 0; t < m.cols(); ++t) {
                m(i, t) += spec.noise * gauss(rng);
                if (m(i, t) < 0.0) {
                    m(i, t) = 0.0;
                    ++out.clamped_cells;
                }
            }
        }
    }
    return out;
}

}  // namespace nmfcast
