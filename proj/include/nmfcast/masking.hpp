#pragma once

// Sliding operator, mask operator and the completion projection.
//
// A series matrix M (N x (T+F)) is cut into B blocks of P timestamps. Row
// group g of the slid matrix stacks, for every series, W consecutive blocks
// side by side, so the slid matrix has G*N rows and W*P columns. Row groups
// are anchored at the end of the timeline: the last group always covers the
// last W blocks, which places the F unknown future timestamps in the
// bottom-right N x F rectangle.

#include <cstddef>
#include <optional>
#include <string>

#include "nmfcast/errors.hpp"
#include "nmfcast/matrix_core.hpp"

namespace nmfcast {

/// N x T nonnegative observations, rows are series.
struct SeriesMatrix {
    Matrix values;
    std::vector<std::string> series_ids;        ///< empty when the source had none
    std::vector<std::string> timestamp_labels;  ///< empty when the source had none

    Index n_series() const noexcept { return values.rows(); }
    Index n_timestamps() const noexcept { return values.cols(); }
};

class SlidingGeometry {
public:
    /// Builds the geometry for `n_observed` known timestamps followed by
    /// `horizon` unknown ones. Throws GeometryError when the block structure
    /// cannot be realized.
    static SlidingGeometry make(std::size_t n_series, std::size_t n_observed, std::size_t horizon,
                                std::size_t period, std::size_t window, std::size_t stride = 1) {
        if (n_series == 0) {
            throw GeometryError("sliding geometry: no series");
        }
        if (period == 0 || window == 0 || stride == 0) {
            throw GeometryError("sliding geometry: period, window and stride must be positive");
        }
        const std::size_t total = n_observed + horizon;
        if (total % period != 0) {
            throw GeometryError("sliding geometry: timeline length " + std::to_string(total) +
                                " is not a multiple of period " + std::to_string(period));
        }
        const std::size_t blocks = total / period;
        if (window > blocks) {
            throw GeometryError("sliding geometry: window " + std::to_string(window) + " exceeds " +
                                std::to_string(blocks) + " blocks");
        }
        if (stride > window) {
            throw GeometryError("sliding geometry: stride must not exceed the window");
        }
        if (horizon > stride * period) {
            // Future cells would also fall in the second-to-last row group.
            throw GeometryError("sliding geometry: horizon " + std::to_string(horizon) +
                                " exceeds stride * period = " + std::to_string(stride * period));
        }
        if (n_observed == 0 || horizon >= window * period) {
            throw GeometryError("sliding geometry: every row group needs observed cells");
        }
        return SlidingGeometry(n_series, period, blocks, window, horizon, stride);
    }

    std::size_t n_series() const noexcept { return n_series_; }
    std::size_t period() const noexcept { return period_; }
    std::size_t n_blocks() const noexcept { return blocks_; }
    std::size_t window() const noexcept { return window_; }
    std::size_t horizon() const noexcept { return horizon_; }
    std::size_t stride() const noexcept { return stride_; }

    std::size_t timeline() const noexcept { return blocks_ * period_; }
    std::size_t n_observed() const noexcept { return timeline() - horizon_; }
    std::size_t n_groups() const noexcept { return (blocks_ - window_) / stride_ + 1; }
    std::size_t rows() const noexcept { return n_groups() * n_series_; }
    std::size_t cols() const noexcept { return window_ * period_; }

    /// First block of row group g.
    std::size_t group_start_block(std::size_t g) const noexcept {
        return (blocks_ - window_) - (n_groups() - 1 - g) * stride_;
    }

private:
    SlidingGeometry(std::size_t n, std::size_t p, std::size_t b, std::size_t w, std::size_t f, std::size_t s)
        : n_series_(n), period_(p), blocks_(b), window_(w), horizon_(f), stride_(s) {}

    std::size_t n_series_;
    std::size_t period_;
    std::size_t blocks_;
    std::size_t window_;
    std::size_t horizon_;
    std::size_t stride_;
};

/// Slid observations with the hidden bottom-right rectangle.
///
/// Hidden cells are stored as 0 in `observed`; the rectangle is the last
/// `hidden_rows` rows by the last `hidden_cols` columns. A problem with an
/// empty rectangle is an ordinary (unmasked) factorization problem.
class MaskedProblem {
public:
    MaskedProblem(Matrix x, Index hidden_rows, Index hidden_cols,
                  std::optional<SlidingGeometry> geometry = std::nullopt)
        : observed_(std::move(x)), hidden_rows_(hidden_rows), hidden_cols_(hidden_cols),
          geometry_(std::move(geometry)) {
        if (hidden_rows < 0 || hidden_cols < 0 || hidden_rows > observed_.rows() ||
            hidden_cols > observed_.cols()) {
            throw DimensionError("MaskedProblem: hidden block larger than the matrix");
        }
        if ((hidden_rows == 0) != (hidden_cols == 0)) {
            hidden_rows_ = 0;
            hidden_cols_ = 0;
        }
        if (!all_finite(observed_)) {
            throw DimensionError("MaskedProblem: non-finite observations");
        }
        observed_.bottomRightCorner(hidden_rows_, hidden_cols_).setZero();
    }

    /// Fully observed problem (mask = identity).
    static MaskedProblem unmasked(Matrix x) { return MaskedProblem(std::move(x), 0, 0); }

    const Matrix& observed() const noexcept { return observed_; }
    Index rows() const noexcept { return observed_.rows(); }
    Index cols() const noexcept { return observed_.cols(); }
    Index hidden_rows() const noexcept { return hidden_rows_; }
    Index hidden_cols() const noexcept { return hidden_cols_; }
    Index hidden_row_begin() const noexcept { return rows() - hidden_rows_; }
    Index hidden_col_begin() const noexcept { return cols() - hidden_cols_; }
    Index hidden_cells() const noexcept { return hidden_rows_ * hidden_cols_; }
    bool has_hidden() const noexcept { return hidden_cells() > 0; }
    const std::optional<SlidingGeometry>& geometry() const noexcept { return geometry_; }

    bool is_hidden(Index r, Index c) const noexcept {
        return r >= hidden_row_begin() && c >= hidden_col_begin() && has_hidden();
    }

    void check_shape(const Matrix& x, const char* what) const {
        if (x.rows() != rows() || x.cols() != cols()) {
            throw DimensionError(std::string(what) + ": expected " + std::to_string(rows()) + "x" +
                                 std::to_string(cols()) + ", got " + std::to_string(x.rows()) + "x" +
                                 std::to_string(x.cols()));
        }
    }

private:
    Matrix observed_;
    Index hidden_rows_;
    Index hidden_cols_;
    std::optional<SlidingGeometry> geometry_;
};

namespace detail {

inline void check_series_width(const Matrix& m, const SlidingGeometry& g) {
    if (static_cast<std::size_t>(m.rows()) != g.n_series()) {
        throw GeometryError("sliding: matrix has " + std::to_string(m.rows()) + " series, geometry expects " +
                            std::to_string(g.n_series()));
    }
    const auto c = static_cast<std::size_t>(m.cols());
    if (c != g.timeline() && c != g.n_observed()) {
        throw GeometryError("sliding: matrix has " + std::to_string(c) + " columns, geometry expects " +
                            std::to_string(g.n_observed()) + " (observed) or " + std::to_string(g.timeline()) +
                            " (full timeline)");
    }
}

}  // namespace detail

/// Applies the sliding operator. `m` holds either the observed part
/// (T columns; the F future columns are padded with 0) or the full timeline.
inline Matrix apply_sliding(const Matrix& m, const SlidingGeometry& g) {
    detail::check_series_width(m, g);
    const auto n = static_cast<Index>(g.n_series());
    const auto p = static_cast<Index>(g.period());
    const auto width = static_cast<Index>(g.cols());
    Matrix out = Matrix::Zero(static_cast<Index>(g.rows()), width);
    for (std::size_t grp = 0; grp < g.n_groups(); ++grp) {
        const auto first_col = static_cast<Index>(g.group_start_block(grp)) * p;
        const Index avail = std::min<Index>(width, m.cols() - first_col);
        out.block(static_cast<Index>(grp) * n, 0, n, avail) = m.block(0, first_col, n, avail);
    }
    return out;
}

/// Inverse of apply_sliding for a fully known slid matrix: each timestamp is
/// read from the last row group that contains it.
inline Matrix unslide(const Matrix& slid, const SlidingGeometry& g) {
    if (static_cast<std::size_t>(slid.rows()) != g.rows() || static_cast<std::size_t>(slid.cols()) != g.cols()) {
        throw DimensionError("unslide: matrix does not match the geometry");
    }
    const auto n = static_cast<Index>(g.n_series());
    const auto p = static_cast<Index>(g.period());
    Matrix out = Matrix::Zero(n, static_cast<Index>(g.timeline()));
    for (std::size_t grp = 0; grp < g.n_groups(); ++grp) {
        const auto first_col = static_cast<Index>(g.group_start_block(grp)) * p;
        out.block(0, first_col, n, slid.cols()) = slid.block(static_cast<Index>(grp) * n, 0, n, slid.cols());
    }
    return out;
}

/// Builds the masked completion problem from the observed N x T series.
inline MaskedProblem make_masked_problem(const Matrix& observed_series, const SlidingGeometry& g) {
    if (static_cast<std::size_t>(observed_series.cols()) != g.n_observed()) {
        throw GeometryError("make_masked_problem: expected " + std::to_string(g.n_observed()) +
                            " observed timestamps, got " + std::to_string(observed_series.cols()));
    }
    return MaskedProblem(apply_sliding(observed_series, g), static_cast<Index>(g.n_series()),
                         static_cast<Index>(g.horizon()), g);
}

/// T(x): copy of x with the hidden rectangle set to 0.
inline Matrix apply_mask(const Matrix& x, const MaskedProblem& p) {
    p.check_shape(x, "apply_mask");
    Matrix out = x;
    out.bottomRightCorner(p.hidden_rows(), p.hidden_cols()).setZero();
    return out;
}

/// T_perp(x): only the hidden rectangle of x, zeros elsewhere.
inline Matrix apply_mask_complement(const Matrix& x, const MaskedProblem& p) {
    p.check_shape(x, "apply_mask_complement");
    Matrix out = Matrix::Zero(x.rows(), x.cols());
    out.bottomRightCorner(p.hidden_rows(), p.hidden_cols()) =
        x.bottomRightCorner(p.hidden_rows(), p.hidden_cols());
    return out;
}

/// P_X(y): observed cells from the problem, hidden cells from y.
inline Matrix project_onto_observations(const Matrix& y, const MaskedProblem& p) {
    p.check_shape(y, "completion_projection");
    Matrix out = p.observed();
    out.bottomRightCorner(p.hidden_rows(), p.hidden_cols()) =
        y.bottomRightCorner(p.hidden_rows(), p.hidden_cols());
    return out;
}

/// N with T(N) = X and T_perp(N) = T_perp(W H).
inline Matrix completion_projection(const Matrix& w, const Matrix& h, const MaskedProblem& p) {
    if (w.cols() != h.rows() || w.rows() != p.rows() || h.cols() != p.cols()) {
        throw DimensionError("completion_projection: W (" + std::to_string(w.rows()) + "x" +
                             std::to_string(w.cols()) + ") * H (" + std::to_string(h.rows()) + "x" +
                             std::to_string(h.cols()) + ") does not match the problem");
    }
    Matrix out = p.observed();
    if (p.has_hidden()) {
        out.bottomRightCorner(p.hidden_rows(), p.hidden_cols()).noalias() =
            w.bottomRows(p.hidden_rows()) * h.rightCols(p.hidden_cols());
    }
    return out;
}

struct SplitViews {
    Matrix train;   ///< top n-N rows
    Matrix test;    ///< bottom N rows, last F columns zeroed
    Matrix past;    ///< first p-F columns
    Matrix future;  ///< last F columns, bottom N rows zeroed
};

inline SplitViews split_views(const Matrix& x0, const MaskedProblem& p) {
    p.check_shape(x0, "split_views");
    const Index nh = p.hidden_rows();
    const Index fh = p.hidden_cols();
    SplitViews v;
    v.train = x0.topRows(x0.rows() - nh);
    v.test = x0.bottomRows(nh);
    v.test.rightCols(fh).setZero();
    v.past = x0.leftCols(x0.cols() - fh);
    v.future = x0.rightCols(fh);
    v.future.bottomRows(nh).setZero();
    return v;
}

/// Hidden rectangle of a completed matrix, i.e. the N x F forecast block in
/// series / timestamp order.
inline Matrix extract_forecast(const Matrix& completed, const MaskedProblem& p) {
    p.check_shape(completed, "extract_forecast");
    return completed.bottomRightCorner(p.hidden_rows(), p.hidden_cols());
}

}  // namespace nmfcast
