#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace nmfcast;

namespace {

Matrix mat(Index r, Index c, std::initializer_list<double> xs) {
    Matrix m(r, c);
    Index i = 0;
    for (double x : xs) {
        m(i / c, i % c) = x;
        ++i;
    }
    return m;
}

}  // namespace

TEST(Sliding, SmallExample) {
    const auto g = SlidingGeometry::make(1, 5, 1, 2, 2, 1);
    EXPECT_EQ(g.n_blocks(), 3u);
    const Matrix x = apply_sliding(mat(1, 6, {1, 2, 3, 4, 5, 6}), g);
    EXPECT_EQ(x, mat(2, 4, {1, 2, 3, 4, 3, 4, 5, 6}));
}

TEST(Sliding, ObservedOnlyPadsFutureWithZero) {
    const auto g = SlidingGeometry::make(1, 5, 1, 2, 2, 1);
    const Matrix x = apply_sliding(mat(1, 5, {1, 2, 3, 4, 5}), g);
    EXPECT_EQ(x, mat(2, 4, {1, 2, 3, 4, 3, 4, 5, 0}));
}

TEST(Sliding, ElectricityShape) {
    const auto g = SlidingGeometry::make(370, 52 * 4 - 1, 1, 4, 5, 1);
    EXPECT_EQ(g.rows(), 17760u);
    EXPECT_EQ(g.cols(), 20u);
}

TEST(Sliding, StrideSkipsBlocks) {
    // B = 5, W = 3, S = 2: groups start at blocks 0 and 2.
    const auto g = SlidingGeometry::make(1, 9, 1, 2, 3, 2);
    EXPECT_EQ(g.n_groups(), 2u);
    const Matrix x = apply_sliding(mat(1, 10, {0, 1, 2, 3, 4, 5, 6, 7, 8, 9}), g);
    EXPECT_EQ(x, mat(2, 6, {0, 1, 2, 3, 4, 5, 4, 5, 6, 7, 8, 9}));
}

TEST(Sliding, GeometryErrors) {
    EXPECT_THROW(SlidingGeometry::make(1, 5, 1, 2, 4, 1), GeometryError);  // W > B
    EXPECT_THROW(SlidingGeometry::make(1, 6, 1, 2, 2, 1), GeometryError);  // 7 not a multiple of P
    EXPECT_THROW(SlidingGeometry::make(1, 5, 1, 0, 2, 1), GeometryError);
    EXPECT_THROW(SlidingGeometry::make(0, 5, 1, 2, 2, 1), GeometryError);
    EXPECT_THROW(SlidingGeometry::make(1, 4, 2, 2, 2, 3), GeometryError);  // S > W
    const auto g = SlidingGeometry::make(1, 5, 1, 2, 2, 1);
    EXPECT_THROW(apply_sliding(Matrix::Zero(1, 4), g), GeometryError);
    EXPECT_THROW(apply_sliding(Matrix::Zero(2, 6), g), GeometryError);
}

TEST(Sliding, UnslideInvertsFullTimeline) {
    std::mt19937_64 rng(1);
    const Matrix m = oracle::random_uniform(3, 12, rng);
    const auto g = SlidingGeometry::make(3, 10, 2, 3, 2, 1);
    EXPECT_EQ(unslide(apply_sliding(m, g), g), m);
}

TEST(Mask, SmallExample) {
    const MaskedProblem p(mat(2, 2, {1, 2, 3, 4}), 1, 1);
    EXPECT_EQ(apply_mask(mat(2, 2, {1, 2, 3, 4}), p), mat(2, 2, {1, 2, 3, 0}));
    EXPECT_EQ(apply_mask_complement(mat(2, 2, {1, 2, 3, 4}), p), mat(2, 2, {0, 0, 0, 4}));
}

TEST(Mask, Idempotent) {
    const MaskedProblem p(mat(2, 2, {1, 2, 3, 4}), 1, 1);
    const Matrix once = apply_mask(mat(2, 2, {1, 2, 3, 4}), p);
    EXPECT_EQ(apply_mask(once, p), once);
}

TEST(Mask, ObservedIsStoredMasked) {
    const MaskedProblem p(mat(2, 2, {1, 2, 3, 4}), 1, 1);
    EXPECT_EQ(p.observed()(1, 1), 0.0);
    EXPECT_TRUE(p.is_hidden(1, 1));
    EXPECT_FALSE(p.is_hidden(0, 1));
}

TEST(Mask, ShapeErrors) {
    EXPECT_THROW(MaskedProblem(Matrix::Zero(2, 2), 3, 1), DimensionError);
    const MaskedProblem p(Matrix::Zero(2, 2), 1, 1);
    EXPECT_THROW(apply_mask(Matrix::Zero(3, 2), p), DimensionError);
}

TEST(CompletionProjection, EmptyMaskReturnsObserved) {
    const Matrix x = mat(2, 2, {1, 2, 3, 4});
    const MaskedProblem p = MaskedProblem::unmasked(x);
    EXPECT_EQ(completion_projection(Matrix::Ones(2, 1), Matrix::Ones(1, 2), p), x);
}

TEST(CompletionProjection, ExactProductIsKept) {
    const Matrix w = mat(2, 1, {1, 2});
    const Matrix h = mat(1, 3, {1, 2, 3});
    const Matrix x = w * h;
    const MaskedProblem p(x, 1, 2);
    EXPECT_EQ(completion_projection(w, h, p), x);
}

TEST(CompletionProjection, HiddenFromProductObservedFromData) {
    const MaskedProblem p(mat(2, 2, {1, 2, 3, 4}), 1, 1);
    const Matrix n = completion_projection(Matrix::Ones(2, 1), mat(1, 2, {7, 9}), p);
    EXPECT_EQ(n, mat(2, 2, {1, 2, 3, 9}));
    EXPECT_EQ(project_onto_observations(mat(2, 2, {0, 0, 0, 5}), p), mat(2, 2, {1, 2, 3, 5}));
}

TEST(SplitViews, SmallExample) {
    const Matrix x0 = mat(2, 2, {1, 2, 3, 4});
    const MaskedProblem p(x0, 1, 1);
    const SplitViews v = split_views(x0, p);
    EXPECT_EQ(v.train, mat(1, 2, {1, 2}));
    EXPECT_EQ(v.test, mat(1, 2, {3, 0}));
    EXPECT_EQ(v.past, mat(2, 1, {1, 3}));
    EXPECT_EQ(v.future, mat(2, 1, {2, 0}));
}

TEST(ExtractForecast, GroundTruthAndZero) {
    const MaskedProblem p(mat(2, 2, {1, 2, 3, 4}), 1, 1);
    EXPECT_EQ(extract_forecast(mat(2, 2, {1, 2, 3, 4}), p), mat(1, 1, {4}));
    EXPECT_EQ(extract_forecast(Matrix::Zero(2, 2), p), Matrix::Zero(1, 1));
}

TEST(ExtractForecast, RoundTripThroughSliding) {
    std::mt19937_64 rng(4);
    const Matrix m = oracle::random_uniform(5, 24, rng);
    const auto g = SlidingGeometry::make(5, 20, 4, 4, 3, 1);
    const Matrix x = apply_sliding(m, g);
    const MaskedProblem p = make_masked_problem(m.leftCols(20), g);
    EXPECT_EQ(extract_forecast(x, p), m.rightCols(4));
    // Every observed cell of the problem agrees with the full slid matrix.
    EXPECT_EQ(apply_mask(x, p), p.observed());
}

TEST(MakeMaskedProblem, WrongWidth) {
    const auto g = SlidingGeometry::make(2, 10, 2, 3, 2, 1);
    EXPECT_THROW(make_masked_problem(Matrix::Zero(2, 12), g), GeometryError);
}
