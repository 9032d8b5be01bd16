#include <gtest/gtest.h>

#include <random>

#include "gamblet/hierarchy.hpp"

using namespace gamblet;

namespace {

void expect_structural(const Hierarchy& h, double tol) {
  const auto r = residuals(h);
  EXPECT_TRUE(r.sizes_consistent);
  EXPECT_LT(r.aggregation_orthonormal, tol);
  EXPECT_LT(r.detail_orthonormal, tol);
  EXPECT_LT(r.detail_kernel, tol);
  EXPECT_EQ(r.parent_locality, 0.0);
}

}  // namespace

TEST(Dyadic, OneDimensionalQ2Entries) {
  const Hierarchy h = build_dyadic(1, 2);
  const double s = 1.0 / std::sqrt(2.0);
  Matrix pi(2, 4);
  pi << s, s, 0, 0, 0, 0, s, s;
  Matrix w(2, 4);
  w << s, -s, 0, 0, 0, 0, s, -s;
  EXPECT_LT((h.pi(1) - pi).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LT((h.w(2) - w).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_EQ(h.size(1), 2);
  EXPECT_EQ(h.size(2), 4);
  EXPECT_EQ(h.detail_size(1), 2);
  EXPECT_EQ(h.detail_size(2), 2);
}

TEST(Dyadic, AggregationEntriesFollowCellVolumes) {
  // pi_ij = |tau_j|^(1/2) |tau_i|^(-1/2) for children j of i.
  for (int dim : {1, 2}) {
    const Hierarchy h = build_dyadic(dim, 4);
    for (int k = 1; k < 4; ++k) {
      const auto& p = h.pi(k);
      const auto& par = h.parents[static_cast<std::size_t>(k - 1)];
      for (Index i = 0; i < p.rows(); ++i)
        for (Index j = 0; j < p.cols(); ++j) {
          const double expect = par[static_cast<std::size_t>(j)] == i
                                    ? std::sqrt(h.cell_volumes[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)] /
                                                h.cell_volumes[static_cast<std::size_t>(k - 1)][static_cast<std::size_t>(i)])
                                    : 0.0;
          EXPECT_NEAR(p(i, j), expect, 1e-15);
        }
    }
  }
}

TEST(Dyadic, TwoDimensionalQ2ByDirectMultiplication) {
  const Hierarchy h = build_dyadic(2, 2);
  const Matrix& w = h.w(2);
  ASSERT_EQ(w.rows(), 12);
  ASSERT_EQ(w.cols(), 16);
  EXPECT_LT((w * w.transpose() - Matrix::Identity(12, 12)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((w * h.pi(1).transpose()).cwiseAbs().maxCoeff(), 1e-12);
  // Parent of fine cell (ix, iy) is (ix/2, iy/2).
  for (Index r = 0; r < 12; ++r) {
    Index owner = -1;
    for (Index j = 0; j < 16; ++j) {
      if (w(r, j) == 0.0) continue;
      const Index parent = (j / 4 / 2) * 2 + (j % 4) / 2;
      if (owner < 0) owner = parent;
      EXPECT_EQ(parent, owner);
    }
  }
}

TEST(Dyadic, StructuralInvariantsAllConfigs) {
  for (int dim : {1, 2})
    for (int q = 1; q <= 6; ++q) {
      const Hierarchy h = build_dyadic(dim, q);
      EXPECT_EQ(h.levels(), q);
      for (int k = 1; k <= q; ++k) EXPECT_EQ(h.size(k), Index{1} << (k * dim));
      expect_structural(h, 1e-12);
    }
}

TEST(Dyadic, StackedAggregationAndDetailIsOrthogonal) {
  for (int dim : {1, 2})
    for (int k = 2; k <= 5; ++k) {
      const Hierarchy h = build_dyadic(dim, k);
      Matrix q(h.size(k), h.size(k));
      q << h.pi(k - 1), h.w(k);
      EXPECT_LT((q * q.transpose() - Matrix::Identity(q.rows(), q.rows())).cwiseAbs().maxCoeff(), 1e-10);
      EXPECT_NEAR(std::abs(q.determinant()), 1.0, 1e-10);
    }
}

TEST(Dyadic, CompositionOfAggregations) {
  const Hierarchy h = build_dyadic(2, 5);
  for (int k = 1; k <= 5; ++k) {
    const Matrix p = h.pi_between(k, 5);
    EXPECT_LT((p * p.transpose() - Matrix::Identity(p.rows(), p.rows())).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(Dyadic, Errors) {
  try {
    build_dyadic(3, 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnsupportedDim);
  }
  const Hierarchy h = build_dyadic(1, 3);
  try {
    (void)h.w(1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::BadLevel);
  }
}

TEST(Points, SinglePointIsTrivial) {
  const Hierarchy h = build_from_points({{0.3, 0.7}}, 1);
  EXPECT_EQ(h.levels(), 1);
  EXPECT_EQ(h.size(1), 1);
  EXPECT_TRUE(h.aggregation.empty());
  EXPECT_TRUE(h.details.empty());
}

TEST(Points, EmptyPointSet) {
  try {
    build_from_points({}, 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyPointSet);
  }
}

TEST(Points, TwoChildrenPerQuadrant) {
  // Two points per quadrant in distinct level-2 boxes: every level-1 box has two
  // occupied children with one point each, so pi entries are sqrt(1/2).
  const std::vector<Point2> pts = {{0.1, 0.1}, {0.4, 0.1}, {0.6, 0.1}, {0.9, 0.1},
                                   {0.1, 0.6}, {0.1, 0.9}, {0.6, 0.6}, {0.9, 0.9}};
  const Hierarchy h = build_from_points(pts, 2);
  ASSERT_EQ(h.levels(), 2);
  EXPECT_EQ(h.size(1), 4);
  EXPECT_EQ(h.size(2), 8);
  const Matrix& p = h.pi(1);
  for (Index i = 0; i < 4; ++i) {
    int nonzero = 0;
    for (Index j = 0; j < 8; ++j)
      if (p(i, j) != 0.0) {
        ++nonzero;
        EXPECT_NEAR(p(i, j), 1.0 / std::sqrt(2.0), 1e-15);
      }
    EXPECT_EQ(nonzero, 2);
  }
  expect_structural(h, 1e-12);
}

TEST(Points, UnevenCountsGiveWeightedKernel) {
  // Box counts 3 and 1 under one parent: pi row is (sqrt(3/4), sqrt(1/4)).
  const std::vector<Point2> pts = {{0.1, 0.1}, {0.15, 0.12}, {0.2, 0.2}, {0.4, 0.1}};
  const Hierarchy h = build_from_points(pts, 2);
  expect_structural(h, 1e-12);
  EXPECT_TRUE(h.point_level_appended);
  EXPECT_EQ(h.fine_size(), 4);
}

TEST(Points, GridMatchesDyadicStructure) {
  std::vector<Point2> pts;
  for (int j = 0; j < 32; ++j)
    for (int i = 0; i < 32; ++i) pts.push_back({(i + 0.5) / 32.0, (j + 0.5) / 32.0});
  const Hierarchy h = build_from_points(pts, 5);
  const Hierarchy d = build_dyadic(2, 5);
  ASSERT_EQ(h.levels(), 5);
  EXPECT_FALSE(h.point_level_appended);
  EXPECT_TRUE(h.merged_levels.empty());
  for (int k = 1; k <= 5; ++k) EXPECT_EQ(h.size(k), Index{1} << (2 * k));
  // Same aggregation; the detail rows span the same kernel.
  for (int k = 1; k < 5; ++k) EXPECT_LT((h.pi(k) - d.pi(k)).cwiseAbs().maxCoeff(), 1e-15);
  for (int k = 2; k <= 5; ++k) {
    const Matrix proj_h = h.w(k).transpose() * h.w(k);
    const Matrix proj_d = d.w(k).transpose() * d.w(k);
    EXPECT_LT((proj_h - proj_d).cwiseAbs().maxCoeff(), 1e-12);
  }
  for (std::size_t i = 0; i < h.fine_points.size(); ++i) EXPECT_EQ(h.fine_points[i], static_cast<Index>(i));
}

TEST(Points, DegenerateLevelsAreMerged) {
  // Both points share every box down to level 3, so levels 1 and 2 add nothing.
  const std::vector<Point2> pts = {{0.01, 0.01}, {0.1, 0.01}};
  const Hierarchy h = build_from_points(pts, 4);
  EXPECT_FALSE(h.merged_levels.empty());
  for (int k = 2; k <= h.levels(); ++k) EXPECT_GT(h.size(k), h.size(k - 1));
  expect_structural(h, 1e-12);
}

TEST(Points, RandomCloudsSatisfyInvariants) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Point2> pts(static_cast<std::size_t>(20 + 13 * trial));
    for (auto& p : pts) p = {u(rng), u(rng) * u(rng)};
    const Hierarchy h = build_from_points(pts, 1 + trial % 6);
    expect_structural(h, 1e-12);
    EXPECT_EQ(h.fine_size(), static_cast<Index>(pts.size()));
    for (int k = 1; k <= h.levels(); ++k) {
      const Matrix p = h.pi_between(k, h.levels());
      EXPECT_LT((p * p.transpose() - Matrix::Identity(p.rows(), p.rows())).cwiseAbs().maxCoeff(), 1e-10);
    }
  }
}

TEST(Points, OutsideUnitSquareRejected) {
  EXPECT_THROW(build_from_points({{1.5, 0.2}}, 2), Error);
}
