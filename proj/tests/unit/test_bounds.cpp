#include "qfeat/bounds.hpp"
#include "qfeat/error.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace qfeat;

TEST(PolyBound, Examples) {
  EXPECT_EQ(poly_bound(1.0, 0.0, 2), 0.0);
  EXPECT_NEAR(poly_bound(1.0, 1.0, 2), 3.0 * std::exp(1.0) / 2.0, 1e-15);
  EXPECT_NEAR(poly_bound(1.0, 1.0, 2), 4.0774, 1e-4);
  EXPECT_NEAR(poly_bound(1.0, 0.5, 10), 3.0 * std::pow(std::exp(1.0) / 40.0, 5), 1e-20);
  EXPECT_NEAR(poly_bound(1.0, 0.5, 10), 4.348e-6, 0.001e-6);
}

TEST(PolyBound, RejectsOddOrSmallDegree) {
  EXPECT_THROW(poly_bound(1.0, 1.0, 3), ArgumentError);
  EXPECT_THROW(poly_bound(1.0, 1.0, 0), ArgumentError);
  EXPECT_THROW(poly_bound(0.0, 1.0, 2), ArgumentError);
  EXPECT_THROW(poly_bound(1.0, -1.0, 2), ArgumentError);
}

TEST(PolyBound, DecreasesPastTheCriticalDegree) {
  for (double M : {0.3, 1.0, 2.5}) {
    const double crit = std::exp(1.0) * M * M;
    for (unsigned R = 2; R < 80; R += 2)
      if (R > crit) EXPECT_LT(poly_bound(1.0, M, R + 2), poly_bound(1.0, M, R)) << M << " " << R;
  }
}

TEST(SparseBound, Examples) {
  for (unsigned A : {0u, 1u, 5u}) {
    const auto v = sparse_bound(1.0, 0.0, A, 3);
    ASSERT_TRUE(v.has_value());
    EXPECT_EQ(*v, 0.0);
  }
  const auto v = sparse_bound(1.0, 0.1, 7, 2);
  ASSERT_TRUE(v.has_value());
  EXPECT_NEAR(*v, 4.0 * std::pow(12.0 * std::exp(1.0) * 0.01 / 7.0, 7), 1e-24);
  EXPECT_NEAR(*v, 1.9086e-9, 0.0001e-9);
  EXPECT_FALSE(sparse_bound(1.0, 1.0, 2, 25).has_value());
}

TEST(SubgaussianParameter, Bandwidth) {
  EXPECT_EQ(subgaussian_parameter(0.5), 1.0);
  EXPECT_DOUBLE_EQ(subgaussian_parameter(2.0), 2.0);
  EXPECT_THROW(subgaussian_parameter(0.0), ArgumentError);
}

TEST(Counts, Examples) {
  const auto c = counts(25, 2, 2, 1);
  EXPECT_EQ(c.poly_constraints, 351);
  EXPECT_EQ(c.sparse_point_bound, 3159);
  EXPECT_EQ(c.dense_points, 1);
  EXPECT_EQ(binomial(5, 7), 0);
  EXPECT_EQ(binomial(10, 0), 1);
}

TEST(Counts, BigIntegers) {
  const auto c = counts(200, 40, 30, 10);
  EXPECT_EQ(c.dense_points, boost::multiprecision::pow(BigInt(10), 200));
  EXPECT_EQ(c.dense_points.str().size(), 201u);
  // C(240, 40) by Pascal's rule as an independent check
  std::vector<BigInt> row(41, 0);
  row[0] = 1;
  for (int n = 1; n <= 240; ++n)
    for (int k = std::min(n, 40); k >= 1; --k) row[k] += row[k - 1];
  EXPECT_EQ(c.poly_constraints, row[40]);
}
