#include "cosparse/common.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <set>

using namespace cosparse;

TEST(Seeds, SplitmixIsDeterministicAndSpreads) {
  EXPECT_EQ(splitmix64(42, 3), splitmix64(42, 3));
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 1000; ++i) { seen.insert(splitmix64(7, i)); }
  EXPECT_EQ(seen.size(), 1000u);
  EXPECT_NE(splitmix64(1, 0), splitmix64(2, 0));
}

TEST(Seeds, DeriveSeedDependsOnTag) {
  EXPECT_EQ(derive_seed(9, "phi"), derive_seed(9, "phi"));
  EXPECT_NE(derive_seed(9, "phi"), derive_seed(9, "dictionary"));
  EXPECT_NE(derive_seed(9, "phi"), derive_seed(10, "phi"));
}

TEST(Random, GaussianDrawsAreReproducible) {
  Rng a(5);
  Rng b(5);
  Matrix const x = gaussian_matrix(4, 3, a);
  Matrix const y = gaussian_matrix(4, 3, b);
  EXPECT_EQ(x, y);
  Rng c(5);
  Rng d(5);
  EXPECT_EQ(gaussian_vector(4, c), Vector(gaussian_matrix(4, 1, d).col(0)));
}

TEST(Subspaces, RangeAndNullSpaceAreOrthonormalComplements) {
  Rng rng(3);
  Matrix const a = gaussian_matrix(4, 7, rng);
  Matrix const range = orthonormal_range(a.transpose());
  Matrix const null = orthonormal_null_space(a);
  ASSERT_EQ(range.cols(), 4);
  ASSERT_EQ(null.cols(), 3);
  EXPECT_LT((range.transpose() * range - Matrix::Identity(4, 4)).norm(), 1e-12);
  EXPECT_LT((null.transpose() * null - Matrix::Identity(3, 3)).norm(), 1e-12);
  EXPECT_LT((a * null).norm(), 1e-12);
  EXPECT_LT((range.transpose() * null).norm(), 1e-12);
}

TEST(Subspaces, RankDeficientRange) {
  Matrix a(3, 2);
  a << 1, 2, 2, 4, 3, 6;
  EXPECT_EQ(orthonormal_range(a).cols(), 1);
  EXPECT_EQ(orthonormal_null_space(a).cols(), 1);
}

TEST(Format, RoundTripsAtSeventeenDigits) {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23}) {
    EXPECT_EQ(std::stod(format_double(v)), v);
  }
  EXPECT_EQ(format_double(std::numeric_limits<double>::infinity()), "inf");
  EXPECT_EQ(format_double(-std::numeric_limits<double>::infinity()), "-inf");
  EXPECT_EQ(format_double(std::nan("")), "nan");
}
