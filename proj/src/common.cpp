#include "cosparse/common.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

namespace cosparse {

std::uint64_t splitmix64(std::uint64_t state, std::uint64_t index) {
  std::uint64_t z = state + (index + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::string const &tag) {
  // FNV-1a over the tag, then mixed with the parent seed.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : tag) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return splitmix64(seed ^ h);
}

Matrix gaussian_matrix(Index rows, Index cols, Rng &rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(rows, cols);
  // Fill row by row so the draw order matches the row-major CSV layout.
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) { m(i, j) = normal(rng); }
  }
  return m;
}

Vector gaussian_vector(Index size, Rng &rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(size);
  for (Index i = 0; i < size; ++i) { v(i) = normal(rng); }
  return v;
}

Matrix orthonormal_range(Matrix const &a) {
  if (a.cols() == 0 || a.rows() == 0) { return Matrix(a.rows(), 0); }
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU);
  auto const &s = svd.singularValues();
  double const smax = s.size() ? s(0) : 0.0;
  if (smax <= std::numeric_limits<double>::min()) { return Matrix(a.rows(), 0); }
  Index rank = 0;
  while (rank < s.size() && s(rank) > kRankTolerance * smax) { ++rank; }
  return svd.matrixU().leftCols(rank);
}

Matrix orthonormal_null_space(Matrix const &a) {
  Index const n = a.cols();
  if (a.rows() == 0) { return Matrix::Identity(n, n); }
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeFullV);
  auto const &s = svd.singularValues();
  double const smax = s.size() ? s(0) : 0.0;
  Index rank = 0;
  if (smax > std::numeric_limits<double>::min()) {
    while (rank < s.size() && s(rank) > kRankTolerance * smax) { ++rank; }
  }
  return svd.matrixV().rightCols(n - rank);
}

std::string format_double(double value) {
  if (std::isnan(value)) { return "nan"; }
  if (std::isinf(value)) { return value > 0 ? "inf" : "-inf"; }
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

} // namespace cosparse
