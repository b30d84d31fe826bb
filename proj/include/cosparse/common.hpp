#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace cosparse {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Inconsistent dimensions or an argument outside its documented domain.
class InvalidArgument : public Error {
public:
  using Error::Error;
};

/// An analysis operator (or generated matrix) without full column rank.
class RankDeficient : public Error {
public:
  using Error::Error;
};

/// An enumeration or LP size limit would be exceeded.
class BudgetExceeded : public Error {
public:
  using Error::Error;
};

class Infeasible : public Error {
public:
  using Error::Error;
};

class Unbounded : public Error {
public:
  using Error::Error;
};

// Absolute threshold below which an analysis coefficient counts as zero.
inline constexpr double kSupportThreshold = 1e-10;
// Relative (to sigma_max) threshold for rank decisions.
inline constexpr double kRankTolerance = 1e-10;

/// One step of the splitmix64 generator: mixes `state + (index + 1) * golden`.
std::uint64_t splitmix64(std::uint64_t state, std::uint64_t index = 0);

/// Derives an independent child seed for a named purpose (e.g. "phi", "dict").
std::uint64_t derive_seed(std::uint64_t seed, std::string const &tag);

using Rng = std::mt19937_64;

Matrix gaussian_matrix(Index rows, Index cols, Rng &rng);
Vector gaussian_vector(Index size, Rng &rng);

/// Orthonormal basis for range(A); columns whose singular value falls below
/// kRankTolerance * sigma_max are dropped. Returns an (rows x 0) matrix for A = 0.
Matrix orthonormal_range(Matrix const &a);

/// Orthonormal basis of the null space of A (cols x dim).
Matrix orthonormal_null_space(Matrix const &a);

/// Double formatted with 17 significant digits (round-trips exactly).
std::string format_double(double value);

} // namespace cosparse
