#pragma once

#include "cosparse/model_core.hpp"

#include <cstdint>
#include <optional>
#include <string_view>
#include <utility>

namespace cosparse {

enum class EstimateMethod { exact, monte_carlo };

/**
 * Which family of k-dimensional subspaces the isometry constant ranges over.
 *
 * cosparse:   S_L = {x : (Dx)_i = 0 for i outside L}, the vectors with ||Dx||_0 <= |L|.
 * chunk_span: T_L = {D^+ z : supp(z) in L}, the span of the pseudo-inverse chunks.
 *
 * S_L is contained in T_L whenever D has full column rank, and the two agree
 * for square D. The bound checkers need chunk_span: they apply the isometry to
 * sums of D^+ chunks, which generally leave S_L when D is redundant.
 */
enum class SubspaceFamily { cosparse, chunk_span };

std::string_view to_string(EstimateMethod method);
std::string_view to_string(SubspaceFamily family);
SubspaceFamily parse_subspace_family(std::string_view text);

/// Limits for exhaustive support enumeration.
struct EnumerationBudget {
  Index max_p = 18;
  Index max_k = 4;
};

struct GripReport {
  Index k = 0;
  double delta = 0.0;
  EstimateMethod method = EstimateMethod::exact;
  /// Number of supports requested for Monte-Carlo, 0 for exact.
  long trials = 0;
  SupportSet worst_support;
  /// Extreme eigenvalues of the pencil at worst_support; (1, 1) when nothing
  /// nontrivial was examined.
  std::pair<double, double> eigen_range{1.0, 1.0};
  SubspaceFamily family = SubspaceFamily::cosparse;
  /// Supports visited, including the ones whose subspace was trivial.
  long supports_examined = 0;
  long nontrivial_supports = 0;
};

struct RhoEstimate {
  Index k = 0;
  double rho = 0.0;
  EstimateMethod method = EstimateMethod::exact;
  std::pair<SupportSet, SupportSet> witness;
};

struct BoundConstants {
  double delta2k = 0.0;
  double rho = 0.0;
  double alpha = 0.0;
  double beta = 1.0;
  /// 4 alpha / (1 - alpha) + 2. +inf when inadmissible.
  double c0 = 2.0;
  /// 2 beta / (1 - alpha). +inf when inadmissible.
  double c1 = 2.0;
  /// rho-free closed forms 2(1-(1-sqrt2)d)/(1-(1+sqrt2)d) and 2/(1-(1+sqrt2)d).
  double printed_c0 = 2.0;
  double printed_c1 = 2.0;
  bool admissible = true;
};

/// Extreme generalized eigenvalues of (B^T Phi^T Phi B, B^T D^T D B) for an
/// orthonormal basis B of the subspace attached to `support`. Returns nullopt
/// when the subspace is trivial.
std::optional<std::pair<double, double>> support_eigen_range(SensingMatrix const &phi,
                                                             Dictionary const &dictionary,
                                                             SupportSet const &support,
                                                             SubspaceFamily family);

/// Exhaustive generalized RIP constant over every support of size k.
GripReport delta_exact(SensingMatrix const &phi, Dictionary const &dictionary, Index k,
                       SubspaceFamily family = SubspaceFamily::cosparse,
                       EnumerationBudget const &budget = {});

/// Same computation on `trials` distinct, uniformly sampled supports (all
/// supports when trials >= C(p, k)). Never exceeds delta_exact.
GripReport delta_monte_carlo(SensingMatrix const &phi, Dictionary const &dictionary, Index k,
                             long trials, std::uint64_t seed,
                             SubspaceFamily family = SubspaceFamily::cosparse);

/// Largest cosine between D-images of pseudo-inverse chunks on disjoint
/// supports of size <= k.
RhoEstimate rho_exact(Dictionary const &dictionary, Index k, EnumerationBudget const &budget = {});

BoundConstants bound_constants(double delta2k, double rho);

double printed_c0(double delta2k);
double printed_c1(double delta2k);

/// Number of k-subsets of a p-set (saturating at LONG_MAX).
long binomial(Index p, Index k);

/// Advances `subset` (sorted, size k, values < p) to its colexicographic
/// successor. Returns false after the last subset.
bool next_colex_subset(std::vector<Index> &subset, Index p);

} // namespace cosparse
