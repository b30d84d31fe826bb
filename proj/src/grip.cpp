#include "cosparse/grip.hpp"

#include <climits>
#include <cmath>
#include <limits>
#include <set>

namespace cosparse {

std::string_view to_string(EstimateMethod method) {
  return method == EstimateMethod::exact ? "exact" : "monte-carlo";
}

std::string_view to_string(SubspaceFamily family) {
  return family == SubspaceFamily::cosparse ? "cosparse" : "chunk-span";
}

SubspaceFamily parse_subspace_family(std::string_view text) {
  if (text == "cosparse") { return SubspaceFamily::cosparse; }
  if (text == "chunk-span") { return SubspaceFamily::chunk_span; }
  throw InvalidArgument("unknown subspace family '" + std::string(text) + "'");
}

long binomial(Index p, Index k) {
  if (k < 0 || k > p) { return 0; }
  k = std::min(k, p - k);
  long double r = 1.0L;
  for (Index i = 1; i <= k; ++i) { r = r * static_cast<long double>(p - k + i) / static_cast<long double>(i); }
  if (r >= static_cast<long double>(LONG_MAX)) { return LONG_MAX; }
  return static_cast<long>(std::llround(r));
}

bool next_colex_subset(std::vector<Index> &subset, Index p) {
  Index const k = static_cast<Index>(subset.size());
  for (Index i = 0; i < k; ++i) {
    Index const limit = (i + 1 < k) ? subset[static_cast<std::size_t>(i + 1)] : p;
    if (subset[static_cast<std::size_t>(i)] + 1 < limit) {
      ++subset[static_cast<std::size_t>(i)];
      for (Index j = 0; j < i; ++j) { subset[static_cast<std::size_t>(j)] = j; }
      return true;
    }
  }
  return false;
}

namespace {

void check_shapes(SensingMatrix const &phi, Dictionary const &dictionary, Index k) {
  if (phi.cols() != dictionary.cols()) {
    throw InvalidArgument("sensing matrix has " + std::to_string(phi.cols()) +
                          " columns but the dictionary has n=" + std::to_string(dictionary.cols()));
  }
  if (k < 1 || k > dictionary.rows()) {
    throw InvalidArgument("order k=" + std::to_string(k) + " outside [1, p=" +
                          std::to_string(dictionary.rows()) + "]");
  }
}

// a precedes b in colexicographic order (compare from the largest element down).
bool colex_less(std::vector<Index> const &a, std::vector<Index> const &b) {
  for (std::size_t i = a.size(); i-- > 0;) {
    if (a[i] != b[i]) { return a[i] < b[i]; }
  }
  return false;
}

std::vector<Index> first_subset(Index k) {
  std::vector<Index> s(static_cast<std::size_t>(k));
  for (Index i = 0; i < k; ++i) { s[static_cast<std::size_t>(i)] = i; }
  return s;
}

Matrix subspace_basis(Dictionary const &dictionary, SupportSet const &support, SubspaceFamily family) {
  if (family == SubspaceFamily::cosparse) {
    SupportSet const cosupport = support.complement();
    Matrix rows(cosupport.size(), dictionary.cols());
    for (Index i = 0; i < cosupport.size(); ++i) { rows.row(i) = dictionary.entries().row(cosupport[i]); }
    return orthonormal_null_space(rows);
  }
  Matrix cols(dictionary.cols(), support.size());
  for (Index i = 0; i < support.size(); ++i) { cols.col(i) = dictionary.pseudo_inverse().col(support[i]); }
  return orthonormal_range(cols);
}

struct Tracker {
  double delta = -1.0;
  std::vector<Index> witness;
  std::pair<double, double> range{1.0, 1.0};
  long examined = 0;
  long nontrivial = 0;

  void offer(std::vector<Index> const &subset, std::optional<std::pair<double, double>> const &r) {
    ++examined;
    if (!r) { return; }
    ++nontrivial;
    double const d = std::max(r->second - 1.0, 1.0 - r->first);
    if (d > delta || (d == delta && colex_less(subset, witness))) {
      delta = d;
      witness = subset;
      range = *r;
    }
  }

  GripReport report(Index k, Index p, EstimateMethod method, long trials, SubspaceFamily family) const {
    GripReport out;
    out.k = k;
    out.delta = std::max(delta, 0.0);
    out.method = method;
    out.trials = trials;
    out.worst_support = SupportSet(witness, p);
    out.eigen_range = range;
    out.family = family;
    out.supports_examined = examined;
    out.nontrivial_supports = nontrivial;
    return out;
  }
};

} // namespace

std::optional<std::pair<double, double>> support_eigen_range(SensingMatrix const &phi,
                                                             Dictionary const &dictionary,
                                                             SupportSet const &support,
                                                             SubspaceFamily family) {
  Matrix const basis = subspace_basis(dictionary, support, family);
  if (basis.cols() == 0) { return std::nullopt; }
  Matrix const pb = phi.entries() * basis;
  Matrix const db = dictionary.entries() * basis;
  Matrix const a = pb.transpose() * pb;
  Matrix const metric = db.transpose() * db;

  Eigen::SelfAdjointEigenSolver<Matrix> metric_eig(metric, Eigen::EigenvaluesOnly);
  if (metric_eig.eigenvalues()(0) <= 1e-12) {
    throw RankDeficient("metric B^T D^T D B is not positive definite on support {" +
                        support.to_string() + "}");
  }
  // Whitening by the Cholesky factor turns the pencil into a symmetric problem.
  Eigen::LLT<Matrix> llt(metric);
  Matrix const linv_a = llt.matrixL().solve(a);
  Matrix whitened = llt.matrixL().solve(linv_a.transpose());
  whitened = 0.5 * (whitened + whitened.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(whitened, Eigen::EigenvaluesOnly);
  auto const &ev = eig.eigenvalues();
  return std::make_pair(ev(0), ev(ev.size() - 1));
}

GripReport delta_exact(SensingMatrix const &phi, Dictionary const &dictionary, Index k,
                       SubspaceFamily family, EnumerationBudget const &budget) {
  check_shapes(phi, dictionary, k);
  Index const p = dictionary.rows();
  if (p > budget.max_p || k > budget.max_k) {
    throw BudgetExceeded("delta_exact: p=" + std::to_string(p) + ", k=" + std::to_string(k) +
                         " exceeds the enumeration budget (p <= " + std::to_string(budget.max_p) +
                         ", k <= " + std::to_string(budget.max_k) + ")");
  }
  Tracker t;
  auto subset = first_subset(k);
  do {
    t.offer(subset, support_eigen_range(phi, dictionary, SupportSet(subset, p), family));
  } while (next_colex_subset(subset, p));
  return t.report(k, p, EstimateMethod::exact, 0, family);
}

GripReport delta_monte_carlo(SensingMatrix const &phi, Dictionary const &dictionary, Index k,
                             long trials, std::uint64_t seed, SubspaceFamily family) {
  check_shapes(phi, dictionary, k);
  if (trials < 1) { throw InvalidArgument("delta_monte_carlo: trials must be >= 1"); }
  Index const p = dictionary.rows();
  Tracker t;
  long const total = binomial(p, k);
  if (trials >= total) {
    auto subset = first_subset(k);
    do {
      t.offer(subset, support_eigen_range(phi, dictionary, SupportSet(subset, p), family));
    } while (next_colex_subset(subset, p));
    return t.report(k, p, EstimateMethod::monte_carlo, trials, family);
  }

  // Distinct supports, uniform without replacement (Floyd-style rejection).
  Rng rng(seed);
  std::set<std::vector<Index>> seen;
  std::vector<Index> pool(static_cast<std::size_t>(p));
  while (static_cast<long>(seen.size()) < trials) {
    for (Index i = 0; i < p; ++i) { pool[static_cast<std::size_t>(i)] = i; }
    for (Index i = 0; i < k; ++i) {
      std::uniform_int_distribution<Index> pick(i, p - 1);
      std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(pick(rng))]);
    }
    std::vector<Index> subset(pool.begin(), pool.begin() + k);
    std::sort(subset.begin(), subset.end());
    if (!seen.insert(subset).second) { continue; }
    t.offer(subset, support_eigen_range(phi, dictionary, SupportSet(subset, p), family));
  }
  return t.report(k, p, EstimateMethod::monte_carlo, trials, family);
}

RhoEstimate rho_exact(Dictionary const &dictionary, Index k, EnumerationBudget const &budget) {
  Index const p = dictionary.rows();
  if (k < 1) { throw InvalidArgument("rho_exact: k must be >= 1"); }
  if (p > budget.max_p || k > budget.max_k) {
    throw BudgetExceeded("rho_exact: p=" + std::to_string(p) + ", k=" + std::to_string(k) +
                         " exceeds the enumeration budget (p <= " + std::to_string(budget.max_p) +
                         ", k <= " + std::to_string(budget.max_k) + ")");
  }
  if (p > 62) { throw BudgetExceeded("rho_exact: p > 62 not supported"); }

  RhoEstimate out;
  out.k = k;
  out.method = EstimateMethod::exact;
  out.witness = {SupportSet(p), SupportSet(p)};

  // Enlarging either support can only enlarge the cross singular value, so
  // maximal disjoint pairs suffice.
  Index const size_i = std::min(k, p);
  Index const size_j = std::min(k, p - size_i);
  if (size_j == 0) { return out; }

  Matrix const &projector = dictionary.range_projector();
  struct Entry {
    std::vector<Index> subset;
    std::uint64_t bits = 0;
    Matrix basis;
  };
  auto enumerate = [&](Index size) {
    std::vector<Entry> list;
    auto subset = first_subset(size);
    do {
      Entry e;
      e.subset = subset;
      Matrix cols(p, size);
      for (Index i = 0; i < size; ++i) {
        e.bits |= std::uint64_t{1} << subset[static_cast<std::size_t>(i)];
        cols.col(i) = projector.col(subset[static_cast<std::size_t>(i)]);
      }
      e.basis = orthonormal_range(cols);
      list.push_back(std::move(e));
    } while (next_colex_subset(subset, p));
    return list;
  };

  auto const first = enumerate(size_i);
  auto const second = size_j == size_i ? std::vector<Entry>{} : enumerate(size_j);
  bool const same = size_j == size_i;
  std::vector<Entry> const &partners = same ? first : second;

  double best = -1.0;
  for (std::size_t a = 0; a < first.size(); ++a) {
    if (first[a].basis.cols() == 0) { continue; }
    for (std::size_t b = same ? a + 1 : 0; b < partners.size(); ++b) {
      if (first[a].bits & partners[b].bits) { continue; }
      if (partners[b].basis.cols() == 0) { continue; }
      Matrix const cross = first[a].basis.transpose() * partners[b].basis;
      Eigen::JacobiSVD<Matrix> svd(cross);
      double const s = svd.singularValues()(0);
      if (s > best) {
        best = s;
        out.witness = {SupportSet(first[a].subset, p), SupportSet(partners[b].subset, p)};
      }
    }
  }
  out.rho = std::clamp(best, 0.0, 1.0);
  return out;
}

namespace {
constexpr long double kSqrt2 = 1.414213562373095048801688724209698L;
}

double printed_c0(double delta2k) {
  long double const d = delta2k;
  long double const denom = 1.0L - (1.0L + kSqrt2) * d;
  if (denom <= 0.0L) { return std::numeric_limits<double>::infinity(); }
  return static_cast<double>(2.0L * (1.0L - (1.0L - kSqrt2) * d) / denom);
}

double printed_c1(double delta2k) {
  long double const d = delta2k;
  long double const denom = 1.0L - (1.0L + kSqrt2) * d;
  if (denom <= 0.0L) { return std::numeric_limits<double>::infinity(); }
  return static_cast<double>(2.0L / denom);
}

BoundConstants bound_constants(double delta2k, double rho) {
  if (!std::isfinite(delta2k) || delta2k < 0.0 || delta2k >= 1.0) {
    throw InvalidArgument("bound_constants: delta2k must lie in [0, 1), got " + format_double(delta2k));
  }
  if (!std::isfinite(rho) || rho < 0.0) {
    throw InvalidArgument("bound_constants: rho must be >= 0, got " + format_double(rho));
  }
  long double const d = delta2k;
  long double const r = rho;
  long double const alpha = kSqrt2 * (d + r) / (1.0L - d);
  long double const beta = 1.0L / (1.0L - d);

  BoundConstants out;
  out.delta2k = delta2k;
  out.rho = rho;
  out.alpha = static_cast<double>(alpha);
  out.beta = static_cast<double>(beta);
  // alpha < 1  <=>  (1 + sqrt2) delta + sqrt2 rho < 1, evaluated without the division.
  out.admissible = (1.0L + kSqrt2) * d + kSqrt2 * r < 1.0L;
  if (out.admissible) {
    out.c0 = static_cast<double>(4.0L * alpha / (1.0L - alpha) + 2.0L);
    out.c1 = static_cast<double>(2.0L * beta / (1.0L - alpha));
  } else {
    out.c0 = std::numeric_limits<double>::infinity();
    out.c1 = std::numeric_limits<double>::infinity();
  }
  out.printed_c0 = printed_c0(delta2k);
  out.printed_c1 = printed_c1(delta2k);
  return out;
}

} // namespace cosparse
