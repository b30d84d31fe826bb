#include "cosparse/bench.hpp"
#include "cosparse/solvers.hpp"
#include "cosparse/verify.hpp"

#include <Eigen/SVD>
#include <nlohmann/json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <unistd.h>

using namespace cosparse;
using namespace cosparse::bench;
using nlohmann::json;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double summary_value(CampaignResult const &c, std::string const &key) {
  for (auto const &[k, v] : c.summary) {
    if (k == key) { return v; }
  }
  throw Error("summary key missing: " + key);
}

CampaignResult campaign(json doc) { return execute(parse_config(doc), worker_count()); }

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

// Extreme squared singular values over every k-column submatrix of Phi.
double classical_rip(Matrix const &phi, Index k) {
  Index const n = phi.cols();
  std::vector<Index> subset(static_cast<std::size_t>(k));
  std::iota(subset.begin(), subset.end(), Index{0});
  double worst = 0.0;
  while (true) {
    Matrix cols(phi.rows(), k);
    for (Index j = 0; j < k; ++j) { cols.col(j) = phi.col(subset[static_cast<std::size_t>(j)]); }
    Eigen::JacobiSVD<Matrix> svd(cols);
    Vector const s = svd.singularValues();
    double const smin = k > phi.rows() ? 0.0 : s(k - 1);
    worst = std::max({worst, s(0) * s(0) - 1.0, 1.0 - smin * smin});
    Index i = k - 1;
    while (i >= 0 && subset[static_cast<std::size_t>(i)] == n - k + i) { --i; }
    if (i < 0) { break; }
    ++subset[static_cast<std::size_t>(i)];
    for (Index j = i + 1; j < k; ++j) { subset[static_cast<std::size_t>(j)] = subset[static_cast<std::size_t>(j - 1)] + 1; }
  }
  return worst;
}

Outcome c1_classical_rip() {
  Dictionary const id = make_dictionary(DictionaryKind::identity, 8, 8, 0);
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    SensingMatrix const phi = make_sensing_matrix(SensingKind::gaussian, 5, 8, seed);
    for (Index k = 1; k <= 2; ++k) {
      worst = std::max(worst, std::abs(delta_exact(phi, id, k).delta - classical_rip(phi.entries(), k)));
    }
  }
  return {worst <= 1e-10, "max |delta - classical| = " + fmt(worst) + " over 5 seeds, k in {1,2}"};
}

Outcome c2_monte_carlo() {
  constexpr DictionaryKind kinds[] = {DictionaryKind::identity, DictionaryKind::orthogonal,
                                      DictionaryKind::finite_difference, DictionaryKind::tight_frame,
                                      DictionaryKind::gaussian_random};
  int violations = 0;
  int mismatches = 0;
  for (std::uint64_t i = 0; i < 50; ++i) {
    Rng rng(derive_seed(i, "c2"));
    DictionaryKind const kind = kinds[i % 5];
    Index const n = std::uniform_int_distribution<Index>(4, 8)(rng);
    bool const square = kind == DictionaryKind::identity || kind == DictionaryKind::orthogonal ||
                        kind == DictionaryKind::finite_difference;
    Index const p = square ? n : std::uniform_int_distribution<Index>(n + 1, 12)(rng);
    Index const k = std::uniform_int_distribution<Index>(1, 3)(rng);
    Index const m = std::uniform_int_distribution<Index>(2, n - 1)(rng);
    Dictionary const d = make_dictionary(kind, p, n, i);
    SensingMatrix const phi = make_sensing_matrix(i % 2 ? SensingKind::bernoulli : SensingKind::gaussian, m, n, i);
    SubspaceFamily const family = i % 3 == 0 ? SubspaceFamily::chunk_span : SubspaceFamily::cosparse;
    double const exact = delta_exact(phi, d, k, family).delta;
    if (delta_monte_carlo(phi, d, k, 7, i, family).delta > exact) { ++violations; }
    if (delta_monte_carlo(phi, d, k, binomial(p, k), i, family).delta != exact) { ++mismatches; }
  }
  return {violations == 0 && mismatches == 0,
          std::to_string(violations) + " mc > exact, " + std::to_string(mismatches) + " exhaustive mismatches / 50"};
}

Outcome c3_constants() {
  double worst = 0.0;
  bool grid_admissible = true;
  for (int i = 0; i <= 41; ++i) {
    double const d = 0.01 * i;
    long double const s2 = std::sqrt(2.0L);
    long double const alpha = s2 * d / (1.0L - d);
    long double const proof = 4.0L * alpha / (1.0L - alpha) + 2.0L;
    long double const printed = 2.0L * (1.0L - (1.0L - s2) * d) / (1.0L - (1.0L + s2) * d);
    BoundConstants const c = bound_constants(d, 0.0);
    worst = std::max({worst, static_cast<double>(std::abs(proof - printed)), static_cast<double>(std::abs(c.c0 - printed)),
                      static_cast<double>(std::abs(c.printed_c0 - printed))});
    grid_admissible = grid_admissible && c.admissible;
  }
  double const edge = std::sqrt(2.0) - 1.0;
  bool const flips = bound_constants(edge - 1e-12, 0.0).admissible && !bound_constants(edge + 1e-12, 0.0).admissible;
  return {worst <= 1e-12 && grid_admissible && flips,
          "max C0 diff = " + fmt(worst) + ", flip at sqrt2-1: " + (flips ? "yes" : "no")};
}

Outcome verify_campaigns(std::vector<json> const &docs, long expected_rows) {
  long rows = 0;
  long hypothesis = 0;
  double min_slack = std::numeric_limits<double>::infinity();
  double violations = 0.0;
  for (json const &doc : docs) {
    CampaignResult const c = campaign(doc);
    rows += static_cast<long>(c.rows.size());
    hypothesis += static_cast<long>(summary_value(c, "hypothesis_rows"));
    violations += summary_value(c, "violations");
    min_slack = std::min(min_slack, summary_value(c, "min_slack"));
  }
  return {rows == expected_rows && hypothesis == rows && violations == 0.0 && min_slack >= -1e-8,
          std::to_string(rows) + " trials, " + std::to_string(hypothesis) + " with hypothesis, min slack " +
              fmt(min_slack)};
}

Outcome c4_corollary1() {
  return verify_campaigns(
      {json{{"experiment", "verify-c1"}, {"dims", {{"m", 8}, {"n", 10}, {"p", 14}}}, {"k", 2},
            {"dictionary_kind", "tight-frame"}, {"matrix_kind", "gaussian"}, {"trials", 500}, {"seed", 41},
            {"output_path", "unused"}},
       json{{"experiment", "verify-c1"}, {"dims", {{"m", 8}, {"n", 10}, {"p", 14}}}, {"k", 2},
            {"dictionary_kind", "gaussian-random"}, {"matrix_kind", "partial-orthogonal"}, {"trials", 500},
            {"seed", 42}, {"output_path", "unused"}}},
      1000);
}

Outcome c5_corollary2() {
  return verify_campaigns(
      {json{{"experiment", "verify-c2"}, {"dims", {{"m", 9}, {"n", 10}, {"p", 12}}}, {"k", 2},
            {"dictionary_kind", "tight-frame"}, {"matrix_kind", "partial-orthogonal"}, {"trials", 250}, {"seed", 51},
            {"output_path", "unused"}},
       json{{"experiment", "verify-c2"}, {"dims", {{"m", 8}, {"n", 10}, {"p", 10}}}, {"k", 2},
            {"dictionary_kind", "orthogonal"}, {"matrix_kind", "partial-orthogonal"}, {"adapted_sensing", true},
            {"trials", 250}, {"seed", 52}, {"output_path", "unused"}}},
      500);
}

Outcome c6_exact_recovery() {
  Index const n = 10;
  Index const k = 2;
  double const edge = std::sqrt(2.0) - 1.0;
  double worst = 0.0;
  int certified = 0;
  for (std::uint64_t trial = 0; trial < 100; ++trial) {
    std::uint64_t const seed = trial_seed(61, static_cast<long>(trial));
    for (std::uint64_t attempt = 0; attempt < 50; ++attempt) {
      std::uint64_t const s = splitmix64(seed, attempt);
      Dictionary const d = make_dictionary(DictionaryKind::orthogonal, n, n, s);
      SensingMatrix const phi = make_adapted_sensing(SensingKind::partial_orthogonal, 9, d, s);
      VerifyConstants const c = exact_constants(phi, d, k);
      if (!(c.exact && c.delta2k < edge)) { continue; }
      ++certified;
      Vector const x = sample_cosparse_signal(d, k, s);
      RecoveryResult const r = solve_analysis_l1(phi, d, ConstraintSpec::equality(phi.apply(x)));
      worst = std::max(worst, (r.x_hat - x).norm());
      break;
    }
  }
  return {certified == 100 && worst <= 1e-6,
          std::to_string(certified) + " certified instances, max error " + fmt(worst)};
}

Outcome c7_theorem1() {
  json const base{{"experiment", "verify-t1"}, {"dims", {{"m", 9}, {"n", 10}, {"p", 10}}}, {"k", 2},
                  {"dictionary_kind", "orthogonal"}, {"matrix_kind", "partial-orthogonal"},
                  {"adapted_sensing", true}, {"signal", {{"kind", "compressible"}, {"decay", 1.5}}},
                  {"output_path", "unused"}};
  json equality = base;
  equality["trials"] = 100;
  equality["seed"] = 71;
  json noisy = base;
  noisy["trials"] = 100;
  noisy["seed"] = 72;
  noisy["constraint"] = {{"kind", "l2-ball"}, {"epsilon", 0.05}, {"noise", 0.04}};
  return verify_campaigns({equality, noisy}, 200);
}

Outcome c8_p1p2() {
  CampaignResult const ortho = campaign(json{{"experiment", "p1p2"}, {"dims", {{"m", 6}, {"n", 10}, {"p", 10}}},
                                             {"k", 2}, {"dictionary_kind", "orthogonal"}, {"trials", 50},
                                             {"seed", 81}, {"output_path", "unused"}});
  CampaignResult const redundant = campaign(json{{"experiment", "p1p2"}, {"dims", {{"m", 6}, {"n", 8}, {"p", 12}}},
                                                 {"k", 5}, {"dictionary_kind", "gaussian-random"}, {"trials", 10},
                                                 {"seed", 82}, {"output_path", "unused"}});
  double const same = summary_value(ortho, "max_distance");
  double const apart = summary_value(redundant, "max_distance");
  return {same <= 1e-6 && apart > 1e-3 && !ortho.nonconvergence,
          "orthogonal max distance " + fmt(same) + ", redundant max distance " + fmt(apart)};
}

Outcome c9_certification() {
  constexpr DictionaryKind kinds[] = {DictionaryKind::identity, DictionaryKind::finite_difference,
                                      DictionaryKind::tight_frame, DictionaryKind::gaussian_random};
  double worst = 0.0;
  int skipped = 0;
  for (std::uint64_t i = 0; i < 30; ++i) {
    DictionaryKind const kind = kinds[i % 4];
    Index const n = 8;
    Index const p = i % 4 < 2 ? n : 11;
    Dictionary const d = make_dictionary(kind, p, n, i);
    SensingMatrix const phi = make_sensing_matrix(i % 2 ? SensingKind::bernoulli : SensingKind::gaussian, 5, n, i);
    Rng rng(i);
    ConstraintSpec const con = ConstraintSpec::equality(phi.apply(gaussian_vector(n, rng)));
    RecoveryResult const fo = solve_analysis_l1(phi, d, con);
    RecoveryResult const lp = solve_lp_certified(phi, d, con);
    if (!fo.converged) { ++skipped; }
    worst = std::max(worst, std::abs(lp.objective - fo.objective));
  }
  return {worst <= 1e-6 && skipped == 0,
          "max |obj_LP - obj_FO| = " + fmt(worst) + " over 30 instances, " + std::to_string(skipped) + " unconverged"};
}

std::string slurp(std::filesystem::path const &path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome c10_reproducibility() {
  auto const root = std::filesystem::temp_directory_path() / ("cosparse-acceptance-" + std::to_string(::getpid()));
  std::vector<json> const docs{
      {{"experiment", "phase"}, {"dims", {{"n", 10}, {"p", 10}}}, {"k", 1}, {"dictionary_kind", "identity"},
       {"m_grid", {3, 5, 7}}, {"trials", 10}, {"seed", 101}},
      {{"experiment", "verify-c2"}, {"dims", {{"m", 9}, {"n", 10}, {"p", 12}}}, {"k", 2},
       {"dictionary_kind", "tight-frame"}, {"matrix_kind", "partial-orthogonal"}, {"trials", 20}, {"seed", 102}},
      {{"experiment", "grip"}, {"dims", {{"m", 6}, {"n", 8}, {"p", 11}}}, {"k", 2},
       {"dictionary_kind", "gaussian-random"}, {"mc_trials", 20}, {"trials", 3}, {"seed", 103}}};
  bool same = true;
  std::string detail;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    std::string first;
    for (int rep = 0; rep < 2; ++rep) {
      json doc = docs[i];
      doc["output_path"] = (root / (std::to_string(i) + "-" + std::to_string(rep))).string();
      run(parse_config(doc));
      std::string const bytes = slurp(std::filesystem::path(doc["output_path"].get<std::string>()) / "results.csv");
      if (rep == 0) {
        first = bytes;
      } else if (bytes != first || bytes.empty()) {
        same = false;
        detail += " " + docs[i]["experiment"].get<std::string>();
      }
    }
  }
  std::filesystem::remove_all(root);
  return {same, same ? "3 campaigns re-run byte-identical" : "differs:" + detail};
}

struct Criterion {
  int id;
  char const *name;
  double limit_seconds;
  std::function<Outcome()> body;
};

} // namespace

int main() {
  std::vector<Criterion> const criteria{
      {1, "classical RIP reduction", 5, c1_classical_rip},
      {2, "Monte Carlo soundness", 30, c2_monte_carlo},
      {3, "constant algebra", 0, c3_constants},
      {4, "pairwise inner-product bound", 120, c4_corollary1},
      {5, "chunk energy bound", 120, c5_corollary2},
      {6, "exact recovery of cosparse signals", 120, c6_exact_recovery},
      {7, "recovery error bound", 180, c7_theorem1},
      {8, "analysis vs synthesis", 0, c8_p1p2},
      {9, "LP cross-certification", 0, c9_certification},
      {10, "reproducibility", 0, c10_reproducibility},
  };
  int failures = 0;
  for (Criterion const &c : criteria) {
    auto const start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.body();
    } catch (std::exception const &e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    double const seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.limit_seconds > 0 && seconds >= c.limit_seconds) {
      out.pass = false;
      out.detail += " (over " + fmt(c.limit_seconds) + " s limit)";
    }
    std::printf("%s C%d %s: %s [%.2f s]\n", out.pass ? "PASS" : "FAIL", c.id, c.name, out.detail.c_str(), seconds);
    std::fflush(stdout);
    failures += out.pass ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
