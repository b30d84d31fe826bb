#include "cosparse/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <functional>
#include <numeric>
#include <thread>

namespace cosparse::bench {

namespace {

using nlohmann::json;

constexpr double kPhaseSuccess = 1e-5;

struct TrialOutput {
  Row row;
  json record;
  bool violation = false;
  bool nonconverged = false;
};

struct Task {
  long trial;
  std::uint64_t seed;
  std::function<TrialOutput()> body;
};

std::vector<Index> random_permutation(Index p, Rng &rng) {
  std::vector<Index> perm(static_cast<std::size_t>(p));
  std::iota(perm.begin(), perm.end(), Index{0});
  std::shuffle(perm.begin(), perm.end(), rng);
  return perm;
}

SupportSet sorted_support(std::vector<Index> indices, Index p) {
  std::sort(indices.begin(), indices.end());
  return SupportSet(std::move(indices), p);
}

SupportSet random_support(Index size, Index p, Rng &rng) {
  std::vector<Index> perm = random_permutation(p, rng);
  perm.resize(static_cast<std::size_t>(size));
  return sorted_support(std::move(perm), p);
}

Index uniform_index(Index lo, Index hi, Rng &rng) {
  return std::uniform_int_distribution<Index>(lo, hi)(rng);
}

struct Instance {
  Dictionary dictionary;
  SensingMatrix phi;
};

Instance draw_instance(ExperimentConfig const &c, Index m, std::uint64_t seed) {
  Dictionary d = make_dictionary(c.dictionary_kind, c.p, c.n, derive_seed(seed, "dictionary"));
  SensingMatrix phi = c.adapted_sensing ? make_adapted_sensing(c.matrix_kind, m, d, derive_seed(seed, "phi"))
                                        : make_sensing_matrix(c.matrix_kind, m, c.n, derive_seed(seed, "phi"));
  return {std::move(d), std::move(phi)};
}

Vector draw_signal(ExperimentConfig const &c, Dictionary const &d, std::uint64_t seed) {
  if (c.signal == SignalKind::cosparse) { return sample_cosparse_signal(d, c.k, derive_seed(seed, "signal")); }
  return sample_compressible_signal(d, c.decay, derive_seed(seed, "signal"));
}

Vector draw_noise(Index m, double norm, std::uint64_t seed) {
  if (norm == 0.0) { return Vector::Zero(m); }
  Rng rng(derive_seed(seed, "noise"));
  Vector e = gaussian_vector(m, rng);
  return e * (norm / e.norm());
}

SolverOptions solver_options(ExperimentConfig const &c) {
  SolverOptions o;
  o.tol = c.solver_tol;
  o.max_iters = c.solver_max_iters;
  o.lp_max_variables = c.lp_max_variables;
  return o;
}

ConstraintSpec constraint_for(ExperimentConfig const &c, Vector y) {
  switch (c.constraint_kind) {
  case ConstraintKind::equality:
    return ConstraintSpec::equality(std::move(y));
  case ConstraintKind::l2_ball:
    return ConstraintSpec::l2_ball(std::move(y), c.epsilon);
  case ConstraintKind::dantzig:
    return ConstraintSpec::dantzig(std::move(y), c.lambda);
  }
  throw InvalidArgument("unknown constraint kind");
}

json report_record(long trial, std::uint64_t seed, BoundReport const &r) {
  json j = to_json(r);
  j["trial"] = trial;
  j["seed"] = seed;
  return j;
}

// Redraws (D, Phi) until `accept` holds or the attempt budget runs out. The
// first attempt uses the trial seed itself.
template <typename Accept>
std::pair<Instance, VerifyConstants> admissible_instance(ExperimentConfig const &c, std::uint64_t seed,
                                                         Accept accept, bool &found) {
  found = false;
  std::optional<std::pair<Instance, VerifyConstants>> last;
  for (long a = 0; a < c.max_attempts; ++a) {
    std::uint64_t const s = a == 0 ? seed : splitmix64(seed, static_cast<std::uint64_t>(a));
    Instance inst = draw_instance(c, c.m, s);
    VerifyConstants vc = exact_constants(inst.phi, inst.dictionary, c.k, c.budget);
    bool const ok = accept(vc);
    last.emplace(std::move(inst), vc);
    if (ok) {
      found = true;
      break;
    }
  }
  return std::move(*last);
}

std::vector<std::string> columns_for(ExperimentConfig const &c) {
  switch (c.experiment) {
  case Experiment::grip: {
    std::vector<std::string> cols{"trial", "seed", "delta", "lambda_min", "lambda_max", "worst_support",
                                  "supports_examined", "nontrivial_supports"};
    if (c.mc_trials > 0) {
      cols.push_back("mc_delta");
      cols.push_back("mc_supports");
    }
    return cols;
  }
  case Experiment::rho:
    return {"trial", "seed", "rho", "witness_i", "witness_j"};
  case Experiment::solve:
    return {"trial",           "seed",          "err_l2",    "objective", "true_objective",   "iterations",
            "primal_residual", "dual_residual", "converged", "certified", "certification_gap"};
  case Experiment::verify_c1:
    return {"trial", "seed", "lhs", "rhs", "slack", "hypothesis_ok", "delta2k", "rho"};
  case Experiment::verify_c2:
    return {"trial", "seed", "lhs", "rhs", "slack", "hypothesis_ok", "delta2k", "rho", "alpha", "beta"};
  case Experiment::verify_t1:
    return {"trial", "seed", "lhs", "rhs", "slack", "hypothesis_ok", "delta2k", "rho", "c0", "c1"};
  case Experiment::phase:
    return {"trial", "seed", "m", "success", "err_l2", "objective", "iterations"};
  case Experiment::p1p2:
    return {"trial", "seed", "distance", "objective_p1", "objective_p2", "converged"};
  }
  return {};
}

TrialOutput grip_trial(ExperimentConfig const &c, long trial, std::uint64_t seed) {
  Instance const inst = draw_instance(c, c.m, seed);
  GripReport const g = delta_exact(inst.phi, inst.dictionary, c.k, c.subspace, c.budget);
  TrialOutput out;
  out.row = {trial,
             seed,
             g.delta,
             g.eigen_range.first,
             g.eigen_range.second,
             g.worst_support.to_string(),
             g.supports_examined,
             g.nontrivial_supports};
  out.record = to_json(g);
  if (c.mc_trials > 0) {
    GripReport const mc =
        delta_monte_carlo(inst.phi, inst.dictionary, c.k, c.mc_trials, derive_seed(seed, "monte-carlo"), c.subspace);
    out.row.push_back(mc.delta);
    out.row.push_back(mc.supports_examined);
    out.record["monte_carlo"] = to_json(mc);
  }
  return out;
}

TrialOutput rho_trial(ExperimentConfig const &c, long trial, std::uint64_t seed) {
  Dictionary const d = make_dictionary(c.dictionary_kind, c.p, c.n, derive_seed(seed, "dictionary"));
  RhoEstimate const r = rho_exact(d, c.k, c.budget);
  TrialOutput out;
  out.row = {trial, seed, r.rho, r.witness.first.to_string(), r.witness.second.to_string()};
  out.record = to_json(r);
  return out;
}

TrialOutput solve_trial(ExperimentConfig const &c, long trial, std::uint64_t seed) {
  Instance const inst = draw_instance(c, c.m, seed);
  Vector const x = draw_signal(c, inst.dictionary, seed);
  Vector const y = inst.phi.apply(x) + draw_noise(c.m, c.noise, seed);
  ConstraintSpec const con = constraint_for(c, y);
  RecoveryResult r;
  if (c.constraint_kind == ConstraintKind::dantzig) {
    r = solve_lp_certified(inst.phi, inst.dictionary, con, c.lp_max_variables);
  } else {
    SolverOptions o = solver_options(c);
    o.certify = c.certify;
    r = solve_analysis_l1(inst.phi, inst.dictionary, con, o);
  }
  TrialOutput out;
  out.row = {trial,
             seed,
             (r.x_hat - x).norm(),
             r.objective,
             inst.dictionary.apply(x).lpNorm<1>(),
             r.iterations,
             r.primal_residual,
             r.dual_residual,
             r.converged,
             r.certified,
             r.certification_gap.value_or(std::nan(""))};
  out.record = to_json(r);
  out.nonconverged = !r.converged;
  return out;
}

TrialOutput verify_c1_trial(ExperimentConfig const &c, long trial, std::uint64_t seed) {
  Instance const inst = draw_instance(c, c.m, seed);
  VerifyConstants const vc = exact_constants(inst.phi, inst.dictionary, c.k, c.budget);
  Rng rng(derive_seed(seed, "chunks"));
  Index const si = uniform_index(1, c.k, rng);
  Index const sj = uniform_index(1, std::min(c.k, c.p - si), rng);
  std::vector<Index> const perm = random_permutation(c.p, rng);
  SupportSet const li = sorted_support({perm.begin(), perm.begin() + si}, c.p);
  SupportSet const lj = sorted_support({perm.begin() + si, perm.begin() + si + sj}, c.p);
  Matrix const &pinv = inst.dictionary.pseudo_inverse();
  Chunk const ci{li, pinv * mask(gaussian_vector(c.p, rng), li)};
  Chunk const cj{lj, pinv * mask(gaussian_vector(c.p, rng), lj)};
  BoundReport const r = check_corollary1(inst.phi, inst.dictionary, c.k, ci, cj, vc);
  TrialOutput out;
  out.row = {trial, seed, r.lhs, r.rhs, r.slack, r.hypothesis_ok, vc.delta2k, vc.rho};
  out.record = report_record(trial, seed, r);
  out.violation = r.hypothesis_ok && !r.holds();
  return out;
}

TrialOutput verify_c2_trial(ExperimentConfig const &c, long trial, std::uint64_t seed) {
  bool found = false;
  auto const [inst, vc] =
      admissible_instance(c, seed, [](VerifyConstants const &v) { return v.delta2k < 1.0; }, found);
  Rng rng(derive_seed(seed, "perturbation"));
  Vector h;
  if (trial % 2 == 1 && inst.phi.undersampled()) {
    Matrix const null = orthonormal_null_space(inst.phi.entries());
    h = null * gaussian_vector(null.cols(), rng);
  } else {
    h = gaussian_vector(c.n, rng);
  }
  SupportSet const lambda0 = random_support(uniform_index(0, c.k, rng), c.p, rng);
  BoundReport const r = check_corollary2(inst.phi, inst.dictionary, c.k, h, lambda0, vc);
  TrialOutput out;
  out.row = {trial, seed, r.lhs, r.rhs, r.slack, r.hypothesis_ok,
             vc.delta2k, vc.rho, r.constants.alpha, r.constants.beta};
  out.record = report_record(trial, seed, r);
  out.violation = r.hypothesis_ok && !r.holds();
  return out;
}

TrialOutput verify_t1_trial(ExperimentConfig const &c, long trial, std::uint64_t seed) {
  bool found = false;
  auto const [inst, vc] = admissible_instance(
      c, seed,
      [&](VerifyConstants const &v) {
        return v.delta2k < 1.0 && bound_constants(v.delta2k, c.rho_mode == RhoMode::printed ? 0.0 : v.rho).admissible;
      },
      found);
  if (!found) {
    throw InadmissibleConstants("no admissible instance within " + std::to_string(c.max_attempts) +
                                " draws (last delta2k=" + format_double(vc.delta2k) + ", rho=" + format_double(vc.rho) +
                                ")");
  }
  Vector const x = draw_signal(c, inst.dictionary, seed);
  Vector const y = inst.phi.apply(x) + draw_noise(c.m, c.noise, seed);
  RecoveryResult const sol = solve_analysis_l1(inst.phi, inst.dictionary, constraint_for(c, y), solver_options(c));
  BoundReport const r = check_theorem1(inst.phi, inst.dictionary, c.k, x, sol.x_hat, vc, c.rho_mode);
  TrialOutput out;
  out.row = {trial, seed, r.lhs, r.rhs, r.slack, r.hypothesis_ok,
             vc.delta2k, vc.rho, r.constants.c0, r.constants.c1};
  out.record = report_record(trial, seed, r);
  out.record["solver"] = to_json(sol);
  out.violation = r.hypothesis_ok && !r.holds();
  out.nonconverged = !sol.converged;
  return out;
}

TrialOutput phase_trial(ExperimentConfig const &c, long trial, std::uint64_t seed, Index m) {
  // Dictionary and signal depend on the trial only, so every m sees the same x.
  Instance const inst = draw_instance(c, m, seed);
  Vector const x = draw_signal(c, inst.dictionary, seed);
  Vector const y = inst.phi.apply(x) + draw_noise(m, c.noise, seed);
  RecoveryResult const r = solve_analysis_l1(inst.phi, inst.dictionary, constraint_for(c, y), solver_options(c));
  double const err = (r.x_hat - x).norm();
  TrialOutput out;
  out.row = {trial, seed, static_cast<long>(m), err <= kPhaseSuccess, err, r.objective, r.iterations};
  out.record = to_json(r);
  out.nonconverged = !r.converged;
  return out;
}

TrialOutput p1p2_trial(ExperimentConfig const &c, long trial, std::uint64_t seed) {
  Instance const inst = draw_instance(c, c.m, seed);
  Vector const x = draw_signal(c, inst.dictionary, seed);
  Vector const y = inst.phi.apply(x) + draw_noise(c.m, c.noise, seed);
  ConstraintSpec const con = constraint_for(c, y);
  RecoveryResult const p2 = solve_analysis_l1(inst.phi, inst.dictionary, con, solver_options(c));
  RecoveryResult const p1 = solve_synthesis_l1(inst.phi, inst.dictionary, con, solver_options(c));
  TrialOutput out;
  bool const converged = p1.converged && p2.converged;
  out.row = {trial, seed, (p1.x_hat - p2.x_hat).norm(), p1.objective, p2.objective, converged};
  out.record = {{"p1", to_json(p1)}, {"p2", to_json(p2)}};
  out.nonconverged = !converged;
  return out;
}

std::vector<Task> build_tasks(ExperimentConfig const &c) {
  std::vector<Task> tasks;
  auto add = [&](long trial, std::function<TrialOutput(long, std::uint64_t)> f) {
    std::uint64_t const s = trial_seed(c.seed, trial);
    tasks.push_back({trial, s, [f, trial, s] { return f(trial, s); }});
  };
  using std::placeholders::_1;
  using std::placeholders::_2;
  if (c.experiment == Experiment::phase) {
    for (Index m : c.m_grid) {
      for (long t = 0; t < c.trials; ++t) {
        add(t, [&c, m](long trial, std::uint64_t s) { return phase_trial(c, trial, s, m); });
      }
    }
    return tasks;
  }
  std::function<TrialOutput(ExperimentConfig const &, long, std::uint64_t)> body;
  switch (c.experiment) {
  case Experiment::grip:
    body = grip_trial;
    break;
  case Experiment::rho:
    body = rho_trial;
    break;
  case Experiment::solve:
    body = solve_trial;
    break;
  case Experiment::verify_c1:
    body = verify_c1_trial;
    break;
  case Experiment::verify_c2:
    body = verify_c2_trial;
    break;
  case Experiment::verify_t1:
    body = verify_t1_trial;
    break;
  case Experiment::phase:
  case Experiment::p1p2:
    body = p1p2_trial;
    break;
  }
  for (long t = 0; t < c.trials; ++t) { add(t, std::bind(body, std::cref(c), _1, _2)); }
  return tasks;
}

} // namespace

std::uint64_t trial_seed(std::uint64_t campaign_seed, long trial_index) {
  return splitmix64(campaign_seed, static_cast<std::uint64_t>(trial_index));
}

int worker_count() {
  if (char const *env = std::getenv("COSPARSE_WORKERS")) {
    char *end = nullptr;
    long const v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) { return static_cast<int>(std::min(v, 256L)); }
  }
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

CampaignResult execute(ExperimentConfig const &config, int workers, CampaignResult *partial) {
  validate(config);
  auto const start = std::chrono::steady_clock::now();
  std::vector<Task> const tasks = build_tasks(config);
  std::size_t const count = tasks.size();
  std::vector<std::optional<TrialOutput>> outputs(count);
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};

  auto worker = [&] {
    for (;;) {
      std::size_t const i = next.fetch_add(1);
      if (i >= count || stop.load()) { return; }
      try {
        outputs[i] = tasks[i].body();
      } catch (...) {
        errors[i] = std::current_exception();
        stop.store(true);
      }
    }
  };
  int const nthreads = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(std::max(workers, 1)), count));
  if (nthreads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t) { pool.emplace_back(worker); }
    for (auto &th : pool) { th.join(); }
  }

  CampaignResult result;
  result.config = config;
  result.columns = columns_for(config);
  for (std::size_t i = 0; i < count; ++i) {
    if (errors[i]) {
      result.summary = summarize(config.experiment, result.columns, result.rows);
      result.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      if (partial) { *partial = result; }
      std::string what = "unknown error";
      try {
        std::rethrow_exception(errors[i]);
      } catch (std::exception const &e) {
        what = e.what();
      } catch (...) {
      }
      throw TrialError("trial " + std::to_string(tasks[i].trial) + " (seed " + std::to_string(tasks[i].seed) +
                           "): " + what,
                       tasks[i].trial, tasks[i].seed);
    }
    if (!outputs[i]) { break; }
    TrialOutput &o = *outputs[i];
    result.rows.push_back(std::move(o.row));
    result.records.push_back(std::move(o.record));
    result.bound_violation = result.bound_violation || o.violation;
    result.nonconvergence = result.nonconvergence || o.nonconverged;
  }
  result.summary = summarize(config.experiment, result.columns, result.rows);
  result.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

CampaignResult run(ExperimentConfig const &config) {
  CampaignResult partial;
  try {
    CampaignResult result = execute(config, worker_count(), &partial);
    write_outputs(result, config.output_path);
    return result;
  } catch (TrialError const &) {
    write_outputs(partial, config.output_path);
    throw;
  }
}

int exit_status(CampaignResult const &campaign) {
  if (campaign.bound_violation) { return 3; }
  if (campaign.nonconvergence) { return 4; }
  return 0;
}

} // namespace cosparse::bench
