#include "cosparse/bench.hpp"

#include <fstream>
#include <set>

namespace cosparse::bench {

namespace {

struct ExperimentName {
  Experiment e;
  std::string_view name;
};

constexpr ExperimentName kExperiments[] = {
    {Experiment::grip, "grip"},           {Experiment::rho, "rho"},
    {Experiment::solve, "solve"},         {Experiment::verify_c1, "verify-c1"},
    {Experiment::verify_c2, "verify-c2"}, {Experiment::verify_t1, "verify-t1"},
    {Experiment::phase, "phase"},         {Experiment::p1p2, "p1p2"},
};

using nlohmann::json;

void reject_unknown(json const &obj, std::string const &where, std::set<std::string> const &allowed) {
  if (!obj.is_object()) { throw ConfigError(where + ": expected a JSON object"); }
  for (auto const &[key, _] : obj.items()) {
    if (!allowed.count(key)) { throw ConfigError(where + ": unknown key '" + key + "'"); }
  }
}

template <typename T> T get(json const &obj, char const *key, std::string const &where, T fallback) {
  if (!obj.contains(key)) { return fallback; }
  try {
    return obj.at(key).get<T>();
  } catch (json::exception const &) {
    throw ConfigError(where + "." + key + ": wrong type");
  }
}

Index get_index(json const &obj, char const *key, std::string const &where, Index fallback) {
  if (!obj.contains(key)) { return fallback; }
  if (!obj.at(key).is_number_integer()) { throw ConfigError(where + "." + key + ": expected an integer"); }
  return obj.at(key).get<Index>();
}

template <typename F> auto wrap(std::string const &field, F &&f) {
  try {
    return f();
  } catch (InvalidArgument const &e) {
    throw ConfigError(field + ": " + e.what());
  }
}

bool needs_signal(Experiment e) {
  return e == Experiment::solve || e == Experiment::verify_t1 || e == Experiment::phase || e == Experiment::p1p2;
}

} // namespace

std::string_view to_string(Experiment e) {
  for (auto const &x : kExperiments) {
    if (x.e == e) { return x.name; }
  }
  return "unknown";
}

Experiment parse_experiment(std::string_view text) {
  for (auto const &x : kExperiments) {
    if (x.name == text) { return x.e; }
  }
  throw ConfigError("experiment: unknown experiment '" + std::string(text) + "'");
}

ExperimentConfig parse_config(json const &doc, std::optional<Experiment> experiment) {
  reject_unknown(doc, "config",
                 {"experiment", "dims", "k", "dictionary_kind", "matrix_kind", "adapted_sensing", "constraint",
                  "trials", "seed", "output_path", "budget", "m_grid", "signal", "subspace", "mc_trials",
                  "rho_mode", "certify", "solver"});
  ExperimentConfig c;
  if (doc.contains("experiment")) {
    c.experiment = parse_experiment(get<std::string>(doc, "experiment", "config", ""));
    if (experiment && *experiment != c.experiment) {
      throw ConfigError("experiment: command line says '" + std::string(to_string(*experiment)) +
                        "' but the config says '" + std::string(to_string(c.experiment)) + "'");
    }
  } else if (experiment) {
    c.experiment = *experiment;
  } else {
    throw ConfigError("experiment: missing");
  }

  if (!doc.contains("dims")) { throw ConfigError("dims: missing"); }
  json const &dims = doc.at("dims");
  reject_unknown(dims, "dims", {"m", "n", "p"});
  c.n = get_index(dims, "n", "dims", 0);
  c.p = get_index(dims, "p", "dims", c.n);
  c.m = get_index(dims, "m", "dims", 0);
  c.k = get_index(doc, "k", "config", 1);

  c.dictionary_kind = wrap("dictionary_kind", [&] {
    return parse_dictionary_kind(get<std::string>(doc, "dictionary_kind", "config", "gaussian-random"));
  });
  c.matrix_kind =
      wrap("matrix_kind", [&] { return parse_sensing_kind(get<std::string>(doc, "matrix_kind", "config", "gaussian")); });
  c.adapted_sensing = get<bool>(doc, "adapted_sensing", "config", false);

  if (doc.contains("constraint")) {
    json const &con = doc.at("constraint");
    reject_unknown(con, "constraint", {"kind", "epsilon", "lambda", "noise"});
    c.constraint_kind =
        wrap("constraint.kind", [&] { return parse_constraint_kind(get<std::string>(con, "kind", "constraint", "equality")); });
    c.epsilon = get<double>(con, "epsilon", "constraint", 0.0);
    c.lambda = get<double>(con, "lambda", "constraint", 0.0);
    c.noise = get<double>(con, "noise", "constraint", 0.0);
  }

  c.trials = get<long>(doc, "trials", "config", 1);
  if (doc.contains("seed")) {
    if (!doc.at("seed").is_number_unsigned() && !doc.at("seed").is_number_integer()) {
      throw ConfigError("seed: expected a nonnegative integer");
    }
    if (doc.at("seed").is_number_integer() && doc.at("seed").get<long long>() < 0) {
      throw ConfigError("seed: expected a nonnegative integer");
    }
    c.seed = doc.at("seed").get<std::uint64_t>();
  }
  c.output_path = get<std::string>(doc, "output_path", "config", "out");

  if (doc.contains("budget")) {
    json const &b = doc.at("budget");
    reject_unknown(b, "budget", {"max_p", "max_k", "lp_max_variables", "max_attempts"});
    c.budget.max_p = get_index(b, "max_p", "budget", c.budget.max_p);
    c.budget.max_k = get_index(b, "max_k", "budget", c.budget.max_k);
    c.lp_max_variables = get<long>(b, "lp_max_variables", "budget", c.lp_max_variables);
    c.max_attempts = get<long>(b, "max_attempts", "budget", c.max_attempts);
  }
  if (doc.contains("m_grid")) {
    if (!doc.at("m_grid").is_array()) { throw ConfigError("m_grid: expected an array of integers"); }
    for (auto const &v : doc.at("m_grid")) {
      if (!v.is_number_integer()) { throw ConfigError("m_grid: expected an array of integers"); }
      c.m_grid.push_back(v.get<Index>());
    }
  }
  if (doc.contains("signal")) {
    json const &s = doc.at("signal");
    reject_unknown(s, "signal", {"kind", "decay"});
    std::string const kind = get<std::string>(s, "kind", "signal", "cosparse");
    if (kind == "cosparse") {
      c.signal = SignalKind::cosparse;
    } else if (kind == "compressible") {
      c.signal = SignalKind::compressible;
    } else {
      throw ConfigError("signal.kind: unknown signal kind '" + kind + "'");
    }
    c.decay = get<double>(s, "decay", "signal", c.decay);
  }
  c.subspace = wrap("subspace", [&] { return parse_subspace_family(get<std::string>(doc, "subspace", "config", "cosparse")); });
  c.mc_trials = get<long>(doc, "mc_trials", "config", 0);
  std::string const rho_mode = get<std::string>(doc, "rho_mode", "config", "exact");
  if (rho_mode == "exact") {
    c.rho_mode = RhoMode::exact;
  } else if (rho_mode == "printed") {
    c.rho_mode = RhoMode::printed;
  } else {
    throw ConfigError("rho_mode: expected 'exact' or 'printed'");
  }
  c.certify = get<bool>(doc, "certify", "config", false);
  if (doc.contains("solver")) {
    json const &s = doc.at("solver");
    reject_unknown(s, "solver", {"tol", "max_iters"});
    c.solver_tol = get<double>(s, "tol", "solver", c.solver_tol);
    c.solver_max_iters = get<long>(s, "max_iters", "solver", c.solver_max_iters);
  }
  validate(c);
  return c;
}

ExperimentConfig load_config(std::string const &path, std::optional<Experiment> experiment) {
  std::ifstream in(path);
  if (!in) { throw ConfigError("config: cannot open '" + path + "'"); }
  json doc;
  try {
    doc = json::parse(in);
  } catch (json::parse_error const &e) {
    throw ConfigError(std::string("config: parse error: ") + e.what());
  }
  return parse_config(doc, experiment);
}

void validate(ExperimentConfig const &c) {
  auto fail = [](std::string const &msg) { throw ConfigError(msg); };
  Experiment const e = c.experiment;
  if (c.n < 1) { fail("dims.n: must be >= 1"); }
  if (c.p < c.n) { fail("dims.p: must satisfy p >= n (p=" + std::to_string(c.p) + ", n=" + std::to_string(c.n) + ")"); }
  bool const square_kind = c.dictionary_kind == DictionaryKind::identity || c.dictionary_kind == DictionaryKind::orthogonal ||
                           c.dictionary_kind == DictionaryKind::finite_difference;
  if (square_kind && c.p != c.n) {
    fail("dictionary_kind: '" + std::string(cosparse::to_string(c.dictionary_kind)) + "' requires p == n");
  }
  if (c.dictionary_kind == DictionaryKind::user_supplied) { fail("dictionary_kind: user-supplied cannot be generated"); }
  if (c.matrix_kind == SensingKind::user_supplied) { fail("matrix_kind: user-supplied cannot be generated"); }
  if (c.trials < 1) { fail("trials: must be >= 1"); }
  if (c.output_path.empty()) { fail("output_path: must be non-empty"); }
  if (c.k < 1) { fail("k: must be >= 1"); }
  if (c.k >= c.p) { fail("k: must satisfy k < p"); }
  if (c.budget.max_p < 1 || c.budget.max_k < 1) { fail("budget: max_p and max_k must be >= 1"); }
  if (c.lp_max_variables < 1) { fail("budget.lp_max_variables: must be >= 1"); }
  if (c.max_attempts < 1) { fail("budget.max_attempts: must be >= 1"); }
  if (!(c.solver_tol > 0.0)) { fail("solver.tol: must be > 0"); }
  if (c.solver_max_iters < 1) { fail("solver.max_iters: must be >= 1"); }

  if (e == Experiment::phase) {
    if (c.m_grid.empty()) { fail("m_grid: phase experiments need a non-empty grid"); }
    for (Index m : c.m_grid) {
      if (m < 1 || m > c.n) { fail("m_grid: every entry must satisfy 1 <= m <= n"); }
    }
  } else if (e != Experiment::rho) {
    if (c.m < 1) { fail("dims.m: must be >= 1"); }
    if (c.m >= c.n) { fail("dims.m: must satisfy m < n (m=" + std::to_string(c.m) + ", n=" + std::to_string(c.n) + ")"); }
  }
  if (!c.m_grid.empty() && e != Experiment::phase) { fail("m_grid: only valid for phase experiments"); }

  switch (c.constraint_kind) {
  case ConstraintKind::equality:
    break;
  case ConstraintKind::l2_ball:
    if (!(c.epsilon > 0.0)) { fail("constraint.epsilon: l2-ball requires epsilon > 0"); }
    if (c.noise < 0.0 || c.noise > c.epsilon) { fail("constraint.noise: must lie in [0, epsilon]"); }
    break;
  case ConstraintKind::dantzig:
    if (!(c.lambda >= 0.0)) { fail("constraint.lambda: dantzig requires lambda >= 0"); }
    if (e != Experiment::solve) { fail("constraint.kind: dantzig is only available for the solve experiment"); }
    if (4 * c.n + 3 * c.p > c.lp_max_variables) { fail("budget.lp_max_variables: dantzig LP exceeds the variable budget"); }
    if (c.noise < 0.0) { fail("constraint.noise: must be >= 0"); }
    break;
  }
  if (c.constraint_kind != ConstraintKind::l2_ball && c.epsilon != 0.0) {
    fail("constraint.epsilon: only valid for l2-ball");
  }
  if (c.constraint_kind != ConstraintKind::dantzig && c.lambda != 0.0) {
    fail("constraint.lambda: only valid for dantzig");
  }
  if (c.constraint_kind == ConstraintKind::equality && c.noise != 0.0) {
    fail("constraint.noise: equality constraints are noise-free");
  }
  if ((e == Experiment::phase || e == Experiment::p1p2) && c.constraint_kind != ConstraintKind::equality &&
      c.constraint_kind != ConstraintKind::l2_ball) {
    fail("constraint.kind: must be equality or l2-ball");
  }
  if (c.certify) {
    if (e != Experiment::solve) { fail("certify: only valid for solve experiments"); }
    if (c.constraint_kind != ConstraintKind::equality) { fail("certify: requires equality constraints"); }
    if (2 * c.n + 3 * c.p > c.lp_max_variables) { fail("budget.lp_max_variables: certification LP exceeds the variable budget"); }
  }

  if (needs_signal(e)) {
    if (c.signal == SignalKind::cosparse && c.p - c.k >= c.n) {
      fail("k: a cosparse signal needs p - k < n (p=" + std::to_string(c.p) + ", n=" + std::to_string(c.n) +
           ", k=" + std::to_string(c.k) + ")");
    }
    if (c.signal == SignalKind::compressible && !(c.decay > 0.0)) { fail("signal.decay: must be > 0"); }
  }

  bool const enumerates = e == Experiment::grip || e == Experiment::rho || e == Experiment::verify_c1 ||
                          e == Experiment::verify_c2 || e == Experiment::verify_t1;
  if (enumerates) {
    if (c.p > c.budget.max_p) { fail("budget.max_p: p=" + std::to_string(c.p) + " exceeds the enumeration budget"); }
    Index const order = e == Experiment::grip || e == Experiment::rho ? c.k : std::min(2 * c.k, c.p);
    if (order > c.budget.max_k) {
      fail("budget.max_k: order " + std::to_string(order) + " exceeds the enumeration budget");
    }
  }
  if (c.mc_trials < 0) { fail("mc_trials: must be >= 0"); }
  if (c.mc_trials > 0 && e != Experiment::grip) { fail("mc_trials: only valid for grip experiments"); }
}

nlohmann::json to_json(ExperimentConfig const &c) {
  json j;
  j["experiment"] = std::string(to_string(c.experiment));
  j["dims"] = {{"m", c.m}, {"n", c.n}, {"p", c.p}};
  j["k"] = c.k;
  j["dictionary_kind"] = std::string(cosparse::to_string(c.dictionary_kind));
  j["matrix_kind"] = std::string(cosparse::to_string(c.matrix_kind));
  j["adapted_sensing"] = c.adapted_sensing;
  j["constraint"] = {{"kind", std::string(cosparse::to_string(c.constraint_kind))},
                     {"epsilon", c.epsilon},
                     {"lambda", c.lambda},
                     {"noise", c.noise}};
  j["trials"] = c.trials;
  j["seed"] = c.seed;
  j["output_path"] = c.output_path;
  j["budget"] = {{"max_p", c.budget.max_p},
                 {"max_k", c.budget.max_k},
                 {"lp_max_variables", c.lp_max_variables},
                 {"max_attempts", c.max_attempts}};
  j["m_grid"] = c.m_grid;
  j["signal"] = {{"kind", c.signal == SignalKind::cosparse ? "cosparse" : "compressible"}, {"decay", c.decay}};
  j["subspace"] = std::string(cosparse::to_string(c.subspace));
  j["mc_trials"] = c.mc_trials;
  j["rho_mode"] = c.rho_mode == RhoMode::exact ? "exact" : "printed";
  j["certify"] = c.certify;
  j["solver"] = {{"tol", c.solver_tol}, {"max_iters", c.solver_max_iters}};
  return j;
}

} // namespace cosparse::bench
