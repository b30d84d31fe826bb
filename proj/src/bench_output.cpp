#include "cosparse/bench.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>

namespace cosparse::bench {

namespace {

using nlohmann::json;

std::optional<double> numeric(Cell const &cell) {
  if (auto const *v = std::get_if<long>(&cell)) { return static_cast<double>(*v); }
  if (auto const *v = std::get_if<std::uint64_t>(&cell)) { return static_cast<double>(*v); }
  if (auto const *v = std::get_if<double>(&cell)) { return *v; }
  if (auto const *v = std::get_if<bool>(&cell)) { return *v ? 1.0 : 0.0; }
  return std::nullopt;
}

long column_index(std::vector<std::string> const &columns, std::string const &name) {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) { return static_cast<long>(i); }
  }
  return -1;
}

double value_at(Row const &row, long col) {
  if (col < 0) { return std::numeric_limits<double>::quiet_NaN(); }
  return numeric(row[static_cast<std::size_t>(col)]).value_or(std::numeric_limits<double>::quiet_NaN());
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json constants_json(BoundConstants const &c) {
  return {{"delta2k", finite_or_null(c.delta2k)}, {"rho", finite_or_null(c.rho)},
          {"alpha", finite_or_null(c.alpha)},     {"beta", finite_or_null(c.beta)},
          {"c0", finite_or_null(c.c0)},           {"c1", finite_or_null(c.c1)},
          {"printed_c0", finite_or_null(c.printed_c0)}, {"printed_c1", finite_or_null(c.printed_c1)},
          {"admissible", c.admissible}};
}

} // namespace

std::string format_cell(Cell const &cell) {
  if (auto const *v = std::get_if<long>(&cell)) { return std::to_string(*v); }
  if (auto const *v = std::get_if<std::uint64_t>(&cell)) { return std::to_string(*v); }
  if (auto const *v = std::get_if<double>(&cell)) { return format_double(*v); }
  if (auto const *v = std::get_if<bool>(&cell)) { return *v ? "true" : "false"; }
  return std::get<std::string>(cell);
}

std::vector<std::pair<std::string, double>> summarize(Experiment experiment, std::vector<std::string> const &columns,
                                                      std::vector<Row> const &rows) {
  std::vector<std::pair<std::string, double>> out;
  out.emplace_back("rows", static_cast<double>(rows.size()));

  // Means of every numeric column (NaN cells skipped).
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (columns[c] == "trial" || columns[c] == "seed" || columns[c] == "m") { continue; }
    if (!rows.empty() && !numeric(rows.front()[c])) { continue; }
    double sum = 0.0;
    long count = 0;
    for (Row const &row : rows) {
      double const v = value_at(row, static_cast<long>(c));
      if (std::isnan(v)) { continue; }
      sum += v;
      ++count;
    }
    out.emplace_back("mean_" + columns[c], count ? sum / static_cast<double>(count) : std::nan(""));
  }

  auto extreme = [&](std::string const &col, bool want_max) {
    long const idx = column_index(columns, col);
    double best = want_max ? -std::numeric_limits<double>::infinity() : std::numeric_limits<double>::infinity();
    for (Row const &row : rows) {
      double const v = value_at(row, idx);
      if (std::isnan(v)) { continue; }
      best = want_max ? std::max(best, v) : std::min(best, v);
    }
    return best;
  };

  switch (experiment) {
  case Experiment::verify_c1:
  case Experiment::verify_c2:
  case Experiment::verify_t1: {
    long const lhs = column_index(columns, "lhs");
    long const rhs = column_index(columns, "rhs");
    long const slack = column_index(columns, "slack");
    long const hyp = column_index(columns, "hypothesis_ok");
    double min_slack = std::numeric_limits<double>::infinity();
    double violations = 0.0;
    double with_hypothesis = 0.0;
    for (Row const &row : rows) {
      if (value_at(row, hyp) != 1.0) { continue; }
      with_hypothesis += 1.0;
      double const s = value_at(row, slack);
      min_slack = std::min(min_slack, s);
      double scale = 1.0;
      for (double v : {value_at(row, lhs), value_at(row, rhs)}) {
        if (std::isfinite(v)) { scale = std::max(scale, std::abs(v)); }
      }
      if (s < -1e-8 * scale) { violations += 1.0; }
    }
    out.emplace_back("min_slack", min_slack);
    out.emplace_back("violations", violations);
    out.emplace_back("hypothesis_rows", with_hypothesis);
    break;
  }
  case Experiment::phase: {
    long const mcol = column_index(columns, "m");
    long const scol = column_index(columns, "success");
    std::map<double, std::pair<double, double>> rates;
    std::vector<double> order;
    for (Row const &row : rows) {
      double const m = value_at(row, mcol);
      if (!rates.count(m)) { order.push_back(m); }
      rates[m].first += value_at(row, scol);
      rates[m].second += 1.0;
    }
    for (double m : order) {
      out.emplace_back("success_rate_m" + std::to_string(static_cast<long>(m)), rates[m].first / rates[m].second);
    }
    break;
  }
  case Experiment::p1p2:
    out.emplace_back("max_distance", extreme("distance", true));
    break;
  case Experiment::grip:
    out.emplace_back("max_delta", extreme("delta", true));
    break;
  case Experiment::rho:
    out.emplace_back("max_rho", extreme("rho", true));
    break;
  case Experiment::solve:
    out.emplace_back("max_err_l2", extreme("err_l2", true));
    break;
  }
  return out;
}

void emit_csv(CampaignResult const &campaign, std::ostream &out) {
  for (std::size_t i = 0; i < campaign.columns.size(); ++i) { out << (i ? "," : "") << campaign.columns[i]; }
  out << '\n';
  for (Row const &row : campaign.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) { out << (i ? "," : "") << format_cell(row[i]); }
    out << '\n';
  }
  out << "# summary:\n";
  for (auto const &[key, value] : campaign.summary) { out << "# " << key << '=' << format_double(value) << '\n'; }
}

void emit_jsonl(CampaignResult const &campaign, std::ostream &out) {
  for (json const &record : campaign.records) { out << record.dump() << '\n'; }
}

void write_outputs(CampaignResult const &campaign, std::string const &dir) {
  std::filesystem::create_directories(dir);
  std::filesystem::path const base(dir);
  {
    std::ofstream csv(base / "results.csv", std::ios::binary);
    emit_csv(campaign, csv);
  }
  {
    std::ofstream jsonl(base / "results.jsonl", std::ios::binary);
    emit_jsonl(campaign, jsonl);
  }
  std::ofstream echo(base / "config_echo.json", std::ios::binary);
  echo << to_json(campaign.config).dump(2) << '\n';
  if (!echo) { throw Error("cannot write outputs under '" + dir + "'"); }
}

json to_json(BoundReport const &r) {
  json supports = json::array();
  for (SupportSet const &s : r.witness.supports) { supports.push_back(s.to_string()); }
  json aux = json::object();
  for (auto const &[key, value] : r.aux) { aux[key] = finite_or_null(value); }
  return {{"which", std::string(to_string(r.which))},
          {"lhs", finite_or_null(r.lhs)},
          {"rhs", finite_or_null(r.rhs)},
          {"slack", finite_or_null(r.slack)},
          {"num_tol", r.num_tol()},
          {"holds", r.holds()},
          {"hypothesis_ok", r.hypothesis_ok},
          {"degenerate", r.degenerate},
          {"constants", constants_json(r.constants)},
          {"witness", {{"m", r.witness.m}, {"n", r.witness.n}, {"p", r.witness.p}, {"k", r.witness.k}, {"supports", supports}}},
          {"aux", aux}};
}

json to_json(GripReport const &g) {
  return {{"k", g.k},
          {"delta", g.delta},
          {"method", std::string(to_string(g.method))},
          {"family", std::string(to_string(g.family))},
          {"trials", g.trials},
          {"worst_support", g.worst_support.to_string()},
          {"lambda_min", g.eigen_range.first},
          {"lambda_max", g.eigen_range.second},
          {"supports_examined", g.supports_examined},
          {"nontrivial_supports", g.nontrivial_supports}};
}

json to_json(RhoEstimate const &r) {
  return {{"k", r.k},
          {"rho", r.rho},
          {"method", std::string(to_string(r.method))},
          {"witness", {r.witness.first.to_string(), r.witness.second.to_string()}}};
}

json to_json(RecoveryResult const &r) {
  json x = json::array();
  for (Index i = 0; i < r.x_hat.size(); ++i) { x.push_back(r.x_hat[i]); }
  json j = {{"x_hat", x},
            {"objective", r.objective},
            {"iterations", r.iterations},
            {"primal_residual", r.primal_residual},
            {"dual_residual", r.dual_residual},
            {"converged", r.converged},
            {"certified", r.certified},
            {"polished", r.polished},
            {"diagnostic", r.diagnostic}};
  j["certification_gap"] = r.certification_gap ? json(*r.certification_gap) : json(nullptr);
  j["unique_minimizer"] = r.unique_minimizer ? json(*r.unique_minimizer) : json(nullptr);
  return j;
}

} // namespace cosparse::bench
