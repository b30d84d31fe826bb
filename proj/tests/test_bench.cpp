#include "cosparse/bench.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

using namespace cosparse;
using namespace cosparse::bench;
using nlohmann::json;

namespace {

json base_config() {
  return json::parse(R"({
    "experiment": "verify-t1",
    "dims": {"m": 7, "n": 8, "p": 8},
    "k": 1,
    "dictionary_kind": "orthogonal",
    "matrix_kind": "partial-orthogonal",
    "adapted_sensing": true,
    "trials": 6,
    "seed": 11,
    "output_path": "unused"
  })");
}

std::string read_file(std::filesystem::path const &path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::filesystem::path temp_dir(std::string const &name) {
  auto dir = std::filesystem::path(::testing::TempDir()) / ("cosparse_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

std::vector<std::string> split(std::string const &line, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, sep)) { out.push_back(cell); }
  return out;
}

Cell parse_cell(std::string const &text) {
  if (text == "true") { return true; }
  if (text == "false") { return false; }
  try {
    std::size_t used = 0;
    double const v = std::stod(text, &used);
    if (used == text.size()) { return v; }
  } catch (std::exception const &) {
  }
  return text;
}

struct ParsedCsv {
  std::vector<std::string> columns;
  std::vector<Row> rows;
  std::vector<std::string> summary_lines;
};

ParsedCsv parse_csv(std::string const &text) {
  ParsedCsv out;
  std::stringstream ss(text);
  std::string line;
  std::getline(ss, line);
  out.columns = split(line, ',');
  bool in_summary = false;
  while (std::getline(ss, line)) {
    if (line == "# summary:") {
      in_summary = true;
      continue;
    }
    if (in_summary) {
      out.summary_lines.push_back(line);
      continue;
    }
    Row row;
    for (auto const &cell : split(line, ',')) { row.push_back(parse_cell(cell)); }
    out.rows.push_back(row);
  }
  return out;
}

int run_cli(std::string const &args) {
  std::string const cmd = std::string(COSPARSE_GRIP_EXE) + " " + args + " >/dev/null 2>&1";
  int const status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

} // namespace

TEST(Config, ParsesAndEchoes) {
  ExperimentConfig const c = parse_config(base_config());
  EXPECT_EQ(c.experiment, Experiment::verify_t1);
  EXPECT_EQ(c.m, 7);
  EXPECT_EQ(c.dictionary_kind, DictionaryKind::orthogonal);
  EXPECT_TRUE(c.adapted_sensing);
  ExperimentConfig const again = parse_config(to_json(c));
  EXPECT_EQ(to_json(again), to_json(c));
}

TEST(Config, CommandLineExperimentMustAgree) {
  json doc = base_config();
  EXPECT_THROW(parse_config(doc, Experiment::phase), ConfigError);
  doc.erase("experiment");
  EXPECT_EQ(parse_config(doc, Experiment::verify_t1).experiment, Experiment::verify_t1);
  EXPECT_THROW(parse_config(doc), ConfigError);
}

// Each mutation of a valid config must be rejected with a message naming the field.
TEST(Config, FuzzInvalidConfigs) {
  struct Case {
    char const *pointer;
    json value;
    char const *expected;
  };
  std::vector<Case> const cases = {
      {"/bogus", 1, "unknown key 'bogus'"},
      {"/dims/q", 3, "unknown key 'q'"},
      {"/experiment", "verify-c9", "experiment"},
      {"/dims/n", 0, "dims.n"},
      {"/dims/p", 6, "dims.p"},
      {"/dims/m", 8, "dims.m"},
      {"/dims/m", 0, "dims.m"},
      {"/dims/m", 2.5, "dims.m"},
      {"/k", 0, "k:"},
      {"/k", 8, "k:"},
      {"/trials", 0, "trials"},
      {"/seed", -1, "seed"},
      {"/seed", "x", "seed"},
      {"/output_path", "", "output_path"},
      {"/dictionary_kind", "wavelet", "dictionary_kind"},
      {"/dictionary_kind", "user-supplied", "dictionary_kind"},
      {"/matrix_kind", "user-supplied", "matrix_kind"},
      {"/matrix_kind", 4, "matrix_kind"},
      {"/constraint", json{{"kind", "l2-ball"}, {"epsilon", 0.0}}, "constraint.epsilon"},
      {"/constraint", json{{"kind", "l2-ball"}, {"epsilon", 0.1}, {"noise", 0.2}}, "constraint.noise"},
      {"/constraint", json{{"kind", "dantzig"}, {"lambda", 0.1}}, "dantzig"},
      {"/constraint", json{{"kind", "equality"}, {"epsilon", 0.1}}, "constraint.epsilon"},
      {"/constraint", json{{"kind", "equality"}, {"noise", 0.1}}, "constraint.noise"},
      {"/constraint", json{{"kind", "box"}}, "constraint.kind"},
      {"/budget", json{{"max_p", 4}}, "budget.max_p"},
      {"/budget", json{{"max_k", 1}}, "budget.max_k"},
      {"/budget", json{{"max_attempts", 0}}, "budget.max_attempts"},
      {"/m_grid", json::array({2, 3}), "m_grid"},
      {"/signal", json{{"kind", "compressible"}, {"decay", 0.0}}, "signal.decay"},
      {"/signal", json{{"kind", "noise"}}, "signal.kind"},
      {"/subspace", "union", "subspace"},
      {"/rho_mode", "approximate", "rho_mode"},
      {"/mc_trials", 10, "mc_trials"},
      {"/certify", true, "certify"},
      {"/solver", json{{"tol", 0.0}}, "solver.tol"},
      {"/solver", json{{"iterations", 3}}, "unknown key 'iterations'"},
      {"/dims", json::array(), "dims"},
  };
  for (Case const &c : cases) {
    json doc = base_config();
    doc[json::json_pointer(c.pointer)] = c.value;
    try {
      parse_config(doc);
      ADD_FAILURE() << c.pointer << " accepted";
    } catch (ConfigError const &e) {
      EXPECT_NE(std::string(e.what()).find(c.expected), std::string::npos)
          << c.pointer << ": '" << e.what() << "' does not mention '" << c.expected << "'";
    }
  }
}

TEST(Config, ExperimentSpecificRules) {
  json phase = base_config();
  phase["experiment"] = "phase";
  phase["dims"] = {{"n", 10}, {"p", 10}};
  phase["dictionary_kind"] = "identity";
  phase["adapted_sensing"] = false;
  EXPECT_THROW(parse_config(phase), ConfigError);
  phase["m_grid"] = {2, 10};
  EXPECT_NO_THROW(parse_config(phase));
  phase["m_grid"] = {2, 11};
  EXPECT_THROW(parse_config(phase), ConfigError);

  json redundant = base_config();
  redundant["experiment"] = "solve";
  redundant["dictionary_kind"] = "gaussian-random";
  redundant["dims"] = {{"m", 6}, {"n", 8}, {"p", 12}};
  redundant["k"] = 3;
  try {
    parse_config(redundant);
    ADD_FAILURE() << "cosparse signal with p - k >= n accepted";
  } catch (ConfigError const &e) {
    EXPECT_NE(std::string(e.what()).find("p - k < n"), std::string::npos);
  }
  redundant["signal"] = {{"kind", "compressible"}};
  EXPECT_NO_THROW(parse_config(redundant));

  json square = base_config();
  square["dims"] = {{"m", 7}, {"n", 8}, {"p", 9}};
  EXPECT_THROW(parse_config(square), ConfigError);
}

TEST(Config, LoadsFromFileAndReportsParseErrors) {
  auto const dir = temp_dir("load");
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "good.json") << base_config().dump();
  std::ofstream(dir / "bad.json") << "{ not json";
  EXPECT_EQ(load_config((dir / "good.json").string()).trials, 6);
  EXPECT_THROW(load_config((dir / "bad.json").string()), ConfigError);
  EXPECT_THROW(load_config((dir / "missing.json").string()), ConfigError);
}

TEST(Campaign, TrialSeedsUseSplitmix) {
  EXPECT_EQ(trial_seed(11, 3), splitmix64(11, 3));
  ExperimentConfig const c = parse_config(base_config());
  CampaignResult const r = execute(c, 1);
  for (std::size_t t = 0; t < r.rows.size(); ++t) {
    EXPECT_EQ(std::get<long>(r.rows[t][0]), static_cast<long>(t));
    EXPECT_EQ(std::get<std::uint64_t>(r.rows[t][1]), trial_seed(11, static_cast<long>(t)));
  }
}

TEST(Campaign, VerifyT1SchemaAndSlack) {
  ExperimentConfig const c = parse_config(base_config());
  CampaignResult const r = execute(c, 2);
  std::vector<std::string> const expected{"trial", "seed",    "lhs", "rhs", "slack", "hypothesis_ok",
                                          "delta2k", "rho", "c0", "c1"};
  EXPECT_EQ(r.columns, expected);
  EXPECT_EQ(r.rows.size(), 6u);
  EXPECT_EQ(r.records.size(), 6u);
  EXPECT_FALSE(r.bound_violation);
  for (auto const &[key, value] : r.summary) {
    if (key == "min_slack") { EXPECT_GE(value, -1e-8); }
  }
  EXPECT_EQ(r.records[0]["which"], "theorem1");
  EXPECT_EQ(exit_status(r), 0);
}

TEST(Campaign, PhaseSweepTrend) {
  json doc = json::parse(R"({"experiment": "phase", "dims": {"n": 10, "p": 10}, "k": 1,
    "dictionary_kind": "identity", "matrix_kind": "gaussian", "m_grid": [2, 3, 4, 5, 6, 7, 8, 9, 10],
    "trials": 50, "seed": 3, "output_path": "unused"})");
  CampaignResult const r = execute(parse_config(doc), worker_count());
  std::vector<std::string> const expected{"trial", "seed", "m", "success", "err_l2", "objective", "iterations"};
  EXPECT_EQ(r.columns, expected);
  EXPECT_EQ(r.rows.size(), 450u);
  std::vector<double> rates;
  for (auto const &[key, value] : r.summary) {
    if (key.rfind("success_rate_m", 0) == 0) { rates.push_back(value); }
  }
  ASSERT_EQ(rates.size(), 9u);
  for (std::size_t i = 1; i < rates.size(); ++i) { EXPECT_GE(rates[i], rates[i - 1] - 2.0 / 50.0); }
  EXPECT_EQ(rates.back(), 1.0);
}

TEST(Campaign, OrthogonalP1P2Agree) {
  json doc = json::parse(R"({"experiment": "p1p2", "dims": {"m": 6, "n": 10, "p": 10}, "k": 3,
    "dictionary_kind": "orthogonal", "trials": 10, "seed": 5, "output_path": "unused"})");
  CampaignResult const r = execute(parse_config(doc), 1);
  for (auto const &[key, value] : r.summary) {
    if (key == "max_distance") { EXPECT_LE(value, 1e-6); }
  }
}

TEST(Campaign, OtherExperimentsRun) {
  std::vector<json> docs = {
      json::parse(R"({"experiment": "grip", "dims": {"m": 6, "n": 10, "p": 12}, "k": 2, "mc_trials": 20,
        "dictionary_kind": "tight-frame", "trials": 2, "seed": 1, "output_path": "unused"})"),
      json::parse(R"({"experiment": "rho", "dims": {"n": 8, "p": 10}, "k": 2,
        "dictionary_kind": "gaussian-random", "trials": 2, "seed": 1, "output_path": "unused"})"),
      json::parse(R"({"experiment": "solve", "dims": {"m": 6, "n": 10, "p": 12}, "k": 3, "certify": true,
        "dictionary_kind": "tight-frame", "trials": 2, "seed": 1, "output_path": "unused"})"),
      json::parse(R"({"experiment": "solve", "dims": {"m": 6, "n": 10, "p": 12}, "k": 3,
        "constraint": {"kind": "dantzig", "lambda": 0.01, "noise": 0.01},
        "dictionary_kind": "tight-frame", "trials": 2, "seed": 1, "output_path": "unused"})"),
      json::parse(R"({"experiment": "verify-c1", "dims": {"m": 6, "n": 8, "p": 10}, "k": 2,
        "dictionary_kind": "tight-frame", "trials": 5, "seed": 1, "output_path": "unused"})"),
      json::parse(R"({"experiment": "verify-c2", "dims": {"m": 7, "n": 8, "p": 10}, "k": 1,
        "dictionary_kind": "tight-frame", "matrix_kind": "partial-orthogonal", "trials": 5, "seed": 1,
        "output_path": "unused"})"),
  };
  for (json const &doc : docs) {
    ExperimentConfig const c = parse_config(doc);
    CampaignResult const r = execute(c, 2);
    EXPECT_EQ(static_cast<long>(r.rows.size()), c.trials) << doc.dump();
    EXPECT_EQ(exit_status(r), 0) << doc.dump();
    for (Row const &row : r.rows) { EXPECT_EQ(row.size(), r.columns.size()); }
  }
}

TEST(Output, CsvSummaryIsRecomputableAndByteStable) {
  ExperimentConfig c = parse_config(base_config());
  auto const dir = temp_dir("csv");
  c.output_path = (dir / "a").string();
  CampaignResult const r = run(c);
  std::string const text = read_file(dir / "a" / "results.csv");

  ParsedCsv const parsed = parse_csv(text);
  EXPECT_EQ(parsed.columns, r.columns);
  ASSERT_EQ(parsed.rows.size(), r.rows.size());
  std::vector<std::string> recomputed;
  for (auto const &[key, value] : summarize(c.experiment, parsed.columns, parsed.rows)) {
    recomputed.push_back("# " + key + "=" + format_double(value));
  }
  EXPECT_EQ(recomputed, parsed.summary_lines);

  // Same config, different worker count: identical bytes.
  ExperimentConfig c2 = c;
  c2.output_path = (dir / "b").string();
  CampaignResult const serial = execute(c2, 1);
  write_outputs(serial, c2.output_path);
  EXPECT_EQ(read_file(dir / "b" / "results.csv"), text);
  EXPECT_EQ(read_file(dir / "b" / "results.jsonl"), read_file(dir / "a" / "results.jsonl"));

  json const echo = json::parse(read_file(dir / "a" / "config_echo.json"));
  EXPECT_EQ(echo["seed"], 11);
  EXPECT_EQ(echo["experiment"], "verify-t1");
  std::stringstream lines(read_file(dir / "a" / "results.jsonl"));
  std::string line;
  int count = 0;
  while (std::getline(lines, line)) {
    json const record = json::parse(line);
    EXPECT_EQ(record["trial"], count);
    ++count;
  }
  EXPECT_EQ(count, 6);
}

TEST(Output, PartialResultsFlushedOnTrialFailure) {
  // Gaussian sensing at this size never gives admissible constants.
  json doc = base_config();
  doc["matrix_kind"] = "gaussian";
  doc["adapted_sensing"] = false;
  doc["dims"] = {{"m", 4}, {"n", 8}, {"p", 8}};
  doc["k"] = 2;
  doc["budget"] = {{"max_attempts", 2}};
  ExperimentConfig c = parse_config(doc);
  auto const dir = temp_dir("partial");
  c.output_path = dir.string();
  try {
    run(c);
    FAIL() << "expected a trial failure";
  } catch (TrialError const &e) {
    EXPECT_EQ(e.trial(), 0);
    EXPECT_EQ(e.seed(), trial_seed(11, 0));
    EXPECT_NE(std::string(e.what()).find("no admissible instance"), std::string::npos);
  }
  ParsedCsv const parsed = parse_csv(read_file(dir / "results.csv"));
  EXPECT_EQ(parsed.columns.size(), 10u);
  EXPECT_TRUE(parsed.rows.empty());
}

TEST(Cli, ExitCodes) {
  auto const dir = temp_dir("cli");
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "ok.json") << base_config().dump();
  json bad = base_config();
  bad["dims"]["m"] = 9;
  std::ofstream(dir / "bad.json") << bad.dump();
  json slow = json::parse(R"({"experiment": "phase", "dims": {"n": 10, "p": 10}, "k": 3, "m_grid": [5],
    "dictionary_kind": "identity", "trials": 2, "seed": 1, "output_path": "unused",
    "solver": {"max_iters": 1}})");
  std::ofstream(dir / "slow.json") << slow.dump();

  std::string const out = (dir / "out").string();
  EXPECT_EQ(run_cli("verify-t1 --config " + (dir / "ok.json").string() + " --out " + out + " --seed 4"), 0);
  EXPECT_TRUE(std::filesystem::exists(dir / "out" / "results.csv"));
  EXPECT_EQ(json::parse(read_file(dir / "out" / "config_echo.json"))["seed"], 4);
  EXPECT_EQ(run_cli("verify-t1 --config " + (dir / "bad.json").string() + " --out " + out), 2);
  EXPECT_EQ(run_cli("phase --config " + (dir / "ok.json").string() + " --out " + out), 2);
  EXPECT_EQ(run_cli("verify-t1 --config " + (dir / "missing.json").string()), 2);
  EXPECT_EQ(run_cli("verify-t1"), 2);
  EXPECT_EQ(run_cli("phase --config " + (dir / "slow.json").string() + " --out " + out), 4);
}
