#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "gspdet/experiment.hpp"
#include "gspdet/seeds.hpp"

using namespace gspdet;
using nlohmann::json;

namespace {

json small_detect_config() {
  const double base = std::log(40.0) / 40.0;
  return json{
      {"kind", "detect-lp"},
      {"graph",
       {{"nodes", 40}, {"blocks", 2}, {"inter_prob", 1.5 * base}, {"intra_boost", 6.0 * base}}},
      {"noise_variance", 0.01},
      {"trials", 3},
      {"master_seed", 5},
      {"grid", {{"variable", "n"}, {"values", {30}}}},
      {"fixed", {{"samples", 60}}},
      {"tau_grid", {6.0}},
  };
}

json small_blind_config() {
  const double base = std::log(60.0) / 60.0;
  return json{
      {"kind", "blind-cd"},
      {"graph",
       {{"nodes", 60}, {"blocks", 3}, {"inter_prob", base}, {"intra_boost", 7.0 * base}}},
      {"noise_variance", 0.01},
      {"trials", 2},
      {"master_seed", 6},
      {"grid", {{"variable", "n"}, {"values", {45}}}},
      {"fixed", {{"samples", 100}, {"node_fraction", 1.0}}},
      {"filter", {{"kind", "power"}, {"scale", 0.5}, {"order", 3}}},
      {"corruption", {{"fraction", 0.1}, {"burst_length", 10}}},
      {"batch_size", 50},
      {"detector", {{"threshold", 0.5}}},
  };
}

json small_rk_config() {
  const double base = std::log(50.0) / 50.0;
  return json{
      {"kind", "rk-norm"},
      {"graph",
       {{"nodes", 50}, {"inter_prob", 1.5 * base}, {"intra_boost", 6.0 * base}}},
      {"trials", 3},
      {"master_seed", 7},
      {"grid", {{"variable", "n"}, {"values", {30, 50}}}},
      {"block_grid", {2, 3}},
  };
}

std::string render(const ResultTable& table) {
  std::ostringstream out;
  write_csv(table, out);
  return out.str();
}

}  // namespace

TEST_CASE("config parsing reports the offending field") {
  json broken = small_detect_config();
  broken["graph"].erase("nodes");
  CHECK_THROWS_WITH_AS(config_from_json(broken), doctest::Contains("graph.nodes"),
                       std::invalid_argument);

  broken = small_detect_config();
  broken["kind"] = "what";
  CHECK_THROWS_AS(config_from_json(broken), std::invalid_argument);

  broken = small_detect_config();
  broken["grid"]["variable"] = "p_s";
  CHECK_THROWS_WITH_AS(config_from_json(broken), doctest::Contains("grid.variable"),
                       std::invalid_argument);

  broken = small_detect_config();
  broken["tau_grid"] = {0.0};
  CHECK_THROWS_WITH_AS(config_from_json(broken), doctest::Contains("tau_grid"),
                       std::invalid_argument);

  broken = small_detect_config();
  broken["grid"]["values"] = {500};
  CHECK_THROWS_AS(config_from_json(broken), std::invalid_argument);
}

TEST_CASE("config echo round trips") {
  const ExperimentConfig config = config_from_json(small_blind_config());
  const ExperimentConfig back = config_from_json(config_to_json(config));
  CHECK(back.kind == config.kind);
  CHECK(back.graph.num_nodes == config.graph.num_nodes);
  CHECK(back.batch_size == config.batch_size);
  CHECK(back.detector.threshold == config.detector.threshold);
  CHECK(back.grid_values == config.grid_values);
}

TEST_CASE("detection experiment emits one row per grid point and tau") {
  json doc = small_detect_config();
  doc["grid"]["values"] = {25, 30};
  doc["tau_grid"] = {4.0, 8.0};
  const ResultTable table = run_experiment(config_from_json(doc));
  CHECK(table.columns ==
        std::vector<std::string>{"grid_var", "value", "tau", "trials", "auroc"});
  CHECK(table.rows.size() == 4);
  for (const auto& row : table.rows) {
    const double value = std::get<double>(row[4]);
    CHECK(value >= 0.0);
    CHECK(value <= 1.0);
  }
}

TEST_CASE("experiments are bit-reproducible") {
  const ExperimentConfig config = config_from_json(small_detect_config());
  CHECK(render(run_experiment(config)) == render(run_experiment(config)));

  const ExperimentConfig blind = config_from_json(small_blind_config());
  CHECK(render(run_experiment(blind)) == render(run_experiment(blind)));

  const ExperimentConfig rk = config_from_json(small_rk_config());
  CHECK(render(run_experiment(rk)) == render(run_experiment(rk)));
}

TEST_CASE("shared grid points keep their outcomes when the grid changes") {
  json wide = small_rk_config();
  json narrow = small_rk_config();
  narrow["grid"]["values"] = {50};
  const ResultTable wide_table = run_experiment(config_from_json(wide));
  const ResultTable narrow_table = run_experiment(config_from_json(narrow));

  // Rows at n=50 must agree cell for cell.
  for (const auto& narrow_row : narrow_table.rows) {
    bool found = false;
    for (const auto& wide_row : wide_table.rows) {
      if (format_cell(wide_row[0]) == format_cell(narrow_row[0]) &&
          format_cell(wide_row[1]) == format_cell(narrow_row[1])) {
        CHECK(format_cell(wide_row[2]) == format_cell(narrow_row[2]));
        CHECK(format_cell(wide_row[3]) == format_cell(narrow_row[3]));
        found = true;
      }
    }
    CHECK(found);
  }
}

TEST_CASE("blind-cd tables carry three arms per grid value") {
  const ResultTable table = run_experiment(config_from_json(small_blind_config()));
  CHECK(table.columns ==
        std::vector<std::string>{"grid_var", "value", "arm", "ari_mean", "ari_std"});
  REQUIRE(table.rows.size() == 3);
  CHECK(std::get<std::string>(table.rows[0][2]) == "clean");
  CHECK(std::get<std::string>(table.rows[1][2]) == "corrupted");
  CHECK(std::get<std::string>(table.rows[2][2]) == "prescreened");
  for (const auto& row : table.rows) {
    CHECK(std::get<double>(row[3]) <= 1.0);
    CHECK(std::get<double>(row[3]) >= -1.0);
  }
}

TEST_CASE("full observation rows report a zero deviation") {
  const ResultTable table = run_experiment(config_from_json(small_rk_config()));
  bool checked = false;
  for (const auto& row : table.rows) {
    if (std::get<long long>(row[1]) == 50) {
      CHECK(format_cell(row[2]) == "0.000000");
      checked = true;
    }
  }
  CHECK(checked);
}

TEST_CASE("csv writing round trips through the parser") {
  const ResultTable table = run_experiment(config_from_json(small_rk_config()));
  std::stringstream stream;
  write_csv(table, stream);
  const auto parsed = parse_csv(stream);
  REQUIRE(parsed.size() == table.rows.size() + 1);
  CHECK(parsed[0] == table.columns);
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    REQUIRE(parsed[r + 1].size() == table.rows[r].size());
    for (std::size_t c = 0; c < table.rows[r].size(); ++c)
      CHECK(parsed[r + 1][c] == format_cell(table.rows[r][c]));
  }
}

TEST_CASE("emitting results writes the table and its metadata record") {
  json doc = small_rk_config();
  doc["output"] = "test_experiment_out/rk";
  ExperimentConfig config = config_from_json(doc);
  const ResultTable table = run_experiment(config);
  emit_results(table, config);

  std::ifstream csv("test_experiment_out/rk.csv");
  REQUIRE(csv.good());
  const auto parsed = parse_csv(csv);
  CHECK(parsed.size() == table.rows.size() + 1);

  std::ifstream meta_in("test_experiment_out/rk.meta.json");
  REQUIRE(meta_in.good());
  const json meta = json::parse(meta_in);
  CHECK(meta.at("master_seed") == 7);
  CHECK(meta.at("config").at("kind") == "rk-norm");
  CHECK(meta.contains("version"));

  config.format = "json";
  emit_results(table, config);
  std::ifstream json_in("test_experiment_out/rk.json");
  REQUIRE(json_in.good());
  const json doc_out = json::parse(json_in);
  CHECK(doc_out.at("columns").size() == 4);
  CHECK(doc_out.at("rows").size() == table.rows.size());
  CHECK(doc_out.at("metadata").at("master_seed") == 7);

  for (const char* path : {"test_experiment_out/rk.csv", "test_experiment_out/rk.meta.json",
                           "test_experiment_out/rk.json"})
    std::remove(path);
}

TEST_CASE("an unwritable output path is an error") {
  json doc = small_rk_config();
  doc["output"] = "test_experiment_blocker/rk";
  ExperimentConfig config = config_from_json(doc);
  const ResultTable table = run_experiment(config);

  std::ofstream blocker("test_experiment_blocker");  // file where a dir must go
  blocker << "x";
  blocker.close();
  CHECK_THROWS_AS(emit_results(table, config), std::runtime_error);
  std::remove("test_experiment_blocker");
}

TEST_CASE("tau calibration hits the requested sharpness") {
  BlockModelParams params;
  params.num_nodes = 60;
  params.num_blocks = 3;
  const double base = std::log(60.0) / 60.0;
  params.inter_prob = base;
  params.intra_boost = 6.0 * base;

  const double tau = calibrate_tau(params, 3, 0.5, 5, 99);
  CHECK(tau > 0.0);

  // Recompute the calibration statistic at the returned tau.
  double mean_eta = 0.0;
  for (int i = 0; i < 5; ++i) {
    const Graph g = sbm_sample(params, derive_seed(99, {0xca1, static_cast<std::uint64_t>(i)}));
    const SpectralBasis basis = spectral_decompose(normalized_laplacian(g));
    mean_eta += low_pass_metrics(evaluate_response(HeatDiffusionResponse{tau}, basis), 3).eta;
  }
  mean_eta /= 5.0;
  CHECK(mean_eta <= 0.5 + 1e-9);
  CHECK(mean_eta >= 0.40);  // bisection lands at the target, not far below

  const double sharper = calibrate_tau(params, 3, 0.25, 5, 99);
  CHECK(sharper > tau);
}

TEST_CASE("parallel map visits every index exactly once") {
  std::vector<std::atomic<int>> hits(257);
  for (auto& h : hits) h = 0;
  parallel_for_index(257, [&](int i) { hits[i] += 1; });
  for (const auto& h : hits) CHECK(h.load() == 1);
}
