#include "gspdet/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <nlohmann/json.hpp>

#include "gspdet/community.hpp"
#include "gspdet/seeds.hpp"
#include "gspdet/theory.hpp"
#include "gspdet/version.hpp"

namespace gspdet {

namespace {

using nlohmann::json;

[[noreturn]] void config_error(const std::string& path, const std::string& what) {
  throw std::invalid_argument("config: field '" + path + "' " + what);
}

const json& require(const json& j, const std::string& key, const std::string& path) {
  if (!j.is_object() || !j.contains(key)) config_error(path, "is missing");
  return j.at(key);
}

double require_number(const json& j, const std::string& key, const std::string& path) {
  const json& v = require(j, key, path);
  if (!v.is_number()) config_error(path, "must be a number");
  return v.get<double>();
}

int require_int(const json& j, const std::string& key, const std::string& path) {
  const json& v = require(j, key, path);
  if (!v.is_number_integer()) config_error(path, "must be an integer");
  return v.get<int>();
}

std::string require_string(const json& j, const std::string& key, const std::string& path) {
  const json& v = require(j, key, path);
  if (!v.is_string()) config_error(path, "must be a string");
  return v.get<std::string>();
}

std::string kind_name(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::detect_lp: return "detect-lp";
    case ExperimentKind::blind_cd: return "blind-cd";
    case ExperimentKind::rk_norm: return "rk-norm";
  }
  return "?";
}

}  // namespace

void ExperimentConfig::validate() const {
  graph.validate();
  if (noise_variance < 0.0) throw std::invalid_argument("config: field 'noise_variance' must be >= 0");
  if (trials < 1) throw std::invalid_argument("config: field 'trials' must be >= 1");
  if (grid_values.empty()) throw std::invalid_argument("config: field 'grid.values' must be non-empty");
  if (format != "csv" && format != "json")
    throw std::invalid_argument("config: field 'format' must be 'csv' or 'json'");

  const auto check_observed = [this](double value, const std::string& path) {
    if (value < 1 || value > graph.num_nodes || value != std::floor(value))
      throw std::invalid_argument("config: field '" + path +
                                  "' must be an integer in [1, nodes]");
  };

  switch (kind) {
    case ExperimentKind::detect_lp: {
      if (grid_variable != "n" && grid_variable != "M")
        throw std::invalid_argument("config: field 'grid.variable' must be 'n' or 'M' for detect-lp");
      if (tau_grid.empty())
        throw std::invalid_argument("config: field 'tau_grid' must be non-empty");
      for (double tau : tau_grid)
        if (!(tau > 0.0))
          throw std::invalid_argument(
              "config: field 'tau_grid' entries must be positive (the filter pair is degenerate at 0)");
      if (grid_variable == "n") {
        for (double v : grid_values) check_observed(v, "grid.values");
        if (fixed_samples < 1)
          throw std::invalid_argument("config: field 'fixed.samples' must be >= 1");
      } else {
        for (double v : grid_values)
          if (v < 1 || v != std::floor(v))
            throw std::invalid_argument("config: field 'grid.values' must be positive integers");
        check_observed(fixed_observed, "fixed.observed_nodes");
      }
      break;
    }
    case ExperimentKind::blind_cd: {
      if (grid_variable != "n" && grid_variable != "p_s")
        throw std::invalid_argument("config: field 'grid.variable' must be 'n' or 'p_s' for blind-cd");
      if (!filter) throw std::invalid_argument("config: field 'filter' is missing");
      gspdet::validate(*filter);
      if (batch_size < 1) throw std::invalid_argument("config: field 'batch_size' must be >= 1");
      if (fixed_samples < batch_size)
        throw std::invalid_argument("config: field 'fixed.samples' must be >= batch_size");
      if (grid_variable == "n") {
        for (double v : grid_values) check_observed(v, "grid.values");
        if (fixed_node_fraction < 0.0 || fixed_node_fraction > 1.0)
          throw std::invalid_argument("config: field 'fixed.node_fraction' must lie in [0,1]");
      } else {
        for (double v : grid_values)
          if (v < 0.0 || v > 1.0)
            throw std::invalid_argument("config: field 'grid.values' must lie in [0,1] for p_s");
        check_observed(fixed_observed, "fixed.observed_nodes");
      }
      if (!(detector.threshold > 0.0))
        throw std::invalid_argument("config: field 'detector.threshold' must be positive");
      detector.kmeans.validate();
      break;
    }
    case ExperimentKind::rk_norm: {
      if (grid_variable != "n")
        throw std::invalid_argument("config: field 'grid.variable' must be 'n' for rk-norm");
      for (double v : grid_values) check_observed(v, "grid.values");
      if (block_grid.empty())
        throw std::invalid_argument("config: field 'block_grid' must be non-empty");
      for (int k : block_grid)
        if (k < 2 || k > graph.num_nodes)
          throw std::invalid_argument("config: field 'block_grid' entries must lie in [2, nodes]");
      break;
    }
  }
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig config;

  const std::string kind = require_string(j, "kind", "kind");
  if (kind == "detect-lp") config.kind = ExperimentKind::detect_lp;
  else if (kind == "blind-cd") config.kind = ExperimentKind::blind_cd;
  else if (kind == "rk-norm") config.kind = ExperimentKind::rk_norm;
  else config_error("kind", "must be 'detect-lp', 'blind-cd' or 'rk-norm'");

  const json& graph = require(j, "graph", "graph");
  config.graph.num_nodes = require_int(graph, "nodes", "graph.nodes");
  config.graph.num_blocks =
      graph.contains("blocks") ? require_int(graph, "blocks", "graph.blocks") : 2;
  config.graph.inter_prob = require_number(graph, "inter_prob", "graph.inter_prob");
  config.graph.intra_boost = require_number(graph, "intra_boost", "graph.intra_boost");

  config.noise_variance =
      j.contains("noise_variance") ? require_number(j, "noise_variance", "noise_variance") : 0.0;
  config.trials = require_int(j, "trials", "trials");
  const json& seed = require(j, "master_seed", "master_seed");
  if (!seed.is_number_unsigned() && !seed.is_number_integer())
    config_error("master_seed", "must be an integer");
  config.master_seed = seed.get<std::uint64_t>();
  config.output = j.contains("output") ? require_string(j, "output", "output") : "";
  config.format = j.contains("format") ? require_string(j, "format", "format") : "csv";

  const json& grid = require(j, "grid", "grid");
  config.grid_variable = require_string(grid, "variable", "grid.variable");
  const json& values = require(grid, "values", "grid.values");
  if (!values.is_array()) config_error("grid.values", "must be an array");
  for (const auto& v : values) {
    if (!v.is_number()) config_error("grid.values", "must hold numbers");
    config.grid_values.push_back(v.get<double>());
  }

  const json fixed = j.value("fixed", json::object());
  if (fixed.contains("samples")) config.fixed_samples = require_int(fixed, "samples", "fixed.samples");
  if (fixed.contains("observed_nodes"))
    config.fixed_observed = require_int(fixed, "observed_nodes", "fixed.observed_nodes");
  if (fixed.contains("node_fraction"))
    config.fixed_node_fraction = require_number(fixed, "node_fraction", "fixed.node_fraction");

  if (j.contains("tau_grid")) {
    const json& taus = j.at("tau_grid");
    if (!taus.is_array()) config_error("tau_grid", "must be an array");
    for (const auto& t : taus) {
      if (!t.is_number()) config_error("tau_grid", "must hold numbers");
      config.tau_grid.push_back(t.get<double>());
    }
  }

  if (j.contains("filter")) config.filter = response_from_json(j.at("filter"));

  if (j.contains("corruption")) {
    const json& corruption = j.at("corruption");
    config.corruption.corrupt_fraction =
        require_number(corruption, "fraction", "corruption.fraction");
    config.corruption.burst_length =
        require_int(corruption, "burst_length", "corruption.burst_length");
    // node_fraction comes from the grid or fixed.node_fraction
  }

  if (j.contains("batch_size")) config.batch_size = require_int(j, "batch_size", "batch_size");

  if (j.contains("detector")) {
    const json& det = j.at("detector");
    if (det.contains("threshold"))
      config.detector.threshold = require_number(det, "threshold", "detector.threshold");
    if (det.contains("kmeans")) {
      const json& km = det.at("kmeans");
      KMeansConfig& cfg = config.detector.kmeans;
      if (km.contains("restarts")) cfg.restarts = require_int(km, "restarts", "detector.kmeans.restarts");
      if (km.contains("max_iterations"))
        cfg.max_iterations = require_int(km, "max_iterations", "detector.kmeans.max_iterations");
      if (km.contains("tolerance"))
        cfg.tolerance = require_number(km, "tolerance", "detector.kmeans.tolerance");
      if (km.contains("seeding")) {
        const std::string s = require_string(km, "seeding", "detector.kmeans.seeding");
        if (s == "careful") cfg.seeding = KMeansConfig::Seeding::careful;
        else if (s == "uniform") cfg.seeding = KMeansConfig::Seeding::uniform;
        else config_error("detector.kmeans.seeding", "must be 'careful' or 'uniform'");
      }
    }
  }

  if (j.contains("block_grid")) {
    const json& blocks = j.at("block_grid");
    if (!blocks.is_array()) config_error("block_grid", "must be an array");
    for (const auto& k : blocks) {
      if (!k.is_number_integer()) config_error("block_grid", "must hold integers");
      config.block_grid.push_back(k.get<int>());
    }
  }

  config.validate();
  return config;
}

json config_to_json(const ExperimentConfig& config) {
  json j;
  j["kind"] = kind_name(config.kind);
  j["graph"] = {{"nodes", config.graph.num_nodes},
                {"blocks", config.graph.num_blocks},
                {"inter_prob", config.graph.inter_prob},
                {"intra_boost", config.graph.intra_boost}};
  j["noise_variance"] = config.noise_variance;
  j["trials"] = config.trials;
  j["master_seed"] = config.master_seed;
  j["output"] = config.output;
  j["format"] = config.format;
  j["grid"] = {{"variable", config.grid_variable}, {"values", config.grid_values}};
  j["fixed"] = {{"samples", config.fixed_samples},
                {"observed_nodes", config.fixed_observed},
                {"node_fraction", config.fixed_node_fraction}};
  if (config.kind == ExperimentKind::detect_lp) j["tau_grid"] = config.tau_grid;
  if (config.kind == ExperimentKind::blind_cd) {
    j["filter"] = response_to_json(*config.filter);
    j["corruption"] = {{"fraction", config.corruption.corrupt_fraction},
                       {"burst_length", config.corruption.burst_length}};
    j["batch_size"] = config.batch_size;
    j["detector"] = {
        {"threshold", config.detector.threshold},
        {"kmeans",
         {{"restarts", config.detector.kmeans.restarts},
          {"max_iterations", config.detector.kmeans.max_iterations},
          {"tolerance", config.detector.kmeans.tolerance},
          {"seeding", config.detector.kmeans.seeding == KMeansConfig::Seeding::careful
                          ? "careful"
                          : "uniform"}}}};
  }
  if (config.kind == ExperimentKind::rk_norm) j["block_grid"] = config.block_grid;
  return j;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("config: not valid JSON: " + std::string(e.what()));
  }
  return config_from_json(j);
}

std::string format_cell(const ResultTable::Cell& cell) {
  if (std::holds_alternative<long long>(cell))
    return std::to_string(std::get<long long>(cell));
  if (std::holds_alternative<double>(cell)) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", std::get<double>(cell));
    return buf;
  }
  return std::get<std::string>(cell);
}

void write_csv(const ResultTable& table, std::ostream& out) {
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    if (c) out << ',';
    out << table.columns[c];
  }
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out << ',';
      out << format_cell(row[c]);
    }
    out << '\n';
  }
}

std::vector<std::vector<std::string>> parse_csv(std::istream& in) {
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    rows.push_back(std::move(cells));
  }
  return rows;
}

void parallel_for_index(int count, const std::function<void(int)>& fn) {
  const int workers = std::min<int>(
      count, std::max(1u, std::thread::hardware_concurrency()));
  if (workers <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }

  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_lock;
  auto work = [&]() {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> guard(failure_lock);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

namespace {

struct TrialSeeds {
  std::uint64_t graph, mask, signal_low, signal_high, corruption;
  std::uint64_t kmeans_low, kmeans_high, kmeans_clean, kmeans_corrupted,
      kmeans_screen, kmeans_screened;

  explicit TrialSeeds(std::uint64_t trial_seed)
      : graph(derive_seed(trial_seed, {1})),
        mask(derive_seed(trial_seed, {2})),
        signal_low(derive_seed(trial_seed, {3})),
        signal_high(derive_seed(trial_seed, {4})),
        corruption(derive_seed(trial_seed, {5})),
        kmeans_low(derive_seed(trial_seed, {6})),
        kmeans_high(derive_seed(trial_seed, {7})),
        kmeans_clean(derive_seed(trial_seed, {8})),
        kmeans_corrupted(derive_seed(trial_seed, {9})),
        kmeans_screen(derive_seed(trial_seed, {10})),
        kmeans_screened(derive_seed(trial_seed, {11})) {}
};

std::uint64_t trial_seed(const ExperimentConfig& config, double grid_value,
                         double extra, int trial) {
  return derive_seed(config.master_seed,
                     {hash_label(kind_name(config.kind)),
                      hash_label(config.grid_variable), hash_bits(grid_value),
                      hash_bits(extra), static_cast<std::uint64_t>(trial)});
}

double mean_of(const std::vector<double>& xs) {
  double acc = 0.0;
  for (double x : xs) acc += x;
  return acc / static_cast<double>(xs.size());
}

double std_of(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  const double mean = mean_of(xs);
  double acc = 0.0;
  for (double x : xs) acc += (x - mean) * (x - mean);
  return std::sqrt(acc / static_cast<double>(xs.size() - 1));
}

ResultTable run_detect_lp(const ExperimentConfig& config) {
  ResultTable table;
  table.columns = {"grid_var", "value", "tau", "trials", "auroc"};

  for (double value : config.grid_values) {
    const int n = config.grid_variable == "n" ? static_cast<int>(value)
                                              : config.fixed_observed;
    const int samples = config.grid_variable == "M" ? static_cast<int>(value)
                                                    : config.fixed_samples;
    for (double tau : config.tau_grid) {
      std::vector<double> low_scores(config.trials), high_scores(config.trials);
      parallel_for_index(config.trials, [&](int t) {
        const TrialSeeds seeds(trial_seed(config, value, tau, t));
        const Graph graph = sbm_sample(config.graph, seeds.graph);
        const SpectralBasis basis =
            spectral_decompose(normalized_laplacian(graph), "normalized_laplacian");
        const ObservationMask mask = sample_mask(graph.num_nodes, n, seeds.mask);

        const FilterSpectrum low =
            evaluate_response(HeatDiffusionResponse{tau}, basis);
        const FilterSpectrum high =
            evaluate_response(InverseHeatResponse{tau}, basis);

        const SignalBatch low_batch = generate_observed_batch(
            basis, low, mask, config.noise_variance, samples, seeds.signal_low,
            describe(HeatDiffusionResponse{tau}));
        const SignalBatch high_batch = generate_observed_batch(
            basis, high, mask, config.noise_variance, samples, seeds.signal_high,
            describe(InverseHeatResponse{tau}));

        KMeansConfig kcfg = config.detector.kmeans;
        kcfg.seed = seeds.kmeans_low;
        low_scores[t] =
            detect(low_batch, config.graph.num_blocks, config.detector.threshold, kcfg).score;
        kcfg.seed = seeds.kmeans_high;
        high_scores[t] =
            detect(high_batch, config.graph.num_blocks, config.detector.threshold, kcfg).score;
      });

      table.rows.push_back({config.grid_variable,
                            static_cast<long long>(value), tau,
                            static_cast<long long>(config.trials),
                            auroc(high_scores, low_scores)});
    }
  }
  return table;
}

ResultTable run_blind_cd(const ExperimentConfig& config) {
  ResultTable table;
  table.columns = {"grid_var", "value", "arm", "ari_mean", "ari_std"};

  for (double value : config.grid_values) {
    const int n = config.grid_variable == "n" ? static_cast<int>(value)
                                              : config.fixed_observed;
    CorruptionSpec corruption = config.corruption;
    corruption.node_fraction =
        config.grid_variable == "p_s" ? value : config.fixed_node_fraction;

    std::vector<double> clean(config.trials), corrupted(config.trials),
        screened(config.trials);
    parallel_for_index(config.trials, [&](int t) {
      const TrialSeeds seeds(trial_seed(config, value, 0.0, t));
      const Graph graph = sbm_sample(config.graph, seeds.graph);
      const SpectralBasis basis =
          spectral_decompose(normalized_laplacian(graph), "normalized_laplacian");
      const ObservationMask mask = sample_mask(graph.num_nodes, n, seeds.mask);
      const FilterSpectrum spectrum = evaluate_response(*config.filter, basis);

      const SignalBatch clean_batch = generate_observed_batch(
          basis, spectrum, mask, config.noise_variance, config.fixed_samples,
          seeds.signal_low, describe(*config.filter));
      const SignalBatch corrupted_batch =
          corrupt_batch(clean_batch, corruption, seeds.corruption);

      std::vector<int> truth(mask.size());
      for (int r = 0; r < mask.size(); ++r)
        truth[r] = graph.block_labels[mask.observed[r]];

      const int clusters = config.graph.num_blocks;
      KMeansConfig kcfg = config.detector.kmeans;

      kcfg.seed = seeds.kmeans_clean;
      clean[t] = adjusted_rand_index(blind_cd(clean_batch, clusters, kcfg).labels, truth);

      kcfg.seed = seeds.kmeans_corrupted;
      corrupted[t] =
          adjusted_rand_index(blind_cd(corrupted_batch, clusters, kcfg).labels, truth);

      kcfg.seed = seeds.kmeans_screen;
      const PrescreenResult screen =
          prescreen(corrupted_batch, config.batch_size, clusters,
                    config.detector.threshold, kcfg);
      if (screen.retained.sample_count() >= clusters) {
        kcfg.seed = seeds.kmeans_screened;
        screened[t] = adjusted_rand_index(
            blind_cd(screen.retained, clusters, kcfg).labels, truth);
      } else {
        screened[t] = 0.0;  // everything rejected: no usable clustering
      }
    });

    const auto push = [&](const char* arm, const std::vector<double>& xs) {
      ResultTable::Cell value_cell;
      if (config.grid_variable == "p_s")
        value_cell = value;
      else
        value_cell = static_cast<long long>(value);
      table.rows.push_back({config.grid_variable, value_cell, std::string(arm),
                            mean_of(xs), std_of(xs)});
    };
    push("clean", clean);
    push("corrupted", corrupted);
    push("prescreened", screened);
  }
  return table;
}

ResultTable run_rk_norm(const ExperimentConfig& config) {
  ResultTable table;
  table.columns = {"K", "n", "norm_mean", "norm_std"};

  for (int blocks : config.block_grid) {
    BlockModelParams params = config.graph;
    params.num_blocks = blocks;
    for (double value : config.grid_values) {
      const int n = static_cast<int>(value);
      std::vector<double> norms(config.trials);
      parallel_for_index(config.trials, [&](int t) {
        const TrialSeeds seeds(
            trial_seed(config, value, static_cast<double>(blocks), t));
        const Graph graph = sbm_sample(params, seeds.graph);
        const SpectralBasis basis =
            spectral_decompose(normalized_laplacian(graph), "normalized_laplacian");
        const ObservationMask mask = sample_mask(graph.num_nodes, n, seeds.mask);
        // Low-pass ordering puts the smallest graph frequencies first.
        const FilterSpectrum spectrum =
            evaluate_response(HeatDiffusionResponse{1.0}, basis);
        norms[t] = qr_misalignment(basis, spectrum, mask, blocks).deviation;
      });
      table.rows.push_back({static_cast<long long>(blocks),
                            static_cast<long long>(n), mean_of(norms),
                            std_of(norms)});
    }
  }
  return table;
}

}  // namespace

ResultTable run_experiment(const ExperimentConfig& config) {
  config.validate();
  switch (config.kind) {
    case ExperimentKind::detect_lp: return run_detect_lp(config);
    case ExperimentKind::blind_cd: return run_blind_cd(config);
    case ExperimentKind::rk_norm: return run_rk_norm(config);
  }
  throw std::logic_error("run_experiment: unknown kind");
}

void emit_results(const ResultTable& table, const ExperimentConfig& config) {
  if (table.rows.empty()) throw std::invalid_argument("emit_results: empty table");
  if (config.output.empty()) throw std::invalid_argument("emit_results: no output path");

  const std::filesystem::path base(config.output);
  if (base.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(base.parent_path(), ec);
  }

  json meta;
  meta["config"] = config_to_json(config);
  meta["master_seed"] = config.master_seed;
  meta["version"] = kVersion;

  if (config.format == "csv") {
    const std::string path = config.output + ".csv";
    std::ofstream out(path);
    if (!out) throw std::runtime_error("emit_results: cannot open " + path);
    write_csv(table, out);
  } else {
    json doc;
    doc["metadata"] = meta;
    doc["columns"] = table.columns;
    json rows = json::array();
    for (const auto& row : table.rows) {
      json r = json::array();
      for (const auto& cell : row) {
        if (std::holds_alternative<long long>(cell))
          r.push_back(std::get<long long>(cell));
        else if (std::holds_alternative<double>(cell))
          r.push_back(std::stod(format_cell(cell)));  // match CSV precision
        else
          r.push_back(std::get<std::string>(cell));
      }
      rows.push_back(std::move(r));
    }
    doc["rows"] = std::move(rows);
    const std::string path = config.output + ".json";
    std::ofstream out(path);
    if (!out) throw std::runtime_error("emit_results: cannot open " + path);
    out << doc.dump(2) << '\n';
  }

  const std::string meta_path = config.output + ".meta.json";
  std::ofstream meta_out(meta_path);
  if (!meta_out) throw std::runtime_error("emit_results: cannot open " + meta_path);
  meta_out << meta.dump(2) << '\n';
}

double calibrate_tau(const BlockModelParams& params, int cutoff, double target,
                     int calibration_graphs, std::uint64_t seed) {
  if (calibration_graphs < 1)
    throw std::invalid_argument("calibrate_tau: need at least one graph");
  if (!(target > 0.0) || target >= 1.0)
    throw std::invalid_argument("calibrate_tau: target sharpness must lie in (0,1)");

  std::vector<SpectralBasis> bases;
  bases.reserve(calibration_graphs);
  for (int i = 0; i < calibration_graphs; ++i) {
    const Graph graph =
        sbm_sample(params, derive_seed(seed, {0xca1, static_cast<std::uint64_t>(i)}));
    bases.push_back(spectral_decompose(normalized_laplacian(graph), "normalized_laplacian"));
  }

  const auto mean_sharpness = [&](double tau) {
    double acc = 0.0;
    for (const auto& basis : bases) {
      const FilterSpectrum spectrum =
          evaluate_response(HeatDiffusionResponse{tau}, basis);
      acc += low_pass_metrics(spectrum, cutoff).eta;
    }
    return acc / static_cast<double>(bases.size());
  };

  double lo = 0.0, hi = 1.0;
  while (mean_sharpness(hi) > target) {
    hi *= 2.0;
    if (hi > 1e9) throw std::runtime_error("calibrate_tau: target sharpness unreachable");
  }
  for (int iter = 0; iter < 60; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (mean_sharpness(mid) <= target)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

}  // namespace gspdet
