#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "gspdet/detector.hpp"
#include "gspdet/filters.hpp"
#include "gspdet/graph.hpp"
#include "gspdet/signals.hpp"

namespace gspdet {

// Config-driven Monte-Carlo experiments. Three kinds:
//   detect-lp  AUROC of the detector, low-pass vs not, over an n or M grid
//              and a tau grid of exponential filter pairs.
//   blind-cd   community recovery (clean / corrupted / prescreened arms)
//              over an n or p_s grid.
//   rk-norm    mean QR deviation of the observed leading eigenvectors over
//              a (K, n) grid.
// Per-trial seeds are hashed from (master_seed, kind, grid point, trial), so
// shared grid points keep their outcomes when the grid changes.

enum class ExperimentKind { detect_lp, blind_cd, rk_norm };

struct DetectorSettings {
  double threshold = 0.5;
  KMeansConfig kmeans;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::detect_lp;
  BlockModelParams graph;
  double noise_variance = 0.0;
  int trials = 1;
  std::uint64_t master_seed = 0;
  std::string output;           // path prefix for emitted files
  std::string format = "csv";   // "csv" or "json"

  std::string grid_variable;    // detect-lp: n|M; blind-cd: n|p_s; rk-norm: n
  std::vector<double> grid_values;

  // detect-lp
  std::vector<double> tau_grid;
  int fixed_samples = 100;        // M when sweeping n
  int fixed_observed = 100;       // n when sweeping M

  // blind-cd
  std::optional<FrequencyResponse> filter;
  double fixed_node_fraction = 1.0;  // p_s when sweeping n
  CorruptionSpec corruption;
  int batch_size = 50;
  DetectorSettings detector;

  // rk-norm
  std::vector<int> block_grid;  // K values

  void validate() const;
};

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& config);
ExperimentConfig load_config(const std::string& path);

struct ResultTable {
  using Cell = std::variant<long long, double, std::string>;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

// Fixed-width formatting used by both CSV and the round-trip tests: doubles
// at six decimals, integers and strings verbatim.
std::string format_cell(const ResultTable::Cell& cell);

ResultTable run_experiment(const ExperimentConfig& config);

// Writes <output>.csv (or .json) plus a <output>.meta.json record carrying
// the config echo, master seed and library version.
void emit_results(const ResultTable& table, const ExperimentConfig& config);

void write_csv(const ResultTable& table, std::ostream& out);
// Parses a CSV produced by write_csv back into formatted cells.
std::vector<std::vector<std::string>> parse_csv(std::istream& in);

// Bisection on the measured sharpness of the heat-pair filters: smallest tau
// whose mean measured sharpness over calibration graphs is at most `target`.
double calibrate_tau(const BlockModelParams& params, int cutoff, double target,
                     int calibration_graphs, std::uint64_t seed);

// Deterministic parallel map: runs fn(0..count) across threads, each task
// writing only its own slot.
void parallel_for_index(int count, const std::function<void(int)>& fn);

}  // namespace gspdet
