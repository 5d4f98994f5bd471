// Acceptance suite: exercises the experiment-scale guarantees end to end and
// prints one pass/fail line per criterion. Exit status is the failure count.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "gspdet/community.hpp"
#include "gspdet/experiment.hpp"
#include "gspdet/kmeans.hpp"
#include "gspdet/seeds.hpp"
#include "gspdet/theory.hpp"

using namespace gspdet;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

BlockModelParams model(int nodes, int blocks, double boost_factor) {
  BlockModelParams params;
  params.num_nodes = nodes;
  params.num_blocks = blocks;
  const double log_over_n = std::log(static_cast<double>(nodes)) / nodes;
  params.inter_prob = log_over_n;
  params.intra_boost = boost_factor * log_over_n;
  return params;
}

ExperimentConfig detect_config(const BlockModelParams& params, double tau,
                               const std::string& variable,
                               std::vector<double> values, int fixed,
                               int trials, std::uint64_t seed) {
  ExperimentConfig config;
  config.kind = ExperimentKind::detect_lp;
  config.graph = params;
  config.noise_variance = 1e-2;
  config.trials = trials;
  config.master_seed = seed;
  config.grid_variable = variable;
  config.grid_values = std::move(values);
  config.tau_grid = {tau};
  if (variable == "n")
    config.fixed_samples = fixed;
  else
    config.fixed_observed = fixed;
  return config;
}

double auroc_at(const ResultTable& table, long long value) {
  for (const auto& row : table.rows)
    if (std::get<long long>(row[1]) == value) return std::get<double>(row[4]);
  throw std::logic_error("acceptance: grid value missing from table");
}

double norm_mean_at(const ResultTable& table, long long blocks, long long n) {
  for (const auto& row : table.rows)
    if (std::get<long long>(row[0]) == blocks && std::get<long long>(row[1]) == n)
      return std::get<double>(row[2]);
  throw std::logic_error("acceptance: rk-norm point missing from table");
}

double ari_of(const ResultTable& table, const std::string& arm) {
  for (const auto& row : table.rows)
    if (std::get<std::string>(row[2]) == arm) return std::get<double>(row[3]);
  throw std::logic_error("acceptance: arm missing from table");
}

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4f", x);
  return buf;
}

// Criteria 1 and 2 share the calibrated filter pair and the n sweep.

struct DetectionTables {
  double tau = 0;
  ResultTable by_nodes;    // n in {40, 100}, M = 100
  ResultTable by_samples;  // M in {20, 200}, n = 100
};

DetectionTables run_detection_study() {
  DetectionTables study;
  const BlockModelParams params = model(150, 3, 4.0);
  study.tau = calibrate_tau(params, 3, 0.5, 20, 2024);
  study.by_nodes = run_experiment(
      detect_config(params, study.tau, "n", {40, 100}, 100, 200, 810001));
  study.by_samples = run_experiment(
      detect_config(params, study.tau, "M", {20, 200}, 100, 200, 810002));
  return study;
}

Outcome criterion_detection_at_scale(const DetectionTables& study) {
  const double auroc = auroc_at(study.by_nodes, 100);
  Outcome outcome;
  outcome.pass = auroc >= 0.95;
  outcome.detail = "AUROC(n=100,M=100)=" + fmt(auroc) +
                   " (need >= 0.95, tau=" + fmt(study.tau) + ")";
  return outcome;
}

Outcome criterion_detection_monotonicity(const DetectionTables& study) {
  const double narrow = auroc_at(study.by_nodes, 40);
  const double wide = auroc_at(study.by_nodes, 100);
  const double few = auroc_at(study.by_samples, 20);
  const double many = auroc_at(study.by_samples, 200);
  Outcome outcome;
  outcome.pass = (wide - narrow >= 0.05) && (many - few >= 0.05);
  outcome.detail = "AUROC n40=" + fmt(narrow) + " n100=" + fmt(wide) +
                   " M20=" + fmt(few) + " M200=" + fmt(many) +
                   " (need margins >= 0.05)";
  if (!outcome.pass && narrow >= 0.999 && few >= 0.999)
    outcome.detail +=
        "; detection saturates at sharpness 0.5 over the whole grid, margins "
        "only open up near sharpness 0.9 (tau ~ 0.7)";
  return outcome;
}

Outcome criterion_qr_deviation_curves() {
  ExperimentConfig config;
  config.kind = ExperimentKind::rk_norm;
  config.graph = model(180, 2, 4.0);
  config.trials = 50;
  config.master_seed = 810003;
  config.grid_variable = "n";
  config.grid_values = {60, 180};
  config.block_grid = {2, 3, 4};
  const ResultTable table = run_experiment(config);

  bool pass = true;
  std::ostringstream detail;
  for (long long blocks : {2, 3, 4}) {
    const double at60 = norm_mean_at(table, blocks, 60);
    const double at180 = norm_mean_at(table, blocks, 180);
    pass = pass && at60 > 0.0 && at180 <= 1e-10;
    detail << "K=" << blocks << ": mean(60)=" << fmt(at60)
           << " mean(180)=" << at180 << "; ";
  }
  const double k2 = norm_mean_at(table, 2, 60);
  const double k3 = norm_mean_at(table, 3, 60);
  const double k4 = norm_mean_at(table, 4, 60);
  pass = pass && (k4 > k3) && (k3 > k2);
  detail << "ordering K4>K3>K2 at n=60: " << (k4 > k3 && k3 > k2 ? "yes" : "no");
  Outcome outcome;
  outcome.pass = pass;
  outcome.detail = detail.str();
  return outcome;
}

Outcome criterion_kmeans_oracles() {
  std::mt19937_64 engine(810004);
  std::normal_distribution<double> gauss;

  int matches = 0;
  const int instances = 500;
  for (int round = 0; round < instances; ++round) {
    Matrix rows(8, 2);
    for (int i = 0; i < 8; ++i)
      for (int j = 0; j < 2; ++j) rows(i, j) = gauss(engine);
    KMeansConfig cfg;
    cfg.clusters = 2;
    cfg.restarts = 20;
    cfg.seed = derive_seed(810004, {static_cast<std::uint64_t>(round)});
    const double heuristic = kmeans_score(rows, cfg).score;
    const double exact = kmeans_score_exact(rows, 2);
    if (std::abs(heuristic - exact) <= 1e-9) ++matches;
  }

  std::uniform_int_distribution<int> length(2, 10), clusters(1, 4);
  int agreements = 0;
  const int vectors = 1000;
  for (int round = 0; round < vectors; ++round) {
    const int m = length(engine);
    Vector v(m);
    Matrix as_matrix(m, 1);
    for (int i = 0; i < m; ++i) {
      v(i) = gauss(engine);
      as_matrix(i, 0) = v(i);
    }
    const int k = clusters(engine);
    if (std::abs(kmeans_score_1d_exact(v, k) - kmeans_score_exact(as_matrix, k)) <= 1e-9)
      ++agreements;
  }

  Outcome outcome;
  outcome.pass = (matches >= instances * 99 / 100) && (agreements == vectors);
  outcome.detail = "heuristic=exact on " + std::to_string(matches) + "/" +
                   std::to_string(instances) + " (need 495); 1d=exact on " +
                   std::to_string(agreements) + "/" + std::to_string(vectors);
  return outcome;
}

Outcome criterion_lemma_frequencies() {
  const BlockModelParams params = model(150, 3, 4.0);
  const Matrix population_leading =
      spectral_decompose(population_normalized_laplacian(params)).eigenvectors.leftCols(3);
  const double volume =
      27.0 * std::log(150.0) / (params.intra_boost * 147.0);
  const double score_bound = 1225.0 * volume;

  int score_holds = 0, align_holds = 0, deviation_holds = 0;
  const int draws = 100;
  std::vector<int> score_ok(draws, 0), align_ok(draws, 0), deviation_ok(draws, 0);
  parallel_for_index(draws, [&](int t) {
    const Graph graph =
        sbm_sample(params, derive_seed(810005, {static_cast<std::uint64_t>(t), 1}));
    const SpectralBasis basis = spectral_decompose(normalized_laplacian(graph));

    KMeansConfig cfg;
    cfg.clusters = 3;
    cfg.restarts = 50;
    cfg.seed = derive_seed(810005, {static_cast<std::uint64_t>(t), 2});
    const double leading_score =
        kmeans_score(basis.eigenvectors.leftCols(3), cfg).score;
    score_ok[t] = leading_score <= score_bound ? 1 : 0;

    const MisalignmentReport alignment = procrustes_misalignment(
        basis.eigenvectors.leftCols(3), population_leading, params.intra_boost);
    align_ok[t] = alignment.holds ? 1 : 0;

    const FilterSpectrum spectrum =
        evaluate_response(HeatDiffusionResponse{1.0}, basis);
    const ObservationMask mask =
        sample_mask(150, 100, derive_seed(810005, {static_cast<std::uint64_t>(t), 3}));
    const DeviationCheck deviation =
        masked_score_deviation_check(basis, spectrum, mask, 3, params.intra_boost);
    deviation_ok[t] = deviation.holds ? 1 : 0;
  });
  for (int t = 0; t < draws; ++t) {
    score_holds += score_ok[t];
    align_holds += align_ok[t];
    deviation_holds += deviation_ok[t];
  }

  Outcome outcome;
  outcome.pass =
      score_holds >= 95 && align_holds >= 95 && deviation_holds == draws;
  outcome.detail = "leading-score bound " + std::to_string(score_holds) +
                   "/100 (need 95), alignment bound " + std::to_string(align_holds) +
                   "/100 (need 95), masked-deviation bound " +
                   std::to_string(deviation_holds) + "/100 (need 100)";
  return outcome;
}

Outcome criterion_robustified_clustering() {
  ExperimentConfig config;
  config.kind = ExperimentKind::blind_cd;
  config.graph = model(150, 3, 7.0);
  config.noise_variance = 1e-2;
  config.trials = 100;
  config.master_seed = 810006;
  config.grid_variable = "n";
  config.grid_values = {100};
  config.fixed_samples = 1000;
  config.fixed_node_fraction = 1.0;
  config.filter = PowerLowPassResponse{0.5, 3};
  config.corruption.corrupt_fraction = 0.1;
  config.corruption.burst_length = 10;
  config.batch_size = 50;
  config.detector.threshold = 0.5;
  const ResultTable table = run_experiment(config);

  const double clean = ari_of(table, "clean");
  const double corrupted = ari_of(table, "corrupted");
  const double screened = ari_of(table, "prescreened");

  Outcome outcome;
  outcome.pass =
      (screened >= corrupted + 0.1) && (std::abs(screened - clean) <= 0.15);
  outcome.detail = "ARI clean=" + fmt(clean) + " corrupted=" + fmt(corrupted) +
                   " prescreened=" + fmt(screened) +
                   " (need prescreened >= corrupted+0.1 and within 0.15 of clean)";
  if (!outcome.pass) {
    // Clean 50-sample windows carry a clustering-score noise floor around
    // 0.6-1.0, so a 0.5 threshold rejects nearly everything. Report the same
    // pipeline at the sqrt(N/n) threshold scale for context.
    ExperimentConfig wider = config;
    wider.detector.threshold = std::sqrt(150.0 / 100.0);
    const double rescreened = ari_of(run_experiment(wider), "prescreened");
    outcome.detail += "; threshold 0.5 sits below the clean-window score floor"
                      ", at threshold sqrt(N/n)=" +
                      fmt(wider.detector.threshold) +
                      " the same pipeline reaches prescreened=" + fmt(rescreened);
  }
  return outcome;
}

Outcome criterion_covariance_consistency(double tau) {
  const BlockModelParams params = model(150, 3, 4.0);
  const Graph graph = sbm_sample(params, 810007);
  const SpectralBasis basis = spectral_decompose(normalized_laplacian(graph));
  const FilterSpectrum spectrum =
      evaluate_response(HeatDiffusionResponse{tau}, basis);
  const ObservationMask mask = sample_mask(150, 100, 810008);
  const double sigma2 = 1e-2;
  const PopulationCovariance pop =
      population_observed_covariance(basis, spectrum, mask, sigma2);

  Eigen::SelfAdjointEigenSolver<Matrix> scale_solver(pop.noisy);
  const double scale = scale_solver.eigenvalues().cwiseAbs().maxCoeff();

  std::vector<double> gaps;
  for (int samples : {100, 1000, 10000}) {
    const SignalBatch batch =
        generate_observed_batch(basis, spectrum, mask, sigma2, samples,
                                derive_seed(810009, {static_cast<std::uint64_t>(samples)}));
    Eigen::SelfAdjointEigenSolver<Matrix> solver(sample_covariance(batch) - pop.noisy);
    gaps.push_back(solver.eigenvalues().cwiseAbs().maxCoeff() / scale);
  }

  Outcome outcome;
  outcome.pass = gaps[0] > gaps[1] && gaps[1] > gaps[2] && gaps[2] <= 0.15;
  outcome.detail = "relative spectral error M=100:" + fmt(gaps[0]) +
                   " M=1000:" + fmt(gaps[1]) + " M=10000:" + fmt(gaps[2]) +
                   " (need decreasing and final <= 0.15)";
  return outcome;
}

Outcome criterion_determinism() {
  bool pass = true;
  std::ostringstream detail;

  const auto render = [](const ResultTable& table) {
    std::ostringstream out;
    write_csv(table, out);
    return out.str();
  };

  {
    const BlockModelParams params = model(60, 3, 6.0);
    const ExperimentConfig config =
        detect_config(params, 6.0, "n", {45}, 60, 3, 810010);
    pass = pass && render(run_experiment(config)) == render(run_experiment(config));
    detail << "detect-lp " << (pass ? "stable" : "UNSTABLE");
  }
  {
    ExperimentConfig config;
    config.kind = ExperimentKind::blind_cd;
    config.graph = model(60, 3, 7.0);
    config.noise_variance = 1e-2;
    config.trials = 2;
    config.master_seed = 810011;
    config.grid_variable = "n";
    config.grid_values = {45};
    config.fixed_samples = 100;
    config.fixed_node_fraction = 1.0;
    config.filter = PowerLowPassResponse{0.5, 3};
    config.corruption.corrupt_fraction = 0.1;
    config.corruption.burst_length = 10;
    config.batch_size = 50;
    const bool stable =
        render(run_experiment(config)) == render(run_experiment(config));
    pass = pass && stable;
    detail << ", blind-cd " << (stable ? "stable" : "UNSTABLE");
  }
  {
    ExperimentConfig config;
    config.kind = ExperimentKind::rk_norm;
    config.graph = model(80, 2, 4.0);
    config.trials = 3;
    config.master_seed = 810012;
    config.grid_variable = "n";
    config.grid_values = {40, 80};
    config.block_grid = {2, 3};
    const bool stable =
        render(run_experiment(config)) == render(run_experiment(config));
    pass = pass && stable;
    detail << ", rk-norm " << (stable ? "stable" : "UNSTABLE");
  }

  Outcome outcome;
  outcome.pass = pass;
  outcome.detail = detail.str();
  return outcome;
}

}  // namespace

int main() {
  std::vector<std::pair<std::string, Outcome>> results;

  const auto guard = [&](const std::string& name, auto&& fn) {
    try {
      results.emplace_back(name, fn());
    } catch (const std::exception& e) {
      results.emplace_back(name, Outcome{false, std::string("exception: ") + e.what()});
    }
  };

  DetectionTables study;
  bool study_ready = false;
  try {
    study = run_detection_study();
    study_ready = true;
  } catch (const std::exception& e) {
    const Outcome failed{false, std::string("exception: ") + e.what()};
    results.emplace_back("detection at paper scale", failed);
    results.emplace_back("detection monotone in n and M", failed);
  }
  if (study_ready) {
    guard("detection at paper scale",
          [&] { return criterion_detection_at_scale(study); });
    guard("detection monotone in n and M",
          [&] { return criterion_detection_monotonicity(study); });
  }
  guard("qr deviation curves", criterion_qr_deviation_curves);
  guard("k-means oracle equivalence", criterion_kmeans_oracles);
  guard("bound frequencies at experiment scale", criterion_lemma_frequencies);
  guard("pre-screening robustifies clustering", criterion_robustified_clustering);
  guard("covariance consistency",
        [&] { return criterion_covariance_consistency(study_ready ? study.tau : 4.0); });
  guard("experiments are bit-reproducible", criterion_determinism);

  int failures = 0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& [name, outcome] = results[i];
    if (!outcome.pass) ++failures;
    std::cout << (outcome.pass ? "[PASS] " : "[FAIL] ") << (i + 1) << ". " << name
              << ": " << outcome.detail << "\n";
  }
  std::cout << (failures == 0 ? "all criteria passed\n"
                              : std::to_string(failures) + " criteria failed\n");
  return failures;
}
