#include "gspdet/community.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace gspdet {

CommunityAssignment blind_cd(const SignalBatch& batch, int clusters,
                             const KMeansConfig& cfg) {
  if (clusters < 2)
    throw std::invalid_argument("blind_cd: needs at least two clusters");
  if (batch.sample_count() < clusters)
    throw std::invalid_argument("blind_cd: fewer samples than clusters");
  if (batch.observed_nodes() < clusters)
    throw std::invalid_argument("blind_cd: fewer observed nodes than clusters");

  const Matrix covariance = sample_covariance(batch);
  const Matrix subspace = top_k_eigenvectors(covariance, clusters);

  KMeansConfig kcfg = cfg;
  kcfg.clusters = clusters;
  const KMeansSolution solution = kmeans_score(subspace, kcfg);

  CommunityAssignment assignment;
  assignment.clusters = clusters;
  assignment.labels.assign(batch.observed_nodes(), 0);
  for (int c = 0; c < clusters; ++c)
    for (int row : solution.partition[c]) assignment.labels[row] = c + 1;
  return assignment;
}

PrescreenResult prescreen(const SignalBatch& batch, int batch_size, int clusters,
                          double threshold, const KMeansConfig& cfg) {
  if (batch_size < 1)
    throw std::invalid_argument("prescreen: batch size must be positive");
  if (batch.sample_count() < batch_size)
    throw std::invalid_argument("prescreen: fewer samples than one batch");

  const int windows = batch.sample_count() / batch_size;
  PrescreenResult result;
  result.retained.mask = batch.mask;
  result.retained.noise_variance = batch.noise_variance;
  result.retained.provenance = batch.provenance;

  for (int w = 0; w < windows; ++w) {
    SignalBatch window;
    window.mask = batch.mask;
    window.noise_variance = batch.noise_variance;
    window.data = batch.data.middleCols(w * batch_size, batch_size);

    KMeansConfig kcfg = cfg;
    kcfg.seed = cfg.seed + static_cast<std::uint64_t>(w);  // fresh restarts per window
    BatchVerdict entry;
    entry.batch_index = w;
    entry.verdict = detect(window, clusters, threshold, kcfg);
    const bool keep = entry.verdict.verdict == Hypothesis::low_pass;
    result.batch_verdicts.push_back(std::move(entry));

    if (keep)
      for (int m = w * batch_size; m < (w + 1) * batch_size; ++m)
        result.retained_sample_indices.push_back(m);
  }

  const int kept = static_cast<int>(result.retained_sample_indices.size());
  result.retained.data.resize(batch.observed_nodes(), kept);
  for (int c = 0; c < kept; ++c)
    result.retained.data.col(c) = batch.data.col(result.retained_sample_indices[c]);

  // Remap corruption events that survive screening to their new columns.
  std::map<int, int> position;
  for (int c = 0; c < kept; ++c) position[result.retained_sample_indices[c]] = c;
  for (const auto& event : batch.corruption_log) {
    const auto it = position.find(event.sample);
    if (it != position.end())
      result.retained.corruption_log.push_back({it->second, event.rows});
  }
  return result;
}

nlohmann::json to_json(const PrescreenResult& result) {
  nlohmann::json verdicts = nlohmann::json::array();
  for (const auto& entry : result.batch_verdicts) {
    verdicts.push_back(
        {{"batch", entry.batch_index},
         {"score", entry.verdict.score},
         {"low_pass", entry.verdict.verdict == Hypothesis::low_pass}});
  }
  return {{"batch_verdicts", verdicts},
          {"retained_samples", result.retained_sample_indices.size()}};
}

double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size())
    throw std::invalid_argument("adjusted_rand_index: length mismatch");
  if (a.empty()) throw std::invalid_argument("adjusted_rand_index: empty labelings");

  std::map<std::pair<int, int>, long long> joint;
  std::map<int, long long> row_sum, col_sum;
  for (std::size_t i = 0; i < a.size(); ++i) {
    joint[{a[i], b[i]}] += 1;
    row_sum[a[i]] += 1;
    col_sum[b[i]] += 1;
  }

  const auto pairs = [](long long c) { return 0.5 * static_cast<double>(c) * (c - 1); };
  double index = 0.0;
  for (const auto& [key, count] : joint) index += pairs(count);
  double rows = 0.0, cols = 0.0;
  for (const auto& [key, count] : row_sum) rows += pairs(count);
  for (const auto& [key, count] : col_sum) cols += pairs(count);

  const double total = pairs(static_cast<long long>(a.size()));
  const double expected = rows * cols / total;
  const double maximum = 0.5 * (rows + cols);
  if (maximum == expected) return 1.0;  // both partitions trivial
  return (index - expected) / (maximum - expected);
}

}  // namespace gspdet
