#include "gspdet/detector.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gspdet {

Matrix top_k_eigenvectors(const Matrix& symmetric, int count, Vector* eigenvalues_out) {
  const int n = static_cast<int>(symmetric.rows());
  if (count < 1 || count > n)
    throw std::invalid_argument("top_k_eigenvectors: count out of range");

  Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (symmetric + symmetric.transpose()));
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("top_k_eigenvectors: eigensolver did not converge");

  // Solver order is ascending; take columns from the back.
  Matrix top(n, count);
  Vector values(count);
  for (int k = 0; k < count; ++k) {
    const int src = n - 1 - k;
    top.col(k) = solver.eigenvectors().col(src);
    values(k) = solver.eigenvalues()(src);
  }

  for (int j = 0; j < count; ++j) {
    int lead = 0;
    double best = std::abs(top(0, j));
    for (int i = 1; i < n; ++i) {
      const double mag = std::abs(top(i, j));
      if (mag > best) {
        best = mag;
        lead = i;
      }
    }
    if (top(lead, j) < 0.0) top.col(j) *= -1.0;
  }

  if (eigenvalues_out) *eigenvalues_out = values;
  return top;
}

DetectorVerdict detect(const SignalBatch& batch, int clusters, double threshold,
                       const KMeansConfig& cfg) {
  if (clusters < 2)
    throw std::invalid_argument("detect: needs at least two clusters");
  if (!(threshold > 0.0))
    throw std::invalid_argument("detect: threshold must be positive");
  if (batch.sample_count() < clusters)
    throw std::invalid_argument("detect: fewer samples than clusters");
  if (batch.observed_nodes() < clusters)
    throw std::invalid_argument("detect: fewer observed nodes than clusters");

  const Matrix covariance = sample_covariance(batch);
  Vector top_values;
  const Matrix subspace = top_k_eigenvectors(covariance, clusters, &top_values);

  KMeansConfig kcfg = cfg;
  kcfg.clusters = clusters;
  const KMeansSolution solution = kmeans_score(subspace, kcfg);

  DetectorVerdict verdict;
  verdict.score = solution.score;
  verdict.threshold = threshold;
  verdict.verdict = solution.score < threshold ? Hypothesis::low_pass : Hypothesis::not_low_pass;
  verdict.top_eigenvalues = top_values;
  verdict.observed_nodes = batch.observed_nodes();
  verdict.sample_count = batch.sample_count();
  verdict.clusters = clusters;
  return verdict;
}

double auroc(const std::vector<double>& scores_not_low_pass,
             const std::vector<double>& scores_low_pass) {
  if (scores_not_low_pass.empty() || scores_low_pass.empty())
    throw std::invalid_argument("auroc: empty score list");

  std::vector<double> negatives = scores_low_pass;
  std::sort(negatives.begin(), negatives.end());

  double wins = 0.0;
  for (double positive : scores_not_low_pass) {
    const auto lower =
        std::lower_bound(negatives.begin(), negatives.end(), positive);
    const auto upper =
        std::upper_bound(negatives.begin(), negatives.end(), positive);
    wins += static_cast<double>(lower - negatives.begin());  // strictly below
    wins += 0.5 * static_cast<double>(upper - lower);        // ties
  }
  return wins / (static_cast<double>(scores_not_low_pass.size()) *
                 static_cast<double>(negatives.size()));
}

}  // namespace gspdet
