#pragma once

#include <vector>

#include "gspdet/kmeans.hpp"
#include "gspdet/signals.hpp"

namespace gspdet {

enum class Hypothesis { low_pass, not_low_pass };

struct DetectorVerdict {
  double score = 0;       // clustering score of the leading eigenvector rows
  double threshold = 0;
  Hypothesis verdict = Hypothesis::not_low_pass;  // low_pass iff score < threshold
  Vector top_eigenvalues;  // descending, length = clusters
  int observed_nodes = 0;
  int sample_count = 0;
  int clusters = 0;
};

// Leading eigenvectors of a symmetric matrix, columns ordered by descending
// eigenvalue (ties by original ascending position), with the same per-column
// sign convention as spectral_decompose.
Matrix top_k_eigenvectors(const Matrix& symmetric, int count,
                          Vector* eigenvalues_out = nullptr);

// Scores the rows of the top-K sample-covariance eigenvectors by k-means and
// thresholds the result. cfg.clusters is overridden by `clusters`.
DetectorVerdict detect(const SignalBatch& batch, int clusters, double threshold,
                       const KMeansConfig& cfg);

// Probability that a random not-low-pass score exceeds a random low-pass
// score; ties count one half. Larger scores indicate the alternative.
double auroc(const std::vector<double>& scores_not_low_pass,
             const std::vector<double>& scores_low_pass);

}  // namespace gspdet
