#pragma once

#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "gspdet/detector.hpp"
#include "gspdet/signals.hpp"

namespace gspdet {

// Community labels over the observed nodes, inferred from signals alone.
struct CommunityAssignment {
  std::vector<int> labels;  // 1-based cluster ids, one per observed node
  int clusters = 0;
};

// Clusters the rows of the top-K sample-covariance eigenvectors. Uses the
// same eigenvector pipeline as the detector so pre-screening and clustering
// agree on numerics.
CommunityAssignment blind_cd(const SignalBatch& batch, int clusters,
                             const KMeansConfig& cfg);

struct BatchVerdict {
  int batch_index = 0;
  DetectorVerdict verdict;
};

struct PrescreenResult {
  std::vector<BatchVerdict> batch_verdicts;
  std::vector<int> retained_sample_indices;  // into the original batch, sorted
  SignalBatch retained;                      // may be empty when all rejected
};

// Splits the samples into consecutive windows of batch_size (trailing partial
// window dropped), detects each window, and concatenates the samples of the
// windows judged low-pass. Never throws on full rejection; the result simply
// carries no samples.
PrescreenResult prescreen(const SignalBatch& batch, int batch_size, int clusters,
                          double threshold, const KMeansConfig& cfg);

// Verdict per window plus the retained count.
nlohmann::json to_json(const PrescreenResult& result);

// Pair-counting adjusted Rand index; 1 for identical partitions, around 0 for
// independent ones.
double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b);

}  // namespace gspdet
