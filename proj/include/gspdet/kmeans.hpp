#pragma once

#include <cstdint>
#include <vector>

#include "gspdet/graph.hpp"

namespace gspdet {

// Best-of-restarts Lloyd solver for the within-cluster sum-of-squares score.
// The exact enumerators below double as test oracles at small sizes.

struct KMeansConfig {
  int clusters = 2;
  int restarts = 20;
  int max_iterations = 300;
  double tolerance = 1e-9;  // relative score improvement stop
  std::uint64_t seed = 0;
  enum class Seeding { careful, uniform } seeding = Seeding::careful;

  void validate() const;
};

struct KMeansSolution {
  double score = 0;
  std::vector<std::vector<int>> partition;  // clusters.size() cells, may be empty
  Matrix centroids;                         // one row per cluster

  // Within-cluster sum of squares recomputed from the partition.
  double recompute_score(const Matrix& rows) const;
};

// Minimum within-cluster sum of squared row distances found across restarts.
// Deterministic given cfg.seed; ties between restarts go to the earlier one.
KMeansSolution kmeans_score(const Matrix& rows, const KMeansConfig& cfg);

// Exact score by enumerating all partitions into at most K cells. Bounded to
// 12 rows; throws above that.
double kmeans_score_exact(const Matrix& rows, int clusters);

// Exact 1-D score: optimal clusters are contiguous in sorted order, solved by
// dynamic programming.
double kmeans_score_1d_exact(const Vector& values, int clusters);

}  // namespace gspdet
