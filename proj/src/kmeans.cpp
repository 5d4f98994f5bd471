#include "gspdet/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "gspdet/seeds.hpp"

namespace gspdet {

void KMeansConfig::validate() const {
  if (clusters < 1) throw std::invalid_argument("kmeans: cluster count must be positive");
  if (restarts < 1) throw std::invalid_argument("kmeans: restarts must be positive");
  if (max_iterations < 1) throw std::invalid_argument("kmeans: max_iterations must be positive");
  if (!(tolerance >= 0.0)) throw std::invalid_argument("kmeans: tolerance must be non-negative");
}

double KMeansSolution::recompute_score(const Matrix& rows) const {
  double total = 0.0;
  for (const auto& cell : partition) {
    if (cell.empty()) continue;
    Vector mean = Vector::Zero(rows.cols());
    for (int i : cell) mean += rows.row(i).transpose();
    mean /= static_cast<double>(cell.size());
    for (int i : cell) total += (rows.row(i).transpose() - mean).squaredNorm();
  }
  return total;
}

namespace {

struct LloydResult {
  double score = std::numeric_limits<double>::infinity();
  std::vector<int> assignment;
  Matrix centroids;
};

int nearest_centroid(const Matrix& centroids, const Eigen::RowVectorXd& row, int k) {
  int best = 0;
  double best_dist = (centroids.row(0) - row).squaredNorm();
  for (int c = 1; c < k; ++c) {
    const double dist = (centroids.row(c) - row).squaredNorm();
    if (dist < best_dist) {
      best_dist = dist;
      best = c;
    }
  }
  return best;
}

Matrix init_centroids(const Matrix& rows, const KMeansConfig& cfg,
                      std::mt19937_64& engine) {
  const int m = static_cast<int>(rows.rows());
  const int k = cfg.clusters;
  Matrix centroids(k, rows.cols());

  if (cfg.seeding == KMeansConfig::Seeding::uniform) {
    std::uniform_int_distribution<int> pick(0, m - 1);
    for (int c = 0; c < k; ++c) centroids.row(c) = rows.row(pick(engine));
    return centroids;
  }

  // Careful seeding: each next centroid is drawn with probability
  // proportional to the squared distance from the ones chosen so far.
  std::uniform_int_distribution<int> first(0, m - 1);
  centroids.row(0) = rows.row(first(engine));
  Vector dist2(m);
  for (int i = 0; i < m; ++i)
    dist2(i) = (rows.row(i) - centroids.row(0)).squaredNorm();

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int c = 1; c < k; ++c) {
    const double total = dist2.sum();
    int chosen;
    if (total <= 0.0) {
      chosen = first(engine);  // all rows already covered exactly
    } else {
      const double target = unit(engine) * total;
      double acc = 0.0;
      chosen = m - 1;
      for (int i = 0; i < m; ++i) {
        acc += dist2(i);
        if (acc >= target) {
          chosen = i;
          break;
        }
      }
    }
    centroids.row(c) = rows.row(chosen);
    for (int i = 0; i < m; ++i)
      dist2(i) = std::min(dist2(i), (rows.row(i) - centroids.row(c)).squaredNorm());
  }
  return centroids;
}

LloydResult lloyd(const Matrix& rows, const KMeansConfig& cfg, std::uint64_t seed) {
  const int m = static_cast<int>(rows.rows());
  const int k = cfg.clusters;
  auto engine = make_engine(seed);

  LloydResult result;
  result.centroids = init_centroids(rows, cfg, engine);
  result.assignment.assign(m, 0);

  double prev_score = std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < cfg.max_iterations; ++iter) {
    double score = 0.0;
    for (int i = 0; i < m; ++i) {
      const int c = nearest_centroid(result.centroids, rows.row(i), k);
      result.assignment[i] = c;
      score += (rows.row(i) - result.centroids.row(c)).squaredNorm();
    }

    Matrix sums = Matrix::Zero(k, rows.cols());
    std::vector<int> counts(k, 0);
    for (int i = 0; i < m; ++i) {
      sums.row(result.assignment[i]) += rows.row(i);
      counts[result.assignment[i]] += 1;
    }
    for (int c = 0; c < k; ++c)
      if (counts[c] > 0) result.centroids.row(c) = sums.row(c) / counts[c];
    // Empty clusters keep their previous centroid.

    if (prev_score - score <= cfg.tolerance * std::max(1.0, prev_score) && iter > 0)
      break;
    prev_score = score;
  }

  // Final assignment against the updated centroids, then score the partition
  // against its own means so the stored score matches the recomputation.
  for (int i = 0; i < m; ++i)
    result.assignment[i] = nearest_centroid(result.centroids, rows.row(i), k);

  Matrix sums = Matrix::Zero(k, rows.cols());
  std::vector<int> counts(k, 0);
  for (int i = 0; i < m; ++i) {
    sums.row(result.assignment[i]) += rows.row(i);
    counts[result.assignment[i]] += 1;
  }
  for (int c = 0; c < k; ++c)
    if (counts[c] > 0) result.centroids.row(c) = sums.row(c) / counts[c];

  result.score = 0.0;
  for (int i = 0; i < m; ++i)
    result.score += (rows.row(i) - result.centroids.row(result.assignment[i])).squaredNorm();
  return result;
}

}  // namespace

KMeansSolution kmeans_score(const Matrix& rows, const KMeansConfig& cfg) {
  cfg.validate();
  const int m = static_cast<int>(rows.rows());
  if (m < 1) throw std::invalid_argument("kmeans: no rows");

  LloydResult best;
  for (int r = 0; r < cfg.restarts; ++r) {
    LloydResult candidate = lloyd(rows, cfg, derive_seed(cfg.seed, {0x6b6dULL, static_cast<std::uint64_t>(r)}));
    if (candidate.score < best.score) best = std::move(candidate);
  }

  KMeansSolution solution;
  solution.score = best.score;
  solution.centroids = best.centroids;
  solution.partition.assign(cfg.clusters, {});
  for (int i = 0; i < m; ++i) solution.partition[best.assignment[i]].push_back(i);
  return solution;
}

namespace {

// Depth-first enumeration over assignments in restricted-growth order (cell
// labels appear in first-use order), carrying per-cell sufficient statistics.
struct PartitionEnumerator {
  const Matrix& rows;
  int max_cells;
  std::vector<int> counts;
  Matrix sums;         // one row per cell
  std::vector<double> sumsq;
  double best = std::numeric_limits<double>::infinity();

  PartitionEnumerator(const Matrix& r, int k)
      : rows(r), max_cells(k), counts(k, 0), sums(Matrix::Zero(k, r.cols())), sumsq(k, 0.0) {}

  double cost() const {
    double total = 0.0;
    for (int c = 0; c < max_cells; ++c) {
      if (counts[c] == 0) continue;
      total += sumsq[c] - sums.row(c).squaredNorm() / counts[c];
    }
    return total;
  }

  void place(int i, int used) {
    if (i == rows.rows()) {
      best = std::min(best, cost());
      return;
    }
    const int limit = std::min(used + 1, max_cells);
    for (int c = 0; c < limit; ++c) {
      counts[c] += 1;
      sums.row(c) += rows.row(i);
      sumsq[c] += rows.row(i).squaredNorm();
      place(i + 1, std::max(used, c + 1));
      counts[c] -= 1;
      sums.row(c) -= rows.row(i);
      sumsq[c] -= rows.row(i).squaredNorm();
    }
  }
};

}  // namespace

double kmeans_score_exact(const Matrix& rows, int clusters) {
  const int m = static_cast<int>(rows.rows());
  if (m < 1) throw std::invalid_argument("kmeans_score_exact: no rows");
  if (m > 12) throw std::invalid_argument("kmeans_score_exact: too many rows to enumerate (max 12)");
  if (clusters < 1) throw std::invalid_argument("kmeans_score_exact: cluster count must be positive");
  if (clusters >= m) return 0.0;

  PartitionEnumerator enumerator(rows, clusters);
  enumerator.place(0, 0);
  // Numerical cancellation in the sufficient statistics can leave a tiny
  // negative value on zero-cost partitions.
  return std::max(enumerator.best, 0.0);
}

double kmeans_score_1d_exact(const Vector& values, int clusters) {
  const int m = static_cast<int>(values.size());
  if (m < 1) throw std::invalid_argument("kmeans_score_1d_exact: no values");
  if (clusters < 1) throw std::invalid_argument("kmeans_score_1d_exact: cluster count must be positive");
  if (clusters >= m) return 0.0;

  std::vector<double> sorted(values.data(), values.data() + m);
  std::sort(sorted.begin(), sorted.end());

  std::vector<double> prefix(m + 1, 0.0), prefix_sq(m + 1, 0.0);
  for (int i = 0; i < m; ++i) {
    prefix[i + 1] = prefix[i] + sorted[i];
    prefix_sq[i + 1] = prefix_sq[i] + sorted[i] * sorted[i];
  }
  // Cost of one cluster over the half-open sorted range [a, b).
  const auto segment = [&](int a, int b) {
    const double sum = prefix[b] - prefix[a];
    const double sq = prefix_sq[b] - prefix_sq[a];
    return std::max(sq - sum * sum / (b - a), 0.0);
  };

  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> prev(m + 1, inf), curr(m + 1, inf);
  prev[0] = 0.0;
  for (int k = 1; k <= clusters; ++k) {
    std::fill(curr.begin(), curr.end(), inf);
    for (int i = k; i <= m; ++i) {
      for (int j = k - 1; j < i; ++j) {
        if (prev[j] == inf) continue;
        curr[i] = std::min(curr[i], prev[j] + segment(j, i));
      }
    }
    std::swap(prev, curr);
  }
  return prev[m];
}

}  // namespace gspdet
