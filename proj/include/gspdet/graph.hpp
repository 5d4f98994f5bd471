#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace gspdet {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Stochastic block model with equal-size blocks and connectivity
// B = boost*I + base*1*1^T, i.e. intra-block probability boost+base and
// inter-block probability base.
struct BlockModelParams {
  int num_nodes = 0;       // N
  int num_blocks = 2;      // K
  double inter_prob = 0;   // base rate, applies across blocks
  double intra_boost = 0;  // added on the diagonal of the connectivity matrix

  // Throws std::invalid_argument when the parameters do not describe a
  // valid model (probabilities outside (0,1], boost below base, K > N, ...).
  void validate() const;

  // Block of a node under the deterministic equal partition: when K does not
  // divide N, the first N mod K blocks take the extra node.
  int block_of(int node) const;
  std::vector<int> block_sizes() const;

  // Edge probability between blocks bi and bj.
  double edge_probability(int bi, int bj) const;

  // Density condition used by the analysis: boost/K + base >= (32 ln N + 1)/N.
  // Violations are reported as warnings, not errors; common experiment
  // parameters sit below this bound.
  bool satisfies_density_condition() const;
};

struct Graph {
  int num_nodes = 0;
  Matrix adjacency;               // symmetric 0/1, zero diagonal
  std::vector<int> block_labels;  // 1-based block ids; empty when unknown
  bool connected = false;

  Vector degrees() const;
  int min_degree() const;
};

// Eigendecomposition with a fixed ordering and sign convention so that equal
// inputs produce bit-equal bases regardless of solver internals.
struct SpectralBasis {
  Vector eigenvalues;   // ascending
  Matrix eigenvectors;  // columns aligned with eigenvalues, orthonormal
  std::string source;

  int size() const { return static_cast<int>(eigenvalues.size()); }
};

// Samples a graph from the block model; resamples (up to max_retries) until
// the graph is connected with minimum degree >= 1. Deterministic given seed.
Graph sbm_sample(const BlockModelParams& params, std::uint64_t seed,
                 int max_retries = 100);

// I - D^{-1/2} A D^{-1/2}; throws on isolated nodes.
Matrix normalized_laplacian(const Graph& g);

// Population counterpart built from Z B Z^T and its row-sum degrees.
Matrix population_normalized_laplacian(const BlockModelParams& params);

// Dense symmetric eigendecomposition. Requires max |S - S^T| <= 1e-10.
// Sign convention: in each column the entry of largest magnitude (ties go to
// the lowest index) is non-negative.
SpectralBasis spectral_decompose(const Matrix& symmetric,
                                 std::string source = "matrix");

// Edge-list fixture format: one "i j" pair per line, 0-based, i < j.
void save_edge_list(const Graph& g, const std::string& path);
Graph load_edge_list(const std::string& path, int num_nodes);

}  // namespace gspdet
