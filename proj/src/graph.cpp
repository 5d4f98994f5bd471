#include "gspdet/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <stdexcept>
#include <vector>

#include "gspdet/seeds.hpp"

namespace gspdet {

void BlockModelParams::validate() const {
  if (num_nodes <= 0) throw std::invalid_argument("block model: node count must be positive");
  if (num_blocks < 2) throw std::invalid_argument("block model: block count must be at least 2");
  if (num_blocks > num_nodes)
    throw std::invalid_argument("block model: more blocks than nodes");
  if (!(inter_prob > 0.0) || inter_prob > 1.0)
    throw std::invalid_argument("block model: inter-block probability must lie in (0,1]");
  if (!(intra_boost > 0.0) || intra_boost > 1.0)
    throw std::invalid_argument("block model: intra-block boost must lie in (0,1]");
  if (intra_boost < inter_prob)
    throw std::invalid_argument("block model: intra-block boost must be >= inter-block probability");
  if (intra_boost + inter_prob > 1.0)
    throw std::invalid_argument("block model: boost + base exceeds 1, not a probability");
}

int BlockModelParams::block_of(int node) const {
  const int base = num_nodes / num_blocks;
  const int extra = num_nodes % num_blocks;  // first `extra` blocks get base+1
  const int cut = extra * (base + 1);
  if (node < cut) return node / (base + 1);
  return extra + (node - cut) / base;
}

std::vector<int> BlockModelParams::block_sizes() const {
  const int base = num_nodes / num_blocks;
  const int extra = num_nodes % num_blocks;
  std::vector<int> sizes(num_blocks, base);
  for (int b = 0; b < extra; ++b) sizes[b] += 1;
  return sizes;
}

double BlockModelParams::edge_probability(int bi, int bj) const {
  return (bi == bj) ? intra_boost + inter_prob : inter_prob;
}

bool BlockModelParams::satisfies_density_condition() const {
  const double lhs = intra_boost / num_blocks + inter_prob;
  const double rhs = (32.0 * std::log(static_cast<double>(num_nodes)) + 1.0) / num_nodes;
  return lhs >= rhs;
}

Vector Graph::degrees() const { return adjacency.rowwise().sum(); }

int Graph::min_degree() const {
  if (num_nodes == 0) return 0;
  return static_cast<int>(degrees().minCoeff());
}

namespace {

bool is_connected(const Matrix& adjacency) {
  const int n = static_cast<int>(adjacency.rows());
  if (n == 0) return false;
  std::vector<char> seen(n, 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  int visited = 1;
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    for (int v = 0; v < n; ++v) {
      if (adjacency(u, v) != 0.0 && !seen[v]) {
        seen[v] = 1;
        ++visited;
        stack.push_back(v);
      }
    }
  }
  return visited == n;
}

}  // namespace

Graph sbm_sample(const BlockModelParams& params, std::uint64_t seed, int max_retries) {
  params.validate();
  if (max_retries < 1) throw std::invalid_argument("sbm_sample: max_retries must be >= 1");

  const int n = params.num_nodes;
  std::vector<int> block(n);
  for (int i = 0; i < n; ++i) block[i] = params.block_of(i);

  auto engine = make_engine(seed);
  std::uniform_real_distribution<double> coin(0.0, 1.0);

  for (int attempt = 0; attempt < max_retries; ++attempt) {
    Matrix adjacency = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        if (coin(engine) < params.edge_probability(block[i], block[j])) {
          adjacency(i, j) = 1.0;
          adjacency(j, i) = 1.0;
        }
      }
    }
    if ((adjacency.rowwise().sum().array() >= 1.0).all() && is_connected(adjacency)) {
      Graph g;
      g.num_nodes = n;
      g.adjacency = std::move(adjacency);
      g.block_labels.resize(n);
      for (int i = 0; i < n; ++i) g.block_labels[i] = block[i] + 1;
      g.connected = true;
      return g;
    }
  }
  throw std::runtime_error("generation failed: graph repeatedly disconnected");
}

Matrix normalized_laplacian(const Graph& g) {
  const Vector deg = g.degrees();
  if ((deg.array() < 1.0).any())
    throw std::invalid_argument("normalized_laplacian: graph has an isolated node");
  const Vector inv_sqrt = deg.array().rsqrt();
  Matrix lap = -(inv_sqrt.asDiagonal() * g.adjacency * inv_sqrt.asDiagonal());
  lap.diagonal().array() += 1.0;
  return lap;
}

Matrix population_normalized_laplacian(const BlockModelParams& params) {
  params.validate();
  const int n = params.num_nodes;
  Matrix expected(n, n);
  for (int i = 0; i < n; ++i) {
    const int bi = params.block_of(i);
    for (int j = 0; j < n; ++j)
      expected(i, j) = params.edge_probability(bi, params.block_of(j));
  }
  const Vector deg = expected.rowwise().sum();
  const Vector inv_sqrt = deg.array().rsqrt();
  Matrix lap = -(inv_sqrt.asDiagonal() * expected * inv_sqrt.asDiagonal());
  lap.diagonal().array() += 1.0;
  return lap;
}

SpectralBasis spectral_decompose(const Matrix& symmetric, std::string source) {
  if (symmetric.rows() != symmetric.cols())
    throw std::invalid_argument("spectral_decompose: matrix is not square");
  const double asym = (symmetric - symmetric.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-10)
    throw std::invalid_argument("spectral_decompose: matrix is not symmetric");

  const Matrix sym = 0.5 * (symmetric + symmetric.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("spectral_decompose: eigensolver did not converge");

  SpectralBasis basis;
  basis.eigenvalues = solver.eigenvalues();  // ascending
  basis.eigenvectors = solver.eigenvectors();
  basis.source = std::move(source);

  // Sign convention: dominant entry of each column non-negative.
  const int n = basis.size();
  for (int j = 0; j < n; ++j) {
    int lead = 0;
    double best = std::abs(basis.eigenvectors(0, j));
    for (int i = 1; i < n; ++i) {
      const double mag = std::abs(basis.eigenvectors(i, j));
      if (mag > best) {
        best = mag;
        lead = i;
      }
    }
    if (basis.eigenvectors(lead, j) < 0.0) basis.eigenvectors.col(j) *= -1.0;
  }
  return basis;
}

void save_edge_list(const Graph& g, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_edge_list: cannot open " + path);
  for (int i = 0; i < g.num_nodes; ++i)
    for (int j = i + 1; j < g.num_nodes; ++j)
      if (g.adjacency(i, j) != 0.0) out << i << ' ' << j << '\n';
}

Graph load_edge_list(const std::string& path, int num_nodes) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_edge_list: cannot open " + path);
  Graph g;
  g.num_nodes = num_nodes;
  g.adjacency = Matrix::Zero(num_nodes, num_nodes);
  int i = 0, j = 0;
  while (in >> i >> j) {
    if (i < 0 || j < 0 || i >= num_nodes || j >= num_nodes)
      throw std::runtime_error("load_edge_list: node index out of range");
    g.adjacency(i, j) = 1.0;
    g.adjacency(j, i) = 1.0;
  }
  g.connected = is_connected(g.adjacency);
  return g;
}

}  // namespace gspdet
