#include "gspdet/signals.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "gspdet/seeds.hpp"

namespace gspdet {

void ObservationMask::validate(int num_nodes) const {
  if (observed.empty()) throw std::invalid_argument("mask: no observed nodes");
  for (std::size_t i = 0; i < observed.size(); ++i) {
    if (observed[i] < 0 || observed[i] >= num_nodes)
      throw std::invalid_argument("mask: node index out of range");
    if (i > 0 && observed[i] <= observed[i - 1])
      throw std::invalid_argument("mask: indices must be strictly ascending");
  }
}

ObservationMask full_mask(int num_nodes) {
  ObservationMask mask;
  mask.observed.resize(num_nodes);
  std::iota(mask.observed.begin(), mask.observed.end(), 0);
  return mask;
}

ObservationMask sample_mask(int num_nodes, int n, std::uint64_t seed) {
  if (n < 1 || n > num_nodes)
    throw std::invalid_argument("sample_mask: subset size out of range");
  std::vector<int> pool(num_nodes);
  std::iota(pool.begin(), pool.end(), 0);
  auto engine = make_engine(seed);
  // Partial Fisher-Yates: first n entries are a uniform subset.
  for (int i = 0; i < n; ++i) {
    std::uniform_int_distribution<int> pick(i, num_nodes - 1);
    std::swap(pool[i], pool[pick(engine)]);
  }
  ObservationMask mask;
  mask.observed.assign(pool.begin(), pool.begin() + n);
  std::sort(mask.observed.begin(), mask.observed.end());
  return mask;
}

SignalBatch generate_observed_batch(const SpectralBasis& basis,
                                    const FilterSpectrum& spectrum,
                                    const ObservationMask& mask,
                                    double noise_variance, int sample_count,
                                    std::uint64_t seed,
                                    const std::string& filter_descriptor) {
  const int n_full = basis.size();
  mask.validate(n_full);
  if (spectrum.size() != n_full)
    throw std::invalid_argument("generate_observed_batch: spectrum does not match basis");
  if (noise_variance < 0.0)
    throw std::invalid_argument("generate_observed_batch: negative noise variance");
  if (sample_count < 1)
    throw std::invalid_argument("generate_observed_batch: need at least one sample");

  auto engine = make_engine(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double noise_scale = std::sqrt(noise_variance);

  Matrix excitation(n_full, sample_count);
  Matrix noise(n_full, sample_count);
  for (int m = 0; m < sample_count; ++m) {
    for (int i = 0; i < n_full; ++i) excitation(i, m) = gauss(engine);
    for (int i = 0; i < n_full; ++i) noise(i, m) = noise_scale * gauss(engine);
  }

  const Matrix full = apply_filter(basis, spectrum, excitation) + noise;

  SignalBatch batch;
  batch.mask = mask;
  batch.noise_variance = noise_variance;
  batch.data.resize(mask.size(), sample_count);
  for (int r = 0; r < mask.size(); ++r)
    batch.data.row(r) = full.row(mask.observed[r]);
  {
    std::ostringstream tag;
    if (!filter_descriptor.empty()) tag << filter_descriptor << ' ';
    tag << "seed=" << seed;
    batch.provenance = tag.str();
  }
  return batch;
}

void CorruptionSpec::validate(int sample_count) const {
  if (corrupt_fraction < 0.0 || corrupt_fraction > 1.0)
    throw std::invalid_argument("corruption: fraction must lie in [0,1]");
  if (node_fraction < 0.0 || node_fraction > 1.0)
    throw std::invalid_argument("corruption: node fraction must lie in [0,1]");
  if (burst_length < 1)
    throw std::invalid_argument("corruption: burst length must be positive");
  if (sample_count < burst_length)
    throw std::invalid_argument("corruption: fewer samples than one burst");
  if (burst_count(sample_count) * burst_length > sample_count)
    throw std::invalid_argument("corruption: bursts do not fit without overlap");
}

int CorruptionSpec::burst_count(int sample_count) const {
  return static_cast<int>(std::floor(corrupt_fraction * sample_count / burst_length));
}

namespace {

// Uniform non-overlapping placement of `count` bursts of length `len` in
// [0, total): sorted starts s_i with s_{i+1} >= s_i + len are in bijection
// with `count`-subsets of {0, ..., total - count*(len-1) - 1} via
// t_i = s_i - i*(len-1).
std::vector<int> sample_burst_starts(int total, int count, int len,
                                     std::mt19937_64& engine) {
  const int slots = total - count * (len - 1);
  std::vector<int> pool(slots);
  std::iota(pool.begin(), pool.end(), 0);
  for (int i = 0; i < count; ++i) {
    std::uniform_int_distribution<int> pick(i, slots - 1);
    std::swap(pool[i], pool[pick(engine)]);
  }
  std::vector<int> starts(pool.begin(), pool.begin() + count);
  std::sort(starts.begin(), starts.end());
  for (int i = 0; i < count; ++i) starts[i] += i * (len - 1);
  return starts;
}

}  // namespace

SignalBatch corrupt_batch(const SignalBatch& batch, const CorruptionSpec& spec,
                          std::uint64_t seed) {
  const int samples = batch.sample_count();
  const int rows = batch.observed_nodes();
  spec.validate(samples);

  SignalBatch out = batch;
  const int bursts = spec.burst_count(samples);
  if (bursts == 0) return out;

  auto engine = make_engine(seed);
  const auto starts = sample_burst_starts(samples, bursts, spec.burst_length, engine);
  const int rows_per_burst =
      static_cast<int>(std::ceil(spec.node_fraction * rows));
  std::normal_distribution<double> gauss(0.0, 1.0);

  std::vector<int> pool(rows);
  for (int start : starts) {
    std::iota(pool.begin(), pool.end(), 0);
    for (int i = 0; i < rows_per_burst; ++i) {
      std::uniform_int_distribution<int> pick(i, rows - 1);
      std::swap(pool[i], pool[pick(engine)]);
    }
    std::vector<int> hit(pool.begin(), pool.begin() + rows_per_burst);
    std::sort(hit.begin(), hit.end());

    for (int m = start; m < start + spec.burst_length; ++m) {
      for (int r : hit) out.data(r, m) = gauss(engine);
      out.corruption_log.push_back({m, hit});
    }
  }
  return out;
}

Matrix sample_covariance(const SignalBatch& batch) {
  if (batch.sample_count() < 1)
    throw std::invalid_argument("sample_covariance: empty batch");
  const double inv_m = 1.0 / batch.sample_count();
  Matrix cov = inv_m * (batch.data * batch.data.transpose());
  return 0.5 * (cov + cov.transpose());  // exact symmetry for downstream solvers
}

PopulationCovariance population_observed_covariance(const SpectralBasis& basis,
                                                    const FilterSpectrum& spectrum,
                                                    const ObservationMask& mask,
                                                    double noise_variance) {
  mask.validate(basis.size());
  if (spectrum.size() != basis.size())
    throw std::invalid_argument("population covariance: spectrum does not match basis");

  const int n = mask.size();
  Matrix rows(n, basis.size());
  for (int r = 0; r < n; ++r)
    rows.row(r) = basis.eigenvectors.row(mask.observed[r]);

  const Vector squared = spectrum.responses.array().square();
  PopulationCovariance pop;
  pop.noiseless = rows * squared.asDiagonal() * rows.transpose();
  pop.noiseless = 0.5 * (pop.noiseless + pop.noiseless.transpose());
  pop.noisy = pop.noiseless;
  pop.noisy.diagonal().array() += noise_variance;
  pop.noiseless_trace = pop.noiseless.trace();
  return pop;
}

void save_batch_csv(const SignalBatch& batch, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_batch_csv: cannot open " + path);
  out.precision(17);
  for (int r = 0; r < batch.observed_nodes(); ++r) {
    for (int c = 0; c < batch.sample_count(); ++c) {
      if (c) out << ',';
      out << batch.data(r, c);
    }
    out << '\n';
  }

  nlohmann::json meta;
  meta["observed"] = batch.mask.observed;
  meta["noise_variance"] = batch.noise_variance;
  meta["provenance"] = batch.provenance;
  nlohmann::json log = nlohmann::json::array();
  for (const auto& event : batch.corruption_log)
    log.push_back({{"sample", event.sample}, {"rows", event.rows}});
  meta["corruption_log"] = log;
  std::ofstream meta_out(path + ".meta.json");
  if (!meta_out) throw std::runtime_error("save_batch_csv: cannot open " + path + ".meta.json");
  meta_out << meta.dump(2) << '\n';
}

SignalBatch load_batch_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_batch_csv: cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (!rows.empty() && row.size() != rows.front().size())
      throw std::runtime_error("load_batch_csv: ragged rows");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error("load_batch_csv: empty file");

  SignalBatch batch;
  batch.data.resize(rows.size(), rows.front().size());
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c)
      batch.data(r, c) = rows[r][c];

  std::ifstream meta_in(path + ".meta.json");
  if (meta_in) {
    nlohmann::json meta = nlohmann::json::parse(meta_in);
    batch.mask.observed = meta.at("observed").get<std::vector<int>>();
    batch.noise_variance = meta.at("noise_variance").get<double>();
    batch.provenance = meta.value("provenance", "");
    for (const auto& event : meta.at("corruption_log"))
      batch.corruption_log.push_back(
          {event.at("sample").get<int>(), event.at("rows").get<std::vector<int>>()});
  } else {
    batch.mask = full_mask(static_cast<int>(rows.size()));
  }
  return batch;
}

}  // namespace gspdet
