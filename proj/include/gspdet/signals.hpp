#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gspdet/filters.hpp"
#include "gspdet/graph.hpp"

namespace gspdet {

// Row selection: which nodes of the full graph are visible.
struct ObservationMask {
  std::vector<int> observed;  // sorted ascending, distinct, 0-based

  int size() const { return static_cast<int>(observed.size()); }
  void validate(int num_nodes) const;
};

ObservationMask full_mask(int num_nodes);
// Uniform without-replacement subset of size n, sorted for determinism.
ObservationMask sample_mask(int num_nodes, int n, std::uint64_t seed);

struct CorruptionEvent {
  int sample = 0;          // column index
  std::vector<int> rows;   // row indices (into observed data) replaced
};

struct SignalBatch {
  Matrix data;  // one column per sample, rows follow mask.observed
  ObservationMask mask;
  double noise_variance = 0;
  std::string provenance;
  std::vector<CorruptionEvent> corruption_log;

  int observed_nodes() const { return static_cast<int>(data.rows()); }
  int sample_count() const { return static_cast<int>(data.cols()); }
};

// Column m is (V diag(h) V^T x_m + w_m) restricted to observed rows, with
// x_m ~ N(0, I_N) and w_m ~ N(0, noise_variance I_N). The full signal is
// drawn before row selection, so generation commutes with observation.
// `filter_descriptor` goes into the batch provenance next to the seed.
SignalBatch generate_observed_batch(const SpectralBasis& basis,
                                    const FilterSpectrum& spectrum,
                                    const ObservationMask& mask,
                                    double noise_variance, int sample_count,
                                    std::uint64_t seed,
                                    const std::string& filter_descriptor = "");

// Burst corruption: whole sample windows where a subset of observed rows is
// replaced by standard normal draws.
struct CorruptionSpec {
  double corrupt_fraction = 0.1;  // fraction of samples to corrupt
  int burst_length = 10;          // consecutive samples per burst
  double node_fraction = 1.0;     // fraction of observed rows replaced per burst

  void validate(int sample_count) const;
  int burst_count(int sample_count) const;
};

// Places floor(corrupt_fraction*M / burst_length) non-overlapping bursts,
// uniformly among feasible placements. Each burst picks one row subset of
// size ceil(node_fraction*n) and overwrites those rows for every sample in
// the burst. Everything replaced is recorded in the corruption log.
SignalBatch corrupt_batch(const SignalBatch& batch, const CorruptionSpec& spec,
                          std::uint64_t seed);

// (1/M) sum_m y_m y_m^T; the model is zero-mean, so no centering.
Matrix sample_covariance(const SignalBatch& batch);

struct PopulationCovariance {
  Matrix noisy;      // V_o diag(h)^2 V_o^T + noise_variance I
  Matrix noiseless;  // noisy - noise_variance I
  double noiseless_trace = 0;
};

PopulationCovariance population_observed_covariance(const SpectralBasis& basis,
                                                    const FilterSpectrum& spectrum,
                                                    const ObservationMask& mask,
                                                    double noise_variance);

// Matrix fixture: CSV with one row per observed node, plus a JSON sidecar
// (<path>.meta.json) holding mask, noise level and provenance.
void save_batch_csv(const SignalBatch& batch, const std::string& path);
SignalBatch load_batch_csv(const std::string& path);

}  // namespace gspdet
