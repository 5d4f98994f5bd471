#pragma once

#include <optional>

#include <nlohmann/json_fwd.hpp>

#include "gspdet/filters.hpp"
#include "gspdet/signals.hpp"

namespace gspdet {

// Diagnostics behind the detector's finite-sample guarantee. Everything here
// is measurable on a concrete instance; the acceptance checks exercise these
// at experiment scale.

struct QrFactor {
  Matrix q_factor;      // orthonormal columns
  Matrix r_factor;      // upper-triangular with non-negative diagonal
  double deviation = 0; // spectral norm of (I - r_factor)
};

// QR-factors the observed rows of the K magnitude-leading filtered
// eigenvectors, normalized by sqrt(n/N) so that full observation gives the
// identity factor exactly. Throws "degenerate sampling" on rank deficiency.
QrFactor qr_misalignment(const SpectralBasis& basis, const FilterSpectrum& spectrum,
                         const ObservationMask& mask, int count);

// Gap between the K-th and (K+1)-th largest eigenvalue of the population
// noiseless covariance, minus the spectral-norm estimation error.
double covariance_spectral_gap(const Matrix& population_noiseless,
                               const Matrix& sample_cov, int count);

// Smallest exact 1-D clustering score over the bulk eigenvectors (those above
// the cutoff). Strictly positive score means no bulk direction is K-clusterable.
double estimate_bulk_score_floor(const SpectralBasis& basis, int clusters);

struct SampleComplexityInputs {
  double threshold = 0;        // detector threshold
  int num_nodes = 0;
  int observed_nodes = 0;
  int clusters = 0;
  double intra_boost = 0;      // block-model diagonal boost
  double bulk_score_floor = 0;
  double covariance_gap = 0;
  double qr_deviation = 0;
  double flatness = 1;
  double sharpness = 0;
  double noise_variance = 0;
  double concentration_constant = 1;  // covariance concentration prefactor
  double noiseless_trace = 0;
};

struct SampleComplexityReport {
  double threshold_margin = 0;  // room between the threshold and both error terms
  double noise_margin = 0;      // what is left after filter and sampling penalties
  bool feasible = false;        // both margins positive
  std::optional<long long> required_samples;  // empty when infeasible
  SampleComplexityInputs inputs;
};

SampleComplexityReport sample_complexity_report(const SampleComplexityInputs& in);
nlohmann::json to_json(const SampleComplexityReport& report);

struct MisalignmentReport {
  double procrustes_distance = 0;  // min over orthogonal O of ||A - B O||_F
  double bound = 0;
  bool holds = false;
  Matrix aligning;  // the minimizing orthogonal matrix
};

// Orthogonal alignment of the sampled leading eigenvectors against their
// population counterparts, compared with the concentration bound
// 35 sqrt(K^3 ln N) / sqrt(p (N - K)).
MisalignmentReport procrustes_misalignment(const Matrix& sampled_k,
                                           const Matrix& population_k,
                                           double intra_boost);
nlohmann::json to_json(const MisalignmentReport& report);

struct DeviationCheck {
  double lhs = 0;
  double bound = 0;
  bool holds = false;
};

// Row-sampling perturbation of the clustering score: compares the score of
// the masked leading eigenvector rows against the full ones, with the bound
// 2450 K^3 ln N / (p (N - K)).
DeviationCheck masked_score_deviation_check(const SpectralBasis& basis,
                                            const FilterSpectrum& spectrum,
                                            const ObservationMask& mask,
                                            int count, double intra_boost);

}  // namespace gspdet
