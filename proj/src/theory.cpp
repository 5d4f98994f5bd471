#include "gspdet/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "gspdet/kmeans.hpp"

namespace gspdet {

namespace {

double spectral_norm(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
}

double symmetric_spectral_norm(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (m + m.transpose()));
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

Matrix leading_columns_at_rows(const SpectralBasis& basis,
                               const FilterSpectrum& spectrum,
                               const std::vector<int>& rows, int count) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), count);
  for (int c = 0; c < count; ++c) {
    const int col = spectrum.magnitude_order[c];
    for (std::size_t r = 0; r < rows.size(); ++r)
      out(static_cast<Eigen::Index>(r), c) = basis.eigenvectors(rows[r], col);
  }
  return out;
}

double log_volume_term(int num_nodes, int clusters, double intra_boost) {
  if (!(intra_boost > 0.0))
    throw std::invalid_argument("theory: intra-block boost must be positive");
  if (clusters < 1 || num_nodes <= clusters)
    throw std::invalid_argument("theory: need more nodes than clusters");
  const double k = clusters;
  return k * k * k * std::log(static_cast<double>(num_nodes)) /
         (intra_boost * (num_nodes - clusters));
}

}  // namespace

QrFactor qr_misalignment(const SpectralBasis& basis, const FilterSpectrum& spectrum,
                         const ObservationMask& mask, int count) {
  const int full = basis.size();
  mask.validate(full);
  if (spectrum.size() != full)
    throw std::invalid_argument("qr_misalignment: spectrum does not match basis");
  const int n = mask.size();
  if (n < count)
    throw std::invalid_argument("qr_misalignment: fewer observed nodes than columns");

  const Matrix observed = leading_columns_at_rows(basis, spectrum, mask.observed, count);
  const double scale = std::sqrt(static_cast<double>(n) / full);

  Eigen::HouseholderQR<Matrix> qr(observed);
  Matrix r_factor =
      qr.matrixQR().topRows(count).triangularView<Eigen::Upper>();
  r_factor /= scale;
  Matrix q_factor = qr.householderQ() * Matrix::Identity(n, count);
  for (int k = 0; k < count; ++k) {
    if (r_factor(k, k) < 0.0) {
      r_factor.row(k) *= -1.0;
      q_factor.col(k) *= -1.0;
    }
  }

  for (int k = 0; k < count; ++k)
    if (std::abs(r_factor(k, k)) <= 1e-10)
      throw std::runtime_error("qr_misalignment: degenerate sampling, rank-deficient columns");

  QrFactor out;
  out.deviation = spectral_norm(Matrix::Identity(count, count) - r_factor);
  out.q_factor = std::move(q_factor);
  out.r_factor = std::move(r_factor);
  return out;
}

double covariance_spectral_gap(const Matrix& population_noiseless,
                               const Matrix& sample_cov, int count) {
  if (population_noiseless.rows() != sample_cov.rows() ||
      population_noiseless.cols() != sample_cov.cols())
    throw std::invalid_argument("covariance_spectral_gap: shape mismatch");
  const int n = static_cast<int>(population_noiseless.rows());
  if (count < 1 || count >= n)
    throw std::invalid_argument("covariance_spectral_gap: count out of range");

  Eigen::SelfAdjointEigenSolver<Matrix> solver(
      0.5 * (population_noiseless + population_noiseless.transpose()));
  const Vector values = solver.eigenvalues();  // ascending
  const double gap = values(n - count) - values(n - count - 1);
  return gap - symmetric_spectral_norm(sample_cov - population_noiseless);
}

double estimate_bulk_score_floor(const SpectralBasis& basis, int clusters) {
  const int n = basis.size();
  if (clusters < 1 || clusters >= n)
    throw std::invalid_argument("estimate_bulk_score_floor: cutoff out of range");
  double floor = std::numeric_limits<double>::infinity();
  for (int col = clusters; col < n; ++col)
    floor = std::min(floor, kmeans_score_1d_exact(basis.eigenvectors.col(col), clusters));
  return floor;
}

namespace {

// Least integer M >= 2 with sqrt(M / ln M) >= target. The map dips at M = 3
// and increases from there, so probe 2 first, then bisect the monotone tail.
std::optional<long long> minimum_sample_count(double target) {
  const auto value = [](long long m) {
    return std::sqrt(static_cast<double>(m) / std::log(static_cast<double>(m)));
  };
  if (value(2) >= target) return 2;
  long long lo = 3, hi = 8;
  while (value(hi) < target) {
    if (hi > (1LL << 61)) return std::nullopt;
    hi *= 2;
  }
  while (lo + 1 < hi) {
    const long long mid = lo + (hi - lo) / 2;
    (value(mid) >= target ? hi : lo) = mid;
  }
  return hi;
}

}  // namespace

SampleComplexityReport sample_complexity_report(const SampleComplexityInputs& in) {
  if (in.observed_nodes < 1 || in.observed_nodes > in.num_nodes)
    throw std::invalid_argument("sample_complexity_report: observed node count out of range");
  if (!(in.concentration_constant > 0.0))
    throw std::invalid_argument("sample_complexity_report: concentration constant must be positive");

  const double volume = log_volume_term(in.num_nodes, in.clusters, in.intra_boost);
  const double stretch =
      std::sqrt(static_cast<double>(in.num_nodes) / in.observed_nodes);

  const double lower_room = in.threshold - stretch * std::sqrt(1225.0 * volume);
  const double floor_radicand = in.bulk_score_floor - 2450.0 * volume;
  // A negative radicand means the bulk floor cannot separate at this scale;
  // clamp so the margin goes non-positive instead of turning complex.
  const double upper_room =
      floor_radicand > 0.0 ? stretch * std::sqrt(floor_radicand) - in.threshold
                           : -in.threshold;

  SampleComplexityReport report;
  report.inputs = in;
  report.threshold_margin = std::min(lower_room, upper_room);

  const double root_k = std::sqrt(static_cast<double>(in.clusters));
  const double penalty =
      root_k * (in.qr_deviation + 6.0 * in.flatness * in.sharpness);
  report.noise_margin =
      in.covariance_gap * (report.threshold_margin - penalty) / (2.0 * root_k) -
      in.noise_variance;

  report.feasible = report.threshold_margin > 0.0 && report.noise_margin > 0.0;
  if (report.feasible) {
    const double target = std::sqrt(2.0) * in.concentration_constant *
                          in.noiseless_trace / report.noise_margin;
    report.required_samples = minimum_sample_count(target);
  }
  return report;
}

nlohmann::json to_json(const SampleComplexityReport& report) {
  nlohmann::json j;
  j["threshold_margin"] = report.threshold_margin;
  j["noise_margin"] = report.noise_margin;
  j["feasible"] = report.feasible;
  if (report.required_samples)
    j["required_samples"] = *report.required_samples;
  else
    j["required_samples"] = "infeasible";
  j["inputs"] = {{"threshold", report.inputs.threshold},
                 {"num_nodes", report.inputs.num_nodes},
                 {"observed_nodes", report.inputs.observed_nodes},
                 {"clusters", report.inputs.clusters},
                 {"intra_boost", report.inputs.intra_boost},
                 {"bulk_score_floor", report.inputs.bulk_score_floor},
                 {"covariance_gap", report.inputs.covariance_gap},
                 {"qr_deviation", report.inputs.qr_deviation},
                 {"flatness", report.inputs.flatness},
                 {"sharpness", report.inputs.sharpness},
                 {"noise_variance", report.inputs.noise_variance},
                 {"concentration_constant", report.inputs.concentration_constant},
                 {"noiseless_trace", report.inputs.noiseless_trace}};
  return j;
}

MisalignmentReport procrustes_misalignment(const Matrix& sampled_k,
                                           const Matrix& population_k,
                                           double intra_boost) {
  if (sampled_k.rows() != population_k.rows() || sampled_k.cols() != population_k.cols())
    throw std::invalid_argument("procrustes_misalignment: shape mismatch");
  const int rows = static_cast<int>(sampled_k.rows());
  const int cols = static_cast<int>(sampled_k.cols());
  if (cols < 1 || rows <= cols)
    throw std::invalid_argument("procrustes_misalignment: need tall matrices");

  Eigen::JacobiSVD<Matrix> svd(population_k.transpose() * sampled_k,
                               Eigen::ComputeFullU | Eigen::ComputeFullV);
  MisalignmentReport report;
  report.aligning = svd.matrixU() * svd.matrixV().transpose();
  report.procrustes_distance = (sampled_k - population_k * report.aligning).norm();
  report.bound = 35.0 * std::sqrt(static_cast<double>(cols) * cols * cols *
                                  std::log(static_cast<double>(rows))) /
                 std::sqrt(intra_boost * (rows - cols));
  report.holds = report.procrustes_distance <= report.bound;
  return report;
}

nlohmann::json to_json(const MisalignmentReport& report) {
  return {{"procrustes_distance", report.procrustes_distance},
          {"bound", report.bound},
          {"holds", report.holds}};
}

DeviationCheck masked_score_deviation_check(const SpectralBasis& basis,
                                            const FilterSpectrum& spectrum,
                                            const ObservationMask& mask,
                                            int count, double intra_boost) {
  const int full = basis.size();
  mask.validate(full);

  std::vector<int> all_rows(full);
  for (int i = 0; i < full; ++i) all_rows[i] = i;
  const Matrix full_leading = leading_columns_at_rows(basis, spectrum, all_rows, count);
  const Matrix masked_leading =
      leading_columns_at_rows(basis, spectrum, mask.observed, count);

  KMeansConfig cfg;
  cfg.clusters = count;
  cfg.restarts = 50;
  cfg.seed = 0x5eedULL;
  const double full_score = kmeans_score(full_leading, cfg).score;
  const double masked_score = kmeans_score(masked_leading, cfg).score;

  DeviationCheck check;
  check.lhs = std::abs(masked_score - full_score);
  check.bound = 2450.0 * log_volume_term(full, count, intra_boost);
  check.holds = check.lhs <= check.bound;
  return check;
}

}  // namespace gspdet
