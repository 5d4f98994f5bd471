#include "gspdet/filters.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace gspdet {

void validate(const FrequencyResponse& fr) {
  std::visit(
      [](const auto& r) {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, PolynomialResponse>) {
          if (r.coefficients.empty())
            throw std::invalid_argument("polynomial response: no coefficients");
        } else if constexpr (std::is_same_v<T, HeatDiffusionResponse> ||
                             std::is_same_v<T, InverseHeatResponse>) {
          if (!(r.tau > 0.0))
            throw std::invalid_argument("exponential response: tau must be positive");
        } else {
          if (r.order < 1)
            throw std::invalid_argument("power response: order must be positive");
        }
      },
      fr);
}

double response_at(const FrequencyResponse& fr, double lambda) {
  return std::visit(
      [lambda](const auto& r) -> double {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, PolynomialResponse>) {
          double acc = 0.0;  // Horner
          for (auto it = r.coefficients.rbegin(); it != r.coefficients.rend(); ++it)
            acc = acc * lambda + *it;
          return acc;
        } else if constexpr (std::is_same_v<T, HeatDiffusionResponse>) {
          return std::exp(-r.tau * lambda);
        } else if constexpr (std::is_same_v<T, InverseHeatResponse>) {
          return std::exp(r.tau * lambda);
        } else {
          return std::pow(1.0 - r.scale * lambda, r.order);
        }
      },
      fr);
}

std::string describe(const FrequencyResponse& fr) {
  std::ostringstream out;
  std::visit(
      [&out](const auto& r) {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, PolynomialResponse>) {
          out << "poly(degree=" << r.coefficients.size() - 1 << ")";
        } else if constexpr (std::is_same_v<T, HeatDiffusionResponse>) {
          out << "heat(tau=" << r.tau << ")";
        } else if constexpr (std::is_same_v<T, InverseHeatResponse>) {
          out << "inverse_heat(tau=" << r.tau << ")";
        } else {
          out << "power(scale=" << r.scale << ", order=" << r.order << ")";
        }
      },
      fr);
  return out.str();
}

FrequencyResponse response_from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  FrequencyResponse fr;
  if (kind == "heat") {
    fr = HeatDiffusionResponse{j.at("tau").get<double>()};
  } else if (kind == "inverse_heat") {
    fr = InverseHeatResponse{j.at("tau").get<double>()};
  } else if (kind == "poly") {
    fr = PolynomialResponse{j.at("coefficients").get<std::vector<double>>()};
  } else if (kind == "power") {
    fr = PowerLowPassResponse{j.at("scale").get<double>(), j.at("order").get<int>()};
  } else {
    throw std::invalid_argument("filter config: unknown kind '" + kind + "'");
  }
  validate(fr);
  return fr;
}

nlohmann::json response_to_json(const FrequencyResponse& fr) {
  nlohmann::json j;
  std::visit(
      [&j](const auto& r) {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, PolynomialResponse>) {
          j = {{"kind", "poly"}, {"coefficients", r.coefficients}};
        } else if constexpr (std::is_same_v<T, HeatDiffusionResponse>) {
          j = {{"kind", "heat"}, {"tau", r.tau}};
        } else if constexpr (std::is_same_v<T, InverseHeatResponse>) {
          j = {{"kind", "inverse_heat"}, {"tau", r.tau}};
        } else {
          j = {{"kind", "power"}, {"scale", r.scale}, {"order", r.order}};
        }
      },
      fr);
  return j;
}

FilterSpectrum evaluate_response(const FrequencyResponse& fr, const SpectralBasis& basis) {
  validate(fr);
  const int n = basis.size();
  FilterSpectrum spectrum;
  spectrum.responses.resize(n);
  for (int i = 0; i < n; ++i)
    spectrum.responses(i) = response_at(fr, basis.eigenvalues(i));

  spectrum.magnitude_order.resize(n);
  std::iota(spectrum.magnitude_order.begin(), spectrum.magnitude_order.end(), 0);
  std::stable_sort(spectrum.magnitude_order.begin(), spectrum.magnitude_order.end(),
                   [&](int a, int b) {
                     const double ma = std::abs(spectrum.responses(a));
                     const double mb = std::abs(spectrum.responses(b));
                     if (ma != mb) return ma > mb;
                     return a < b;  // tie-break: ascending eigenvalue index
                   });

  spectrum.distinct = true;
  for (int k = 0; k + 1 < n; ++k) {
    const double hi = std::abs(spectrum.responses(spectrum.magnitude_order[k]));
    const double lo = std::abs(spectrum.responses(spectrum.magnitude_order[k + 1]));
    if (hi - lo <= 1e-12) {
      spectrum.distinct = false;
      break;
    }
  }
  return spectrum;
}

Matrix apply_filter(const SpectralBasis& basis, const FilterSpectrum& spectrum,
                    const Matrix& input) {
  if (spectrum.size() != basis.size())
    throw std::invalid_argument("apply_filter: spectrum does not match basis");
  if (input.rows() != basis.size())
    throw std::invalid_argument("apply_filter: input row count does not match basis");
  return basis.eigenvectors *
         (spectrum.responses.asDiagonal() * (basis.eigenvectors.transpose() * input));
}

LowPassMetrics low_pass_metrics(const FilterSpectrum& spectrum, int cutoff) {
  const int n = spectrum.size();
  if (cutoff < 1 || cutoff >= n)
    throw std::invalid_argument("low_pass_metrics: cutoff must lie in [1, N)");
  if (!spectrum.distinct)
    throw std::invalid_argument("low_pass_metrics: ambiguous ordering, tied response magnitudes");

  const auto mag = [&](int i) { return std::abs(spectrum.responses(i)); };

  // Frequency-axis ratio: bulk maximum over passband minimum.
  double pass_min = mag(0);
  for (int i = 1; i < cutoff; ++i) pass_min = std::min(pass_min, mag(i));
  double bulk_max = 0.0;
  for (int i = cutoff; i < n; ++i) bulk_max = std::max(bulk_max, mag(i));

  LowPassMetrics metrics;
  metrics.eta_k = bulk_max / pass_min;
  metrics.is_k_low_pass = metrics.eta_k < 1.0;

  // Magnitude-sorted axis: order statistics straight from the permutation.
  const double kth = mag(spectrum.magnitude_order[cutoff - 1]);
  const double next = mag(spectrum.magnitude_order[cutoff]);
  metrics.eta = next / kth;

  const double top = mag(spectrum.magnitude_order[0]);
  metrics.flatness = (top * top) / (kth * kth);
  return metrics;
}

}  // namespace gspdet
