#pragma once

#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "gspdet/graph.hpp"

namespace gspdet {

// Frequency response families. Exponential responses are always evaluated
// through the spectral basis, never by series expansion.

struct PolynomialResponse {
  std::vector<double> coefficients;  // h(x) = sum_t coefficients[t] * x^t
};

struct HeatDiffusionResponse {
  double tau = 1.0;  // h(x) = exp(-tau x), tau > 0
};

struct InverseHeatResponse {
  double tau = 1.0;  // h(x) = exp(tau x), tau > 0
};

struct PowerLowPassResponse {
  double scale = 0.5;  // h(x) = (1 - scale x)^order
  int order = 1;
};

using FrequencyResponse = std::variant<PolynomialResponse, HeatDiffusionResponse,
                                       InverseHeatResponse, PowerLowPassResponse>;

void validate(const FrequencyResponse& fr);
double response_at(const FrequencyResponse& fr, double lambda);
std::string describe(const FrequencyResponse& fr);

// Config form: {"kind": "heat"|"inverse_heat"|"poly"|"power", ...params}.
FrequencyResponse response_from_json(const nlohmann::json& j);
nlohmann::json response_to_json(const FrequencyResponse& fr);

// Responses evaluated on a basis, together with the magnitude ordering used
// throughout: magnitude_order[k] is the index (into the ascending-eigenvalue
// axis) of the (k+1)-th largest |response|; equal magnitudes are ordered by
// ascending eigenvalue index.
struct FilterSpectrum {
  Vector responses;                // aligned with basis.eigenvalues
  std::vector<int> magnitude_order;
  bool distinct = false;           // all magnitudes pairwise > 1e-12 apart

  int size() const { return static_cast<int>(responses.size()); }
};

FilterSpectrum evaluate_response(const FrequencyResponse& fr, const SpectralBasis& basis);

// V diag(responses) V^T X.
Matrix apply_filter(const SpectralBasis& basis, const FilterSpectrum& spectrum,
                    const Matrix& input);

// Passband diagnostics for a cutoff: eta_k compares bulk vs passband on the
// frequency axis, eta and flatness on the magnitude-sorted axis.
struct LowPassMetrics {
  double eta_k = 0;    // max_{i>K}|h(l_i)| / min_{i<=K}|h(l_i)|, frequency order
  double eta = 0;      // (K+1)-th vs K-th largest magnitude
  double flatness = 0; // largest / smallest squared passband magnitude
  bool is_k_low_pass = false;
};

// Requires a strict magnitude ordering; throws "ambiguous ordering" on ties.
LowPassMetrics low_pass_metrics(const FilterSpectrum& spectrum, int cutoff);

}  // namespace gspdet
