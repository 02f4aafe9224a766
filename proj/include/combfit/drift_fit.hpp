#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "combfit/exact_frequency.hpp"
#include "combfit/sensitivity.hpp"

namespace combfit::drift {

// Drift rates are carried in units of 1e-15 per year throughout this module
// (suffix _e15) so that typical values are O(1).
inline constexpr double e15 = 1e-15;

// One measured drift rate of ln(f_Cs / f_T) with its one-sigma uncertainty
// and the sensitivity coefficient A linking it to alpha.
struct DriftMeasurement {
  std::string transition_id;
  double a = 0.0;
  double b_e15 = 0.0;
  double sigma_e15 = 0.0;
  std::optional<std::pair<double, double>> epoch_span;
};

// Joint maximum-likelihood estimate of x = d ln(alpha)/dt and
// y = d ln(mu_Cs/mu_B)/dt under the model y + A_i x = b_i.
struct DriftSolution {
  double x_e15 = 0.0;
  double y_e15 = 0.0;
  double sigma_x_e15 = 0.0;
  double sigma_y_e15 = 0.0;
  double correlation_xy = 0.0;
  double chi2 = 0.0;
  std::size_t n_points = 0;
};

// Weighted sums B1..B6 over the measurements:
// B1 = sum 1/s^2, B2 = sum A^2/s^2, B3 = sum b^2/s^2,
// B4 = sum A/s^2, B5 = sum b/s^2,   B6 = sum A b/s^2.
struct NormalSums {
  double b1 = 0, b2 = 0, b3 = 0, b4 = 0, b5 = 0, b6 = 0;
  double determinant = 0;  // B1 B2 - B4^2, accumulated in centred form
};

NormalSums normal_sums(const std::vector<DriftMeasurement>& measurements);

// 2 + L_hfs(Cs) - L_opt(T). The 2 is the alpha^2 scaling of a hyperfine
// interval relative to Ry.
double build_coefficient(const sensitivity::TransitionRecord& transition, double cs_hfs_sensitivity);
double build_coefficient(const sensitivity::TransitionRecord& transition,
                         const sensitivity::CasimirResult& cs_reference);

// Closed-form minimum of R^2 = sum (y + A_i x - b_i)^2 / sigma_i^2:
//   x = (B1 B6 - B4 B5) / D,  y = (B2 B5 - B4 B6) / D,
//   sigma_x = sqrt(B1 / D),   sigma_y = sqrt(B2 / D),  rho = -B4 / sqrt(B1 B2).
// Throws domain_error("cannot disentangle x from y") when every A_i is equal.
DriftSolution fit_drift(const std::vector<DriftMeasurement>& measurements);

// R^2(x, y) for the same model, used for reporting and cross-checks.
double chi_square(const std::vector<DriftMeasurement>& measurements, double x_e15, double y_e15);

struct TimeSeriesPoint {
  double epoch = 0.0;  // decimal year
  ExactFrequency value;
  double sigma_hz = 0.0;
};

struct RelativeDrift {
  double rate_per_yr = 0.0;   // d ln f / dt
  double sigma_per_yr = 0.0;
  double mean_hz = 0.0;
  double rate_e15() const { return rate_per_yr / e15; }
  double sigma_e15() const { return sigma_per_yr / e15; }
};

// Weighted linear regression of (f - mean)/mean against epoch.
RelativeDrift fit_relative_drift(const std::vector<TimeSeriesPoint>& series);

// An absolute frequency measured in Hz is a ratio f_T/f_Cs, so its drift
// enters the joint fit as b = -d ln f_T/dt.
DriftMeasurement to_measurement(const std::string& transition_id, double a, const RelativeDrift& drift);

// Direct optical comparison: d ln(f_num/f_den)/dt = (L_num - L_den) x.
std::pair<double, double> alpha_drift_from_ratio(double rate_e15, double sigma_e15, double l_numerator,
                                               double l_denominator);

struct GravitySample {
  double epoch = 0.0;  // decimal year
  double fractional_shift = 0.0;
  double sigma = 0.0;
};

// Delta U(t)/c^2. The default is the annual variation of the solar potential
// along the Earth's orbit, amplitude * cos(2 pi (t - perihelion) / period).
struct PotentialModel {
  double amplitude = 3.3e-10;
  double period_yr = 1.0;
  double perihelion_epoch = 0.01;  // fraction of a year, early January
  std::function<double(double)> custom;  // overrides the sinusoid when set

  double operator()(double epoch) const;
};

struct GravityOptions {
  bool fit_linear_drift = false;
};

struct GravityCouplingFit {
  double k_alpha = 0.0;
  double sigma_k = 0.0;
  double offset = 0.0;
  double drift_per_yr = 0.0;
  double chi2 = 0.0;
};

// Weighted fit shift = k * dU/c^2 + offset [+ drift (t - t_mean)].
GravityCouplingFit fit_gravity_coupling(const std::vector<GravitySample>& samples,
                                        const PotentialModel& model = {}, const GravityOptions& options = {});

// Dataset file: {"schema_version": "1.x", "measurements": [{"transition_id",
// "A" (optional), "b_e15_per_yr", "sigma_e15_per_yr", "epoch_start",
// "epoch_end"}]}. A missing A is resolved through the registry as
// 2 + cs_l_hfs - L_alpha, with cs_l_hfs taken from the file when present.
struct DriftDataset {
  std::string description;
  std::vector<DriftMeasurement> measurements;
};

DriftDataset dataset_from_json(const nlohmann::json& doc, const sensitivity::TransitionRegistry* registry,
                               const std::string& source);
DriftDataset load_dataset(const std::filesystem::path& path, const sensitivity::TransitionRegistry* registry);

// A published d ln(alpha)/dt result, as tabulated with its method tag.
struct AlphaDriftResult {
  int year = 0;
  std::string method;
  std::string reference;
  double x_e15 = 0.0;
  double sigma_e15 = 0.0;
};

// {"schema_version": "1.x", "results": [{"year", "method", "reference",
// "x_e15_per_yr", "sigma_e15_per_yr"}]}
std::vector<AlphaDriftResult> alpha_results_from_json(const nlohmann::json& doc, const std::string& source);

}  // namespace combfit::drift
