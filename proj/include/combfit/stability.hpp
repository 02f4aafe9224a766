#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

namespace combfit::stability {

struct FractionalSeries {
  std::vector<double> y;  // fractional frequency samples
  double tau0 = 1.0;      // sampling interval, s
};

struct AllanPoint {
  double tau = 0.0;
  double sigma_y = 0.0;
  std::size_t count = 0;  // number of overlapping second differences
};

// Overlapping Allan deviation,
//   sigma_y^2(m tau0) = 1 / (2 m^2 (M - 2m + 1)) * sum_j [sum_{i=j}^{j+m-1} (y_{i+m} - y_i)]^2.
// Each tau must be an integer multiple of tau0 and at most half the span.
std::vector<AllanPoint> allan_deviation(const FractionalSeries& series, const std::vector<double>& taus);

// Octave-spaced averaging times tau0 * 2^k up to half the span.
std::vector<double> octave_taus(const FractionalSeries& series);

struct LorentzianFit {
  double center = 0.0;
  double fwhm = 0.0;
  double amplitude = 0.0;
  double floor = 0.0;
  double sigma_center = 0.0;
  int iterations = 0;
  double rss = 0.0;
};

struct LorentzianOptions {
  int max_iterations = 200;
  double initial_damping = 1e-3;
  double damping_up = 10.0;
  double damping_down = 10.0;
  double tolerance = 1e-15;
};

// Levenberg-Marquardt fit of floor + amplitude / (1 + (2 (f - center)/fwhm)^2).
// sigma_center uses the residual variance RSS / (N - 4).
LorentzianFit lorentzian_center(const std::vector<std::pair<double, double>>& spectrum,
                                const LorentzianOptions& options = {});

struct ThermalPoint {
  double temperature_c = 0.0;
  double beat_hz = 0.0;
  double sigma_hz = 1.0;
};

struct ThermalFitResult {
  double t_c = 0.0;                  // degC, extremum of the resonance frequency
  double curvature_e9 = 0.0;         // delta l / l = curvature (T - T_c)^2, units 1e-9 / K^2
  double quadratic_coefficient = 0;  // d^2/dT^2 / 2 of beat/f_opt, 1/K^2
  double residual_rms_hz = 0.0;
};

// Quadratic fit of beat/f_opt against temperature. The cavity resonance
// follows -delta l / l, so positive curvature means a frequency maximum.
ThermalFitResult fit_zero_expansion(const std::vector<ThermalPoint>& points, double f_opt_hz);

// delta l / l = curvature * (T - T_c)^2, default curvature 1e-9 / K^2.
double ule_fractional_length(double temperature_c, double t_c, double curvature = 1e-9);

}  // namespace combfit::stability
