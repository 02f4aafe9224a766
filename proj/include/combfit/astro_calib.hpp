#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "combfit/comb.hpp"
#include "combfit/exact_frequency.hpp"

namespace combfit::calib {

// Filter orders accepted by FilteredComb. The defaults are the range of the
// demonstrated Fabry-Perot filter cavity.
struct FilterBounds {
  int min_m = 4;
  int max_m = 60;
};

// A comb seen through a filter cavity whose free spectral range is m * f_rep.
class FilteredComb {
 public:
  FilteredComb(CombParams base, int m, FilterBounds bounds = {});
  const CombParams& base() const { return base_; }
  int m() const { return m_; }
  ExactFrequency spacing() const { return base_.f_rep().scaled(m_); }

 private:
  CombParams base_;
  int m_;
};

struct Band {
  ExactFrequency low;
  ExactFrequency high;  // inclusive
};

// Modes n * f_rep + f_ceo inside the band with n = n0 (mod m). n0 defaults
// to the lowest in-band mode. Throws when no mode survives.
std::vector<ExactFrequency> filter_modes(const CombParams& comb, int m, Band band,
                                         std::optional<std::int64_t> n0 = std::nullopt);
std::vector<ExactFrequency> filter_modes(const FilteredComb& comb, Band band,
                                         std::optional<std::int64_t> n0 = std::nullopt);

struct PixelLine {
  double pixel = 0.0;
  double sigma_pixel = 0.0;
};

struct AssociationOptions {
  bool frequency_increases_with_pixel = true;
  std::size_t first_truth_index = 0;  // truth entry matched to the first line in pixel order
  double gap_ratio = 1.5;             // spacing / neighbour spacing that counts as a missing line
};

struct LineResidual {
  double pixel = 0.0;
  ExactFrequency truth;
  double residual_hz = 0.0;  // truth - model
  double velocity_m_s = 0.0;
};

// Frequency(pixel) = reference + sum_k coefficients[k] * u^k, with
// u = (pixel - pixel_center) / pixel_scale. Coefficients are in Hz.
struct WavelengthSolution {
  std::vector<double> coefficients;
  ExactFrequency reference;
  double pixel_center = 0.0;
  double pixel_scale = 1.0;
  double pixel_min = 0.0;
  double pixel_max = 0.0;
  double rms_velocity = 0.0;  // m/s
  std::size_t n_lines = 0;
  std::vector<LineResidual> residuals;

  double offset_hz(double pixel) const;  // frequency - reference
  double frequency_hz(double pixel) const;
  double dispersion_hz_per_pixel(double pixel) const;
};

// Pairs every line with a truth frequency by ordering. Pixel gaps wider than
// gap_ratio times the neighbouring spacing skip the corresponding number of
// truth entries; spacings that do not resolve to a whole number of missing
// lines are rejected.
std::vector<std::size_t> associate_by_order(const std::vector<PixelLine>& lines_in_pixel_order,
                                            std::size_t truth_count, const AssociationOptions& options = {});

// Weighted polynomial pixel->frequency fit. Pixel errors are propagated
// through the local dispersion (two passes). Throws when the fitted mapping
// is not strictly monotonic over the fitted pixel range.
WavelengthSolution fit_wavelength_solution(std::vector<PixelLine> lines, std::vector<ExactFrequency> truth,
                                           int degree = 3, const AssociationOptions& options = {});

// c * delta_f / f, m/s.
double velocity_uncertainty(double delta_f_hz, double f_hz);

}  // namespace combfit::calib
