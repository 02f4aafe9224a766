#include "combfit/astro_calib.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "combfit/constants.hpp"
#include "combfit/errors.hpp"
#include "combfit/linear_lsq.hpp"

namespace combfit::calib {

namespace {

constexpr std::size_t max_filtered_modes = 10'000'000;

}  // namespace

FilteredComb::FilteredComb(CombParams base, int m, FilterBounds bounds) : base_(base), m_(m) {
  if (bounds.min_m < 1 || bounds.max_m < bounds.min_m) {
    throw domain_error("filter bounds must satisfy 1 <= min <= max");
  }
  if (m < bounds.min_m || m > bounds.max_m) {
    throw domain_error("filter order m=" + std::to_string(m) + " outside [" + std::to_string(bounds.min_m) + ", " +
                       std::to_string(bounds.max_m) + "]");
  }
}

std::vector<ExactFrequency> filter_modes(const CombParams& comb, int m, Band band, std::optional<std::int64_t> n0) {
  if (m < 1) {
    throw domain_error("filter order m must be >= 1");
  }
  if (band.high < band.low) {
    throw domain_error("band upper edge below lower edge");
  }
  const auto lo = (band.low - comb.f_ceo()).divmod(comb.f_rep());
  const auto hi = (band.high - comb.f_ceo()).divmod(comb.f_rep());
  wide_int n_lo = lo.remainder == ExactFrequency{} ? lo.quotient : lo.quotient + 1;
  n_lo = std::max<wide_int>(n_lo, 0);
  const wide_int n_hi = hi.quotient;
  if (n_hi < n_lo) {
    throw domain_error("no comb mode inside band [" + band.low.to_string() + ", " + band.high.to_string() + "] Hz");
  }
  const wide_int anchor = n0 ? *n0 : n_lo;
  wide_int offset = (anchor - n_lo) % m;
  if (offset < 0) {
    offset += m;
  }
  const wide_int first = n_lo + offset;
  if (first > n_hi) {
    throw domain_error("no filtered mode (m=" + std::to_string(m) + ") inside band [" + band.low.to_string() + ", " +
                       band.high.to_string() + "] Hz");
  }
  const wide_int count = (n_hi - first) / m + 1;
  if (count > static_cast<wide_int>(max_filtered_modes)) {
    throw domain_error("band holds " + to_decimal_string(count) + " filtered modes, more than the supported " +
                       std::to_string(max_filtered_modes));
  }
  std::vector<ExactFrequency> out;
  out.reserve(static_cast<std::size_t>(count));
  const ExactFrequency step = comb.f_rep().scaled(m);
  ExactFrequency f = comb.f_rep().scaled(first) + comb.f_ceo();
  for (wide_int i = 0; i < count; ++i) {
    out.push_back(f);
    f += step;
  }
  return out;
}

std::vector<ExactFrequency> filter_modes(const FilteredComb& comb, Band band, std::optional<std::int64_t> n0) {
  return filter_modes(comb.base(), comb.m(), band, n0);
}

std::vector<std::size_t> associate_by_order(const std::vector<PixelLine>& lines, std::size_t truth_count,
                                            const AssociationOptions& options) {
  std::vector<std::size_t> index(lines.size());
  if (lines.empty()) {
    return index;
  }
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (!(lines[i].pixel > lines[i - 1].pixel)) {
      throw domain_error("line pixels must be distinct");
    }
  }
  index[0] = options.first_truth_index;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const double gap = lines[i].pixel - lines[i - 1].pixel;
    double local = 0.0;
    if (i >= 2) {
      local = lines[i - 1].pixel - lines[i - 2].pixel;
    }
    if (i + 1 < lines.size()) {
      const double next = lines[i + 1].pixel - lines[i].pixel;
      local = local > 0.0 ? std::min(local, next) : next;
    }
    std::size_t step = 1;
    if (local > 0.0 && gap > options.gap_ratio * local) {
      const double ratio = gap / local;
      const double whole = std::round(ratio);
      if (std::fabs(ratio - whole) > 0.25) {
        throw domain_error("ambiguous line association at pixel " + std::to_string(lines[i].pixel) +
                           ": gap is " + std::to_string(ratio) + " times the local spacing");
      }
      step = static_cast<std::size_t>(whole);
    }
    index[i] = index[i - 1] + step;
  }
  if (index.back() >= truth_count) {
    throw domain_error("line association needs " + std::to_string(index.back() + 1) + " truth frequencies, only " +
                       std::to_string(truth_count) + " supplied");
  }
  return index;
}

double WavelengthSolution::offset_hz(double pixel) const {
  const double u = (pixel - pixel_center) / pixel_scale;
  double acc = 0.0;
  for (auto it = coefficients.rbegin(); it != coefficients.rend(); ++it) {
    acc = acc * u + *it;
  }
  return acc;
}

double WavelengthSolution::frequency_hz(double pixel) const { return reference.hz() + offset_hz(pixel); }

double WavelengthSolution::dispersion_hz_per_pixel(double pixel) const {
  const double u = (pixel - pixel_center) / pixel_scale;
  double acc = 0.0;
  for (std::size_t k = coefficients.size(); k-- > 1;) {
    acc = acc * u + static_cast<double>(k) * coefficients[k];
  }
  return acc / pixel_scale;
}

WavelengthSolution fit_wavelength_solution(std::vector<PixelLine> lines, std::vector<ExactFrequency> truth,
                                           int degree, const AssociationOptions& options) {
  if (degree < 1) {
    throw domain_error("wavelength solution degree must be >= 1");
  }
  if (lines.size() < static_cast<std::size_t>(degree) + 2) {
    throw domain_error("degree " + std::to_string(degree) + " needs at least " + std::to_string(degree + 2) +
                       " lines, got " + std::to_string(lines.size()));
  }
  for (const auto& l : lines) {
    if (!std::isfinite(l.pixel) || !(l.sigma_pixel > 0.0) || !std::isfinite(l.sigma_pixel)) {
      throw domain_error("lines need finite pixels and positive sigma_pixel");
    }
  }
  std::sort(lines.begin(), lines.end(), [](const PixelLine& a, const PixelLine& b) { return a.pixel < b.pixel; });
  if (options.frequency_increases_with_pixel) {
    std::sort(truth.begin(), truth.end());
  } else {
    std::sort(truth.begin(), truth.end(), std::greater<>());
  }
  const auto match = associate_by_order(lines, truth.size(), options);

  const std::size_t n = lines.size();
  WavelengthSolution sol;
  sol.pixel_min = lines.front().pixel;
  sol.pixel_max = lines.back().pixel;
  sol.pixel_center = 0.5 * (sol.pixel_min + sol.pixel_max);
  sol.pixel_scale = 0.5 * (sol.pixel_max - sol.pixel_min);
  sol.reference = truth[match[n / 2]];
  sol.n_lines = n;

  const auto rows = static_cast<Eigen::Index>(n);
  const auto cols = static_cast<Eigen::Index>(degree + 1);
  Eigen::MatrixXd design(rows, cols);
  Eigen::VectorXd data(rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& line = lines[static_cast<std::size_t>(i)];
    const double u = (line.pixel - sol.pixel_center) / sol.pixel_scale;
    double power = 1.0;
    for (Eigen::Index k = 0; k < cols; ++k) {
      design(i, k) = power;
      power *= u;
    }
    data(i) = static_cast<double>((truth[match[static_cast<std::size_t>(i)]] - sol.reference).millihertz()) * 1e-3;
  }

  // First pass propagates pixel errors with the mean dispersion, the second
  // with the local slope of the first solution.
  const double mean_dispersion = std::fabs(data(rows - 1) - data(0)) / (sol.pixel_max - sol.pixel_min);
  if (!(mean_dispersion > 0.0)) {
    throw domain_error("wavelength solution: truth frequencies do not vary across the lines");
  }
  Eigen::VectorXd sigma(rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    sigma(i) = lines[static_cast<std::size_t>(i)].sigma_pixel * mean_dispersion;
  }
  auto fit = numeric::weighted_linear_fit(design, data, sigma);
  sol.coefficients.assign(fit.params.data(), fit.params.data() + fit.params.size());
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& line = lines[static_cast<std::size_t>(i)];
    const double local = std::fabs(sol.dispersion_hz_per_pixel(line.pixel));
    sigma(i) = line.sigma_pixel * (local > 0.0 ? local : mean_dispersion);
  }
  fit = numeric::weighted_linear_fit(design, data, sigma);
  sol.coefficients.assign(fit.params.data(), fit.params.data() + fit.params.size());

  // Strict monotonicity over the fitted range, checked on a dense grid that
  // includes every line position.
  const int direction = options.frequency_increases_with_pixel ? 1 : -1;
  auto check = [&](double pixel) {
    const double slope = sol.dispersion_hz_per_pixel(pixel);
    if (!(slope * direction > 0.0)) {
      throw domain_error("wavelength solution is not monotonic: dispersion " + std::to_string(slope) +
                         " Hz/pixel at pixel " + std::to_string(pixel));
    }
  };
  constexpr int grid = 4096;
  for (int k = 0; k <= grid; ++k) {
    check(sol.pixel_min + (sol.pixel_max - sol.pixel_min) * k / grid);
  }
  for (const auto& line : lines) {
    check(line.pixel);
  }

  double sum_sq = 0.0;
  sol.residuals.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    LineResidual r;
    r.pixel = lines[i].pixel;
    r.truth = truth[match[i]];
    r.residual_hz = fit.residuals(static_cast<Eigen::Index>(i));
    r.velocity_m_s = velocity_uncertainty(r.residual_hz, r.truth.hz());
    sum_sq += r.velocity_m_s * r.velocity_m_s;
    sol.residuals.push_back(r);
  }
  sol.rms_velocity = std::sqrt(sum_sq / static_cast<double>(n));
  return sol;
}

double velocity_uncertainty(double delta_f_hz, double f_hz) {
  if (!(f_hz > 0.0)) {
    throw domain_error("velocity conversion needs a positive frequency");
  }
  return constants::speed_of_light * delta_f_hz / f_hz;
}

}  // namespace combfit::calib
