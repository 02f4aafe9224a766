#include "combfit/pulse_model.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <ostream>
#include <string>

#include "combfit/constants.hpp"
#include "combfit/errors.hpp"

namespace combfit::pulse {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

// The FFTW planner is not re-entrant; execution of distinct plans is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

double fractional_part(double x) { return x - std::floor(x); }

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

struct LineFit {
  double f_rep;
  double f_ceo;
};

LineFit fit_lines(const std::vector<CombLine>& lines) {
  const double n = static_cast<double>(lines.size());
  double mean_mode = 0.0;
  double mean_freq = 0.0;
  for (const auto& l : lines) {
    mean_mode += static_cast<double>(l.mode);
    mean_freq += l.frequency;
  }
  mean_mode /= n;
  mean_freq /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  for (const auto& l : lines) {
    const double dx = static_cast<double>(l.mode) - mean_mode;
    sxy += dx * (l.frequency - mean_freq);
    sxx += dx * dx;
  }
  const double slope = sxy / sxx;
  return {slope, mean_freq - slope * mean_mode};
}

}  // namespace

void PulseTrain::validate() const {
  const std::size_t s = envelope.size();
  if (s < 256 || !is_power_of_two(s)) {
    throw domain_error("envelope needs a power-of-two sample count >= 256, got " + std::to_string(s));
  }
  if (!(period > 0.0) || !(time_unit_s > 0.0)) {
    throw domain_error("pulse period and time unit must be positive");
  }
  if (!(carrier_frequency >= 0.0) || carrier_frequency >= static_cast<double>(s) / (2.0 * period)) {
    throw domain_error("carrier frequency violates the Nyquist limit S/(2T)");
  }
}

PulseTrain make_gaussian_train(const GaussianPulse& p) {
  PulseTrain train;
  train.period = p.period;
  train.carrier_frequency = p.carrier_frequency;
  train.carrier_phase = p.carrier_phase;
  train.time_unit_s = p.time_unit_s;
  train.envelope.resize(p.samples);
  const double a = 2.0 * std::numbers::ln2 / (p.fwhm * p.fwhm);
  for (std::size_t i = 0; i < p.samples; ++i) {
    const double t = static_cast<double>(i) * p.period / static_cast<double>(p.samples);
    complex value{};
    for (int image = -2; image <= 2; ++image) {
      const double dt = t - p.center - image * p.period;
      value += std::polar(p.amplitude * std::exp(-a * dt * dt), p.chirp * dt * dt);
    }
    train.envelope[i] = value;
  }
  train.validate();
  return train;
}

double carrier_envelope_phase_slip(const PulseTrain& train) {
  return two_pi * fractional_part(train.carrier_frequency * train.period);
}

SampledField synthesize(const PulseTrain& train, int periods) {
  train.validate();
  if (periods < 1) {
    throw domain_error("synthesize needs at least one period");
  }
  const std::size_t s = train.samples_per_period();
  const std::size_t total = s * static_cast<std::size_t>(periods);
  SampledField field;
  field.sample_rate = train.sample_rate();
  field.period = train.period;
  field.time_unit_s = train.time_unit_s;
  field.phase_slip = carrier_envelope_phase_slip(train);
  field.samples.resize(total);
  const double cycles_per_sample = train.carrier_frequency * train.period / static_cast<double>(s);
  for (std::size_t j = 0; j < total; ++j) {
    const double cycles = fractional_part(cycles_per_sample * static_cast<double>(j));
    const complex carrier = std::polar(1.0, -(two_pi * cycles + train.carrier_phase));
    field.samples[j] = 2.0 * (train.envelope[j % s] * carrier).real();
  }
  return field;
}

std::vector<complex> real_dft(const std::vector<double>& samples) {
  const int n = static_cast<int>(samples.size());
  if (n == 0) {
    return {};
  }
  std::vector<double> in(samples);
  std::vector<complex> out(static_cast<std::size_t>(n / 2 + 1));
  fftw_plan plan;
  {
    std::lock_guard lock(planner_mutex());
    plan = fftw_plan_dft_r2c_1d(n, in.data(), reinterpret_cast<fftw_complex*>(out.data()), FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
  // FFTW uses exp(-i...), the same sign as the documented convention.
  return out;
}

CombSpectrum spectrum(const SampledField& field, const SpectrumOptions& options) {
  const std::size_t n = field.samples.size();
  if (n < 4 || !(field.sample_rate > 0.0) || !(field.period > 0.0)) {
    throw domain_error("spectrum needs a non-empty field with positive sample rate and period");
  }
  const double spp_exact = field.sample_rate * field.period;
  const double spp_round = std::round(spp_exact);
  if (spp_round < 1.0 || std::fabs(spp_exact - spp_round) > 1e-9 * spp_round) {
    throw domain_error("period is not an integer number of samples");
  }
  const auto spp = static_cast<std::size_t>(spp_round);
  if (n % spp != 0) {
    throw domain_error("field spans a non-integer number of periods (" + std::to_string(n) + " samples, " +
                       std::to_string(spp) + " per period); refusing to window");
  }
  const std::size_t bins_per_mode = n / spp;
  const double bin = field.sample_rate / static_cast<double>(n);
  const double f_rep_nominal = 1.0 / field.period;

  const auto dft = real_dft(field.samples);
  const std::size_t last = n / 2 - 1;  // skip DC and Nyquist bins
  auto mag = [&](std::size_t k) { return std::abs(dft[k]); };
  auto pow_at = [&](std::size_t k) { return std::norm(dft[k]); };

  std::size_t strongest = 1;
  for (std::size_t k = 1; k <= last; ++k) {
    if (pow_at(k) > pow_at(strongest)) {
      strongest = k;
    }
  }
  const double floor = options.prune_floor * pow_at(strongest);
  // Power near Nyquist means the band-limited sampling has already aliased.
  for (std::size_t k = last - last / 20; k <= last; ++k) {
    if (pow_at(k) > 1e-8 * pow_at(strongest)) {
      throw domain_error("spectrum reaches the Nyquist limit at " + std::to_string(static_cast<double>(k) * bin) +
                         "; increase samples per period");
    }
  }

  CombSpectrum out;
  out.resolution = bin;
  out.time_unit_s = field.time_unit_s;

  auto add_line = [&](std::size_t k) {
    double delta = 0.0;
    if (k > 0 && k < last + 1) {
      const double a = mag(k - 1);
      const double b = mag(k);
      const double c = mag(k + 1);
      const double denom = a - 2.0 * b + c;
      if (denom < 0.0) {
        delta = std::clamp(0.5 * (a - c) / denom, -0.5, 0.5);
      }
    }
    CombLine line;
    line.frequency = (static_cast<double>(k) + delta) * bin;
    line.amplitude = dft[k] / static_cast<double>(n);
    out.lines.push_back(line);
  };

  if (bins_per_mode == 1) {
    for (std::size_t k = 1; k <= last; ++k) {
      if (pow_at(k) >= floor && pow_at(k) > 0.0) {
        add_line(k);
      }
    }
  } else {
    const auto m = static_cast<long>(bins_per_mode);
    const long k0 = static_cast<long>(strongest);
    const long j_min = -(k0 / m) - 1;
    const long j_max = (static_cast<long>(last) - k0) / m + 1;
    for (long j = j_min; j <= j_max; ++j) {
      const long lo = std::max<long>(k0 + j * m - m / 2, 1);
      const long hi = std::min<long>(k0 + j * m - m / 2 + m - 1, static_cast<long>(last));
      if (lo > hi) {
        continue;
      }
      auto best = static_cast<std::size_t>(lo);
      for (long k = lo; k <= hi; ++k) {
        if (pow_at(static_cast<std::size_t>(k)) > pow_at(best)) {
          best = static_cast<std::size_t>(k);
        }
      }
      const bool local_max = pow_at(best) >= pow_at(best - 1) && pow_at(best) >= pow_at(best + 1);
      if (local_max && pow_at(best) >= floor && pow_at(best) > 0.0) {
        add_line(best);
      }
    }
  }

  // Mode numbers relative to the strongest line, then a least-squares comb fit.
  const auto ref = std::max_element(out.lines.begin(), out.lines.end(),
                                    [](const CombLine& a, const CombLine& b) { return a.power() < b.power(); });
  const double f_ref = ref->frequency;
  const long n_ref = static_cast<long>(std::floor(f_ref / f_rep_nominal));
  for (auto& line : out.lines) {
    line.mode = n_ref + std::lround((line.frequency - f_ref) / f_rep_nominal);
  }
  if (out.lines.size() >= 2) {
    const LineFit fit = fit_lines(out.lines);
    out.f_rep = fit.f_rep;
    out.f_ceo = fit.f_ceo;
  } else {
    out.f_rep = f_rep_nominal;
    out.f_ceo = f_ref - static_cast<double>(n_ref) * f_rep_nominal;
  }
  const long shift = static_cast<long>(std::floor(out.f_ceo / out.f_rep));
  if (shift != 0) {
    out.f_ceo -= static_cast<double>(shift) * out.f_rep;
    for (auto& line : out.lines) {
      line.mode += shift;
    }
  }
  return out;
}

std::vector<double> nonlinear_phase(const PulseTrain& train, const KerrMedium& medium, double peak_power) {
  if (medium.length < 0.0) {
    throw domain_error("Kerr medium length must be non-negative");
  }
  if (!(medium.effective_area > 0.0)) {
    throw domain_error("Kerr medium effective area must be positive");
  }
  const double omega_c = two_pi * train.carrier_frequency / train.time_unit_s;
  const double scale = -medium.n2 * peak_power / medium.effective_area * omega_c * medium.length /
                       constants::speed_of_light;
  std::vector<double> phase(train.envelope.size());
  for (std::size_t i = 0; i < phase.size(); ++i) {
    phase[i] = scale * std::norm(train.envelope[i]);
  }
  return phase;
}

double peak_nonlinear_phase(const PulseTrain& train, const KerrMedium& medium, double peak_power) {
  double peak = 0.0;
  for (double p : nonlinear_phase(train, medium, peak_power)) {
    peak = std::max(peak, std::fabs(p));
  }
  return peak;
}

PulseTrain apply_spm(const PulseTrain& train, const KerrMedium& medium, double peak_power) {
  const auto phase = nonlinear_phase(train, medium, peak_power);
  PulseTrain out = train;
  if (medium.n2 == 0.0 || medium.length == 0.0 || peak_power == 0.0) {
    return out;
  }
  for (std::size_t i = 0; i < phase.size(); ++i) {
    out.envelope[i] *= std::polar(1.0, phase[i]);
  }
  return out;
}

F2fResult f_2f_offset(const CombSpectrum& comb) {
  if (comb.lines.size() < 2) {
    throw domain_error("octave required: comb has fewer than two lines");
  }
  const auto [lo, hi] = std::minmax_element(comb.lines.begin(), comb.lines.end(),
                                            [](const CombLine& a, const CombLine& b) {
                                              return a.frequency < b.frequency;
                                            });
  if (hi->frequency < 2.0 * lo->frequency) {
    throw domain_error("octave required: comb spans " + std::to_string(lo->frequency) + " to " +
                       std::to_string(hi->frequency));
  }
  std::map<long, double> by_mode;
  for (const auto& line : comb.lines) {
    by_mode[line.mode] = line.frequency;
  }
  std::vector<double> beats;
  for (const auto& [mode, freq] : by_mode) {
    const auto partner = by_mode.find(2 * mode);
    if (mode > 0 && partner != by_mode.end()) {
      beats.push_back(2.0 * freq - partner->second);
    }
  }
  if (beats.empty()) {
    throw domain_error("octave required: no (n, 2n) line pairs present");
  }
  std::vector<double> sorted = beats;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t mid = sorted.size() / 2;
  const double median = sorted.size() % 2 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
  double spread = 0.0;
  for (double b : beats) {
    spread = std::max(spread, std::fabs(b - median));
  }
  return {median, beats.size(), spread};
}

double spectral_width_3db(const CombSpectrum& comb) {
  if (comb.lines.empty()) {
    return 0.0;
  }
  double peak = 0.0;
  for (const auto& l : comb.lines) {
    peak = std::max(peak, l.power());
  }
  double lo = 0.0;
  double hi = 0.0;
  bool first = true;
  for (const auto& l : comb.lines) {
    if (l.power() >= 0.5 * peak) {
      if (first) {
        lo = l.frequency;
        first = false;
      }
      hi = l.frequency;
    }
  }
  return hi - lo;
}

void write_spectrum_csv(std::ostream& out, const CombSpectrum& comb) {
  double peak = 0.0;
  for (const auto& l : comb.lines) {
    peak = std::max(peak, l.power());
  }
  out << "frequency_hz,power_db,phase_rad\n";
  char buf[128];
  for (const auto& l : comb.lines) {
    std::snprintf(buf, sizeof buf, "%.17g,%.6f,%.9f\n", l.frequency / comb.time_unit_s,
                  10.0 * std::log10(l.power() / peak), std::arg(l.amplitude));
    out << buf;
  }
}

}  // namespace combfit::pulse
