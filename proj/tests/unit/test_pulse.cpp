#include <doctest.h>

#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

#include "combfit/constants.hpp"
#include "combfit/errors.hpp"
#include "combfit/pulse_model.hpp"

using namespace combfit;
using namespace combfit::pulse;

namespace {

GaussianPulse octave_pulse(double carrier) {
  GaussianPulse p;
  p.samples = 4096;
  p.fwhm = 0.004;
  p.carrier_frequency = carrier;
  return p;
}

// Naive O(N^2) DFT with the same sign convention.
std::vector<complex> naive_dft(const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::vector<complex> out(n / 2 + 1);
  for (std::size_t k = 0; k <= n / 2; ++k) {
    complex acc{};
    for (std::size_t j = 0; j < n; ++j) {
      const double arg = -2.0 * std::numbers::pi * static_cast<double>((j * k) % n) / static_cast<double>(n);
      acc += x[j] * complex(std::cos(arg), std::sin(arg));
    }
    out[k] = acc;
  }
  return out;
}

double circular_distance(double a, double b, double period) {
  double d = std::fmod(std::fabs(a - b), period);
  return std::min(d, period - d);
}

// Medium scaled so that the peak nonlinear phase equals `phi`.
PulseTrain with_spm(const PulseTrain& train, double phi) {
  KerrMedium medium{2.6e-20, 1.0, 1e-12};
  const double unit = peak_nonlinear_phase(train, medium, 1.0);
  return apply_spm(train, medium, phi / unit);
}

}  // namespace

TEST_CASE("phase slip of 0.3 turns gives f_ceo = 0.3 f_rep") {
  const auto train = make_gaussian_train(octave_pulse(600.3));
  CHECK(carrier_envelope_phase_slip(train) / (2.0 * std::numbers::pi) == doctest::Approx(0.3).epsilon(1e-9));
  for (int periods : {4, 10}) {
    const auto s = spectrum(synthesize(train, periods));
    CHECK(s.resolution == doctest::Approx(1.0 / periods));
    CHECK(std::fabs(s.f_ceo / s.f_rep - 0.3) < s.resolution);
    CHECK(std::fabs(s.f_rep - 1.0) < s.resolution);
    double worst_line = 0.0;
    double worst_spacing = 0.0;
    for (std::size_t i = 0; i < s.lines.size(); ++i) {
      const auto& l = s.lines[i];
      worst_line = std::max(worst_line, std::fabs(l.frequency - (l.mode * s.f_rep + s.f_ceo)));
      if (i > 0) {
        worst_spacing = std::max(worst_spacing, std::fabs(l.frequency - s.lines[i - 1].frequency - s.f_rep));
      }
    }
    CHECK(worst_line < s.resolution);
    CHECK(worst_spacing < s.resolution);
  }
}

TEST_CASE("recovered offset follows the carrier for random slips") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const double carrier = 550.0 + 100.0 * u(rng);
    auto p = octave_pulse(carrier);
    p.carrier_phase = 2.0 * std::numbers::pi * u(rng);
    p.chirp = 200.0 * (u(rng) - 0.5);
    const auto s = spectrum(synthesize(make_gaussian_train(p), 10));
    CHECK(circular_distance(s.f_ceo, std::fmod(carrier, 1.0), 1.0) < s.resolution);
  }
}

TEST_CASE("self-phase modulation keeps f_rep and f_ceo") {
  std::mt19937_64 rng(22);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 6; ++trial) {
    auto p = octave_pulse(600.0 + u(rng));
    p.samples = 16384;  // headroom for the broadened spectrum
    p.fwhm = 0.004 + 0.004 * u(rng);
    p.chirp = 100.0 * (u(rng) - 0.5);
    p.center = 0.2 + 0.6 * u(rng);
    const auto train = make_gaussian_train(p);
    const auto base = spectrum(synthesize(train, 10));
    for (double phi : {0.01, 0.1, 1.0, 9.0}) {
      const auto broadened = spectrum(synthesize(with_spm(train, phi), 10));
      CHECK(std::fabs(broadened.f_rep - base.f_rep) < base.resolution);
      CHECK(std::fabs(broadened.f_ceo - base.f_ceo) < base.resolution);
      CHECK(std::fabs(broadened.f_ceo - std::fmod(p.carrier_frequency, 1.0)) < base.resolution);
    }
  }
}

TEST_CASE("self-phase modulation broadens the spectrum") {
  const auto train = make_gaussian_train(octave_pulse(600.3));
  const auto base = spectrum(synthesize(train, 10));
  const auto wide = spectrum(synthesize(with_spm(train, 6.0), 10));
  CHECK(spectral_width_3db(wide) > 2.0 * spectral_width_3db(base));
}

TEST_CASE("nonlinear phase follows the Kerr formula") {
  auto p = octave_pulse(600.3);
  p.time_unit_s = 1e-8;
  const auto train = make_gaussian_train(p);
  const KerrMedium medium{2.6e-20, 0.01, 5e-11};
  const double peak_power = 1e4;
  const auto phase = nonlinear_phase(train, medium, peak_power);
  const double omega = 2.0 * std::numbers::pi * 600.3 / 1e-8;
  for (std::size_t i = 0; i < phase.size(); i += 97) {
    const double intensity = std::norm(train.envelope[i]) * peak_power / medium.effective_area;
    const double expected = -medium.n2 * intensity * omega * medium.length / constants::speed_of_light;
    CHECK(phase[i] == doctest::Approx(expected).epsilon(1e-12));
  }
  CHECK_THROWS_AS(nonlinear_phase(train, {1e-20, -1.0, 1.0}, 1.0), domain_error);
  CHECK_THROWS_AS(nonlinear_phase(train, {1e-20, 1.0, 0.0}, 1.0), domain_error);
  const auto same = apply_spm(train, {0.0, 1.0, 1.0}, 1.0);
  CHECK(same.envelope == train.envelope);
}

TEST_CASE("f-2f beat recovers the offset") {
  SUBCASE("analytic comb") {
    CombSpectrum c;
    c.f_rep = 250e6;
    c.f_ceo = 30e6;
    for (long n = 1000; n <= 2600; ++n) {
      CombLine l;
      l.mode = n;
      l.frequency = n * 250e6 + 30e6;
      l.amplitude = 1.0;
      c.lines.push_back(l);
    }
    const auto r = f_2f_offset(c);
    CHECK(r.pairs == 301);
    CHECK(r.offset == doctest::Approx(30e6).epsilon(1e-9));
    CHECK(r.spread < 1e-3);
  }
  SUBCASE("simulated train") {
    for (double carrier : {600.3, 611.77, 598.05}) {
      const auto s = spectrum(synthesize(make_gaussian_train(octave_pulse(carrier)), 10));
      const auto r = f_2f_offset(s);
      CHECK(r.pairs > 10);
      CHECK(circular_distance(r.offset, std::fmod(carrier, 1.0), 1.0) < s.resolution);
    }
  }
  SUBCASE("sub-octave comb") {
    auto p = octave_pulse(600.3);
    p.fwhm = 0.05;
    const auto s = spectrum(synthesize(make_gaussian_train(p), 10));
    try {
      f_2f_offset(s);
      FAIL("expected an error");
    } catch (const domain_error& e) {
      CHECK(std::string(e.what()).find("octave required") != std::string::npos);
    }
  }
}

TEST_CASE("DFT matches a naive transform and satisfies Parseval") {
  std::mt19937_64 rng(23);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> x(1024);
  for (auto& v : x) {
    v = g(rng);
  }
  const auto fast = real_dft(x);
  const auto slow = naive_dft(x);
  REQUIRE(fast.size() == slow.size());
  double scale = 0.0;
  for (const auto& v : slow) {
    scale = std::max(scale, std::abs(v));
  }
  for (std::size_t k = 0; k < fast.size(); ++k) {
    CHECK(std::abs(fast[k] - slow[k]) < 1e-10 * scale);
  }

  auto parseval = [](const std::vector<double>& samples) {
    const auto X = real_dft(samples);
    const std::size_t n = samples.size();
    double time = 0.0;
    for (double v : samples) {
      time += v * v;
    }
    double freq = std::norm(X[0]) + (n % 2 == 0 ? std::norm(X[n / 2]) : 2.0 * std::norm(X[n / 2]));
    for (std::size_t k = 1; k < (n + 1) / 2; ++k) {
      freq += 2.0 * std::norm(X[k]);
    }
    return std::fabs(freq / static_cast<double>(n) - time) / time;
  };
  CHECK(parseval(x) < 1e-10);
  const auto field = synthesize(with_spm(make_gaussian_train(octave_pulse(600.3)), 3.0), 10);
  CHECK(parseval(field.samples) < 1e-10);
}

TEST_CASE("pulse model input errors") {
  auto p = octave_pulse(600.3);
  p.samples = 1000;
  CHECK_THROWS_AS(make_gaussian_train(p), domain_error);
  p.samples = 128;
  CHECK_THROWS_AS(make_gaussian_train(p), domain_error);
  CHECK_THROWS_AS(make_gaussian_train(octave_pulse(2048.0)), domain_error);
  const auto train = make_gaussian_train(octave_pulse(600.3));
  CHECK_THROWS_AS(synthesize(train, 0), domain_error);

  auto field = synthesize(train, 4);
  field.samples.resize(field.samples.size() - 100);
  CHECK_THROWS_AS(spectrum(field), domain_error);

  // Carrier close to Nyquist folds the spectrum back.
  CHECK_THROWS_AS(spectrum(synthesize(make_gaussian_train(octave_pulse(1990.0)), 4)), domain_error);
}

TEST_CASE("spectrum CSV export") {
  const auto s = spectrum(synthesize(make_gaussian_train(octave_pulse(600.3)), 4));
  std::ostringstream os;
  write_spectrum_csv(os, s);
  std::istringstream is(os.str());
  std::string header;
  std::getline(is, header);
  CHECK(header == "frequency_hz,power_db,phase_rad");
  std::size_t rows = 0;
  for (std::string line; std::getline(is, line);) {
    ++rows;
  }
  CHECK(rows == s.lines.size());
}

TEST_CASE("commensurate and quarter-turn carriers") {
  auto whole = make_gaussian_train(octave_pulse(600.0));
  CHECK(carrier_envelope_phase_slip(whole) == 0.0);
  const auto field = synthesize(whole, 3);
  const std::size_t s = whole.samples_per_period();
  for (std::size_t j = 0; j < s; j += 7) {
    CHECK(field.samples[j + s] == doctest::Approx(field.samples[j]).epsilon(1e-9).scale(1.0));
    CHECK(field.samples[j + 2 * s] == doctest::Approx(field.samples[j]).epsilon(1e-9).scale(1.0));
  }
  const auto quarter = make_gaussian_train(octave_pulse(600.25));
  CHECK(carrier_envelope_phase_slip(quarter) == doctest::Approx(std::numbers::pi / 2).epsilon(1e-12));
}

TEST_CASE("synthesized field matches pointwise evaluation") {
  auto p = octave_pulse(600.3);
  p.fwhm = 0.01;
  p.chirp = 30.0;
  p.carrier_phase = 0.7;
  const auto field = synthesize(make_gaussian_train(p), 8);
  const double a = 2.0 * std::log(2.0) / (p.fwhm * p.fwhm);
  const double dt = 1.0 / static_cast<double>(p.samples);
  for (std::size_t j = 0; j < field.samples.size(); j += 13) {
    const double t = static_cast<double>(j) * dt;
    const double local = std::fmod(t, 1.0);
    complex env{};
    for (int image = -2; image <= 2; ++image) {
      const double x = local - p.center - image;
      env += std::exp(-a * x * x) * std::exp(complex(0.0, p.chirp * x * x));
    }
    const complex carrier = std::exp(complex(0.0, -(2.0 * std::numbers::pi * p.carrier_frequency * t + p.carrier_phase)));
    const double expected = 2.0 * (env * carrier).real();
    CHECK(field.samples[j] == doctest::Approx(expected).epsilon(1e-9).scale(1.0));
  }
}

TEST_CASE("constant envelope gives a single cw line") {
  PulseTrain cw;
  cw.envelope.assign(1024, complex(1.0, 0.0));
  cw.carrier_frequency = 100.3;
  const auto s = spectrum(synthesize(cw, 10));
  REQUIRE(s.lines.size() == 1);
  CHECK(std::fabs(s.lines[0].frequency - 100.3) < s.resolution);
  CHECK(std::abs(s.lines[0].amplitude) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("spectra add linearly") {
  auto p1 = octave_pulse(600.3);
  auto p2 = octave_pulse(600.3);
  p2.center = 0.3;
  p2.amplitude = 0.6;
  p2.chirp = 40.0;
  const auto t1 = make_gaussian_train(p1);
  const auto t2 = make_gaussian_train(p2);
  PulseTrain sum = t1;
  for (std::size_t i = 0; i < sum.envelope.size(); ++i) {
    sum.envelope[i] += t2.envelope[i];
  }
  const auto s1 = spectrum(synthesize(t1, 10));
  const auto s2 = spectrum(synthesize(t2, 10));
  const auto s12 = spectrum(synthesize(sum, 10));
  std::map<long, complex> a1, a2;
  double peak = 0.0;
  for (const auto& l : s1.lines) {
    a1[l.mode] = l.amplitude;
  }
  for (const auto& l : s2.lines) {
    a2[l.mode] = l.amplitude;
  }
  for (const auto& l : s12.lines) {
    peak = std::max(peak, std::abs(l.amplitude));
  }
  std::size_t compared = 0;
  for (const auto& l : s12.lines) {
    if (a1.count(l.mode) && a2.count(l.mode)) {
      CHECK(std::abs(l.amplitude - a1[l.mode] - a2[l.mode]) <= 1e-10 * peak);
      ++compared;
    }
  }
  CHECK(compared > 100);
}

TEST_CASE("-3 dB width grows with fiber length") {
  const auto train = make_gaussian_train(octave_pulse(600.3));
  const KerrMedium unit{2.6e-20, 1.0, 1e-12};
  const double per_metre = peak_nonlinear_phase(train, unit, 1.0);
  double previous = spectral_width_3db(spectrum(synthesize(train, 10)));
  for (int i = 1; i <= 10; ++i) {
    const KerrMedium medium{2.6e-20, 0.5 * i, 1e-12};
    const auto s = spectrum(synthesize(apply_spm(train, medium, 1.0 / per_metre), 10));
    const double width = spectral_width_3db(s);
    CHECK(width >= previous);
    previous = width;
  }
}

TEST_CASE("harmonic comb has zero f-2f beat") {
  CombSpectrum c;
  for (long n = 10; n <= 40; ++n) {
    CombLine l;
    l.mode = n;
    l.frequency = n * 1e9;
    l.amplitude = 1.0;
    c.lines.push_back(l);
  }
  CHECK(f_2f_offset(c).offset == 0.0);
}
