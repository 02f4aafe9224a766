#include <doctest.h>

#include <cmath>
#include <random>

#include "combfit/errors.hpp"
#include "combfit/stability.hpp"

using namespace combfit;
using namespace combfit::stability;

namespace {

// Direct O(N m) evaluation of the overlapping estimator.
double allan_direct(const std::vector<double>& y, std::size_t m) {
  const std::size_t count = y.size() - 2 * m + 1;
  double acc = 0.0;
  for (std::size_t j = 0; j < count; ++j) {
    double mean_a = 0.0;
    double mean_b = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      mean_a += y[j + i];
      mean_b += y[j + m + i];
    }
    const double d = (mean_b - mean_a) / static_cast<double>(m);
    acc += d * d;
  }
  return std::sqrt(acc / (2.0 * static_cast<double>(count)));
}

double lorentz(double f, double c, double w, double a, double floor) {
  const double u = 2.0 * (f - c) / w;
  return floor + a / (1.0 + u * u);
}

std::vector<std::pair<double, double>> lorentz_samples(double c, double w, double a, double floor, int n,
                                                       double span) {
  std::vector<std::pair<double, double>> s;
  for (int i = 0; i < n; ++i) {
    const double f = c - span / 2 + span * i / (n - 1) + 0.137 * span / n;
    s.emplace_back(f, lorentz(f, c, w, a, floor));
  }
  return s;
}

}  // namespace

TEST_CASE("Allan deviation of a constant series is zero") {
  FractionalSeries s{std::vector<double>(100, 3.7e-15), 1.0};
  for (const auto& p : allan_deviation(s, octave_taus(s))) {
    CHECK(p.sigma_y == 0.0);
  }
}

TEST_CASE("Allan deviation is unchanged by a constant offset") {
  std::mt19937_64 rng(1);
  std::vector<double> y(256);
  for (auto& v : y) {
    v = static_cast<double>(static_cast<int>(rng() % 2048) - 1024) / 1024.0;
  }
  FractionalSeries a{y, 0.5};
  FractionalSeries b{y, 0.5};
  for (auto& v : b.y) {
    v += 8.0;
  }
  const auto ta = allan_deviation(a, octave_taus(a));
  const auto tb = allan_deviation(b, octave_taus(b));
  REQUIRE(ta.size() == tb.size());
  for (std::size_t i = 0; i < ta.size(); ++i) {
    CHECK(ta[i].sigma_y == tb[i].sigma_y);
    CHECK(ta[i].count == tb[i].count);
  }
}

TEST_CASE("pure linear drift follows |d| tau / (tau0 sqrt 2)") {
  const double d = 2.5e-16;
  const double tau0 = 2.0;
  std::vector<double> y(1000);
  for (std::size_t i = 0; i < y.size(); ++i) {
    y[i] = 1e-13 + d * static_cast<double>(i);
  }
  FractionalSeries s{y, tau0};
  const std::vector<double> taus{2.0, 6.0, 20.0, 200.0, 1000.0};
  for (const auto& p : allan_deviation(s, taus)) {
    const double analytic = std::fabs(d) * p.tau / (tau0 * std::sqrt(2.0));
    CHECK(p.sigma_y == doctest::Approx(analytic).epsilon(1e-6));
    CHECK(p.sigma_y == doctest::Approx(allan_direct(y, static_cast<std::size_t>(p.tau / tau0))).epsilon(1e-9));
  }
}

TEST_CASE("sliding window matches direct evaluation on noise") {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g(0.0, 1e-14);
  std::vector<double> y(500);
  for (auto& v : y) {
    v = g(rng);
  }
  FractionalSeries s{y, 1.0};
  for (const auto& p : allan_deviation(s, {1, 3, 17, 100, 250})) {
    CHECK(p.sigma_y == doctest::Approx(allan_direct(y, static_cast<std::size_t>(p.tau))).epsilon(1e-9));
    CHECK(p.count == y.size() - 2 * static_cast<std::size_t>(p.tau) + 1);
  }
}

TEST_CASE("white frequency noise has slope -1/2") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> y(100000);
  for (auto& v : y) {
    v = 1e-15 * g(rng);
  }
  FractionalSeries s{y, 1.0};
  const auto pts = allan_deviation(s, {1, 2, 5, 10, 20, 50, 100});
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& p : pts) {
    const double lx = std::log10(p.tau);
    const double ly = std::log10(p.sigma_y);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double n = static_cast<double>(pts.size());
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  CHECK(std::fabs(slope + 0.5) <= 0.05);
}

TEST_CASE("Allan deviation input errors") {
  FractionalSeries s{std::vector<double>(10, 0.0), 1.0};
  CHECK_THROWS_AS(allan_deviation(s, {1.5}), domain_error);
  CHECK_THROWS_AS(allan_deviation(s, {6.0}), domain_error);
  CHECK_THROWS_AS(allan_deviation(s, {0.0}), domain_error);
  CHECK_THROWS_AS(allan_deviation({{1.0}, 1.0}, {1.0}), domain_error);
  CHECK_THROWS_AS(allan_deviation({{1.0, 2.0}, 0.0}, {1.0}), domain_error);
  CHECK_NOTHROW(allan_deviation(s, {5.0}));
}

TEST_CASE("Lorentzian fit recovers exact samples") {
  const double c = 1.234e6, w = 2.1e3, a = 7.5, floor = 0.3;
  const auto fit = lorentzian_center(lorentz_samples(c, w, a, floor, 81, 8 * w));
  CHECK(fit.center == doctest::Approx(c).epsilon(1e-9));
  CHECK(fit.fwhm == doctest::Approx(w).epsilon(1e-9));
  CHECK(fit.amplitude == doctest::Approx(a).epsilon(1e-9));
  CHECK(fit.floor == doctest::Approx(floor).epsilon(1e-9));
}

TEST_CASE("symmetric data centre at the symmetry point") {
  std::vector<std::pair<double, double>> s;
  for (int i = -10; i <= 10; ++i) {
    const double v = 1.0 / (1.0 + 0.3 * i * i) + 0.01 * (i % 2 == 0 ? 1 : -1) * std::abs(i);
    s.emplace_back(100.0 + i, v);
  }
  const auto fit = lorentzian_center(s);
  CHECK(fit.center == doctest::Approx(100.0).epsilon(1e-12));
}

TEST_CASE("Lorentzian fit is equivariant under translation and scaling") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g(0.0, 0.02);
  auto base = lorentz_samples(0.0, 1.0, 1.0, 0.1, 41, 10.0);
  for (auto& p : base) {
    p.second += g(rng);
  }
  const auto ref = lorentzian_center(base);
  const double shift = 4.4e14;
  const double scale = 3.0e3;
  auto moved = base;
  for (auto& p : moved) {
    p.first = shift + scale * p.first;
  }
  const auto fit = lorentzian_center(moved);
  CHECK((fit.center - shift) / scale == doctest::Approx(ref.center).epsilon(1e-6).scale(1.0));
  CHECK(fit.fwhm / scale == doctest::Approx(ref.fwhm).epsilon(1e-6));
  CHECK(fit.sigma_center / scale == doctest::Approx(ref.sigma_center).epsilon(1e-5));
}

TEST_CASE("reported centre uncertainty matches Monte Carlo scatter") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0.0, 0.05);
  const double c = 10.0;
  const int trials = 2000;
  double sum = 0.0, sum_sq = 0.0, sigma_sum = 0.0;
  for (int t = 0; t < trials; ++t) {
    auto s = lorentz_samples(c, 2.0, 1.0, 0.2, 61, 20.0);
    for (auto& p : s) {
      p.second += g(rng);
    }
    const auto fit = lorentzian_center(s);
    sum += fit.center;
    sum_sq += fit.center * fit.center;
    sigma_sum += fit.sigma_center;
  }
  const double mean = sum / trials;
  const double empirical = std::sqrt(sum_sq / trials - mean * mean);
  const double reported = sigma_sum / trials;
  CHECK(std::fabs(reported / empirical - 1.0) <= 0.15);
}

TEST_CASE("Lorentzian input errors") {
  CHECK_THROWS_AS(lorentzian_center({{0, 1}, {1, 2}, {2, 1}, {3, 0.5}}), domain_error);
  CHECK_THROWS_AS(lorentzian_center({{0, 1}, {1, 1}, {2, 1}, {3, 1}, {4, 1}}), domain_error);
  LorentzianOptions tight;
  tight.max_iterations = 1;
  auto s = lorentz_samples(0.0, 0.05, 1.0, 0.0, 41, 10.0);
  s[3].second += 0.5;
  try {
    lorentzian_center(s, tight);
  } catch (const domain_error& e) {
    CHECK(std::string(e.what()).find("did not converge") != std::string::npos);
  }
}

TEST_CASE("zero-expansion temperature from synthetic cavity data") {
  const double f_opt = 4.5e14;
  std::vector<ThermalPoint> pts;
  for (double t = 0.0; t <= 25.0; t += 2.5) {
    pts.push_back({t, -f_opt * ule_fractional_length(t, 12.0), 1.0});
  }
  const auto r = fit_zero_expansion(pts, f_opt);
  CHECK(r.t_c == doctest::Approx(12.0).epsilon(1e-10));
  CHECK(r.curvature_e9 == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(r.residual_rms_hz < 1e-3);
  CHECK(ule_fractional_length(13.0, 12.0) == doctest::Approx(1e-9).epsilon(1e-15));
}

TEST_CASE("vertex moves only with a linear term") {
  const double f_opt = 4.5e14;
  const double c2 = -1e-9;
  std::vector<ThermalPoint> base;
  for (double t = 5.0; t <= 20.0; t += 1.0) {
    base.push_back({t, f_opt * c2 * (t - 12.0) * (t - 12.0), 1.0});
  }
  auto offset = base;
  for (auto& p : offset) {
    p.beat_hz += 12345.0;
  }
  CHECK(fit_zero_expansion(offset, f_opt).t_c == doctest::Approx(fit_zero_expansion(base, f_opt).t_c).epsilon(1e-12));

  const double slope = 2e-10;  // per K, fractional
  auto tilted = base;
  for (auto& p : tilted) {
    p.beat_hz += f_opt * slope * p.temperature_c;
  }
  const double expected = 12.0 - slope / (2.0 * c2);
  CHECK(std::fabs(fit_zero_expansion(tilted, f_opt).t_c - expected) <= 1e-10 * std::fabs(expected));
}

TEST_CASE("zero-expansion input errors") {
  CHECK_THROWS_AS(fit_zero_expansion({{1, 0}, {2, 1}, {1, 0}, {2, 1}}, 1e14), domain_error);
  CHECK_THROWS_AS(fit_zero_expansion({{1, 0}, {2, 1}, {3, 2}, {4, 3}}, 1e14), domain_error);
  CHECK_THROWS_AS(fit_zero_expansion({{1, 0}, {2, 1}, {3, 0}}, 0.0), domain_error);
}
