#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "combfit/constants.hpp"
#include "combfit/drift_fit.hpp"
#include "combfit/errors.hpp"
#include "combfit/schema.hpp"
#include "oracles/drift_oracle.hpp"

using namespace combfit;
using namespace combfit::drift;

namespace {

std::vector<DriftMeasurement> three_ions() {
  return {{"H-1S-2S", 2.8, 3.2, 6.4, {}}, {"Hg+-282", 6.0, -0.37, 0.39, {}}, {"Yb+-435", 1.9, 0.78, 1.4, {}}};
}

std::vector<oracle::DriftPoint> to_points(const std::vector<DriftMeasurement>& ms) {
  std::vector<oracle::DriftPoint> pts;
  for (const auto& m : ms) {
    pts.push_back({m.a, m.b_e15, m.sigma_e15});
  }
  return pts;
}

std::vector<DriftMeasurement> random_dataset(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> a(-4.0, 7.0);
  std::uniform_real_distribution<double> b(-5.0, 5.0);
  std::uniform_real_distribution<double> s(0.2, 5.0);
  std::vector<DriftMeasurement> ms;
  for (int i = 0; i < n; ++i) {
    ms.push_back({"t" + std::to_string(i), a(rng), b(rng), s(rng), {}});
  }
  return ms;
}

}  // namespace

TEST_CASE("three-ion dataset") {
  const auto sol = fit_drift(three_ions());
  CHECK(std::fabs(sol.x_e15 - -0.31) <= 0.05);
  CHECK(std::fabs(sol.y_e15 - 1.5) <= 0.1);
  CHECK(std::fabs(sol.sigma_x_e15 - 0.35) <= 0.01);
  CHECK(std::fabs(sol.sigma_y_e15 - 2.0) <= 0.05);
  CHECK(sol.n_points == 3);
  CHECK(sol.correlation_xy < 0.0);
}

TEST_CASE("two measurements interpolate") {
  const std::vector<DriftMeasurement> ms{{"a", 1.0, 0.0, 1.0, {}}, {"b", 2.0, 1.0, 1.0, {}}};
  const auto sol = fit_drift(ms);
  CHECK(sol.x_e15 == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(sol.y_e15 == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(sol.sigma_x_e15 == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
  CHECK(sol.sigma_y_e15 == doctest::Approx(std::sqrt(5.0)).epsilon(1e-14));
  CHECK(sol.chi2 < 1e-28);
}

TEST_CASE("closed form agrees with the profile oracle") {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 40; ++trial) {
    const auto ms = random_dataset(rng, 3 + trial % 6);
    const auto sol = fit_drift(ms);
    const auto ref = oracle::drift_grid_oracle(to_points(ms), 200.0);
    CHECK(std::fabs(sol.x_e15 - ref.x) <= 1e-9 * std::max(1.0, std::fabs(ref.x)));
    CHECK(std::fabs(sol.y_e15 - ref.y) <= 1e-9 * std::max(1.0, std::fabs(ref.y)));
    CHECK(sol.sigma_x_e15 == doctest::Approx(ref.sigma_x).epsilon(1e-9));
    CHECK(sol.sigma_y_e15 == doctest::Approx(ref.sigma_y).epsilon(1e-9));
    CHECK(sol.chi2 == doctest::Approx(ref.chi2_min).epsilon(1e-9));
  }
}

TEST_CASE("uncertainties equal the inverse Hessian of R^2 / 2") {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 40; ++trial) {
    const auto ms = random_dataset(rng, 4);
    const auto sol = fit_drift(ms);
    double h[2][2];
    oracle::hessian_half_r2(to_points(ms), sol.x_e15, sol.y_e15, 0.5, h);
    const double det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
    CHECK(sol.sigma_x_e15 == doctest::Approx(std::sqrt(h[1][1] / det)).epsilon(1e-10));
    CHECK(sol.sigma_y_e15 == doctest::Approx(std::sqrt(h[0][0] / det)).epsilon(1e-10));
    CHECK(sol.correlation_xy == doctest::Approx(-h[0][1] / std::sqrt(h[0][0] * h[1][1])).epsilon(1e-10));
  }
}

TEST_CASE("scaling every sigma scales sigma_x and sigma_y, not the estimates") {
  std::mt19937_64 rng(44);
  for (int trial = 0; trial < 20; ++trial) {
    auto ms = random_dataset(rng, 5);
    const auto base = fit_drift(ms);
    const double k = 0.25 + trial;
    for (auto& m : ms) {
      m.sigma_e15 *= k;
    }
    const auto scaled = fit_drift(ms);
    CHECK(scaled.x_e15 == doctest::Approx(base.x_e15).epsilon(1e-12));
    CHECK(scaled.y_e15 == doctest::Approx(base.y_e15).epsilon(1e-12));
    CHECK(scaled.sigma_x_e15 == doctest::Approx(k * base.sigma_x_e15).epsilon(1e-12));
    CHECK(scaled.sigma_y_e15 == doctest::Approx(k * base.sigma_y_e15).epsilon(1e-12));
  }
}

TEST_CASE("measurement order does not matter") {
  std::mt19937_64 rng(45);
  auto ms = random_dataset(rng, 7);
  const auto base = fit_drift(ms);
  for (int i = 0; i < 20; ++i) {
    std::shuffle(ms.begin(), ms.end(), rng);
    const auto s = fit_drift(ms);
    CHECK(s.x_e15 == base.x_e15);
    CHECK(s.y_e15 == base.y_e15);
    CHECK(s.sigma_x_e15 == base.sigma_x_e15);
  }
}

TEST_CASE("singular and invalid inputs") {
  const std::vector<DriftMeasurement> same{{"a", 2.0, 1.0, 1.0, {}}, {"b", 2.0, 3.0, 1.0, {}}, {"c", 2.0, 0.0, 2.0, {}}};
  try {
    fit_drift(same);
    FAIL("expected domain_error");
  } catch (const domain_error& e) {
    CHECK(std::string(e.what()).find("cannot disentangle") != std::string::npos);
  }
  CHECK_THROWS_AS(fit_drift({{"a", 1.0, 1.0, 1.0, {}}}), domain_error);
  CHECK_THROWS_AS(fit_drift({{"a", 1.0, 1.0, 0.0, {}}, {"b", 2.0, 1.0, 1.0, {}}}), domain_error);
}

TEST_CASE("normal sums") {
  const auto s = normal_sums({{"a", 1.0, 0.0, 1.0, {}}, {"b", 2.0, 1.0, 1.0, {}}});
  CHECK(s.b1 == 2.0);
  CHECK(s.b2 == 5.0);
  CHECK(s.b3 == 1.0);
  CHECK(s.b4 == 3.0);
  CHECK(s.b5 == 1.0);
  CHECK(s.b6 == 2.0);
  CHECK(s.determinant == doctest::Approx(1.0));
}

TEST_CASE("coefficients from the registry") {
  const auto reg = sensitivity::TransitionRegistry::load(COMBFIT_TEST_DATA_DIR "/transitions.json");
  CHECK(build_coefficient(reg.at("H-1S-2S"), 0.8) == doctest::Approx(2.8));
  CHECK(build_coefficient(reg.at("Hg+-282"), 0.8) == doctest::Approx(6.0));
  CHECK(build_coefficient(reg.at("Yb+-435"), 0.8) == doctest::Approx(1.9));
  CHECK(build_coefficient(reg.at("Hg+-282"), sensitivity::casimir(55)) ==
        doctest::Approx(2.0 + sensitivity::casimir(55).l_hfs + 3.2));
}

TEST_CASE("bundled datasets load") {
  const auto reg = sensitivity::TransitionRegistry::load(COMBFIT_TEST_DATA_DIR "/transitions.json");
  const auto ds = load_dataset(COMBFIT_TEST_DATA_DIR "/fischer_peik_fortier.json", &reg);
  REQUIRE(ds.measurements.size() == 3);
  for (const auto& m : ds.measurements) {
    CHECK(m.a == doctest::Approx(build_coefficient(reg.at(m.transition_id), 0.8)));
  }
  const auto t3 = alpha_results_from_json(schema::read_json_file(COMBFIT_TEST_DATA_DIR "/table3.json"), "table3");
  REQUIRE(t3.size() == 6);
  CHECK(t3.back().method == "direct comparison");
  CHECK(t3.back().x_e15 == -0.016);
  CHECK(t3.back().sigma_e15 == 0.023);
}

TEST_CASE("missing A is resolved through the registry") {
  const auto reg = sensitivity::TransitionRegistry::load(COMBFIT_TEST_DATA_DIR "/transitions.json");
  nlohmann::json doc = {{"schema_version", "1.0"},
                        {"cs_l_hfs", 0.8},
                        {"measurements", {{{"transition_id", "Hg+-282"}, {"b_e15_per_yr", 0.1}, {"sigma_e15_per_yr", 1.0}}}}};
  CHECK(dataset_from_json(doc, &reg, "doc").measurements[0].a == doctest::Approx(6.0));
  doc.erase("cs_l_hfs");
  CHECK(dataset_from_json(doc, &reg, "doc").measurements[0].a ==
        doctest::Approx(2.0 + sensitivity::casimir(55).l_hfs + 3.2));
  CHECK_THROWS_AS(dataset_from_json(doc, nullptr, "doc"), input_error);
  doc["measurements"][0]["transition_id"] = "unknown";
  CHECK_THROWS_AS(dataset_from_json(doc, &reg, "doc"), input_error);
}

TEST_CASE("drift of an absolute frequency") {
  // -29 Hz over 44 months at c / 121.57 nm.
  const double f = constants::speed_of_light / 121.57e-9;
  const auto f0 = ExactFrequency::from_hz_rounded(f);
  const double years = 44.0 / 12.0;
  const std::vector<TimeSeriesPoint> series{{2000.0, f0, 46.0 / std::sqrt(2.0)},
                                            {2000.0 + years, f0 - ExactFrequency::from_hz(29), 46.0 / std::sqrt(2.0)}};
  const auto rd = fit_relative_drift(series);
  const double expected = -29.0 / f / years;
  CHECK(rd.rate_per_yr == doctest::Approx(expected).epsilon(1e-9));
  const auto m = to_measurement("H-1S-2S", 2.8, rd);
  CHECK(m.b_e15 == doctest::Approx(-rd.rate_e15()));
  CHECK_THROWS_AS(fit_relative_drift({series[0], series[0]}), domain_error);
}

TEST_CASE("alpha drift from a direct optical ratio") {
  const auto [x, sx] = alpha_drift_from_ratio(-0.0513, 0.0738, 0.008, -3.2);
  CHECK(x == doctest::Approx(-0.0513 / 3.208));
  CHECK(sx == doctest::Approx(0.0738 / 3.208));
  CHECK_THROWS(alpha_drift_from_ratio(1.0, 1.0, 0.5, 0.5));
}

TEST_CASE("gravity coupling") {
  PotentialModel model;
  std::vector<GravitySample> samples;
  const double k = 3.5e-6;
  for (int i = 0; i < 24; ++i) {
    const double t = 2005.0 + i / 12.0;
    samples.push_back({t, k * model(t) + 2e-16, 1e-16});
  }
  const auto g = fit_gravity_coupling(samples, model);
  CHECK(g.k_alpha == doctest::Approx(k).epsilon(1e-9));
  CHECK(g.offset == doctest::Approx(2e-16).epsilon(1e-6));
  CHECK(g.chi2 < 1e-12);

  std::vector<GravitySample> short_span(samples.begin(), samples.begin() + 4);
  try {
    fit_gravity_coupling(short_span, model);
    FAIL("expected domain_error");
  } catch (const domain_error& e) {
    CHECK(std::string(e.what()).find("insufficient phase coverage") != std::string::npos);
  }
}
