#include "combfit/drift_fit.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <tuple>

#include "combfit/errors.hpp"
#include "combfit/linear_lsq.hpp"
#include "combfit/schema.hpp"

namespace combfit::drift {

namespace {

void validate(const std::vector<DriftMeasurement>& measurements) {
  if (measurements.size() < 2) {
    throw domain_error("drift fit needs at least two measurements, got " + std::to_string(measurements.size()));
  }
  for (const auto& m : measurements) {
    if (!(m.sigma_e15 > 0.0) || !std::isfinite(m.sigma_e15)) {
      throw domain_error("measurement '" + m.transition_id + "': sigma must be positive and finite");
    }
    if (!std::isfinite(m.a) || !std::isfinite(m.b_e15)) {
      throw domain_error("measurement '" + m.transition_id + "': A and b must be finite");
    }
  }
}

// Summation order is fixed by sorting so that results do not depend on the
// order in which measurements are supplied.
std::vector<DriftMeasurement> canonical_order(std::vector<DriftMeasurement> m) {
  std::sort(m.begin(), m.end(), [](const DriftMeasurement& l, const DriftMeasurement& r) {
    return std::tie(l.a, l.b_e15, l.sigma_e15, l.transition_id) <
           std::tie(r.a, r.b_e15, r.sigma_e15, r.transition_id);
  });
  return m;
}

struct CentredSums {
  NormalSums sums;
  double saa = 0.0;  // sum w (A - Abar)^2
  double sab = 0.0;  // sum w (A - Abar)(b - bbar)
};

CentredSums accumulate(const std::vector<DriftMeasurement>& ordered) {
  CentredSums c;
  NormalSums& s = c.sums;
  for (const auto& m : ordered) {
    const double w = 1.0 / (m.sigma_e15 * m.sigma_e15);
    s.b1 += w;
    s.b2 += w * m.a * m.a;
    s.b3 += w * m.b_e15 * m.b_e15;
    s.b4 += w * m.a;
    s.b5 += w * m.b_e15;
    s.b6 += w * m.a * m.b_e15;
  }
  const double a_bar = s.b4 / s.b1;
  const double b_bar = s.b5 / s.b1;
  for (const auto& m : ordered) {
    const double w = 1.0 / (m.sigma_e15 * m.sigma_e15);
    c.saa += w * (m.a - a_bar) * (m.a - a_bar);
    c.sab += w * (m.a - a_bar) * (m.b_e15 - b_bar);
  }
  s.determinant = s.b1 * c.saa;
  return c;
}

}  // namespace

NormalSums normal_sums(const std::vector<DriftMeasurement>& measurements) {
  validate(measurements);
  return accumulate(canonical_order(measurements)).sums;
}

double build_coefficient(const sensitivity::TransitionRecord& transition, double cs_hfs_sensitivity) {
  if (!transition.l_alpha) {
    throw domain_error("transition '" + transition.id + "' has no alpha sensitivity");
  }
  return 2.0 + cs_hfs_sensitivity - *transition.l_alpha;
}

double build_coefficient(const sensitivity::TransitionRecord& transition,
                         const sensitivity::CasimirResult& cs_reference) {
  return build_coefficient(transition, cs_reference.l_hfs);
}

double chi_square(const std::vector<DriftMeasurement>& measurements, double x_e15, double y_e15) {
  double r2 = 0.0;
  for (const auto& m : canonical_order(measurements)) {
    const double r = (y_e15 + m.a * x_e15 - m.b_e15) / m.sigma_e15;
    r2 += r * r;
  }
  return r2;
}

DriftSolution fit_drift(const std::vector<DriftMeasurement>& measurements) {
  validate(measurements);
  const auto ordered = canonical_order(measurements);
  const CentredSums c = accumulate(ordered);
  const NormalSums& s = c.sums;
  const double d = s.determinant;
  if (!(d > 1e-12 * s.b1 * s.b2)) {
    throw domain_error("cannot disentangle x from y: all sensitivity coefficients A_i are equal");
  }
  DriftSolution out;
  // B1 B6 - B4 B5 = B1 * sum w (A - Abar)(b - bbar); B2 B5 - B4 B6 follows from
  // y = bbar - Abar x.
  out.x_e15 = s.b1 * c.sab / d;
  out.y_e15 = s.b5 / s.b1 - (s.b4 / s.b1) * out.x_e15;
  out.sigma_x_e15 = std::sqrt(s.b1 / d);
  out.sigma_y_e15 = std::sqrt(s.b2 / d);
  out.correlation_xy = -s.b4 / std::sqrt(s.b1 * s.b2);
  out.chi2 = chi_square(ordered, out.x_e15, out.y_e15);
  out.n_points = ordered.size();
  return out;
}

RelativeDrift fit_relative_drift(const std::vector<TimeSeriesPoint>& series) {
  if (series.size() < 2) {
    throw domain_error("relative drift needs at least two points");
  }
  for (const auto& p : series) {
    if (!(p.sigma_hz > 0.0) || !std::isfinite(p.sigma_hz) || !std::isfinite(p.epoch)) {
      throw domain_error("time series points need finite epochs and positive sigma");
    }
  }
  const ExactFrequency ref = series.front().value;
  if (ref <= ExactFrequency{}) {
    throw domain_error("relative drift needs positive frequencies");
  }
  // Offsets from the first value are exact integers in mHz.
  double sw = 0.0;
  double sw_offset = 0.0;
  double sw_t = 0.0;
  for (const auto& p : series) {
    const double w = 1.0 / (p.sigma_hz * p.sigma_hz);
    sw += w;
    sw_offset += w * static_cast<double>((p.value - ref).millihertz()) * 1e-3;
    sw_t += w * p.epoch;
  }
  const double mean_offset = sw_offset / sw;
  const double mean_hz = ref.hz() + mean_offset;
  const double t_bar = sw_t / sw;
  double stt = 0.0;
  double sty = 0.0;
  for (const auto& p : series) {
    const double sigma_rel = p.sigma_hz / mean_hz;
    const double w = 1.0 / (sigma_rel * sigma_rel);
    const double y = (static_cast<double>((p.value - ref).millihertz()) * 1e-3 - mean_offset) / mean_hz;
    stt += w * (p.epoch - t_bar) * (p.epoch - t_bar);
    sty += w * (p.epoch - t_bar) * y;
  }
  double span = 0.0;
  for (const auto& p : series) {
    span = std::max(span, std::fabs(p.epoch - t_bar));
  }
  if (!(span > 0.0) || !(stt > 0.0)) {
    throw domain_error("relative drift needs at least two distinct epochs");
  }
  RelativeDrift out;
  out.rate_per_yr = sty / stt;
  out.sigma_per_yr = 1.0 / std::sqrt(stt);
  out.mean_hz = mean_hz;
  return out;
}

DriftMeasurement to_measurement(const std::string& transition_id, double a, const RelativeDrift& drift) {
  DriftMeasurement m;
  m.transition_id = transition_id;
  m.a = a;
  m.b_e15 = -drift.rate_e15();
  m.sigma_e15 = drift.sigma_e15();
  return m;
}

std::pair<double, double> alpha_drift_from_ratio(double rate_e15, double sigma_e15, double l_numerator,
                                               double l_denominator) {
  const double dl = l_numerator - l_denominator;
  if (dl == 0.0) {
    throw domain_error("ratio of transitions with equal alpha sensitivity carries no alpha information");
  }
  return {rate_e15 / dl, sigma_e15 / std::fabs(dl)};
}

double PotentialModel::operator()(double epoch) const {
  if (custom) {
    return custom(epoch);
  }
  return amplitude * std::cos(2.0 * std::numbers::pi * (epoch - perihelion_epoch) / period_yr);
}

GravityCouplingFit fit_gravity_coupling(const std::vector<GravitySample>& samples, const PotentialModel& model,
                                        const GravityOptions& options) {
  const std::size_t params = options.fit_linear_drift ? 3 : 2;
  if (samples.size() < 3 || samples.size() < params + 1) {
    throw domain_error("gravity coupling fit needs at least " + std::to_string(std::max<std::size_t>(3, params + 1)) +
                       " samples");
  }
  double t_min = samples.front().epoch;
  double t_max = t_min;
  double t_mean = 0.0;
  for (const auto& s : samples) {
    t_min = std::min(t_min, s.epoch);
    t_max = std::max(t_max, s.epoch);
    t_mean += s.epoch;
  }
  t_mean /= static_cast<double>(samples.size());
  if (!model.custom && !(t_max - t_min > 0.5 * model.period_yr)) {
    throw domain_error("insufficient phase coverage: samples span " + std::to_string(t_max - t_min) +
                       " yr, need more than half a period; k is degenerate with the offset");
  }

  const auto n = static_cast<Eigen::Index>(samples.size());
  Eigen::MatrixXd design(n, static_cast<Eigen::Index>(params));
  Eigen::VectorXd data(n);
  Eigen::VectorXd sigma(n);
  double u_max = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& s = samples[static_cast<std::size_t>(i)];
    const double u = model(s.epoch);
    u_max = std::max(u_max, std::fabs(u));
    design(i, 0) = u;
    design(i, 1) = 1.0;
    if (options.fit_linear_drift) {
      design(i, 2) = s.epoch - t_mean;
    }
    data(i) = s.fractional_shift;
    sigma(i) = s.sigma;
  }
  if (!(u_max > 0.0)) {
    throw domain_error("insufficient phase coverage: potential model vanishes at every sample");
  }
  numeric::LinearFit fit;
  try {
    fit = numeric::weighted_linear_fit(design, data, sigma, 1e-9);
  } catch (const domain_error& e) {
    throw domain_error(std::string("insufficient phase coverage: ") + e.what());
  }
  GravityCouplingFit out;
  out.k_alpha = fit.params(0);
  out.sigma_k = std::sqrt(fit.covariance(0, 0));
  out.offset = fit.params(1);
  out.drift_per_yr = options.fit_linear_drift ? fit.params(2) : 0.0;
  out.chi2 = fit.chi2;
  return out;
}

DriftDataset dataset_from_json(const nlohmann::json& doc, const sensitivity::TransitionRegistry* registry,
                               const std::string& source) {
  schema::require_version(doc, source);
  const auto& list = schema::require_field(doc, "measurements", source);
  if (!list.is_array()) {
    throw input_error(source + ": 'measurements' must be an array");
  }
  DriftDataset out;
  out.description = schema::optional_string(doc, "description", source).value_or("");
  const auto cs_l_hfs = schema::optional_number(doc, "cs_l_hfs", source);
  for (std::size_t i = 0; i < list.size(); ++i) {
    const std::string ctx = source + ": measurements[" + std::to_string(i) + "]";
    const auto& item = list[i];
    DriftMeasurement m;
    m.transition_id = schema::require_string(item, "transition_id", ctx);
    m.b_e15 = schema::require_number(item, "b_e15_per_yr", ctx);
    m.sigma_e15 = schema::require_number(item, "sigma_e15_per_yr", ctx);
    if (!(m.sigma_e15 > 0.0)) {
      throw input_error(ctx + ": field 'sigma_e15_per_yr' must be positive");
    }
    if (const auto a = schema::optional_number(item, "A", ctx)) {
      m.a = *a;
    } else {
      if (!registry) {
        throw input_error(ctx + ": no 'A' given and no sensitivity registry available");
      }
      const auto* record = registry->find(m.transition_id);
      if (!record) {
        throw input_error(ctx + ": no 'A' given and transition '" + m.transition_id + "' is not in the registry");
      }
      double cs = 0.0;
      if (cs_l_hfs) {
        cs = *cs_l_hfs;
      } else if (const auto* cs_record = registry->find_atom("Cs"); cs_record && cs_record->l_alpha) {
        cs = *cs_record->l_alpha;
      } else {
        cs = sensitivity::casimir(55).l_hfs;
      }
      m.a = build_coefficient(*record, cs);
    }
    const auto start = schema::optional_number(item, "epoch_start", ctx);
    const auto end = schema::optional_number(item, "epoch_end", ctx);
    if (start.has_value() != end.has_value()) {
      throw input_error(ctx + ": 'epoch_start' and 'epoch_end' must be given together");
    }
    if (start) {
      m.epoch_span = std::make_pair(*start, *end);
    }
    out.measurements.push_back(std::move(m));
  }
  return out;
}

DriftDataset load_dataset(const std::filesystem::path& path, const sensitivity::TransitionRegistry* registry) {
  return dataset_from_json(schema::read_json_file(path), registry, path.filename().string());
}

std::vector<AlphaDriftResult> alpha_results_from_json(const nlohmann::json& doc, const std::string& source) {
  schema::require_version(doc, source);
  const auto& list = schema::require_field(doc, "results", source);
  if (!list.is_array()) {
    throw input_error(source + ": 'results' must be an array");
  }
  std::vector<AlphaDriftResult> out;
  for (std::size_t i = 0; i < list.size(); ++i) {
    const std::string ctx = source + ": results[" + std::to_string(i) + "]";
    const auto& item = list[i];
    AlphaDriftResult r;
    r.year = schema::require_int(item, "year", ctx);
    r.method = schema::require_string(item, "method", ctx);
    r.reference = schema::optional_string(item, "reference", ctx).value_or("");
    r.x_e15 = schema::require_number(item, "x_e15_per_yr", ctx);
    r.sigma_e15 = schema::require_number(item, "sigma_e15_per_yr", ctx);
    if (!(r.sigma_e15 > 0.0)) {
      throw input_error(ctx + ": field 'sigma_e15_per_yr' must be positive");
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace combfit::drift
