#include "combfit/stability.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include <Eigen/Dense>

#include "combfit/errors.hpp"
#include "combfit/linear_lsq.hpp"

namespace combfit::stability {

std::vector<AllanPoint> allan_deviation(const FractionalSeries& series, const std::vector<double>& taus) {
  const auto& y = series.y;
  if (!(series.tau0 > 0.0)) {
    throw domain_error("tau0 must be positive");
  }
  if (y.size() < 2) {
    throw domain_error("Allan deviation needs at least two samples");
  }
  const std::size_t total = y.size();
  std::vector<AllanPoint> out;
  out.reserve(taus.size());
  for (double tau : taus) {
    const double ratio = tau / series.tau0;
    const double m_real = std::round(ratio);
    if (!(m_real >= 1.0) || std::fabs(ratio - m_real) > 1e-9 * m_real) {
      throw domain_error("tau " + std::to_string(tau) + " s is not a positive integer multiple of tau0");
    }
    const auto m = static_cast<std::size_t>(m_real);
    if (2 * m > total) {
      throw domain_error("tau " + std::to_string(tau) + " s exceeds half the series span");
    }
    const std::size_t count = total - 2 * m + 1;
    // Sliding window over sum_{i=j}^{j+m-1} (y_{i+m} - y_i); every term is a
    // plain difference so constant series give exactly zero.
    double window = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      window += y[i + m] - y[i];
    }
    double sum_sq = window * window;
    for (std::size_t j = 1; j < count; ++j) {
      window += (y[j + 2 * m - 1] - y[j + m - 1]) - (y[j + m - 1] - y[j - 1]);
      sum_sq += window * window;
    }
    const double md = static_cast<double>(m);
    const double avar = sum_sq / (2.0 * md * md * static_cast<double>(count));
    out.push_back({m_real * series.tau0, std::sqrt(avar), count});
  }
  return out;
}

std::vector<double> octave_taus(const FractionalSeries& series) {
  std::vector<double> taus;
  for (std::size_t m = 1; 2 * m <= series.y.size(); m *= 2) {
    taus.push_back(static_cast<double>(m) * series.tau0);
  }
  return taus;
}

namespace {

struct LorentzModel {
  // p = (center, fwhm, amplitude, floor)
  static double value(const Eigen::Vector4d& p, double x) {
    const double u = 2.0 * (x - p(0)) / p(1);
    return p(3) + p(2) / (1.0 + u * u);
  }
  static Eigen::Vector4d gradient(const Eigen::Vector4d& p, double x) {
    const double u = 2.0 * (x - p(0)) / p(1);
    const double d = 1.0 + u * u;
    Eigen::Vector4d g;
    g(0) = 4.0 * p(2) * u / (p(1) * d * d);
    g(1) = 2.0 * p(2) * u * u / (p(1) * d * d);
    g(2) = 1.0 / d;
    g(3) = 1.0;
    return g;
  }
};

}  // namespace

LorentzianFit lorentzian_center(const std::vector<std::pair<double, double>>& spectrum,
                                const LorentzianOptions& options) {
  const std::size_t n = spectrum.size();
  if (n < 5) {
    throw domain_error("Lorentzian fit needs at least 5 points, got " + std::to_string(n));
  }
  // Normalize both axes so the fit is equivariant under translation and
  // scaling of frequency and power.
  double f_min = spectrum.front().first;
  double f_max = f_min;
  double p_min = spectrum.front().second;
  double p_max = p_min;
  for (const auto& [f, p] : spectrum) {
    if (!std::isfinite(f) || !std::isfinite(p)) {
      throw domain_error("Lorentzian fit input must be finite");
    }
    f_min = std::min(f_min, f);
    f_max = std::max(f_max, f);
    p_min = std::min(p_min, p);
    p_max = std::max(p_max, p);
  }
  if (!(f_max > f_min) || !(p_max > p_min)) {
    throw domain_error("Lorentzian fit needs a non-degenerate peak");
  }
  const double f_mid = 0.5 * (f_min + f_max);
  const double f_scale = 0.5 * (f_max - f_min);
  const double p_scale = p_max - p_min;
  std::vector<double> xs(n);
  std::vector<double> ys(n);
  std::size_t peak = 0;
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = (spectrum[i].first - f_mid) / f_scale;
    ys[i] = (spectrum[i].second - p_min) / p_scale;
    if (ys[i] > ys[peak]) {
      peak = i;
    }
  }

  Eigen::Vector4d p;
  {
    double lo = xs[peak];
    double hi = xs[peak];
    for (std::size_t i = 0; i < n; ++i) {
      if (ys[i] >= 0.5) {
        lo = std::min(lo, xs[i]);
        hi = std::max(hi, xs[i]);
      }
    }
    const double spacing = 2.0 / static_cast<double>(n - 1);
    p << xs[peak], std::max(hi - lo, spacing), 1.0, 0.0;
  }

  auto rss_of = [&](const Eigen::Vector4d& q) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = ys[i] - LorentzModel::value(q, xs[i]);
      s += r * r;
    }
    return s;
  };
  auto normal_equations = [&](const Eigen::Vector4d& q, Eigen::Matrix4d& jtj, Eigen::Vector4d& jtr) {
    jtj.setZero();
    jtr.setZero();
    for (std::size_t i = 0; i < n; ++i) {
      const Eigen::Vector4d g = LorentzModel::gradient(q, xs[i]);
      jtj += g * g.transpose();
      jtr += g * (ys[i] - LorentzModel::value(q, xs[i]));
    }
  };

  double rss = rss_of(p);
  double lambda = options.initial_damping;
  bool converged = false;
  int iter = 0;
  Eigen::Matrix4d jtj;
  Eigen::Vector4d jtr;
  for (; iter < options.max_iterations && !converged; ++iter) {
    normal_equations(p, jtj, jtr);
    bool accepted = false;
    while (!accepted) {
      Eigen::Matrix4d damped = jtj;
      damped.diagonal() += lambda * jtj.diagonal().cwiseMax(1e-300);
      const Eigen::Vector4d step = damped.ldlt().solve(jtr);
      const Eigen::Vector4d trial = p + step;
      const double trial_rss = rss_of(trial);
      if (std::isfinite(trial_rss) && trial_rss <= rss) {
        const bool small_step =
            (step.array().abs() <= options.tolerance * 1e3 * (1.0 + p.array().abs())).all();
        const bool flat = rss - trial_rss <= options.tolerance * rss;
        p = trial;
        rss = trial_rss;
        lambda = std::max(lambda / options.damping_down, 1e-15);
        accepted = true;
        if (small_step || flat || rss <= 1e-30 * static_cast<double>(n)) {
          converged = true;
        }
      } else {
        lambda *= options.damping_up;
        if (lambda > 1e16) {
          // No descent direction left at working precision.
          converged = true;
          break;
        }
      }
    }
  }
  if (!converged) {
    std::ostringstream msg;
    msg << "Lorentzian fit did not converge after " << iter << " iterations (rss=" << rss
        << ", center=" << f_mid + p(0) * f_scale << ", fwhm=" << std::fabs(p(1)) * f_scale << ")";
    throw domain_error(msg.str());
  }

  normal_equations(p, jtj, jtr);
  const Eigen::Matrix4d cov = jtj.inverse();
  const double s2 = n > 4 ? rss / static_cast<double>(n - 4) : 0.0;

  LorentzianFit fit;
  fit.center = f_mid + p(0) * f_scale;
  fit.fwhm = std::fabs(p(1)) * f_scale;
  fit.amplitude = p(2) * p_scale;
  fit.floor = p_min + p(3) * p_scale;
  fit.sigma_center = std::sqrt(std::max(cov(0, 0) * s2, 0.0)) * f_scale;
  fit.iterations = iter;
  fit.rss = rss * p_scale * p_scale;
  return fit;
}

ThermalFitResult fit_zero_expansion(const std::vector<ThermalPoint>& points, double f_opt_hz) {
  if (!(f_opt_hz > 0.0)) {
    throw domain_error("optical frequency must be positive");
  }
  std::set<double> distinct;
  for (const auto& p : points) {
    distinct.insert(p.temperature_c);
  }
  if (distinct.size() < 3) {
    throw domain_error("zero-expansion fit needs at least three distinct temperatures");
  }
  const auto n = static_cast<Eigen::Index>(points.size());
  double t_mean = 0.0;
  for (const auto& p : points) {
    t_mean += p.temperature_c;
  }
  t_mean /= static_cast<double>(n);
  const double half_range = 0.5 * (*distinct.rbegin() - *distinct.begin());

  Eigen::MatrixXd design(n, 3);
  Eigen::VectorXd data(n);
  Eigen::VectorXd sigma(n);
  double y_mean = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& p = points[static_cast<std::size_t>(i)];
    const double u = p.temperature_c - t_mean;  // a difference, so degC and K agree
    design(i, 0) = 1.0;
    design(i, 1) = u;
    design(i, 2) = u * u;
    data(i) = p.beat_hz / f_opt_hz;
    sigma(i) = p.sigma_hz / f_opt_hz;
    y_mean += data(i);
  }
  y_mean /= static_cast<double>(n);
  double y_dev = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    y_dev = std::max(y_dev, std::fabs(data(i) - y_mean));
  }

  const auto fit = numeric::weighted_linear_fit(design, data, sigma);
  const double c1 = fit.params(1);
  const double c2 = fit.params(2);
  if (!(std::fabs(c2) * half_range * half_range > 1e-10 * y_dev)) {
    throw domain_error("zero-expansion fit: data show no curvature (collinear)");
  }
  ThermalFitResult out;
  out.t_c = t_mean - c1 / (2.0 * c2);
  out.quadratic_coefficient = c2;
  out.curvature_e9 = -c2 / 1e-9;
  out.residual_rms_hz = std::sqrt(fit.residuals.squaredNorm() / static_cast<double>(n)) * f_opt_hz;
  return out;
}

double ule_fractional_length(double temperature_c, double t_c, double curvature) {
  const double d = temperature_c - t_c;
  return curvature * d * d;
}

}  // namespace combfit::stability
