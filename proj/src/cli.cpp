#include "combfit/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "combfit/astro_calib.hpp"
#include "combfit/comb.hpp"
#include "combfit/drift_fit.hpp"
#include "combfit/errors.hpp"
#include "combfit/pulse_model.hpp"
#include "combfit/schema.hpp"
#include "combfit/sensitivity.hpp"
#include "combfit/stability.hpp"

#ifndef COMBFIT_DEFAULT_DATA_DIR
#define COMBFIT_DEFAULT_DATA_DIR "datasets"
#endif

namespace combfit::cli {

namespace fs = std::filesystem;
using nlohmann::json;

std::filesystem::path data_dir() {
  if (const char* env = std::getenv("COMBFIT_DATA_DIR"); env && *env) {
    return env;
  }
  return COMBFIT_DEFAULT_DATA_DIR;
}

namespace {

// ---- input helpers ---------------------------------------------------------

// Paths that do not exist as given are looked up by file name in the data
// directory, so "datasets/x.json" works from any working directory.
fs::path resolve_input(const std::string& given) {
  const fs::path p(given);
  if (fs::exists(p)) {
    return p;
  }
  const fs::path bundled = data_dir() / p.filename();
  if (p.is_relative() && fs::exists(bundled)) {
    return bundled;
  }
  throw input_error("cannot open '" + given + "'");
}

fs::path bundled(const std::string& name) { return data_dir() / name; }

std::optional<double> to_number(const std::string& text) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (first != last && *first == '+') {
    ++first;
  }
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last) {
    return std::nullopt;
  }
  return v;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) {
    return "";
  }
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct CsvTable {
  std::string source;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;

  double number(std::size_t row, std::size_t col) const {
    const auto v = to_number(rows[row][col]);
    if (!v || !std::isfinite(*v)) {
      throw input_error(source + ":" + std::to_string(line_numbers[row]) + ": column " + std::to_string(col + 1) +
                        " is not a finite number: '" + rows[row][col] + "'");
    }
    return *v;
  }
  ExactFrequency frequency(std::size_t row, std::size_t col) const {
    try {
      return ExactFrequency::parse(rows[row][col]);
    } catch (const std::exception& e) {
      throw input_error(source + ":" + std::to_string(line_numbers[row]) + ": column " + std::to_string(col + 1) +
                        ": " + e.what());
    }
  }
};

// Comma separated, '#' comments, optional header row (detected by a
// non-numeric first cell).
CsvTable read_csv(const fs::path& path, std::size_t min_columns) {
  std::ifstream in(path);
  if (!in) {
    throw input_error("cannot open '" + path.string() + "'");
  }
  CsvTable t;
  t.source = path.filename().string();
  std::string line;
  std::size_t line_no = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string content = trim(line.substr(0, line.find('#')));
    if (content.empty()) {
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ss(content);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      cells.push_back(trim(cell));
    }
    if (first) {
      first = false;
      if (!cells.empty() && !to_number(cells[0])) {
        t.header = cells;
        continue;
      }
    }
    if (cells.size() < min_columns) {
      throw input_error(t.source + ":" + std::to_string(line_no) + ": expected " + std::to_string(min_columns) +
                        " columns, found " + std::to_string(cells.size()));
    }
    t.rows.push_back(std::move(cells));
    t.line_numbers.push_back(line_no);
  }
  if (t.rows.empty()) {
    throw input_error(t.source + ": no data rows");
  }
  return t;
}

ExactFrequency parse_frequency(const std::string& text, const std::string& flag) {
  try {
    return ExactFrequency::parse(text);
  } catch (const std::exception& e) {
    throw input_error(flag + ": " + e.what());
  }
}

Sign parse_sign_flag(const std::string& text, const std::string& flag) {
  try {
    return parse_sign(text);
  } catch (const std::exception& e) {
    throw input_error(flag + ": " + e.what());
  }
}

std::vector<double> parse_list(const std::string& text, const std::string& flag) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto v = to_number(trim(item));
    if (!v) {
      throw input_error(flag + ": '" + item + "' is not a number");
    }
    out.push_back(*v);
  }
  return out;
}

std::string csv_number(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

json versioned(json body) {
  json j;
  j["schema_version"] = schema::current_version;
  for (auto& [k, v] : body.items()) {
    j[k] = v;
  }
  return j;
}

void emit_json(std::ostream& out, const json& j) { out << j.dump(2) << "\n"; }

// ---- drift -----------------------------------------------------------------

struct DriftArgs {
  std::string input;
  std::string registry;
  std::string series;
  std::string gravity;
  std::string transition = "series";
  double a = std::nan("");
  double amplitude = 3.3e-10;
  double perihelion = 0.01;
  bool with_drift = false;
};

json solution_json(const drift::DriftSolution& s) {
  return {{"convention", "y + A x = b"},
          {"units", "1e-15/yr"},
          {"x_e15_per_yr", s.x_e15},
          {"sigma_x_e15_per_yr", s.sigma_x_e15},
          {"y_e15_per_yr", s.y_e15},
          {"sigma_y_e15_per_yr", s.sigma_y_e15},
          {"correlation_xy", s.correlation_xy},
          {"chi2", s.chi2},
          {"n_points", s.n_points}};
}

void cmd_drift(const DriftArgs& a, const RunConfig& cfg, std::ostream& out) {
  if (!a.series.empty()) {
    const auto table = read_csv(resolve_input(a.series), 3);
    std::vector<drift::TimeSeriesPoint> points;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
      points.push_back({table.number(i, 0), table.frequency(i, 1), table.number(i, 2)});
    }
    const auto rd = drift::fit_relative_drift(points);
    json body = {{"rate_e15_per_yr", rd.rate_e15()}, {"sigma_e15_per_yr", rd.sigma_e15()}, {"mean_hz", rd.mean_hz}};
    if (!std::isnan(a.a)) {
      const auto m = drift::to_measurement(a.transition, a.a, rd);
      body["measurement"] = {{"transition_id", m.transition_id},
                             {"A", m.a},
                             {"b_e15_per_yr", m.b_e15},
                             {"sigma_e15_per_yr", m.sigma_e15}};
    }
    if (cfg.format == Format::csv) {
      out << "rate_e15_per_yr,sigma_e15_per_yr,mean_hz\n"
          << csv_number(rd.rate_e15()) << "," << csv_number(rd.sigma_e15()) << "," << csv_number(rd.mean_hz) << "\n";
    } else {
      emit_json(out, versioned(body));
    }
    return;
  }
  if (!a.gravity.empty()) {
    const auto table = read_csv(resolve_input(a.gravity), 3);
    std::vector<drift::GravitySample> samples;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
      samples.push_back({table.number(i, 0), table.number(i, 1), table.number(i, 2)});
    }
    drift::PotentialModel model;
    model.amplitude = a.amplitude;
    model.perihelion_epoch = a.perihelion;
    const auto g = drift::fit_gravity_coupling(samples, model, {a.with_drift});
    emit_json(out, versioned({{"k_alpha", g.k_alpha},
                              {"sigma_k", g.sigma_k},
                              {"offset", g.offset},
                              {"drift_per_yr", g.drift_per_yr},
                              {"chi2", g.chi2},
                              {"potential_amplitude", model.amplitude}}));
    return;
  }

  const fs::path path = resolve_input(a.input.empty() ? bundled("fischer_peik_fortier.json").string() : a.input);
  const json doc = schema::read_json_file(path);
  if (doc.is_object() && doc.contains("results")) {
    const auto rows = drift::alpha_results_from_json(doc, path.filename().string());
    json list = json::array();
    for (const auto& r : rows) {
      list.push_back({{"year", r.year},
                      {"method", r.method},
                      {"reference", r.reference},
                      {"x_e15_per_yr", r.x_e15},
                      {"sigma_e15_per_yr", r.sigma_e15}});
    }
    emit_json(out, versioned({{"results", list}}));
    return;
  }
  std::optional<sensitivity::TransitionRegistry> registry;
  const fs::path reg_path = a.registry.empty() ? bundled("transitions.json") : resolve_input(a.registry);
  if (fs::exists(reg_path)) {
    registry = sensitivity::TransitionRegistry::load(reg_path);
  }
  const auto dataset = drift::dataset_from_json(doc, registry ? &*registry : nullptr, path.filename().string());
  const auto sol = drift::fit_drift(dataset.measurements);
  if (cfg.format == Format::csv) {
    out << "x_e15_per_yr,sigma_x_e15_per_yr,y_e15_per_yr,sigma_y_e15_per_yr,correlation_xy,chi2\n"
        << csv_number(sol.x_e15) << "," << csv_number(sol.sigma_x_e15) << "," << csv_number(sol.y_e15) << ","
        << csv_number(sol.sigma_y_e15) << "," << csv_number(sol.correlation_xy) << "," << csv_number(sol.chi2)
        << "\n";
    return;
  }
  json body = solution_json(sol);
  body["input"] = path.filename().string();
  emit_json(out, versioned(body));
}

// ---- comb ------------------------------------------------------------------

struct CombArgs {
  std::string frep;
  std::string fceo = "0";
  std::string beat;
  std::string sign_beat = "unknown";
  std::string sign_ceo = "unknown";
  std::optional<std::int64_t> mode;
  std::string coarse;
  std::string coarse_uncertainty;
  std::string numerator;
  std::string denominator;
  int trials = 8;
};

CombParams comb_from(const CombArgs& a) {
  if (a.frep.empty()) {
    throw input_error("--frep is required");
  }
  return CombParams(parse_frequency(a.frep, "--frep"), parse_frequency(a.fceo, "--fceo"));
}

void cmd_comb_solve(const CombArgs& a, std::ostream& out) {
  const CombParams comb = comb_from(a);
  if (a.beat.empty()) {
    throw input_error("--beat is required");
  }
  BeatObservation beat{parse_frequency(a.beat, "--beat"), parse_sign_flag(a.sign_beat, "--sign-beat"),
                       parse_sign_flag(a.sign_ceo, "--sign-ceo")};
  ModeIndex n;
  if (a.mode) {
    n = ModeIndex(*a.mode);
  } else {
    if (a.coarse.empty() || a.coarse_uncertainty.empty()) {
      throw input_error("give --mode, or --coarse with --coarse-uncertainty");
    }
    n = determine_mode_number(parse_frequency(a.coarse, "--coarse"),
                              parse_frequency(a.coarse_uncertainty, "--coarse-uncertainty"), comb, beat);
  }
  const ExactFrequency f = solve_laser_frequency(comb, n, beat);
  emit_json(out, versioned({{"mode", n.value()},
                            {"f_rep_hz", comb.f_rep().to_string()},
                            {"f_ceo_hz", comb.f_ceo().to_string()},
                            {"f_beat_hz", beat.f_beat.to_string()},
                            {"sign_ceo", to_string(beat.sign_ceo)},
                            {"sign_beat", to_string(beat.sign_beat)},
                            {"laser_hz", f.to_string()}}));
}

void cmd_comb_normalize(const CombArgs& a, std::ostream& out) {
  if (!a.mode) {
    throw input_error("--mode is required");
  }
  const auto r = normalize(comb_from(a), ModeIndex(*a.mode));
  emit_json(out, versioned({{"mode", r.n.value()},
                            {"f_rep_hz", r.comb.f_rep().to_string()},
                            {"f_ceo_hz", r.comb.f_ceo().to_string()},
                            {"mode_hz", mode_frequency(r.comb, r.n).to_string()}}));
}

void cmd_comb_ratio(const CombArgs& a, const RunConfig& cfg, std::ostream& out) {
  if (a.numerator.empty() || a.denominator.empty()) {
    throw input_error("--num and --den are required");
  }
  const auto r = optical_ratio(parse_frequency(a.numerator, "--num"), parse_frequency(a.denominator, "--den"),
                               cfg.precision);
  emit_json(out, versioned({{"numerator", to_decimal_string(r.value.numerator())},
                            {"denominator", to_decimal_string(r.value.denominator())},
                            {"ratio", r.decimal}}));
}

// Physical stand-in for a beat counter: the comb offset enters with the
// hidden sign, the counter reports the distance to the nearest mode.
ExactFrequency nearest_mode_beat(ExactFrequency laser, Sign hidden_ceo, const CombParams& comb) {
  const ExactFrequency offset = hidden_ceo == Sign::minus ? -comb.f_ceo() : comb.f_ceo();
  const ExactFrequency r = (laser - offset).divmod(comb.f_rep()).remainder;
  const ExactFrequency other = comb.f_rep() - r;
  return std::min(r, other);
}

void cmd_comb_signs_demo(const CombArgs& a, const RunConfig& cfg, std::ostream& out) {
  if (a.trials < 1) {
    throw input_error("--trials must be positive");
  }
  std::mt19937_64 rng(cfg.seed);
  auto uniform = [&](wide_int lo, wide_int hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo);
    return lo + static_cast<wide_int>(rng() % (span + 1));
  };
  const Sign signs[2] = {Sign::plus, Sign::minus};
  json rows = json::array();
  bool all_ok = true;
  for (int t = 0; t < a.trials; ++t) {
    const wide_int rep = uniform(500'000'000'000, 1'000'000'000'000);  // mHz
    const CombParams comb(ExactFrequency::from_millihertz(rep),
                          ExactFrequency::from_millihertz(uniform(rep / 20, rep * 9 / 20)));
    const Sign s_ceo = signs[t % 2];
    const Sign s_beat = signs[(t / 2) % 2];
    const ExactFrequency beat = ExactFrequency::from_millihertz(uniform(rep * 15 / 100, rep * 35 / 100));
    const std::int64_t n = static_cast<std::int64_t>(uniform(400'000, 600'000));
    const BeatObservation truth{beat, s_beat, s_ceo};
    const ExactFrequency laser = solve_laser_frequency(comb, ModeIndex(n), truth);

    const BeatProbe probe = [&](const CombParams& c) { return nearest_mode_beat(laser, s_ceo, c); };
    const auto det = determine_signs(probe, comb);
    const BeatObservation observed{det.beat, det.sign_beat, det.sign_ceo};
    const ExactFrequency quarter = ExactFrequency::from_millihertz(rep / 4);
    const ExactFrequency coarse = laser + ExactFrequency::from_millihertz(uniform(0, rep / 2) - rep / 4);
    const ModeIndex found = determine_mode_number(coarse, quarter, comb, observed);
    const ExactFrequency recovered = solve_laser_frequency(comb, found, observed);
    const bool ok = det.sign_ceo == s_ceo && det.sign_beat == s_beat && recovered == laser;
    all_ok = all_ok && ok;
    rows.push_back({{"trial", t},
                    {"f_rep_hz", comb.f_rep().to_string()},
                    {"f_ceo_hz", comb.f_ceo().to_string()},
                    {"laser_hz", laser.to_string()},
                    {"true_signs", {to_string(s_ceo), to_string(s_beat)}},
                    {"recovered_signs", {to_string(det.sign_ceo), to_string(det.sign_beat)}},
                    {"recovered_mode", found.value()},
                    {"recovered_laser_hz", recovered.to_string()},
                    {"match", ok}});
  }
  emit_json(out, versioned({{"seed", cfg.seed}, {"all_match", all_ok}, {"trials", rows}}));
  if (!all_ok) {
    throw domain_error("sign-determination demo: recovered values disagree with ground truth");
  }
}

// ---- simulate --------------------------------------------------------------

struct SimulateArgs {
  std::string config;
  std::size_t samples = 4096;
  int periods = 10;
  double fwhm = 0.004;
  double carrier = 600.3;
  double phase = 0.0;
  double chirp = 0.0;
  double time_unit = 1.0;
  double n2 = 0.0;
  double length = 0.0;
  double area = 1.0;
  double peak_power = 0.0;
  std::string spectrum_csv;
};

void apply_config(SimulateArgs& a) {
  if (a.config.empty()) {
    return;
  }
  const fs::path path = resolve_input(a.config);
  const json doc = schema::read_json_file(path);
  const std::string ctx = path.filename().string();
  schema::require_version(doc, ctx);
  auto num = [&](const char* key, double& target) {
    if (const auto v = schema::optional_number(doc, key, ctx)) {
      target = *v;
    }
  };
  double samples = static_cast<double>(a.samples);
  double periods = a.periods;
  num("samples", samples);
  num("periods", periods);
  num("fwhm", a.fwhm);
  num("carrier_frequency", a.carrier);
  num("carrier_phase", a.phase);
  num("chirp", a.chirp);
  num("time_unit_s", a.time_unit);
  num("n2", a.n2);
  num("length_m", a.length);
  num("effective_area_m2", a.area);
  num("peak_power_w", a.peak_power);
  if (samples < 1 || samples != std::floor(samples) || periods < 1 || periods != std::floor(periods)) {
    throw input_error(ctx + ": 'samples' and 'periods' must be positive integers");
  }
  a.samples = static_cast<std::size_t>(samples);
  a.periods = static_cast<int>(periods);
  if (const auto csv = schema::optional_string(doc, "spectrum_csv", ctx); csv && a.spectrum_csv.empty()) {
    a.spectrum_csv = *csv;
  }
}

void cmd_simulate(SimulateArgs a, const RunConfig& cfg, std::ostream& out) {
  apply_config(a);
  pulse::GaussianPulse g;
  g.samples = a.samples;
  g.fwhm = a.fwhm;
  g.carrier_frequency = a.carrier;
  g.carrier_phase = a.phase;
  g.chirp = a.chirp;
  g.time_unit_s = a.time_unit;
  pulse::PulseTrain train = pulse::make_gaussian_train(g);
  const pulse::KerrMedium medium{a.n2, a.length, a.area};
  const double phi_peak = pulse::peak_nonlinear_phase(train, medium, a.peak_power);
  train = pulse::apply_spm(train, medium, a.peak_power);
  const auto field = pulse::synthesize(train, a.periods);
  const auto comb = pulse::spectrum(field);

  if (cfg.format == Format::csv) {
    pulse::write_spectrum_csv(out, comb);
    return;
  }
  if (!a.spectrum_csv.empty()) {
    std::ofstream csv(a.spectrum_csv);
    if (!csv) {
      throw input_error("cannot write '" + a.spectrum_csv + "'");
    }
    pulse::write_spectrum_csv(csv, comb);
  }
  const double unit_hz = 1.0 / comb.time_unit_s;
  json body = {{"phase_slip_rad", field.phase_slip},
               {"phase_slip_over_2pi", field.phase_slip / (2.0 * std::numbers::pi)},
               {"f_rep", comb.f_rep},
               {"f_ceo", comb.f_ceo},
               {"f_ceo_over_f_rep", comb.f_ceo / comb.f_rep},
               {"f_rep_hz", comb.f_rep * unit_hz},
               {"f_ceo_hz", comb.f_ceo * unit_hz},
               {"resolution", comb.resolution},
               {"lines", comb.lines.size()},
               {"width_3db", pulse::spectral_width_3db(comb)},
               {"peak_nonlinear_phase_rad", phi_peak}};
  try {
    const auto f2f = pulse::f_2f_offset(comb);
    body["f2f"] = {{"offset", f2f.offset}, {"pairs", f2f.pairs}, {"spread", f2f.spread}};
  } catch (const domain_error& e) {
    body["f2f"] = {{"error", e.what()}};
  }
  emit_json(out, versioned(body));
}

// ---- allan -----------------------------------------------------------------

struct AllanArgs {
  std::string input;
  std::string taus;
  double tau0 = 0.0;
};

void cmd_allan(const AllanArgs& a, const RunConfig& cfg, std::ostream& out) {
  const auto table = read_csv(resolve_input(a.input.empty() ? bundled("constant_series.csv").string() : a.input), 2);
  stability::FractionalSeries series;
  std::vector<double> times;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    times.push_back(table.number(i, 0));
    series.y.push_back(table.number(i, 1));
  }
  if (a.tau0 > 0.0) {
    series.tau0 = a.tau0;
  } else {
    if (times.size() < 2) {
      throw domain_error("Allan deviation needs at least two samples");
    }
    series.tau0 = times[1] - times[0];
    for (std::size_t i = 1; i < times.size(); ++i) {
      const double dt = times[i] - times[i - 1];
      if (std::fabs(dt - series.tau0) > 1e-9 * std::fabs(series.tau0)) {
        throw input_error(table.source + ":" + std::to_string(table.line_numbers[i]) +
                          ": samples are not equally spaced; pass --tau0 to override");
      }
    }
  }
  const auto taus = a.taus.empty() ? stability::octave_taus(series) : parse_list(a.taus, "--taus");
  const auto points = stability::allan_deviation(series, taus);
  if (cfg.format == Format::csv) {
    out << "tau_s,sigma_y,count\n";
    for (const auto& p : points) {
      out << csv_number(p.tau) << "," << csv_number(p.sigma_y) << "," << p.count << "\n";
    }
    return;
  }
  json list = json::array();
  for (const auto& p : points) {
    list.push_back({{"tau_s", p.tau}, {"sigma_y", p.sigma_y}, {"count", p.count}});
  }
  emit_json(out, versioned({{"estimator", "overlapping"}, {"tau0_s", series.tau0}, {"points", list}}));
}

// ---- line ------------------------------------------------------------------

struct LineArgs {
  std::string input;
};

void cmd_line(const LineArgs& a, std::ostream& out) {
  if (a.input.empty()) {
    throw input_error("--input is required");
  }
  const auto table = read_csv(resolve_input(a.input), 2);
  std::vector<std::pair<double, double>> spectrum;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    spectrum.emplace_back(table.number(i, 0), table.number(i, 1));
  }
  const auto fit = stability::lorentzian_center(spectrum);
  emit_json(out, versioned({{"center_hz", fit.center},
                            {"sigma_center_hz", fit.sigma_center},
                            {"fwhm_hz", fit.fwhm},
                            {"amplitude", fit.amplitude},
                            {"floor", fit.floor},
                            {"iterations", fit.iterations}}));
}

// ---- tc --------------------------------------------------------------------

struct TcArgs {
  std::string input;
  std::string f_opt;
};

void cmd_tc(const TcArgs& a, std::ostream& out) {
  if (a.input.empty() || a.f_opt.empty()) {
    throw input_error("--input and --f-opt are required");
  }
  const auto f_opt = to_number(a.f_opt);
  if (!f_opt) {
    throw input_error("--f-opt: not a number");
  }
  const auto table = read_csv(resolve_input(a.input), 2);
  std::vector<stability::ThermalPoint> points;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    stability::ThermalPoint p{table.number(i, 0), table.number(i, 1), 1.0};
    if (table.rows[i].size() > 2) {
      p.sigma_hz = table.number(i, 2);
    }
    points.push_back(p);
  }
  const auto r = stability::fit_zero_expansion(points, *f_opt);
  emit_json(out, versioned({{"t_c_celsius", r.t_c},
                            {"curvature_e9_per_k2", r.curvature_e9},
                            {"quadratic_coefficient_per_k2", r.quadratic_coefficient},
                            {"residual_rms_hz", r.residual_rms_hz}}));
}

// ---- calib -----------------------------------------------------------------

struct CalibArgs {
  std::string frep = "250e6";
  std::string fceo = "0";
  int m = 60;
  std::string band_low = "545e12";
  std::string band_high = "546e12";
  std::optional<std::int64_t> anchor;
  std::string lines;
  int degree = 3;
  bool decreasing = false;
  std::size_t first_index = 0;
  std::optional<double> fractional;
};

void cmd_calib(const CalibArgs& a, const RunConfig& cfg, std::ostream& out) {
  const CombParams base(parse_frequency(a.frep, "--frep"), parse_frequency(a.fceo, "--fceo"));
  const calib::FilteredComb filtered(base, a.m);
  const calib::Band band{parse_frequency(a.band_low, "--band-low"), parse_frequency(a.band_high, "--band-high")};
  const auto modes = calib::filter_modes(filtered, band, a.anchor);
  json body = {{"f_rep_hz", base.f_rep().to_string()},
               {"m", filtered.m()},
               {"spacing_hz", filtered.spacing().to_string()},
               {"band_hz", {band.low.to_string(), band.high.to_string()}},
               {"n_modes", modes.size()},
               {"first_mode_hz", modes.front().to_string()},
               {"last_mode_hz", modes.back().to_string()}};
  if (a.fractional) {
    body["velocity_m_s"] = calib::velocity_uncertainty(*a.fractional, 1.0);
  }
  if (!a.lines.empty()) {
    const auto table = read_csv(resolve_input(a.lines), 2);
    std::vector<calib::PixelLine> lines;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
      lines.push_back({table.number(i, 0), table.number(i, 1)});
    }
    calib::AssociationOptions opts;
    opts.frequency_increases_with_pixel = !a.decreasing;
    opts.first_truth_index = a.first_index;
    const auto sol = calib::fit_wavelength_solution(lines, modes, a.degree, opts);
    if (cfg.format == Format::csv) {
      out << "pixel,truth_hz,residual_hz,velocity_m_s\n";
      for (const auto& r : sol.residuals) {
        out << csv_number(r.pixel) << "," << r.truth.to_string() << "," << csv_number(r.residual_hz) << ","
            << csv_number(r.velocity_m_s) << "\n";
      }
      return;
    }
    json residuals = json::array();
    for (const auto& r : sol.residuals) {
      residuals.push_back({{"pixel", r.pixel},
                           {"truth_hz", r.truth.to_string()},
                           {"residual_hz", r.residual_hz},
                           {"velocity_m_s", r.velocity_m_s}});
    }
    body["solution"] = {{"reference_hz", sol.reference.to_string()},
                        {"pixel_center", sol.pixel_center},
                        {"pixel_scale", sol.pixel_scale},
                        {"coefficients_hz", sol.coefficients},
                        {"rms_velocity_m_s", sol.rms_velocity},
                        {"n_lines", sol.n_lines},
                        {"residuals", residuals}};
  }
  emit_json(out, versioned(body));
}

// ---- sensitivity -----------------------------------------------------------

struct SensitivityArgs {
  std::string atom;
  std::optional<int> z;
  std::string registry;
  double alpha = constants::fine_structure;
  bool list = false;
};

void cmd_sensitivity(const SensitivityArgs& a, std::ostream& out) {
  const fs::path reg_path = a.registry.empty() ? bundled("transitions.json") : resolve_input(a.registry);
  if (a.list) {
    const auto reg = sensitivity::TransitionRegistry::load(reg_path, a.alpha);
    json list = json::array();
    for (const auto& r : reg.records()) {
      list.push_back(sensitivity::to_json(r));
    }
    emit_json(out, versioned({{"transitions", list}}));
    return;
  }
  int z = 0;
  json body;
  if (a.z) {
    z = *a.z;
  } else if (!a.atom.empty()) {
    const auto reg = sensitivity::TransitionRegistry::load(reg_path, a.alpha);
    const auto* r = reg.find_atom(a.atom);
    if (!r) {
      throw input_error("--atom: '" + a.atom + "' not found in " + reg_path.filename().string());
    }
    z = r->z;
    body["atom"] = r->species;
    body["transition_id"] = r->id;
  } else {
    throw input_error("give --atom, --z or --list");
  }
  const auto c = sensitivity::casimir(z, a.alpha);
  body["Z"] = z;
  body["alpha"] = a.alpha;
  body["lambda"] = c.lambda_rel;
  body["F_rel"] = c.f_rel;
  body["L_hfs"] = c.l_hfs;
  emit_json(out, versioned(body));
}

// ---- dispatch --------------------------------------------------------------

void write_output(const RunConfig& cfg, const std::string& text, std::ostream& out) {
  if (cfg.output.empty()) {
    out << text;
    return;
  }
  std::ofstream file(cfg.output, std::ios::binary);
  if (!file) {
    throw input_error("cannot write '" + cfg.output + "'");
  }
  file << text;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Frequency-comb metrology and fundamental-constant drift analysis", "combfit"};
  app.require_subcommand(1);
  RunConfig cfg;
  std::string format = "json";
  app.add_option("--output,-o", cfg.output, "write results to a file instead of stdout");
  app.add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--seed", cfg.seed, "seed for randomized commands");
  app.add_option("--precision", cfg.precision, "significant digits for exact ratios")->check(CLI::Range(1, 36));

  std::function<void(std::ostream&)> action;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--output,-o", cfg.output);
    sub->add_option("--format", format)->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("--seed", cfg.seed);
    sub->add_option("--precision", cfg.precision)->check(CLI::Range(1, 36));
  };

  DriftArgs drift_args;
  auto* drift_cmd = app.add_subcommand("drift", "joint fit of d ln(alpha)/dt and d ln(mu_Cs/mu_B)/dt");
  add_common(drift_cmd);
  drift_cmd->add_option("--input,-i", drift_args.input, "drift dataset JSON (default: bundled three-ion set)");
  drift_cmd->add_option("--registry", drift_args.registry, "sensitivity registry for rows without A");
  drift_cmd->add_option("--series", drift_args.series, "CSV epoch_yr,frequency_hz,sigma_hz: fit d ln f/dt");
  drift_cmd->add_option("--A", drift_args.a, "with --series: sensitivity coefficient of the transition");
  drift_cmd->add_option("--transition", drift_args.transition, "with --series: transition id");
  drift_cmd->add_option("--gravity", drift_args.gravity, "CSV epoch_yr,fractional_shift,sigma: fit k_alpha");
  drift_cmd->add_option("--amplitude", drift_args.amplitude, "with --gravity: annual potential amplitude dU/c^2");
  drift_cmd->add_option("--perihelion", drift_args.perihelion, "with --gravity: perihelion epoch, fraction of year");
  drift_cmd->add_flag("--with-drift", drift_args.with_drift, "with --gravity: also fit a linear drift");
  drift_cmd->callback([&] { action = [&](std::ostream& o) { cmd_drift(drift_args, cfg, o); }; });

  CombArgs comb_args;
  auto* comb_cmd = app.add_subcommand("comb", "exact comb arithmetic");
  comb_cmd->require_subcommand(1);
  auto comb_common = [&](CLI::App* sub) {
    add_common(sub);
    sub->add_option("--frep", comb_args.frep, "repetition rate, Hz");
    sub->add_option("--fceo", comb_args.fceo, "carrier-envelope offset, Hz");
  };
  auto* solve = comb_cmd->add_subcommand("solve", "laser frequency from a beat note");
  comb_common(solve);
  solve->add_option("--beat", comb_args.beat, "|f_beat|, Hz");
  solve->add_option("--sign-beat", comb_args.sign_beat, "+ or -");
  solve->add_option("--sign-ceo", comb_args.sign_ceo, "+ or -");
  solve->add_option("--mode,-n", comb_args.mode, "mode number");
  solve->add_option("--coarse", comb_args.coarse, "coarse (wavemeter) frequency, Hz");
  solve->add_option("--coarse-uncertainty", comb_args.coarse_uncertainty, "coarse frequency uncertainty, Hz");
  solve->callback([&] { action = [&](std::ostream& o) { cmd_comb_solve(comb_args, o); }; });
  auto* norm = comb_cmd->add_subcommand("normalize", "shift f_ceo into [0, f_rep) and renumber");
  comb_common(norm);
  norm->add_option("--mode,-n", comb_args.mode, "mode number");
  norm->callback([&] { action = [&](std::ostream& o) { cmd_comb_normalize(comb_args, o); }; });
  auto* ratio = comb_cmd->add_subcommand("ratio", "exact ratio of two frequencies");
  add_common(ratio);
  ratio->add_option("--num", comb_args.numerator, "numerator, Hz");
  ratio->add_option("--den", comb_args.denominator, "denominator, Hz");
  ratio->callback([&] { action = [&](std::ostream& o) { cmd_comb_ratio(comb_args, cfg, o); }; });
  auto* demo = comb_cmd->add_subcommand("signs-demo", "sign and mode-number recovery on simulated beats");
  add_common(demo);
  demo->add_option("--trials", comb_args.trials, "number of simulated scenarios");
  demo->callback([&] { action = [&](std::ostream& o) { cmd_comb_signs_demo(comb_args, cfg, o); }; });

  SimulateArgs sim_args;
  auto* sim = app.add_subcommand("simulate", "pulse-train comb spectrum");
  add_common(sim);
  sim->add_option("--config", sim_args.config, "scenario JSON");
  sim->add_option("--samples", sim_args.samples, "samples per period (power of two)");
  sim->add_option("--periods", sim_args.periods, "number of pulse periods");
  sim->add_option("--fwhm", sim_args.fwhm, "intensity FWHM in units of the period");
  sim->add_option("--carrier", sim_args.carrier, "carrier frequency in units of f_rep");
  sim->add_option("--phase", sim_args.phase, "carrier phase at t = 0, rad");
  sim->add_option("--chirp", sim_args.chirp, "quadratic envelope phase");
  sim->add_option("--time-unit", sim_args.time_unit, "seconds per simulation time unit");
  sim->add_option("--n2", sim_args.n2, "Kerr index, m^2/W");
  sim->add_option("--length", sim_args.length, "fiber length, m");
  sim->add_option("--area", sim_args.area, "effective area, m^2");
  sim->add_option("--peak-power", sim_args.peak_power, "peak power, W");
  sim->add_option("--spectrum-csv", sim_args.spectrum_csv, "also write the line spectrum CSV here");
  sim->callback([&] { action = [&](std::ostream& o) { cmd_simulate(sim_args, cfg, o); }; });

  AllanArgs allan_args;
  auto* allan = app.add_subcommand("allan", "overlapping Allan deviation");
  add_common(allan);
  allan->add_option("--input,-i", allan_args.input, "CSV t_s,y (default: bundled constant series)");
  allan->add_option("--taus", allan_args.taus, "comma-separated averaging times, s (default: octaves)");
  allan->add_option("--tau0", allan_args.tau0, "sampling interval, s (default: from the time column)");
  allan->callback([&] { action = [&](std::ostream& o) { cmd_allan(allan_args, cfg, o); }; });

  LineArgs line_args;
  auto* line = app.add_subcommand("line", "Lorentzian line-centre fit");
  add_common(line);
  line->add_option("--input,-i", line_args.input, "CSV frequency_hz,power");
  line->callback([&] { action = [&](std::ostream& o) { cmd_line(line_args, o); }; });

  TcArgs tc_args;
  auto* tc = app.add_subcommand("tc", "zero-expansion temperature of a ULE cavity");
  add_common(tc);
  tc->add_option("--input,-i", tc_args.input, "CSV temperature_c,beat_hz[,sigma_hz]");
  tc->add_option("--f-opt", tc_args.f_opt, "optical frequency, Hz");
  tc->callback([&] { action = [&](std::ostream& o) { cmd_tc(tc_args, o); }; });

  CalibArgs calib_args;
  auto* cal = app.add_subcommand("calib", "filtered-comb spectrograph calibration");
  add_common(cal);
  cal->add_option("--frep", calib_args.frep, "repetition rate, Hz");
  cal->add_option("--fceo", calib_args.fceo, "offset frequency, Hz");
  cal->add_option("--m", calib_args.m, "filter order (4..60)");
  cal->add_option("--band-low", calib_args.band_low, "band lower edge, Hz");
  cal->add_option("--band-high", calib_args.band_high, "band upper edge, Hz");
  cal->add_option("--anchor", calib_args.anchor, "mode number kept by the filter (default: lowest in band)");
  cal->add_option("--lines", calib_args.lines, "CSV pixel,sigma_pixel of detected lines");
  cal->add_option("--degree", calib_args.degree, "polynomial degree");
  cal->add_flag("--decreasing", calib_args.decreasing, "frequency decreases with pixel");
  cal->add_option("--first-index", calib_args.first_index, "filtered mode matched to the first line");
  cal->add_option("--fractional", calib_args.fractional, "report c * delta_f/f for this fractional error");
  cal->callback([&] { action = [&](std::ostream& o) { cmd_calib(calib_args, cfg, o); }; });

  SensitivityArgs sens_args;
  auto* sens = app.add_subcommand("sensitivity", "relativistic corrections and alpha sensitivities");
  add_common(sens);
  sens->add_option("--atom", sens_args.atom, "species or transition id in the registry");
  sens->add_option("--z", sens_args.z, "nuclear charge");
  sens->add_option("--alpha", sens_args.alpha, "fine structure constant");
  sens->add_option("--registry", sens_args.registry, "registry JSON");
  sens->add_flag("--list", sens_args.list, "print the registry");
  sens->callback([&] { action = [&](std::ostream& o) { cmd_sensitivity(sens_args, o); }; });

  std::vector<std::string> argv_storage;
  argv_storage.reserve(args.size() + 1);
  argv_storage.push_back("combfit");
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_storage) {
    argv.push_back(a.c_str());
  }

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }
  cfg.format = format == "csv" ? Format::csv : Format::json;
  cfg.subcommand = app.get_subcommands().front()->get_name();
  for (const auto* opt : {&drift_args.input, &allan_args.input, &tc_args.input, &line_args.input, &sim_args.config}) {
    if (!opt->empty()) {
      cfg.inputs.push_back(*opt);
    }
  }

  try {
    std::ostringstream buffer;
    action(buffer);
    write_output(cfg, buffer.str(), out);
    return 0;
  } catch (const ModeNumberError& e) {
    err << "error: " << e.what() << "\n";
    if (!e.candidates().empty()) {
      err << "candidates:";
      for (const auto& c : e.candidates()) {
        err << " " << c.value();
      }
      err << "\n";
    }
    return 1;
  } catch (const input_error& e) {
    err << "input error: " << e.what() << "\n";
    return 2;
  } catch (const json::exception& e) {
    err << "input error: " << e.what() << "\n";
    return 2;
  } catch (const fs::filesystem_error& e) {
    err << "input error: " << e.what() << "\n";
    return 2;
  } catch (const domain_error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace combfit::cli
