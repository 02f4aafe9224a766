#include "combfit/comb.hpp"

#include <algorithm>
#include <limits>

namespace combfit {

namespace {

ExactFrequency signed_term(Sign s, ExactFrequency f) { return s == Sign::minus ? -f : f; }

wide_int floor_div(ExactFrequency num, ExactFrequency den) { return num.divmod(den).quotient; }

wide_int ceil_div(ExactFrequency num, ExactFrequency den) {
  const auto dm = num.divmod(den);
  return dm.remainder == ExactFrequency{} ? dm.quotient : dm.quotient + 1;
}

std::int64_t to_mode_value(wide_int n) {
  if (n < 0 || n > std::numeric_limits<std::int64_t>::max()) {
    throw domain_error("mode number out of range: " + to_decimal_string(n));
  }
  return static_cast<std::int64_t>(n);
}

std::string format_candidates(const std::vector<ModeIndex>& c) {
  std::string out = "{";
  for (std::size_t i = 0; i < c.size(); ++i) {
    out += (i ? ", " : "") + std::to_string(c[i].value());
  }
  return out + "}";
}

}  // namespace

std::string to_string(Sign s) {
  switch (s) {
    case Sign::plus:
      return "+";
    case Sign::minus:
      return "-";
    case Sign::unknown:
      break;
  }
  return "?";
}

Sign parse_sign(const std::string& text) {
  if (text == "+" || text == "+1" || text == "plus") {
    return Sign::plus;
  }
  if (text == "-" || text == "-1" || text == "minus") {
    return Sign::minus;
  }
  if (text == "?" || text == "unknown") {
    return Sign::unknown;
  }
  throw input_error("invalid sign '" + text + "' (expected +, - or ?)");
}

ModeIndex::ModeIndex(std::int64_t n) : n_(n) {
  if (n < 0) {
    throw domain_error("mode index must be non-negative, got " + std::to_string(n));
  }
}

CombParams::CombParams(ExactFrequency f_rep, ExactFrequency f_ceo) : f_rep_(f_rep), f_ceo_(f_ceo) {
  if (f_rep <= ExactFrequency{}) {
    throw domain_error("repetition rate must be positive, got " + f_rep.to_string() + " Hz");
  }
}

bool CombParams::normalized() const { return f_ceo_ >= ExactFrequency{} && f_ceo_ < f_rep_; }

ExactFrequency mode_frequency(const CombParams& comb, ModeIndex n) {
  return comb.f_rep().scaled(n.value()) + comb.f_ceo();
}

RenumberedMode normalize(const CombParams& comb, ModeIndex n) {
  const auto dm = comb.f_ceo().divmod(comb.f_rep());
  const wide_int renumbered = checked_add(n.value(), dm.quotient);
  return {CombParams(comb.f_rep(), dm.remainder), ModeIndex(to_mode_value(renumbered))};
}

ExactFrequency solve_laser_frequency(const CombParams& comb, ModeIndex n, const BeatObservation& beat) {
  if (beat.sign_ceo == Sign::unknown || beat.sign_beat == Sign::unknown) {
    throw domain_error("beat signs unresolved: run sign determination first");
  }
  return comb.f_rep().scaled(n.value()) + signed_term(beat.sign_ceo, comb.f_ceo()) +
         signed_term(beat.sign_beat, beat.f_beat);
}

SignSteps default_sign_steps(const CombParams& comb) {
  const ExactFrequency one_mhz = ExactFrequency::from_millihertz(1);
  const ExactFrequency rep = std::max(
      ExactFrequency::from_millihertz(comb.f_rep().millihertz() / 10'000'000), one_mhz);
  const ExactFrequency ceo = std::max(
      ExactFrequency::from_millihertz(comb.f_ceo().abs().millihertz() / 1000), ExactFrequency::from_hz(1000));
  return {rep, ceo};
}

SignDetermination determine_signs(const BeatProbe& probe, const CombParams& comb, const SignSteps& steps) {
  const SignSteps defaults = default_sign_steps(comb);
  const ExactFrequency rep_step = steps.rep_step.value_or(*defaults.rep_step);
  const ExactFrequency ceo_step = steps.ceo_step.value_or(*defaults.ceo_step);
  const ExactFrequency zero{};
  if (rep_step <= zero || ceo_step <= zero || rep_step >= comb.f_rep()) {
    throw domain_error("sign determination steps must be positive and below f_rep");
  }

  auto smaller = [&]() -> std::optional<SignSteps> {
    const ExactFrequency one = ExactFrequency::from_millihertz(1);
    if (rep_step == one && ceo_step == one) {
      return std::nullopt;
    }
    return SignSteps{std::max(ExactFrequency::from_millihertz(rep_step.millihertz() / 10), one),
                     std::max(ExactFrequency::from_millihertz(ceo_step.millihertz() / 10), one)};
  };
  auto ambiguous = [&](const std::string& why, bool step_can_help) {
    std::string msg = "ambiguous sign determination: " + why;
    const auto suggestion = step_can_help ? smaller() : std::nullopt;
    if (suggestion) {
      msg += "; retry with rep_step=" + suggestion->rep_step->to_string() +
             " Hz, ceo_step=" + suggestion->ceo_step->to_string() + " Hz";
    }
    throw AmbiguousSignError(msg, suggestion);
  };

  const ExactFrequency half_rep = ExactFrequency::from_millihertz(comb.f_rep().millihertz() / 2);
  const ExactFrequency base = probe(comb);
  if (base == zero) {
    ambiguous("zero beat carries no sign", false);
  }
  if (base < zero || base > half_rep) {
    throw domain_error("probe returned |f_beat|=" + base.to_string() + " Hz outside [0, f_rep/2]");
  }

  const ExactFrequency up = probe(CombParams(comb.f_rep() + rep_step, comb.f_ceo()));
  const ExactFrequency down = probe(CombParams(comb.f_rep() - rep_step, comb.f_ceo()));
  const ExactFrequency shift_up = up - base;
  const ExactFrequency shift_down = down - base;
  if (shift_up == zero || shift_up != -shift_down) {
    ambiguous("beat response to f_rep steps is not linear (zero crossing or mode hop)", true);
  }
  const auto per_step = shift_up.abs().divmod(rep_step);
  if (per_step.remainder != zero) {
    ambiguous("beat shift is not an integer multiple of the f_rep step (mode hop)", true);
  }
  const wide_int implied_mode = per_step.quotient;
  // n*delta must stay well inside a quarter of the mode spacing.
  if (checked_mul(checked_mul(implied_mode, rep_step.millihertz()), 4) >= comb.f_rep().millihertz()) {
    ambiguous("f_rep step moves the laser by more than f_rep/4", true);
  }
  const Sign sign_beat = shift_up < zero ? Sign::plus : Sign::minus;

  const ExactFrequency ceo_probe = probe(CombParams(comb.f_rep(), comb.f_ceo() + ceo_step));
  const ExactFrequency shift_ceo = ceo_probe - base;
  if (shift_ceo.abs() != ceo_step) {
    ambiguous("beat response to the f_ceo step does not equal the step (zero crossing)", true);
  }
  // shift_ceo = -sign_beat * sign_ceo * ceo_step
  const bool same = (shift_ceo < zero);
  const Sign sign_ceo = same ? sign_beat : (sign_beat == Sign::plus ? Sign::minus : Sign::plus);

  return {sign_ceo, sign_beat, base, to_mode_value(implied_mode)};
}

ModeIndex determine_mode_number(ExactFrequency coarse, ExactFrequency coarse_uncertainty, const CombParams& comb,
                                const BeatObservation& beat) {
  if (beat.sign_ceo == Sign::unknown || beat.sign_beat == Sign::unknown) {
    throw domain_error("beat signs unresolved: run sign determination first");
  }
  if (coarse_uncertainty < ExactFrequency{}) {
    throw domain_error("coarse uncertainty must be non-negative");
  }
  const ExactFrequency offset = signed_term(beat.sign_ceo, comb.f_ceo()) + signed_term(beat.sign_beat, beat.f_beat);
  const ExactFrequency target = coarse - offset;

  auto window = [&]() {
    std::vector<ModeIndex> out;
    const wide_int lo = std::max<wide_int>(ceil_div(target - coarse_uncertainty, comb.f_rep()), 0);
    const wide_int hi = floor_div(target + coarse_uncertainty, comb.f_rep());
    for (wide_int n = lo; n <= hi && out.size() < 64; ++n) {
      out.emplace_back(to_mode_value(n));
    }
    return out;
  };

  if (coarse_uncertainty.scaled(2) >= comb.f_rep()) {
    const auto candidates = window();
    throw ModeNumberError("coarse uncertainty " + coarse_uncertainty.to_string() +
                              " Hz is not below f_rep/2; no unique mode number, candidates " +
                              format_candidates(candidates),
                          candidates);
  }

  const auto dm = target.divmod(comb.f_rep());
  const ExactFrequency below = dm.remainder;
  const ExactFrequency above = comb.f_rep() - dm.remainder;
  if (below == above) {
    const std::vector<ModeIndex> tie{ModeIndex(to_mode_value(dm.quotient)), ModeIndex(to_mode_value(dm.quotient + 1))};
    throw ModeNumberError("coarse frequency lies exactly between two modes, candidates " + format_candidates(tie),
                          tie);
  }
  const wide_int n = below < above ? dm.quotient : dm.quotient + 1;
  const ExactFrequency distance = std::min(below, above);
  if (distance > coarse_uncertainty) {
    throw ModeNumberError("no comb mode within the coarse uncertainty (nearest is " + distance.to_string() +
                              " Hz away)",
                          {});
  }
  return ModeIndex(to_mode_value(n));
}

FrequencyRatio optical_ratio(ExactFrequency numerator, ExactFrequency denominator, int significant_digits) {
  if (denominator == ExactFrequency{}) {
    throw domain_error("optical ratio with zero denominator");
  }
  if (denominator < ExactFrequency{}) {
    throw domain_error("optical ratio denominator must be positive");
  }
  Rational value(numerator.millihertz(), denominator.millihertz());
  return {value, value.to_decimal(significant_digits)};
}

}  // namespace combfit
