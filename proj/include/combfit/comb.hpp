#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "combfit/errors.hpp"
#include "combfit/exact_frequency.hpp"
#include "combfit/rational.hpp"

namespace combfit {

enum class Sign : int { minus = -1, unknown = 0, plus = 1 };

std::string to_string(Sign s);
Sign parse_sign(const std::string& text);

// Comb mode number n.
class ModeIndex {
 public:
  constexpr ModeIndex() = default;
  explicit ModeIndex(std::int64_t n);
  constexpr std::int64_t value() const { return n_; }
  friend constexpr auto operator<=>(ModeIndex, ModeIndex) = default;

 private:
  std::int64_t n_ = 0;
};

// Repetition rate and carrier-envelope offset of a comb, f_n = n*f_rep + f_ceo.
class CombParams {
 public:
  CombParams(ExactFrequency f_rep, ExactFrequency f_ceo);

  ExactFrequency f_rep() const { return f_rep_; }
  ExactFrequency f_ceo() const { return f_ceo_; }
  // 0 <= f_ceo < f_rep.
  bool normalized() const;

  friend bool operator==(const CombParams&, const CombParams&) = default;

 private:
  ExactFrequency f_rep_;
  ExactFrequency f_ceo_;
};

// A counted beat note. Counters only report |f_beat|; the signs of the beat
// and of the offset frequency must be established separately.
struct BeatObservation {
  ExactFrequency f_beat;
  Sign sign_beat = Sign::unknown;
  Sign sign_ceo = Sign::unknown;
};

// n*f_rep + f_ceo. Accepts non-normalized combs as well.
ExactFrequency mode_frequency(const CombParams& comb, ModeIndex n);

struct RenumberedMode {
  CombParams comb;
  ModeIndex n;
};

// Shifts f_ceo into [0, f_rep) and renumbers n so the mode frequency is
// unchanged.
RenumberedMode normalize(const CombParams& comb, ModeIndex n);

// n*f_rep + sign_ceo*f_ceo + sign_beat*f_beat. Throws if either sign is unknown.
ExactFrequency solve_laser_frequency(const CombParams& comb, ModeIndex n, const BeatObservation& beat);

// Measurement oracle: returns |f_beat| for the given comb settings while the
// laser under test is held fixed.
using BeatProbe = std::function<ExactFrequency(const CombParams&)>;

struct SignSteps {
  std::optional<ExactFrequency> rep_step;  // default f_rep * 1e-7
  std::optional<ExactFrequency> ceo_step;  // default max(f_ceo * 1e-3, 1 kHz)
};

SignSteps default_sign_steps(const CombParams& comb);

struct SignDetermination {
  Sign sign_ceo;
  Sign sign_beat;
  ExactFrequency beat;        // unperturbed |f_beat|
  std::int64_t implied_mode;  // |shift of f_beat| / rep_step
};

class AmbiguousSignError : public domain_error {
 public:
  AmbiguousSignError(const std::string& what, std::optional<SignSteps> suggestion)
      : domain_error(what), suggestion_(std::move(suggestion)) {}
  // Smaller steps likely to succeed, absent when no step size can help
  // (laser exactly on a comb mode).
  const std::optional<SignSteps>& suggestion() const { return suggestion_; }

 private:
  std::optional<SignSteps> suggestion_;
};

// Perturbs f_rep by +/-rep_step and f_ceo by +ceo_step, infers both signs of
// the beat equation from the observed shifts of |f_beat|. Every response must
// match the linear model exactly, otherwise AmbiguousSignError is thrown.
SignDetermination determine_signs(const BeatProbe& probe, const CombParams& comb, const SignSteps& steps = {});

class ModeNumberError : public domain_error {
 public:
  ModeNumberError(const std::string& what, std::vector<ModeIndex> candidates)
      : domain_error(what), candidates_(std::move(candidates)) {}
  const std::vector<ModeIndex>& candidates() const { return candidates_; }

 private:
  std::vector<ModeIndex> candidates_;
};

// Mode number from a coarse (wavemeter) frequency. Requires
// coarse_uncertainty < f_rep/2; ties and empty windows are errors.
ModeIndex determine_mode_number(ExactFrequency coarse, ExactFrequency coarse_uncertainty, const CombParams& comb,
                                const BeatObservation& beat);

struct FrequencyRatio {
  Rational value;
  std::string decimal;
};

FrequencyRatio optical_ratio(ExactFrequency numerator, ExactFrequency denominator, int significant_digits = 20);

}  // namespace combfit
