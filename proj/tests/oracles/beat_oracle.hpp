#pragma once

// Simulated beat counter. The physical comb has modes n f_rep + s f_ceo with
// a sign s hidden from the analysis; the counter reports the distance from the
// laser to the closest mode, found by scanning the modes around f_L / f_rep.

#include <algorithm>

#include "combfit/comb.hpp"

namespace oracle {

inline combfit::ExactFrequency scanned_beat(combfit::ExactFrequency laser, combfit::Sign hidden_ceo,
                                           const combfit::CombParams& comb) {
  using combfit::ExactFrequency;
  const combfit::wide_int offset =
      hidden_ceo == combfit::Sign::minus ? -comb.f_ceo().millihertz() : comb.f_ceo().millihertz();
  const combfit::wide_int rep = comb.f_rep().millihertz();
  const combfit::wide_int guess = laser.millihertz() / rep;
  combfit::wide_int best = -1;
  for (combfit::wide_int n = guess - 3; n <= guess + 3; ++n) {
    combfit::wide_int d = laser.millihertz() - (n * rep + offset);
    d = d < 0 ? -d : d;
    if (best < 0 || d < best) {
      best = d;
    }
  }
  return ExactFrequency::from_millihertz(best);
}

}  // namespace oracle
