#pragma once

// Physical constants shared by every module. Values are exact SI definitions
// unless noted otherwise.
namespace combfit::constants {

// Speed of light in vacuum, m/s (exact, SI 1983 metre definition).
inline constexpr double speed_of_light = 299792458.0;

// Fine structure constant, CODATA 2006 recommended value rounded to
// 1/137.035999. Callers needing another epoch pass alpha explicitly.
inline constexpr double fine_structure = 1.0 / 137.035999;

// Cs-133 ground-state hyperfine splitting, Hz (exact, SI second definition).
inline constexpr double cesium_hfs_hz = 9192631770.0;

// Vacuum permittivity, F/m (CODATA 2006).
inline constexpr double vacuum_permittivity = 8.854187817e-12;

// Julian year in seconds, used to convert drift rates to 1/yr.
inline constexpr double seconds_per_year = 365.25 * 86400.0;

}  // namespace combfit::constants
