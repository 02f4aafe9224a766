#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "combfit/constants.hpp"

namespace combfit::sensitivity {

struct CasimirResult {
  double lambda_rel;  // sqrt(1 - (Z alpha)^2)
  double f_rel;       // 3 / (lambda (4 lambda^2 - 1))
  double l_hfs;       // alpha d/dalpha ln F_rel
};

// Casimir relativistic correction for alkali hyperfine splittings. Throws
// domain_error when Z alpha >= 1 or when the closed form is singular
// (4 lambda^2 <= 1, i.e. Z alpha >= sqrt(3)/2).
CasimirResult casimir(int z, double alpha = constants::fine_structure);

// (2 q1 + 4 q2) / f0.
double optical_sensitivity(double q1_hz, double q2_hz, double f0_hz);

// f0 + q1 [(a/a0)^2 - 1] + q2 [(a/a0)^4 - 1].
double alpha_shifted_frequency(double f0_hz, double q1_hz, double q2_hz, double alpha_ratio);
// The shift alone; avoids cancellation against f0 when alpha_ratio ~ 1.
double alpha_frequency_shift(double q1_hz, double q2_hz, double alpha_ratio);

enum class TransitionKind { optical_gross, fine_structure, hyperfine, molecular_vibration, molecular_rotation };

std::string to_string(TransitionKind kind);
TransitionKind parse_kind(const std::string& text);

// Non-relativistic scaling in units where Ry is the frequency unit:
// Ry^rydberg * alpha^alpha * (m_e/m_p)^mass_ratio * (g_nucl mu_N/mu_B)^nuclear_moment.
struct ScalingLaw {
  int rydberg_power = 1;
  int alpha_power = 0;
  double mass_ratio_power = 0.0;
  int nuclear_moment_power = 0;
};

ScalingLaw alpha_exponent(TransitionKind kind);

struct TransitionRecord {
  std::string id;
  std::string species;
  TransitionKind kind = TransitionKind::optical_gross;
  int z = 0;
  std::optional<double> l_alpha;
  std::optional<double> wavelength_nm;
  std::optional<double> frequency_hz;
  std::optional<double> q1_hz;
  std::optional<double> q2_hz;
  std::string label;

  // frequency_hz if present, otherwise c / wavelength.
  std::optional<double> reference_frequency() const;
};

// Sensitivity registry loaded from a versioned JSON file. Every record that
// carries (q1, q2) and L_alpha is checked against (2 q1 + 4 q2)/f0 on load.
class TransitionRegistry {
 public:
  static constexpr double consistency_tolerance = 1e-6;

  static TransitionRegistry load(const std::filesystem::path& path, double alpha = constants::fine_structure);
  static TransitionRegistry from_json(const nlohmann::json& doc, double alpha = constants::fine_structure);

  const std::vector<TransitionRecord>& records() const { return records_; }
  const TransitionRecord* find(const std::string& id) const;
  const TransitionRecord& at(const std::string& id) const;
  // Lookup by id first, then by species (case-insensitive).
  const TransitionRecord* find_atom(const std::string& name) const;
  const std::string& schema_version() const { return version_; }

 private:
  std::vector<TransitionRecord> records_;
  std::string version_;
};

// Throws domain_error when a record's (q1, q2) disagree with its L_alpha.
void check_consistency(const TransitionRecord& record);

nlohmann::json to_json(const TransitionRecord& record);

}  // namespace combfit::sensitivity
