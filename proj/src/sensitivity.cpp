#include "combfit/sensitivity.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "combfit/errors.hpp"
#include "combfit/schema.hpp"

namespace combfit::sensitivity {

CasimirResult casimir(int z, double alpha) {
  if (z < 0 || !(alpha > 0.0)) {
    throw domain_error("casimir needs Z >= 0 and alpha > 0");
  }
  const double za = z * alpha;
  if (za >= 1.0) {
    throw domain_error("Z*alpha = " + std::to_string(za) + " >= 1: relativistic breakdown");
  }
  const double u = za * za;
  const double lambda2 = 1.0 - u;
  const double lambda = std::sqrt(lambda2);
  const double shell = 4.0 * lambda2 - 1.0;
  if (shell <= 0.0) {
    throw domain_error("Casimir correction singular for Z*alpha >= sqrt(3)/2");
  }
  return {lambda, 3.0 / (lambda * shell), u * (12.0 * lambda2 - 1.0) / (lambda2 * shell)};
}

double optical_sensitivity(double q1_hz, double q2_hz, double f0_hz) {
  if (!(f0_hz > 0.0)) {
    throw domain_error("optical sensitivity needs f0 > 0");
  }
  return (2.0 * q1_hz + 4.0 * q2_hz) / f0_hz;
}

double alpha_frequency_shift(double q1_hz, double q2_hz, double alpha_ratio) {
  if (!(alpha_ratio > 0.0)) {
    throw domain_error("alpha ratio must be positive");
  }
  // r^2 - 1 = (r - 1)(r + 1) keeps the small difference exact near r = 1.
  const double square_minus_one = (alpha_ratio - 1.0) * (alpha_ratio + 1.0);
  const double fourth_minus_one = square_minus_one * (alpha_ratio * alpha_ratio + 1.0);
  return q1_hz * square_minus_one + q2_hz * fourth_minus_one;
}

double alpha_shifted_frequency(double f0_hz, double q1_hz, double q2_hz, double alpha_ratio) {
  return f0_hz + alpha_frequency_shift(q1_hz, q2_hz, alpha_ratio);
}

std::string to_string(TransitionKind kind) {
  switch (kind) {
    case TransitionKind::optical_gross:
      return "optical-gross";
    case TransitionKind::fine_structure:
      return "fine-structure";
    case TransitionKind::hyperfine:
      return "hyperfine";
    case TransitionKind::molecular_vibration:
      return "molecular-vibration";
    case TransitionKind::molecular_rotation:
      return "molecular-rotation";
  }
  throw domain_error("unknown transition kind");
}

TransitionKind parse_kind(const std::string& text) {
  for (auto k : {TransitionKind::optical_gross, TransitionKind::fine_structure, TransitionKind::hyperfine,
                 TransitionKind::molecular_vibration, TransitionKind::molecular_rotation}) {
    if (to_string(k) == text) {
      return k;
    }
  }
  throw input_error("unknown transition kind '" + text + "'");
}

ScalingLaw alpha_exponent(TransitionKind kind) {
  switch (kind) {
    case TransitionKind::optical_gross:
      return {1, 0, 0.0, 0};
    case TransitionKind::fine_structure:
      return {1, 2, 0.0, 0};
    case TransitionKind::hyperfine:
      return {1, 2, 0.0, 1};
    case TransitionKind::molecular_vibration:
      return {1, 0, 0.5, 0};
    case TransitionKind::molecular_rotation:
      return {1, 0, 1.0, 0};
  }
  throw domain_error("unknown transition kind");
}

std::optional<double> TransitionRecord::reference_frequency() const {
  if (frequency_hz) {
    return frequency_hz;
  }
  if (wavelength_nm) {
    return constants::speed_of_light / (*wavelength_nm * 1e-9);
  }
  return std::nullopt;
}

void check_consistency(const TransitionRecord& record) {
  if (!record.q1_hz || !record.q2_hz || !record.l_alpha) {
    return;
  }
  const auto f0 = record.reference_frequency();
  if (!f0) {
    throw domain_error("transition '" + record.id + "' has q1/q2 but no frequency or wavelength");
  }
  const double from_q = optical_sensitivity(*record.q1_hz, *record.q2_hz, *f0);
  if (std::fabs(from_q - *record.l_alpha) > TransitionRegistry::consistency_tolerance) {
    throw domain_error("transition '" + record.id + "': L_alpha = " + std::to_string(*record.l_alpha) +
                       " but (2 q1 + 4 q2)/f0 = " + std::to_string(from_q));
  }
}

TransitionRegistry TransitionRegistry::load(const std::filesystem::path& path, double alpha) {
  return from_json(schema::read_json_file(path), alpha);
}

TransitionRegistry TransitionRegistry::from_json(const nlohmann::json& doc, double alpha) {
  schema::require_version(doc, "registry");
  const auto& list = schema::require_field(doc, "transitions", "registry");
  if (!list.is_array()) {
    throw input_error("registry: 'transitions' must be an array");
  }
  TransitionRegistry reg;
  reg.version_ = doc.at("schema_version").get<std::string>();
  for (std::size_t i = 0; i < list.size(); ++i) {
    const auto& item = list[i];
    const std::string ctx = "registry: transitions[" + std::to_string(i) + "]";
    TransitionRecord r;
    r.id = schema::require_string(item, "id", ctx);
    r.species = schema::optional_string(item, "species", ctx).value_or(r.id);
    r.kind = parse_kind(schema::require_string(item, "kind", ctx));
    r.z = schema::require_int(item, "Z", ctx);
    r.l_alpha = schema::optional_number(item, "L_alpha", ctx);
    r.wavelength_nm = schema::optional_number(item, "wavelength_nm", ctx);
    r.frequency_hz = schema::optional_number(item, "frequency_hz", ctx);
    r.q1_hz = schema::optional_number(item, "q1_hz", ctx);
    r.q2_hz = schema::optional_number(item, "q2_hz", ctx);
    r.label = schema::optional_string(item, "label", ctx).value_or("");
    const auto source = schema::optional_string(item, "L_alpha_source", ctx);
    if (source && *source == "casimir") {
      if (r.l_alpha) {
        throw input_error(ctx + ": give either L_alpha or L_alpha_source, not both");
      }
      r.l_alpha = casimir(r.z, alpha).l_hfs;
    } else if (source && *source != "table") {
      throw input_error(ctx + ": unknown L_alpha_source '" + *source + "'");
    }
    if ((r.q1_hz.has_value()) != (r.q2_hz.has_value())) {
      throw input_error(ctx + ": q1_hz and q2_hz must be given together");
    }
    if (reg.find(r.id)) {
      throw input_error(ctx + ": duplicate id '" + r.id + "'");
    }
    check_consistency(r);
    reg.records_.push_back(std::move(r));
  }
  return reg;
}

const TransitionRecord* TransitionRegistry::find(const std::string& id) const {
  const auto it = std::find_if(records_.begin(), records_.end(), [&](const auto& r) { return r.id == id; });
  return it == records_.end() ? nullptr : &*it;
}

const TransitionRecord& TransitionRegistry::at(const std::string& id) const {
  if (const auto* r = find(id)) {
    return *r;
  }
  throw input_error("unknown transition id '" + id + "'");
}

const TransitionRecord* TransitionRegistry::find_atom(const std::string& name) const {
  if (const auto* r = find(name)) {
    return r;
  }
  auto lower = [](std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
  };
  const std::string key = lower(name);
  for (const auto& r : records_) {
    if (lower(r.species) == key) {
      return &r;
    }
  }
  return nullptr;
}

nlohmann::json to_json(const TransitionRecord& r) {
  nlohmann::json j;
  j["id"] = r.id;
  j["species"] = r.species;
  j["kind"] = to_string(r.kind);
  j["Z"] = r.z;
  auto put = [&](const char* key, const std::optional<double>& v) {
    if (v) {
      j[key] = *v;
    }
  };
  put("L_alpha", r.l_alpha);
  put("wavelength_nm", r.wavelength_nm);
  put("frequency_hz", r.frequency_hz);
  put("q1_hz", r.q1_hz);
  put("q2_hz", r.q2_hz);
  if (!r.label.empty()) {
    j["label"] = r.label;
  }
  return j;
}

}  // namespace combfit::sensitivity
