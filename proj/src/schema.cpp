#include "combfit/schema.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "combfit/errors.hpp"

namespace combfit::schema {

namespace {

std::string line_and_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t column = 1;
  for (std::size_t i = 0; i < text.size() && i + 1 < byte; ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(column);
}

}  // namespace

json parse_json_text(const std::string& text, const std::string& source) {
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) {
    throw input_error(source + ": empty input");
  }
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw input_error(source + ": JSON parse error at " + line_and_column(text, e.byte) + ": " + e.what());
  }
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw input_error("cannot open " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_json_text(buf.str(), path.string());
}

void require_version(const json& doc, const std::string& context) {
  if (!doc.is_object()) {
    throw input_error(context + ": top level must be a JSON object");
  }
  const std::string version = require_string(doc, "schema_version", context);
  const auto dot = version.find('.');
  int major = -1;
  try {
    major = std::stoi(version.substr(0, dot));
  } catch (const std::exception&) {
    throw input_error(context + ": malformed schema_version '" + version + "'");
  }
  if (major != supported_major) {
    throw input_error(context + ": unsupported schema_version '" + version + "' (reader supports " +
                      std::to_string(supported_major) + ".x)");
  }
}

const json& require_field(const json& obj, const std::string& key, const std::string& context) {
  if (!obj.is_object()) {
    throw input_error(context + ": expected an object");
  }
  const auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) {
    throw input_error(context + ": missing field '" + key + "'");
  }
  return *it;
}

double require_number(const json& obj, const std::string& key, const std::string& context) {
  const json& v = require_field(obj, key, context);
  if (!v.is_number()) {
    throw input_error(context + ": field '" + key + "' must be a number");
  }
  const double d = v.get<double>();
  if (!std::isfinite(d)) {
    throw input_error(context + ": field '" + key + "' must be finite");
  }
  return d;
}

std::optional<double> optional_number(const json& obj, const std::string& key, const std::string& context) {
  const auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) {
    return std::nullopt;
  }
  return require_number(obj, key, context);
}

std::string require_string(const json& obj, const std::string& key, const std::string& context) {
  const json& v = require_field(obj, key, context);
  if (!v.is_string()) {
    throw input_error(context + ": field '" + key + "' must be a string");
  }
  return v.get<std::string>();
}

std::optional<std::string> optional_string(const json& obj, const std::string& key, const std::string& context) {
  const auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) {
    return std::nullopt;
  }
  return require_string(obj, key, context);
}

int require_int(const json& obj, const std::string& key, const std::string& context) {
  const json& v = require_field(obj, key, context);
  if (!v.is_number_integer()) {
    throw input_error(context + ": field '" + key + "' must be an integer");
  }
  return v.get<int>();
}

}  // namespace combfit::schema
