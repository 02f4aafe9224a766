#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

namespace combfit::schema {

using nlohmann::json;

inline constexpr int supported_major = 1;
inline constexpr const char* current_version = "1.0";

// Reads and parses a JSON file; parse errors are reported with line and
// column as input_error.
json read_json_file(const std::filesystem::path& path);
json parse_json_text(const std::string& text, const std::string& source);

// Requires an object with "schema_version": "<major>.<minor>" whose major
// version is supported.
void require_version(const json& doc, const std::string& context);

const json& require_field(const json& obj, const std::string& key, const std::string& context);
double require_number(const json& obj, const std::string& key, const std::string& context);
std::optional<double> optional_number(const json& obj, const std::string& key, const std::string& context);
std::string require_string(const json& obj, const std::string& key, const std::string& context);
std::optional<std::string> optional_string(const json& obj, const std::string& key, const std::string& context);
int require_int(const json& obj, const std::string& key, const std::string& context);

}  // namespace combfit::schema
