#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace combfit::cli {

enum class Format { json, csv };

// Options shared by every subcommand.
struct RunConfig {
  std::string subcommand;
  std::vector<std::string> inputs;
  std::string output;  // empty: standard output
  Format format = Format::json;
  std::uint64_t seed = 1;
  int precision = 20;  // significant digits for exact ratios
};

// COMBFIT_DATA_DIR if set, otherwise the bundled dataset directory.
std::filesystem::path data_dir();

// Entry point behind the combfit executable. args excludes the program
// name. Returns 0 on success, 1 for domain errors, 2 for input errors.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace combfit::cli
