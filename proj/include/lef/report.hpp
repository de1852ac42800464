#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

namespace lef {

/// Formats a double with 17 significant digits in scientific notation.
std::string format_double(double x);

// Objects keep insertion order so output is reproducible.
using Json = nlohmann::ordered_json;

/// Pretty-printed with two-space indent and a trailing newline; non-finite numbers become null.
std::string dump(const Json& j);

struct CsvColumn {
  std::string name;
  const std::vector<double>* values;
};

std::string to_csv(const std::vector<CsvColumn>& columns);

// Writes through a sibling temporary file and a rename.
void write_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace lef
