#include "lef/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <system_error>

#include "lef/errors.hpp"

namespace lef {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", x);
  return buf;
}

std::string dump(const Json& j) { return j.dump(2) + '\n'; }

std::string to_csv(const std::vector<CsvColumn>& columns) {
  if (columns.empty()) return "";
  const std::size_t rows = columns.front().values->size();
  for (const auto& c : columns) {
    if (c.values->size() != rows) throw ContractViolation("CSV columns differ in length");
  }
  std::string out;
  for (std::size_t j = 0; j < columns.size(); ++j) {
    if (j) out += ',';
    out += columns[j].name;
  }
  out += '\n';
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < columns.size(); ++j) {
      if (j) out += ',';
      out += format_double((*columns[j].values)[i]);
    }
    out += '\n';
  }
  return out;
}

void write_atomic(const std::filesystem::path& path, const std::string& contents) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("IOError", "cannot open " + tmp.string() + " for writing");
    out << contents;
    out.flush();
    if (!out) throw Error("IOError", "write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw Error("IOError", "cannot rename " + tmp.string() + ": " + ec.message());
  }
}

}  // namespace lef
