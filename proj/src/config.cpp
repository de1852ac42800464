#include "lef/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "lef/errors.hpp"

namespace lef {

namespace {

struct Value {
  std::string text;
  bool quoted;
  int line;
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void line_error(int line, const std::string& msg) {
  throw ConfigError("line " + std::to_string(line) + ": " + msg);
}

// Strips a trailing comment that is not inside a quoted string.
std::string strip_comment(const std::string& s) {
  bool in_quotes = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') in_quotes = !in_quotes;
    if (!in_quotes && (s[i] == '#' || s[i] == ';')) return s.substr(0, i);
  }
  return s;
}

using Table = std::map<std::string, std::map<std::string, Value>>;

Table tokenize(const std::string& text) {
  static const std::set<std::string> sections = {"problem", "solver", "annulus", "report"};
  Table table;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string s = trim(strip_comment(raw));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') line_error(line, "malformed section header");
      section = trim(s.substr(1, s.size() - 2));
      if (!sections.count(section)) line_error(line, "unknown section [" + section + "]");
      if (table.count(section)) line_error(line, "duplicate section [" + section + "]");
      table[section];
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) line_error(line, "expected key = value");
    if (section.empty()) line_error(line, "key outside of any section");
    const std::string key = trim(s.substr(0, eq));
    std::string val = trim(s.substr(eq + 1));
    if (key.empty()) line_error(line, "empty key");
    if (val.empty()) line_error(line, "missing value for '" + key + "'");
    bool quoted = false;
    if (val.front() == '"') {
      if (val.size() < 2 || val.back() != '"') line_error(line, "unterminated string");
      val = val.substr(1, val.size() - 2);
      if (val.find('"') != std::string::npos) line_error(line, "stray quote in string");
      quoted = true;
    }
    auto& entries = table[section];
    if (entries.count(key)) line_error(line, "duplicate key '" + key + "'");
    entries[key] = Value{val, quoted, line};
  }
  return table;
}

class SectionReader {
 public:
  SectionReader(std::string name, std::map<std::string, Value> entries)
      : name_(std::move(name)), entries_(std::move(entries)) {}

  bool has(const std::string& key) const { return entries_.count(key) > 0; }

  std::optional<double> number(const std::string& key) {
    auto it = take(key);
    if (!it) return std::nullopt;
    if (it->quoted) line_error(it->line, "'" + key + "' must be a number, not a string");
    double v = 0.0;
    const char* b = it->text.data();
    const char* e = b + it->text.size();
    const auto res = std::from_chars(b, e, v);
    if (res.ec != std::errc{} || res.ptr != e || !std::isfinite(v)) {
      line_error(it->line, "'" + key + "' is not a valid number: " + it->text);
    }
    return v;
  }

  std::optional<long long> integer(const std::string& key) {
    auto it = take(key);
    if (!it) return std::nullopt;
    long long v = 0;
    const char* b = it->text.data();
    const char* e = b + it->text.size();
    const auto res = std::from_chars(b, e, v);
    if (it->quoted || res.ec != std::errc{} || res.ptr != e) {
      line_error(it->line, "'" + key + "' must be an integer");
    }
    return v;
  }

  std::optional<std::string> string(const std::string& key) {
    auto it = take(key);
    if (!it) return std::nullopt;
    if (!it->quoted) line_error(it->line, "'" + key + "' must be a quoted string");
    return it->text;
  }

  int line_of(const std::string& key) const {
    auto it = entries_.find(key);
    return it == entries_.end() ? 0 : it->second.line;
  }

  void reject_leftovers() const {
    for (const auto& [key, value] : entries_) {
      if (!used_.count(key)) line_error(value.line, "unknown key '" + key + "' in [" + name_ + "]");
    }
  }

 private:
  std::string name_;
  std::map<std::string, Value> entries_;
  std::set<std::string> used_;

  std::optional<Value> take(const std::string& key) {
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    used_.insert(key);
    return it->second;
  }
};

double require_number(SectionReader& s, const std::string& key) {
  auto v = s.number(key);
  if (!v) throw ConfigError("missing required key '" + key + "' in [problem]");
  return *v;
}

CoefficientField read_field(SectionReader& s, const std::string& key) {
  auto text = s.string(key);
  if (!text) throw ConfigError("missing required key '" + key + "' in [problem]");
  try {
    return CoefficientField::parse(*text);
  } catch (const Error& e) {
    line_error(s.line_of(key), "'" + key + "': " + e.what());
  }
}

void require(bool ok, const std::string& key, const std::string& msg) {
  if (!ok) throw ConfigError("'" + key + "': " + msg);
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  Table table = tokenize(text);
  if (!table.count("problem")) throw ConfigError("missing [problem] section");

  RunConfig cfg;

  SectionReader problem("problem", table["problem"]);
  ProblemSpec& spec = cfg.problem;
  spec.alpha = require_number(problem, "alpha");
  spec.beta = require_number(problem, "beta");
  spec.c = require_number(problem, "c");
  spec.A = require_number(problem, "A");
  spec.p = read_field(problem, "p");
  spec.q = read_field(problem, "q");
  if (auto l = problem.number("p_holder")) {
    require(*l > 0 && *l < 1, "p_holder", "must lie in (0, 1)");
    spec.p = spec.p.with_holder_exponent(*l);
  }
  if (auto l = problem.number("q_holder")) {
    require(*l > 0 && *l < 1, "q_holder", "must lie in (0, 1)");
    spec.q = spec.q.with_holder_exponent(*l);
  }
  problem.reject_leftovers();
  require(spec.alpha > 0, "alpha", "must be positive");
  require(spec.beta > 0, "beta", "must be positive");
  require(spec.alpha + spec.beta < 1, "alpha", "alpha+beta must be < 1");
  require(spec.c >= 1, "c", "must be >= 1");
  require(spec.A > 0, "A", "must be positive");

  if (table.count("solver")) {
    SectionReader s("solver", table["solver"]);
    if (auto v = s.integer("n")) {
      require(*v >= 65, "n", "must be >= 65");
      cfg.solver.n = *v;
    }
    if (auto v = s.number("S_span")) {
      require(*v > 0, "S_span", "must be positive");
      cfg.solver.s_span = *v;
    }
    if (auto v = s.number("picard_tol")) {
      require(*v > 0, "picard_tol", "must be positive");
      cfg.solver.picard_tol = *v;
    }
    if (auto v = s.integer("max_iter")) {
      require(*v >= 1, "max_iter", "must be positive");
      cfg.solver.max_iter = static_cast<int>(*v);
    }
    if (auto v = s.number("quad_rel_tol")) {
      require(*v > 1e-14 && *v < 1e-2, "quad_rel_tol", "must lie in (1e-14, 1e-2)");
      cfg.solver.quad_rel_tol = *v;
    }
    s.reject_leftovers();
  }

  if (table.count("annulus")) {
    SectionReader s("annulus", table["annulus"]);
    AnnulusConfig& a = cfg.annulus;
    a.present = true;
    if (auto v = s.number("r_outer")) {
      require(*v > 0, "r_outer", "must be positive");
      a.r_outer = *v;
    }
    if (auto v = s.integer("n_r")) {
      require(*v >= 17, "n_r", "must be >= 17");
      a.n_r = *v;
    }
    if (auto v = s.integer("n_theta")) {
      require(*v >= 16 && *v % 2 == 0, "n_theta", "must be even and >= 16");
      a.n_theta = *v;
    }
    if (auto v = s.number("outer_tol")) {
      require(*v > 0, "outer_tol", "must be positive");
      a.solver.outer_tol = *v;
    }
    if (auto v = s.number("lin_tol")) {
      require(*v > 1e-14 && *v < 1e-4, "lin_tol", "must lie in (1e-14, 1e-4)");
      a.solver.lin_tol = *v;
    }
    if (auto v = s.integer("max_outer")) {
      require(*v >= 1, "max_outer", "must be positive");
      a.solver.max_outer = static_cast<int>(*v);
    }
    if (auto v = s.integer("majorant_samples")) {
      require(*v >= 16, "majorant_samples", "must be >= 16");
      a.majorant_samples = static_cast<int>(*v);
    }
    s.reject_leftovers();
  }

  if (table.count("report")) {
    SectionReader s("report", table["report"]);
    ReportConfig& r = cfg.report;
    const std::pair<const char*, std::string*> paths[] = {
        {"solution_csv", &r.solution_csv},   {"annulus_csv", &r.annulus_csv},
        {"diagnostics_json", &r.diagnostics_json}, {"check_json", &r.check_json},
        {"threshold_json", &r.threshold_json}, {"verify_json", &r.verify_json},
        {"decay_json", &r.decay_json},       {"decay_csv", &r.decay_csv},
    };
    for (const auto& [key, target] : paths) {
      if (auto v = s.string(key)) {
        require(!v->empty(), key, "must not be empty");
        *target = *v;
      }
    }
    r.decay_r_lo = s.number("decay_r_lo");
    r.decay_r_hi = s.number("decay_r_hi");
    if (r.decay_r_lo.has_value() != r.decay_r_hi.has_value()) {
      throw ConfigError("'decay_r_lo': decay_r_lo and decay_r_hi must be given together");
    }
    if (r.decay_r_lo) require(*r.decay_r_lo < *r.decay_r_hi, "decay_r_lo", "must be < decay_r_hi");
    if (auto v = s.integer("random_members")) {
      require(*v >= 0, "random_members", "must be nonnegative");
      r.random_members = static_cast<int>(*v);
    }
    s.reject_leftovers();
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

}  // namespace lef
