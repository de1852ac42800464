#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "lef/annulus.hpp"
#include "lef/problem.hpp"
#include "lef/radial.hpp"

namespace lef {

struct AnnulusConfig {
  bool present = false;                 // an [annulus] section was given
  std::optional<double> r_outer;        // automatic when absent
  Eigen::Index n_r = 257;
  Eigen::Index n_theta = 64;
  AnnulusOptions solver;
  int majorant_samples = kDefaultMajorantSamples;
};

struct ReportConfig {
  std::string solution_csv = "solution.csv";
  std::string annulus_csv = "annulus.csv";
  std::string diagnostics_json = "diagnostics.json";
  std::string check_json = "check.json";
  std::string threshold_json = "threshold.json";
  std::string verify_json = "verify.json";
  std::string decay_json = "decay.json";
  std::string decay_csv = "decay.csv";
  std::optional<double> decay_r_lo;
  std::optional<double> decay_r_hi;
  int random_members = 200;  // K-invariance samples in `verify`
};

struct RunConfig {
  ProblemSpec problem{0.0, 0.0, 1.0, 1.0, CoefficientField::zero(), CoefficientField::zero()};
  RadialOptions solver;
  AnnulusConfig annulus;
  ReportConfig report;
};

/// Reads the sectioned `key = value` format documented in the README.
/// Throws ConfigError naming the line or the offending key.
RunConfig load_config(const std::filesystem::path& path);
RunConfig parse_config(const std::string& text);

}  // namespace lef
