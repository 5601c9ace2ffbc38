#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "ergopt/gibbs_chain.hpp"

namespace ergopt {

/// Config file problem: bad JSON, missing field, invariant violation.
/// Maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A subcommand was started without the artifacts of an earlier one.
/// Maps to exit code 4.
class PrereqError : public std::runtime_error {
 public:
  PrereqError(std::string required, const std::string& what)
      : std::runtime_error(what), required_(std::move(required)) {}
  const std::string& required_subcommand() const { return required_; }

 private:
  std::string required_;
};

struct ToleranceConfig {
  double eigen_tol = 1e-12;
  double calib_tol = 1e-10;
  double omega_tol = -1.0;  // <= 0 selects the lip-scaled default
};

struct FlagConfig {
  bool dump_kernel = false;
  bool run_ldp = true;
  bool run_mane = true;
  bool run_graph = true;
};

struct ExperimentConfig {
  std::string potential_name;
  std::vector<double> potential_params;
  std::vector<double> perturbation_poly;  // empty = no perturbation
  int grid_n = 201;
  std::vector<double> betas;
  std::vector<std::vector<Interval>> cylinders;
  ToleranceConfig tol;
  FlagConfig flags;
  std::uint64_t seed = 0;
  std::string output_dir = "out";

  /// Parses and validates; throws ConfigError with the offending field named.
  static ExperimentConfig from_json(const nlohmann::ordered_json& j);
  static ExperimentConfig from_file(const std::string& path);

  /// Potential with the configured perturbation applied.
  Potential make_potential() const;

  /// Canonical serialization of everything that affects the numbers
  /// (excludes output_dir), and its hash, which keys the artifact cache.
  nlohmann::ordered_json canonical() const;
  std::string hash() const;
};

/// Runs one pipeline slice (solve, zerotemp, mane, graph, ldp, or all) and
/// regenerates summary.json in outdir. Stages are cached by config hash:
/// a stage whose manifest matches is not recomputed. Throws PrereqError /
/// ConfigError / ergopt::error; returns 0 on success.
int run_subcommand(const std::string& subcommand, const ExperimentConfig& cfg,
                   const std::string& outdir, int threads);

}  // namespace ergopt
