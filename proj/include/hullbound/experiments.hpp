#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "hullbound/distributions.hpp"

namespace hullbound {

enum class ExperimentKind { B1, B2, Ellipsoid, Bq, StableCounterexample, Gamma, Sandwich };

std::string to_string(ExperimentKind kind);
ExperimentKind parse_experiment(const std::string& name);

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::B1;
  std::string family = "gaussian";
  std::vector<long> dims;
  std::vector<std::uint64_t> seeds{1};
  std::uint64_t mc = 200000;
  std::uint64_t directions = 10000;
  int trials = 64;
  /// Random instances per (n, seed): ellipsoids, finite sets, sandwich draws.
  int instances = 10;
  /// bq only; +inf allowed.
  std::vector<double> qs;
  /// Draws for the rotation selection sum.
  std::uint64_t selection_samples = 512;
  double c_log = 2.0;
  /// Include wall-clock columns; off by default so reports replay byte-identically.
  bool timing = false;

  /// Fills dims/qs with the experiment's defaults when empty, then checks.
  void finalize();
};

nlohmann::json to_json(const ExperimentConfig& c);
ExperimentConfig experiment_config_from_json(const nlohmann::json& j);

struct Assertion {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct ExperimentReport {
  ExperimentConfig config;
  /// One flat object per row; every row carries the same keys.
  std::vector<nlohmann::json> rows;
  nlohmann::json summary = nlohmann::json::object();
  std::vector<Assertion> assertions;

  bool passed() const;
  nlohmann::json json() const;
  std::string csv() const;
};

ExperimentReport run_experiment(const ExperimentConfig& config);

/// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace hullbound
