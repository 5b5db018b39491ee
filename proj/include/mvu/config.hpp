#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mvu/manifolds.hpp"
#include "mvu/solver.hpp"

namespace mvu {

enum class ExperimentKind {
  ConvexConsistency,
  RateSweep,
  NoiseSweep,
  NonConvexTube,
  EllipseHole,
  UStatTail,
  OracleTable,
  CircleProbe,  // reporting only, no ground truth
};
std::string to_string(ExperimentKind k);
ExperimentKind parse_kind(const std::string& text);

struct ExperimentConfig {
  int version = 1;
  ExperimentKind kind = ExperimentKind::ConvexConsistency;
  std::string model = "interval";
  ModelParams model_params;
  std::vector<std::size_t> n_grid{100};
  std::vector<std::uint64_t> seeds{1};
  std::optional<double> r;   // explicit radius; radius_schedule otherwise
  double radius_c = 2.0;
  std::vector<double> sigma_grid;
  int probe_factor = 50;
  SolverConfig solver = [] {
    SolverConfig s;
    s.restarts = 3;
    return s;
  }();
  bool save_embeddings = true;
  // tail experiment
  std::vector<double> t_grid;
  int trials = 2000;
  std::size_t reference_m = 200000;
  // oracle table grid lo:hi:step
  double grid_lo = 1.0;
  double grid_hi = 1.5707;
  double grid_step = 0.01;
  // optional pass/fail thresholds echoed in the summary
  std::optional<double> max_energy_gap;
  std::optional<double> max_residual;
  std::optional<double> min_residual;
  // not part of the hash
  int workers = 1;
  std::string output_dir = "out";
};

/// Parses the flat key=value format. Errors name the line and the field.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig read_config(const std::string& path);

/// Canonical text of every field (the format parse_config reads).
std::string config_text(const ExperimentConfig& cfg);

/// FNV-1a 64 over the canonical text of the fields that change results
/// (output_dir and workers excluded), as 16 hex digits.
std::string config_hash(const ExperimentConfig& cfg);

/// "lo:hi:step".
void parse_grid(const std::string& text, double& lo, double& hi, double& step);

}  // namespace mvu
