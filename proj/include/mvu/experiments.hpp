#pragma once

#include <map>
#include <string>
#include <vector>

#include "mvu/config.hpp"
#include "mvu/csv.hpp"

namespace mvu {

struct ExperimentReport {
  ExperimentConfig config;
  std::string config_hash;
  /// One row per (n, sigma, seed) cell for solver experiments; the tail and
  /// oracle kinds use their own schemas.
  CsvTable rows{{}};
  /// Flat summary, rendered as sorted JSON.
  std::map<std::string, std::string> summary;
  /// Extra files relative to the output directory (embeddings, traces).
  std::map<std::string, std::string> artifacts;
  /// Wall time per row; written apart from report.csv, which stays
  /// byte-identical across reruns.
  std::vector<double> runtimes;
};

ExperimentReport run_convex_consistency(const ExperimentConfig& cfg);
ExperimentReport run_rate_sweep(const ExperimentConfig& cfg);
ExperimentReport run_noise_sweep(const ExperimentConfig& cfg);
ExperimentReport run_nonconvex_tube(const ExperimentConfig& cfg);
ExperimentReport run_ellipse_hole(const ExperimentConfig& cfg);
ExperimentReport run_ustat_tail(const ExperimentConfig& cfg);
ExperimentReport run_oracle_table(const ExperimentConfig& cfg);
ExperimentReport run_circle_probe(const ExperimentConfig& cfg);

/// Dispatches on cfg.kind.
ExperimentReport run_experiment(const ExperimentConfig& cfg);

/// JSON object with the config echo, hash and summary entries.
std::string summary_json(const ExperimentReport& report);

/// Writes report.csv, summary.json, timing.csv and the artifacts under dir.
void write_report(const ExperimentReport& report, const std::string& dir);

/// The output directory: $MVU_OUTPUT_DIR when set, else cfg.output_dir.
std::string resolve_output_dir(const ExperimentConfig& cfg);

/// Envelope r_n + r_dagger / r_n + n^{-1/(2+d)} of the rate sweep.
double rate_envelope(double n, int d, double r_n, double alpha = 1.0);

}  // namespace mvu
