#pragma once

#include <atomic>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "simbias/experiment_config.hpp"
#include "simbias/report.hpp"
#include "simbias/stats.hpp"

namespace simbias::harness {

struct PerN {
  int n = 0;
  stats::MeanStderr summary;
  /// Trials whose search hit its cap without a classification change.
  std::size_t censored = 0;
  nlohmann::json extra = nlohmann::json::object();
};

struct ExperimentResult {
  ExperimentConfig config;
  /// Per-trial rows, ordered by (n, trial).
  Table table;
  std::vector<PerN> per_n;
  std::string fit_model = "none";
  std::optional<stats::FitResult> fit;
  nlohmann::json diagnostics = nlohmann::json::object();
  /// x, y, yerr
  Table plot;
  bool truncated = false;
  double wall_seconds = 0.0;

  std::vector<std::string> provenance() const;
  /// {provenance, config, per_n: [{n, mean, stderr, count}], fit: {model, coefficient, stderr, r2}, diagnostics}
  nlohmann::json summary_json() const;
};

struct RunOptions {
  /// Set asynchronously (e.g. from a signal handler) to stop after the trials in flight.
  const std::atomic<bool>* cancel = nullptr;
};

/// Greedy (or exact) nearest-boundary distances from random strings on fresh
/// networks; fits mean = a sqrt(n / ln n).
ExperimentResult run_closest(const ExperimentConfig& config, RunOptions options = {});
/// Random bit-flip walks; fits mean = s n.
ExperimentResult run_flips(const ExperimentConfig& config, RunOptions options = {});
/// Network output covariance at controlled overlaps versus Q F(t) and the GP oracle.
ExperimentResult run_gp_check(const ExperimentConfig& config, RunOptions options = {});
/// Paired greedy and exhaustive distances on identical instances.
ExperimentResult run_greedy_vs_exact(const ExperimentConfig& config, RunOptions options = {});

ExperimentResult run_experiment(const ExperimentConfig& config, RunOptions options = {});

/// Writes the CSV, JSON summary and plot data named in the config (when set).
void write_outputs(const ExperimentResult& result);

/// Mean distance per |phi| bin of the given width; bins with fewer than
/// min_count samples are dropped. The fit is through the origin on bin midpoints.
struct PhiBin {
  double lower = 0.0;
  double upper = 0.0;
  double midpoint = 0.0;
  double mean_distance = 0.0;
  std::size_t count = 0;
};

struct BinnedFit {
  std::vector<PhiBin> bins;
  std::optional<stats::FitResult> fit;
};

BinnedFit bin_distance_by_output(std::span<const double> abs_phi, std::span<const double> distances, double width,
                                 std::size_t min_count = 10);

/// Gp-check overlaps used when none are configured.
std::vector<double> default_overlaps(int n);

struct KernelReport {
  Table table;  // t, F_1 .. F_{L+1}, F
  nlohmann::json summary;
};

KernelReport kernel_report(const ExperimentConfig& config);
nlohmann::json theory_report(const ExperimentConfig& config);

/// Recomputes per-n aggregates and the scaling fit from a closest or flips
/// CSV. model is "sqrt-n-over-ln-n", "linear" or "auto" (from the provenance header).
nlohmann::json refit(const CsvFile& csv, const std::string& model = "auto");

}  // namespace simbias::harness
