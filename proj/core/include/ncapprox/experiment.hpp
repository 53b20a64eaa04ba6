#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "ncapprox/analysis.hpp"
#include "ncapprox/config.hpp"
#include "ncapprox/decoder.hpp"
#include "ncapprox/rlnc.hpp"
#include "ncapprox/sources.hpp"

namespace ncapprox {

struct RunOptions {
  std::uint64_t seed = 0;
  /// Overrides the config's `trials`.
  std::optional<std::size_t> trials;
  /// Fill the wall-clock columns; off by default so output is reproducible.
  bool timing = false;
  unsigned threads = 1;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::string to_string() const;
  std::size_t column(const std::string& name) const;
  double number(std::size_t row, const std::string& name) const;
};

/// Random packets over the whole field until `k` innovative rows arrived.
DecoderState receive_innovative(const GFMatrix& sources, std::size_t k, std::mt19937_64& rng,
                                std::uint64_t window_id = 0, std::uint64_t unit_id = 0);

/// Exactly `count` random packets, innovative or not.
DecoderState receive_packets(const GFMatrix& sources, std::size_t count, std::mt19937_64& rng,
                             std::uint64_t window_id = 0, std::uint64_t unit_id = 0);

/// Sum of squared sample errors; failed results without fill count as the fallback value.
double squared_error(const SignalWindow& truth, const DecodeResult& result, const FieldSpec& field);

struct FieldSweepPoint {
  unsigned z = 0;
  std::vector<double> trial_nmse;
  double failure_rate = 0.0;
  Rational analytic;
};
/// Normalized MSE per discarded-bit count z = 0..r-1.
std::vector<FieldSweepPoint> field_sweep(const Config& config, const RunOptions& options);
CsvTable run_field_sweep(const Config& config, const RunOptions& options);

struct SimilaritySweepPoint {
  double sigma3 = 0.0;
  std::vector<double> l1_near;  // constraint on the (1,2) pair
  std::vector<double> l1_far;   // constraint on the (1,3) pair
};
std::vector<SimilaritySweepPoint> similarity_sweep(const Config& config, const RunOptions& options);
CsvTable run_similarity_sweep(const Config& config, const RunOptions& options);

struct WindowSweepPoint {
  std::size_t window = 0;
  std::vector<double> trial_nmse;
  std::vector<double> trial_singular_rate;
};
std::vector<WindowSweepPoint> window_sweep(const Config& config, const RunOptions& options);
CsvTable run_window_sweep(const Config& config, const RunOptions& options);

struct LossSweepPoint {
  std::string channel;
  double loss_rate = 0.0;
  std::vector<double> trial_nmse;
};
std::vector<LossSweepPoint> loss_sweep(const Config& config, const RunOptions& options);
CsvTable run_loss_sweep(const Config& config, const RunOptions& options);

struct MleComparisonPoint {
  unsigned z = 0;
  std::uint32_t q = 0;
  std::vector<double> nmse_approx;
  std::vector<double> nmse_mle;
  double seconds_approx = 0.0;
  double seconds_mle = 0.0;
  std::size_t infeasible = 0;       // approximate results violating C x = y or D x = 0
  std::size_t score_violations = 0;  // MLE score above the approximate score
  bool skipped = false;              // over the MLE budget
};
std::vector<MleComparisonPoint> mle_comparison(const Config& config, const RunOptions& options);
CsvTable run_mle_comparison(const Config& config, const RunOptions& options);

CsvTable run_analysis_tables(const Config& config, const RunOptions& options);

/// Subcommand names accepted by run_experiment().
const std::vector<std::string>& experiment_names();
CsvTable run_experiment(const std::string& name, const Config& config, const RunOptions& options);

/// Python/matplotlib script that plots the CSV written for `name`.
std::string plot_script(const std::string& name, const std::string& csv_path);

}  // namespace ncapprox
