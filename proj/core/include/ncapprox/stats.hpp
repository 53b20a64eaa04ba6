#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace ncapprox {

/// Generator for one (seed, trial, stream) triple; distinct triples give
/// independent-looking streams via std::seed_seq.
std::mt19937_64 derive_rng(std::uint64_t seed, std::uint64_t trial, std::uint64_t stream = 0);

struct Summary {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation
  double stderr_mean = 0.0;
  /// Half-width of the normal-approximation 95% interval.
  double ci95 = 0.0;
  std::size_t count = 0;
};

Summary summarize(std::span<const double> values);

struct Correlation {
  double rho = 0.0;
  /// Two-sided, Student t with n - 2 degrees of freedom.
  double p_value = 1.0;
};

/// Spearman rank correlation with average ranks for ties.
Correlation spearman(std::span<const double> x, std::span<const double> y);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
};

/// Ordinary least squares y = slope * x + intercept.
LineFit fit_line(std::span<const double> x, std::span<const double> y);

}  // namespace ncapprox
