#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ncapprox {

/// Exact fraction with a positive denominator, always in lowest terms.
class Rational {
 public:
  Rational() = default;
  Rational(std::int64_t num, std::int64_t den = 1);

  std::int64_t num() const noexcept { return num_; }
  std::int64_t den() const noexcept { return den_; }
  double to_double() const noexcept { return static_cast<double>(num_) / static_cast<double>(den_); }
  /// "n/d", or "n" when d = 1.
  std::string to_string() const;

  friend Rational operator+(const Rational& a, const Rational& b);
  friend Rational operator-(const Rational& a, const Rational& b);
  friend Rational operator*(const Rational& a, const Rational& b);
  friend Rational operator/(const Rational& a, const Rational& b);
  friend bool operator==(const Rational& a, const Rational& b) noexcept {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend bool operator<(const Rational& a, const Rational& b) noexcept;
  friend bool operator>(const Rational& a, const Rational& b) noexcept { return b < a; }
  friend bool operator<=(const Rational& a, const Rational& b) noexcept { return !(b < a); }
  friend bool operator>=(const Rational& a, const Rational& b) noexcept { return !(a < b); }

 private:
  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

/// PMF over the contiguous integer support [support_min, support_max()].
struct ErrorDistribution {
  std::int64_t support_min = 0;
  std::vector<double> probs;

  std::int64_t support_max() const noexcept {
    return support_min + static_cast<std::int64_t>(probs.size()) - 1;
  }
  /// Zero outside the support.
  double probability(std::int64_t e) const noexcept;
  double total_mass() const noexcept;
  double mean_abs() const noexcept;
};

ErrorDistribution convolve(const ErrorDistribution& a, const ErrorDistribution& b);

/// Shorthands of the field-size analysis for given (r, z).
struct AnalysisParams {
  unsigned r = 1;
  unsigned z = 0;
  std::int64_t a = 0;      // 2^z - 2^(r-1-z)
  std::int64_t b = 0;      // 2^z + 2^(r-1-z)
  std::int64_t r_d = 0;    // 2^(r-1-z) - 1
  std::int64_t r_i = 0;    // 2^z - 1
  Rational h;              // 1 / ((2 r_I + 1)(2 r_D + 1))
  std::int64_t e_max = 0;  // r_I + r_D

  /// Requires 1 <= r <= 31 and z < r.
  static AnalysisParams make(unsigned r, unsigned z);
};

/// Uniform on [-r_D, r_D].
ErrorDistribution pmf_decoding_error(const AnalysisParams& p);
/// Uniform on [-r_I, r_I].
ErrorDistribution pmf_info_loss(const AnalysisParams& p);
/// Closed-form trapezoid H/2 (2(b-1) - |e+a| - |e-a|) on |e| <= e_max.
ErrorDistribution pmf_total_error(const AnalysisParams& p);
/// Same distribution by convolving the two uniform components.
ErrorDistribution pmf_total_error_convolution(const AnalysisParams& p);

/// E|e_T| from the closed form, evaluated at |a| (a < 0 uses the mirrored z).
Rational expected_abs_error(const AnalysisParams& p);
/// E|e_T| by exact integer convolution of the component counts.
Rational expected_abs_error_convolution(const AnalysisParams& p);

/// {floor((r-1)/2), ceil((r-1)/2)}, one element when r is odd.
std::vector<unsigned> optimal_z(unsigned r);

struct CoarseSampleResult {
  /// Pr(|s - s_R| >= |s - s_r|), s and s_r uniform on [0,2^r), s_R on [0,2^R).
  Rational p_geq;
  /// 1 - (5*2^(2r) - 3*2^r - 2) / (6 * 2^(r+R)).
  Rational p_hat_formula;
  /// Pr(s <= (s_R + s_r)/2 | s_R >= s_r) counted directly.
  Rational p_hat_enum;
};

/// Exhaustive counting; Errc::budget_exceeded when r + R > max_bits.
CoarseSampleResult coarse_sample_enumeration(unsigned r, unsigned big_r, unsigned max_bits = 24);

/// PMF of s XOR (s + delta) for s uniform on [0, 2^bits - delta).
ErrorDistribution xor_distance_pmf(std::uint64_t delta, unsigned bits);

}  // namespace ncapprox
