#include "ncapprox/analysis.hpp"

#include <algorithm>
#include <cstdlib>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "ncapprox/error.hpp"

namespace ncapprox {

namespace {

__extension__ typedef __int128 wide_t;

wide_t wide_gcd(wide_t a, wide_t b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    const wide_t t = a % b;
    a = b;
    b = t;
  }
  return a;
}

Rational reduce(wide_t num, wide_t den) {
  if (den == 0) throw Error(Errc::division_by_zero, "rational with zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const wide_t g = wide_gcd(num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
  constexpr wide_t lo = std::numeric_limits<std::int64_t>::min();
  constexpr wide_t hi = std::numeric_limits<std::int64_t>::max();
  if (num < lo || num > hi || den > hi) throw Error(Errc::out_of_range, "rational overflow");
  return Rational(static_cast<std::int64_t>(num), static_cast<std::int64_t>(den));
}

}  // namespace

Rational::Rational(std::int64_t num, std::int64_t den) {
  if (den == 0) throw Error(Errc::division_by_zero, "rational with zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const std::int64_t g = std::gcd(num, den);
  num_ = g > 1 ? num / g : num;
  den_ = g > 1 ? den / g : den;
}

std::string Rational::to_string() const {
  return den_ == 1 ? fmt::format("{}", num_) : fmt::format("{}/{}", num_, den_);
}

Rational operator+(const Rational& a, const Rational& b) {
  return reduce(wide_t{a.num_} * b.den_ + wide_t{b.num_} * a.den_, wide_t{a.den_} * b.den_);
}

Rational operator-(const Rational& a, const Rational& b) {
  return reduce(wide_t{a.num_} * b.den_ - wide_t{b.num_} * a.den_, wide_t{a.den_} * b.den_);
}

Rational operator*(const Rational& a, const Rational& b) {
  return reduce(wide_t{a.num_} * b.num_, wide_t{a.den_} * b.den_);
}

Rational operator/(const Rational& a, const Rational& b) {
  return reduce(wide_t{a.num_} * b.den_, wide_t{a.den_} * b.num_);
}

bool operator<(const Rational& a, const Rational& b) noexcept {
  return wide_t{a.num_} * b.den_ < wide_t{b.num_} * a.den_;
}

double ErrorDistribution::probability(std::int64_t e) const noexcept {
  if (e < support_min || e > support_max()) return 0.0;
  return probs[static_cast<std::size_t>(e - support_min)];
}

double ErrorDistribution::total_mass() const noexcept {
  double sum = 0.0;
  for (double p : probs) sum += p;
  return sum;
}

double ErrorDistribution::mean_abs() const noexcept {
  double sum = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i)
    sum += static_cast<double>(std::llabs(support_min + static_cast<std::int64_t>(i))) * probs[i];
  return sum;
}

ErrorDistribution convolve(const ErrorDistribution& a, const ErrorDistribution& b) {
  if (a.probs.empty() || b.probs.empty()) throw Error(Errc::invalid_argument, "convolving an empty distribution");
  ErrorDistribution out{a.support_min + b.support_min, std::vector<double>(a.probs.size() + b.probs.size() - 1, 0.0)};
  for (std::size_t i = 0; i < a.probs.size(); ++i)
    for (std::size_t j = 0; j < b.probs.size(); ++j) out.probs[i + j] += a.probs[i] * b.probs[j];
  return out;
}

AnalysisParams AnalysisParams::make(unsigned r, unsigned z) {
  if (r < 1 || r > 20) throw Error(Errc::invalid_argument, fmt::format("analysis needs 1 <= r <= 20, got {}", r));
  if (z >= r) throw Error(Errc::invalid_argument, fmt::format("z={} must be < r={}", z, r));
  AnalysisParams p;
  p.r = r;
  p.z = z;
  const std::int64_t lo = std::int64_t{1} << z;
  const std::int64_t hi = std::int64_t{1} << (r - 1 - z);
  p.a = lo - hi;
  p.b = lo + hi;
  p.r_d = hi - 1;
  p.r_i = lo - 1;
  p.h = Rational(1, (2 * p.r_i + 1) * (2 * p.r_d + 1));
  p.e_max = p.r_i + p.r_d;
  return p;
}

namespace {

ErrorDistribution uniform(std::int64_t half_width) {
  const auto n = static_cast<std::size_t>(2 * half_width + 1);
  return {-half_width, std::vector<double>(n, 1.0 / static_cast<double>(n))};
}

}  // namespace

ErrorDistribution pmf_decoding_error(const AnalysisParams& p) { return uniform(p.r_d); }

ErrorDistribution pmf_info_loss(const AnalysisParams& p) { return uniform(p.r_i); }

ErrorDistribution pmf_total_error(const AnalysisParams& p) {
  const double denom = static_cast<double>((2 * p.r_i + 1) * (2 * p.r_d + 1));
  ErrorDistribution out{-p.e_max, std::vector<double>(static_cast<std::size_t>(2 * p.e_max + 1))};
  for (std::int64_t e = -p.e_max; e <= p.e_max; ++e) {
    // Twice the number of (e_D, e_I) pairs summing to e.
    const std::int64_t twice = 2 * (p.b - 1) - std::llabs(e + p.a) - std::llabs(e - p.a);
    out.probs[static_cast<std::size_t>(e + p.e_max)] = static_cast<double>(twice / 2) / denom;
  }
  return out;
}

ErrorDistribution pmf_total_error_convolution(const AnalysisParams& p) {
  return convolve(pmf_decoding_error(p), pmf_info_loss(p));
}

Rational expected_abs_error(const AnalysisParams& p) {
  const std::int64_t a = std::llabs(p.a);
  const std::int64_t b = p.b;
  const std::int64_t bracket = b * (b - 1) * (b - 2) - a * (a * a - 1);
  return Rational(bracket, 3) * p.h;
}

Rational expected_abs_error_convolution(const AnalysisParams& p) {
  const std::size_t nd = static_cast<std::size_t>(2 * p.r_d + 1);
  const std::size_t ni = static_cast<std::size_t>(2 * p.r_i + 1);
  std::vector<std::int64_t> counts(nd + ni - 1, 0);
  for (std::size_t i = 0; i < nd; ++i)
    for (std::size_t j = 0; j < ni; ++j) ++counts[i + j];
  std::int64_t weighted = 0;
  for (std::size_t k = 0; k < counts.size(); ++k)
    weighted += std::llabs(static_cast<std::int64_t>(k) - p.e_max) * counts[k];
  return Rational(weighted, static_cast<std::int64_t>(nd * ni));
}

std::vector<unsigned> optimal_z(unsigned r) {
  if (r < 1) throw Error(Errc::invalid_argument, "r must be at least 1");
  const unsigned lo = (r - 1) / 2;
  const unsigned hi = r / 2;  // ceil((r-1)/2)
  return lo == hi ? std::vector<unsigned>{lo} : std::vector<unsigned>{lo, hi};
}

CoarseSampleResult coarse_sample_enumeration(unsigned r, unsigned big_r, unsigned max_bits) {
  if (r < 1 || big_r <= r)
    throw Error(Errc::invalid_argument, fmt::format("need 1 <= r < R, got r={} R={}", r, big_r));
  if (r + big_r > max_bits || r + big_r > 60)
    throw Error(Errc::budget_exceeded, fmt::format("2^{} outcomes exceed the 2^{} budget", r + big_r, max_bits));
  const std::int64_t small = std::int64_t{1} << r;
  const std::int64_t large = std::int64_t{1} << big_r;

  std::int64_t geq = 0;
  std::int64_t hat_num = 0;
  std::int64_t hat_den = 0;
  for (std::int64_t s = 0; s < small; ++s) {
    for (std::int64_t sr = 0; sr < small; ++sr) {
      const std::int64_t d = std::llabs(s - sr);
      // s_R with |s - s_R| < d lie in (s - d, s + d).
      const std::int64_t lo = std::max<std::int64_t>(0, s - d + 1);
      const std::int64_t hi = std::min<std::int64_t>(large - 1, s + d - 1);
      geq += large - std::max<std::int64_t>(0, hi - lo + 1);
      // Conditioning event s_R >= s_r, and 2s <= s_R + s_r within it.
      hat_den += large - sr;
      const std::int64_t from = std::max(sr, 2 * s - sr);
      hat_num += std::max<std::int64_t>(0, large - from);
    }
  }
  CoarseSampleResult out;
  out.p_geq = Rational(geq, small * small * large);
  out.p_hat_formula = Rational(1) - Rational(5 * small * small - 3 * small - 2, 6 * small * large);
  out.p_hat_enum = Rational(hat_num, hat_den);
  return out;
}

ErrorDistribution xor_distance_pmf(std::uint64_t delta, unsigned bits) {
  if (bits < 1 || bits > 24) throw Error(Errc::invalid_argument, fmt::format("bits={} outside 1..24", bits));
  const std::uint64_t size = std::uint64_t{1} << bits;
  if (delta >= size) throw Error(Errc::out_of_range, fmt::format("delta {} not below 2^{}", delta, bits));
  const std::uint64_t admissible = size - delta;
  ErrorDistribution out{0, std::vector<double>(size, 0.0)};
  for (std::uint64_t s = 0; s < admissible; ++s) out.probs[s ^ (s + delta)] += 1.0;
  for (auto& p : out.probs) p /= static_cast<double>(admissible);
  return out;
}

}  // namespace ncapprox
