#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ncapprox/gf.hpp"
#include "ncapprox/matrix.hpp"
#include "ncapprox/rlnc.hpp"

namespace ncapprox {

/// Two sources expected to be close, with the expected distance between them.
struct SimilarPair {
  std::size_t i = 0;
  std::size_t j = 0;
  double distance = 0.0;

  friend bool operator==(const SimilarPair&, const SimilarPair&) = default;
};

/// Ranked list of similar source pairs (0-based indices).
///
/// Construction normalizes each pair to i < j and sorts by (distance, i, j).
class SimilarityModel {
 public:
  SimilarityModel() = default;
  SimilarityModel(std::size_t sources, std::vector<SimilarPair> pairs);

  /// Pairs (n, n+1) with the given distances, e.g. for ordered sensors or frames.
  static SimilarityModel chain(std::size_t sources, std::span<const double> distances);

  std::size_t sources() const noexcept { return sources_; }
  std::span<const SimilarPair> pairs() const noexcept { return pairs_; }

 private:
  std::size_t sources_ = 0;
  std::vector<SimilarPair> pairs_;
};

/// Appended rows D with right-hand side nu; row k forces x_i = x_j for chosen[k].
struct ConstraintSet {
  GFMatrix d;
  std::vector<Symbol> nu;
  std::vector<SimilarPair> chosen;
};

/// Row with ones at columns i and j.
std::vector<Symbol> constraint_row(std::size_t n, const SimilarPair& pair);

/// Takes the N-K best pairs, skipping any whose row depends on rows already
/// chosen. Errc::insufficient_model if the model runs out.
ConstraintSet build_constraints(const SimilarityModel& model, std::size_t k, std::size_t n, const FieldSpec& field);

struct DecodePolicy {
  /// Replacement attempts after a singular stacked matrix.
  std::size_t max_retries = 10;
  /// On failure, fill s_hat with fallback_value() instead of leaving it empty.
  bool fallback_fill = false;
};

enum class DecodeMode { exact, approximate, failed };
const char* to_string(DecodeMode mode) noexcept;

struct DecodeResult {
  DecodeMode mode = DecodeMode::failed;
  std::size_t sources = 0;
  std::size_t samples = 0;
  /// N x w row-major; empty when failed.
  std::vector<Symbol> x_hat;
  /// lift(x_hat), or the fill value when failed with fallback_fill.
  std::vector<Sample> s_hat;
  std::optional<ConstraintSet> constraints;
  std::size_t retries = 0;
};

/// Mid-alphabet value used to fill failed windows.
Sample fallback_value(const FieldSpec& field) noexcept;

/// Exact solve when the state has full rank, otherwise solve [C; D] x = [y; 0].
///
/// A singular stack replaces its first dependent D row with the next-ranked
/// unused pair, up to policy.max_retries times.
DecodeResult decode(const DecoderState& state, const SimilarityModel& model, const DecodePolicy& policy = {});

/// Position-level similarity between two sources: sample t of source a is
/// expected to equal sample target[t] of source b.
struct PositionMatch {
  std::size_t a = 0;
  std::size_t b = 0;
  std::vector<std::uint32_t> target;
  double distance = 0.0;
};

/// Generalization of decode() where each appended constraint is a whole
/// PositionMatch (w equations) instead of a per-sample pair. With identity
/// targets it reduces to decode() on the same pairs.
DecodeResult decode_matched(const DecoderState& state, std::vector<PositionMatch> matches,
                            const DecodePolicy& policy = {});

/// Solves the stacked system with d = D x_true; returns x_true for any
/// nonsingular stack. `x_true` is N x w.
GFMatrix reference_solution(const GFMatrix& x_true, const GFMatrix& c, const GFMatrix& d);

/// Upper bound on || lift(x_true) - lift(x_hat) ||_1 where x_hat solves the
/// stack with nu = 0: 2^z * sum over k, n of value(m_{n,K+k} * d_k), m the
/// inverse of [C; D].
std::uint64_t error_bound_l1(const GFMatrix& c, const GFMatrix& d, const GFMatrix& x_true);

/// Score minimized by mle_decode: sum over positions and model pairs of
/// |lift(x_i) - lift(x_j)| / (1 + distance). `x_hat` is N x w row-major.
double similarity_score(const FieldSpec& field, const SimilarityModel& model, std::span<const Symbol> x_hat,
                        std::size_t samples);

/// Exhaustive search over the q^(N-K) solutions consistent with the received
/// rows, per sample position. Ties go to the lexicographically smallest
/// candidate. Errc::budget_exceeded if q^(N-K) > budget.
DecodeResult mle_decode(const DecoderState& state, const SimilarityModel& model, std::uint64_t budget);

/// `window_id,mode,retries,mse,bound`
std::string to_csv_row(std::uint64_t window_id, const DecodeResult& result, double mse, double bound);

}  // namespace ncapprox
