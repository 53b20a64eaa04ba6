#include "ncapprox/decoder.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <map>
#include <set>
#include <tuple>
#include <utility>

#include <fmt/format.h>

namespace ncapprox {

SimilarityModel::SimilarityModel(std::size_t sources, std::vector<SimilarPair> pairs)
    : sources_(sources), pairs_(std::move(pairs)) {
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (auto& p : pairs_) {
    if (p.i > p.j) std::swap(p.i, p.j);
    if (p.i == p.j) throw Error(Errc::invalid_argument, fmt::format("pair ({}, {}) repeats a source", p.i, p.j));
    if (p.j >= sources)
      throw Error(Errc::out_of_range, fmt::format("pair ({}, {}) outside {} sources", p.i, p.j, sources));
    if (!(p.distance >= 0.0) || !std::isfinite(p.distance))
      throw Error(Errc::invalid_argument, fmt::format("pair ({}, {}) has distance {}", p.i, p.j, p.distance));
    if (!seen.emplace(p.i, p.j).second)
      throw Error(Errc::invalid_argument, fmt::format("pair ({}, {}) listed twice", p.i, p.j));
  }
  std::sort(pairs_.begin(), pairs_.end(), [](const SimilarPair& a, const SimilarPair& b) {
    return std::tie(a.distance, a.i, a.j) < std::tie(b.distance, b.i, b.j);
  });
}

SimilarityModel SimilarityModel::chain(std::size_t sources, std::span<const double> distances) {
  if (sources == 0 || distances.size() != sources - 1)
    throw Error(Errc::dimension_mismatch, fmt::format("{} distances for a chain of {}", distances.size(), sources));
  std::vector<SimilarPair> pairs;
  for (std::size_t n = 0; n + 1 < sources; ++n) pairs.push_back({n, n + 1, distances[n]});
  return SimilarityModel(sources, std::move(pairs));
}

std::vector<Symbol> constraint_row(std::size_t n, const SimilarPair& pair) {
  std::vector<Symbol> row(n, 0);
  row.at(pair.i) = 1;
  row.at(pair.j) = 1;
  return row;
}

namespace {

GFMatrix rows_to_matrix(const FieldSpec& field, std::size_t n, std::span<const SimilarPair> pairs) {
  GFMatrix d(field, pairs.size(), n);
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    d(k, pairs[k].i) = 1;
    d(k, pairs[k].j) = 1;
  }
  return d;
}

ConstraintSet make_set(const FieldSpec& field, std::size_t n, std::vector<SimilarPair> chosen) {
  GFMatrix d = rows_to_matrix(field, n, chosen);
  return {std::move(d), std::vector<Symbol>(chosen.size(), 0), std::move(chosen)};
}

std::vector<Sample> lift_all(const FieldSpec& field, std::span<const Symbol> x) {
  std::vector<Sample> s(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) s[i] = lift_symbol(x[i], field);
  return s;
}

DecodeResult failed_result(const DecoderState& state, const DecodePolicy& policy, std::size_t retries) {
  DecodeResult out;
  out.mode = DecodeMode::failed;
  out.sources = state.sources();
  out.samples = state.samples();
  out.retries = retries;
  if (policy.fallback_fill)
    out.s_hat.assign(state.sources() * state.samples(), fallback_value(state.field()));
  return out;
}

DecodeResult solved_result(const DecoderState& state, DecodeMode mode, const GFMatrix& x) {
  DecodeResult out;
  out.mode = mode;
  out.sources = state.sources();
  out.samples = state.samples();
  out.x_hat.assign(x.data().begin(), x.data().end());
  out.s_hat = lift_all(state.field(), out.x_hat);
  return out;
}

}  // namespace

ConstraintSet build_constraints(const SimilarityModel& model, std::size_t k, std::size_t n, const FieldSpec& field) {
  if (k > n) throw Error(Errc::invalid_argument, fmt::format("rank {} exceeds {} sources", k, n));
  if (model.sources() != n && !model.pairs().empty())
    throw Error(Errc::dimension_mismatch, fmt::format("model over {} sources, window has {}", model.sources(), n));
  const std::size_t need = n - k;
  std::vector<SimilarPair> chosen;
  RowBasis basis(field, n);
  for (const auto& pair : model.pairs()) {
    if (chosen.size() == need) break;
    if (basis.try_insert(constraint_row(n, pair))) chosen.push_back(pair);
  }
  if (chosen.size() < need)
    throw Error(Errc::insufficient_model,
                fmt::format("need {} independent pairs, model supplies {}", need, chosen.size()));
  return make_set(field, n, std::move(chosen));
}

const char* to_string(DecodeMode mode) noexcept {
  switch (mode) {
    case DecodeMode::exact: return "exact";
    case DecodeMode::approximate: return "approximate";
    case DecodeMode::failed: return "failed";
  }
  return "unknown";
}

Sample fallback_value(const FieldSpec& field) noexcept { return ((Sample{1} << field.r()) - 1) / 2; }

DecodeResult decode(const DecoderState& state, const SimilarityModel& model, const DecodePolicy& policy) {
  const FieldSpec& field = state.field();
  const std::size_t n = state.sources();
  const std::size_t k = state.rank();
  const GFMatrix c = state.coefficients();
  const GFMatrix y = state.payloads();

  if (k == n) return solved_result(state, DecodeMode::exact, solve(c, y));
  if (k == 0) return failed_result(state, policy, 0);

  ConstraintSet cs = [&]() -> ConstraintSet {
    try {
      return build_constraints(model, k, n, field);
    } catch (const Error& e) {
      if (e.code() != Errc::insufficient_model) throw;
      return make_set(field, n, {});
    }
  }();
  if (cs.chosen.size() != n - k) return failed_result(state, policy, 0);

  // Pairs already placed or rejected; replacements come from the ranking in order.
  std::set<std::pair<std::size_t, std::size_t>> used;
  for (const auto& p : cs.chosen) used.emplace(p.i, p.j);
  std::size_t cursor = 0;
  std::size_t retries = 0;

  while (true) {
    RowBasis basis(field, n);
    for (std::size_t r = 0; r < k; ++r) basis.try_insert(c.row(r));
    std::optional<std::size_t> offending;
    for (std::size_t r = 0; r < cs.chosen.size(); ++r) {
      if (!basis.try_insert(constraint_row(n, cs.chosen[r]))) {
        offending = r;
        break;
      }
    }
    if (!offending) {
      const GFMatrix rhs = vstack(y, GFMatrix(field, n - k, state.samples()));
      DecodeResult out = solved_result(state, DecodeMode::approximate, solve(vstack(c, cs.d), rhs));
      out.constraints = std::move(cs);
      out.retries = retries;
      return out;
    }
    if (retries == policy.max_retries) return failed_result(state, policy, retries);
    const auto pairs = model.pairs();
    while (cursor < pairs.size() && used.count({pairs[cursor].i, pairs[cursor].j})) ++cursor;
    if (cursor == pairs.size()) return failed_result(state, policy, retries);
    used.emplace(pairs[cursor].i, pairs[cursor].j);
    cs.chosen[*offending] = pairs[cursor];
    cs = make_set(field, n, std::move(cs.chosen));
    ++retries;
  }
}

namespace {

// Sparse echelon basis over GF with right-hand sides. Each stored row has its
// pivot as its smallest column and is normalized to 1 there.
class SparseSystem {
 public:
  using Entry = std::pair<std::uint32_t, Symbol>;
  using Row = std::vector<Entry>;

  explicit SparseSystem(const FieldSpec& field) : field_(field) {}

  bool insert(Row row, Symbol rhs) {
    std::size_t start = 0;
    while (true) {
      std::size_t pos = start;
      while (pos < row.size() && !pivots_.count(row[pos].first)) ++pos;
      if (pos == row.size()) break;
      const auto& [prow, prhs] = pivots_.at(row[pos].first);
      const Symbol scale = row[pos].second;
      row = add_scaled(row, prow, scale);
      rhs ^= field_.mul(scale, prhs);
      start = pos;
    }
    if (row.empty()) return false;
    const Symbol inv = field_.inv(row.front().second);
    for (auto& e : row) e.second = field_.mul(e.second, inv);
    rhs = field_.mul(rhs, inv);
    const std::uint32_t pivot = row.front().first;
    pivots_.emplace(pivot, std::make_pair(std::move(row), rhs));
    return true;
  }

  std::size_t rank() const noexcept { return pivots_.size(); }

  /// Back-substitution; requires full rank over `unknowns` columns.
  std::vector<Symbol> solve(std::size_t unknowns) const {
    std::vector<Symbol> u(unknowns, 0);
    for (auto it = pivots_.rbegin(); it != pivots_.rend(); ++it) {
      const auto& [row, rhs] = it->second;
      Symbol v = rhs;
      for (std::size_t e = 1; e < row.size(); ++e) v ^= field_.mul(row[e].second, u[row[e].first]);
      u[it->first] = v;
    }
    return u;
  }

 private:
  Row add_scaled(const Row& a, const Row& b, Symbol scale) const {
    Row out;
    out.reserve(a.size() + b.size());
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < a.size() || j < b.size()) {
      if (j == b.size() || (i < a.size() && a[i].first < b[j].first)) {
        out.push_back(a[i++]);
      } else if (i == a.size() || b[j].first < a[i].first) {
        out.emplace_back(b[j].first, field_.mul(b[j].second, scale));
        ++j;
      } else {
        const Symbol v = a[i].second ^ field_.mul(b[j].second, scale);
        if (v != 0) out.emplace_back(a[i].first, v);
        ++i;
        ++j;
      }
    }
    return out;
  }

  FieldSpec field_;
  std::map<std::uint32_t, std::pair<Row, Symbol>> pivots_;
};

}  // namespace

DecodeResult decode_matched(const DecoderState& state, std::vector<PositionMatch> matches, const DecodePolicy& policy) {
  const FieldSpec& field = state.field();
  const std::size_t n = state.sources();
  const std::size_t w = state.samples();
  const std::size_t k = state.rank();
  const GFMatrix c = state.coefficients();
  const GFMatrix y = state.payloads();

  if (k == n) return solved_result(state, DecodeMode::exact, solve(c, y));
  if (k == 0) return failed_result(state, policy, 0);

  for (auto& m : matches) {
    if (m.a >= n || m.b >= n || m.a == m.b)
      throw Error(Errc::out_of_range, fmt::format("match ({}, {}) invalid for {} sources", m.a, m.b, n));
    if (m.target.size() != w)
      throw Error(Errc::dimension_mismatch, fmt::format("match target of length {} for {} samples", m.target.size(), w));
    for (auto t : m.target)
      if (t >= w) throw Error(Errc::out_of_range, fmt::format("match target {} outside {} samples", t, w));
  }
  std::stable_sort(matches.begin(), matches.end(), [](const PositionMatch& l, const PositionMatch& r) {
    return std::make_tuple(l.distance, std::min(l.a, l.b), std::max(l.a, l.b)) <
           std::make_tuple(r.distance, std::min(r.a, r.b), std::max(r.a, r.b));
  });

  const Echelon ech = reduce_row_echelon(c, y);
  const std::size_t f = ech.free_columns.size();
  if (matches.size() < f) return failed_result(state, policy, 0);

  // Source n is either free (index into free_columns) or a pivot row.
  std::vector<std::ptrdiff_t> free_index(n, -1);
  std::vector<std::ptrdiff_t> pivot_row(n, -1);
  for (std::size_t i = 0; i < f; ++i) free_index[ech.free_columns[i]] = static_cast<std::ptrdiff_t>(i);
  for (std::size_t i = 0; i < ech.pivots.size(); ++i) pivot_row[ech.pivots[i]] = static_cast<std::ptrdiff_t>(i);

  // x_src[t] as (sparse coefficients over unknowns u_k[t] at column k*w + t, constant).
  auto expression = [&](std::size_t src, std::size_t t, SparseSystem::Row& row, Symbol& constant) {
    if (free_index[src] >= 0) {
      row.emplace_back(static_cast<std::uint32_t>(static_cast<std::size_t>(free_index[src]) * w + t), Symbol{1});
      return;
    }
    const auto i = static_cast<std::size_t>(pivot_row[src]);
    constant ^= ech.rhs(i, t);
    for (std::size_t kf = 0; kf < f; ++kf) {
      const Symbol coef = ech.reduced(i, ech.free_columns[kf]);
      if (coef != 0) row.emplace_back(static_cast<std::uint32_t>(kf * w + t), coef);
    }
  };

  std::vector<std::size_t> chosen(f);
  for (std::size_t i = 0; i < f; ++i) chosen[i] = i;
  std::size_t next = f;
  std::size_t retries = 0;

  while (true) {
    SparseSystem sys(field);
    std::optional<std::size_t> offending;
    for (std::size_t slot = 0; slot < f && !offending; ++slot) {
      const PositionMatch& m = matches[chosen[slot]];
      for (std::size_t t = 0; t < w; ++t) {
        SparseSystem::Row row;
        Symbol constant = 0;
        expression(m.a, t, row, constant);
        expression(m.b, m.target[t], row, constant);
        std::sort(row.begin(), row.end());
        SparseSystem::Row merged;
        for (const auto& e : row) {
          if (!merged.empty() && merged.back().first == e.first) {
            merged.back().second ^= e.second;
            if (merged.back().second == 0) merged.pop_back();
          } else {
            merged.push_back(e);
          }
        }
        if (!sys.insert(std::move(merged), constant)) {
          offending = slot;
          break;
        }
      }
    }
    if (!offending) {
      const auto u = sys.solve(f * w);
      GFMatrix x(field, n, w);
      for (std::size_t src = 0; src < n; ++src) {
        for (std::size_t t = 0; t < w; ++t) {
          SparseSystem::Row row;
          Symbol v = 0;
          expression(src, t, row, v);
          for (const auto& [col, coef] : row) v ^= field.mul(coef, u[col]);
          x(src, t) = v;
        }
      }
      DecodeResult out = solved_result(state, DecodeMode::approximate, x);
      out.retries = retries;
      return out;
    }
    if (retries == policy.max_retries || next == matches.size()) return failed_result(state, policy, retries);
    chosen[*offending] = next++;
    ++retries;
  }
}

GFMatrix reference_solution(const GFMatrix& x_true, const GFMatrix& c, const GFMatrix& d) {
  const GFMatrix y = multiply(c, x_true);
  const GFMatrix dx = multiply(d, x_true);
  return solve(vstack(c, d), vstack(y, dx));
}

std::uint64_t error_bound_l1(const GFMatrix& c, const GFMatrix& d, const GFMatrix& x_true) {
  const FieldSpec& field = c.field();
  const GFMatrix m = invert(vstack(c, d));
  const GFMatrix dx = multiply(d, x_true);  // (N-K) x w
  const std::size_t k = c.rows();
  std::uint64_t total = 0;
  for (std::size_t t = 0; t < x_true.cols(); ++t)
    for (std::size_t row = 0; row < d.rows(); ++row)
      for (std::size_t src = 0; src < m.rows(); ++src) total += field.mul(m(src, k + row), dx(row, t));
  return total << field.z();
}

namespace {

double position_score(const FieldSpec& field, std::span<const SimilarPair> pairs, std::span<const Symbol> x_hat,
                      std::size_t samples, std::size_t t) {
  double score = 0.0;
  for (const auto& p : pairs) {
    const auto a = static_cast<std::int64_t>(lift_symbol(x_hat[p.i * samples + t], field));
    const auto b = static_cast<std::int64_t>(lift_symbol(x_hat[p.j * samples + t], field));
    score += static_cast<double>(std::llabs(a - b)) / (1.0 + p.distance);
  }
  return score;
}

}  // namespace

double similarity_score(const FieldSpec& field, const SimilarityModel& model, std::span<const Symbol> x_hat,
                        std::size_t samples) {
  if (samples == 0 || x_hat.size() != model.sources() * samples)
    throw Error(Errc::dimension_mismatch,
                fmt::format("{} symbols for {} sources of {} samples", x_hat.size(), model.sources(), samples));
  double total = 0.0;
  for (std::size_t t = 0; t < samples; ++t) total += position_score(field, model.pairs(), x_hat, samples, t);
  return total;
}

DecodeResult mle_decode(const DecoderState& state, const SimilarityModel& model, std::uint64_t budget) {
  const FieldSpec& field = state.field();
  const std::size_t n = state.sources();
  const std::size_t w = state.samples();
  const std::size_t k = state.rank();
  if (model.sources() != n && !model.pairs().empty())
    throw Error(Errc::dimension_mismatch, fmt::format("model over {} sources, window has {}", model.sources(), n));
  const GFMatrix c = state.coefficients();
  const GFMatrix y = state.payloads();
  if (k == n) return solved_result(state, DecodeMode::exact, solve(c, y));

  const std::size_t f = n - k;
  const std::uint64_t q = field.order();
  std::uint64_t candidates = 1;
  for (std::size_t i = 0; i < f; ++i) {
    if (candidates > budget / q)
      throw Error(Errc::budget_exceeded, fmt::format("{}^{} candidates exceed budget {}", q, f, budget));
    candidates *= q;
  }
  if (candidates > budget)
    throw Error(Errc::budget_exceeded, fmt::format("{}^{} candidates exceed budget {}", q, f, budget));

  const Echelon ech = reduce_row_echelon(c, y);
  // table[cand * k + i] = contribution of the free assignment to pivot row i.
  std::vector<Symbol> assignment(candidates * f);
  std::vector<Symbol> table(candidates * k, 0);
  for (std::uint64_t cand = 0; cand < candidates; ++cand) {
    std::uint64_t rest = cand;
    for (std::size_t kf = f; kf-- > 0;) {
      assignment[cand * f + kf] = static_cast<Symbol>(rest % q);
      rest /= q;
    }
    for (std::size_t i = 0; i < k; ++i) {
      Symbol v = 0;
      for (std::size_t kf = 0; kf < f; ++kf) v ^= field.mul(ech.reduced(i, ech.free_columns[kf]), assignment[cand * f + kf]);
      table[cand * k + i] = v;
    }
  }

  GFMatrix x(field, n, w);
  std::vector<Symbol> column(n);
  std::vector<Symbol> best(n);
  for (std::size_t t = 0; t < w; ++t) {
    double best_score = std::numeric_limits<double>::infinity();
    for (std::uint64_t cand = 0; cand < candidates; ++cand) {
      for (std::size_t kf = 0; kf < f; ++kf) column[ech.free_columns[kf]] = assignment[cand * f + kf];
      for (std::size_t i = 0; i < k; ++i) column[ech.pivots[i]] = ech.rhs(i, t) ^ table[cand * k + i];
      const double score = position_score(field, model.pairs(), column, 1, 0);
      if (score < best_score || (score == best_score && column < best)) {
        best_score = score;
        best = column;
      }
    }
    for (std::size_t src = 0; src < n; ++src) x(src, t) = best[src];
  }
  return solved_result(state, DecodeMode::approximate, x);
}

std::string to_csv_row(std::uint64_t window_id, const DecodeResult& result, double mse, double bound) {
  return fmt::format("{},{},{},{:.10g},{:.10g}", window_id, to_string(result.mode), result.retries, mse, bound);
}

}  // namespace ncapprox
