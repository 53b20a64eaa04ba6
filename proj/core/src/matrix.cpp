#include "ncapprox/matrix.hpp"

#include <algorithm>
#include <utility>

#include <fmt/format.h>

namespace ncapprox {

GFMatrix::GFMatrix(FieldSpec field, std::size_t rows, std::size_t cols)
    : field_(field), rows_(rows), cols_(cols), data_(rows * cols, 0) {}

GFMatrix::GFMatrix(FieldSpec field, std::size_t rows, std::size_t cols, std::vector<Symbol> data)
    : field_(field), rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols)
    throw Error(Errc::dimension_mismatch,
                fmt::format("matrix {}x{} given {} entries", rows, cols, data_.size()));
  for (Symbol v : data_)
    if (v >= field.order()) throw Error(Errc::out_of_range, fmt::format("entry {} not in GF({})", v, field.order()));
}

GFMatrix GFMatrix::identity(FieldSpec field, std::size_t n) {
  GFMatrix m(field, n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1;
  return m;
}

GFMatrix GFMatrix::random(FieldSpec field, std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  GFMatrix m(field, rows, cols);
  std::uniform_int_distribution<std::uint32_t> dist(0, field.order() - 1);
  for (auto& v : m.data_) v = static_cast<Symbol>(dist(rng));
  return m;
}

GFMatrix GFMatrix::from_rows(FieldSpec field, const std::vector<std::vector<Symbol>>& rows, std::size_t cols) {
  std::vector<Symbol> data;
  data.reserve(rows.size() * cols);
  for (const auto& r : rows) {
    if (r.size() != cols)
      throw Error(Errc::dimension_mismatch, fmt::format("row of length {} in a {}-column matrix", r.size(), cols));
    data.insert(data.end(), r.begin(), r.end());
  }
  return GFMatrix(field, rows.size(), cols, std::move(data));
}

std::string GFMatrix::dump() const {
  std::string out;
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = 0; c < cols_; ++c) {
      if (c) out += ' ';
      out += fmt::format("{:x}", (*this)(r, c));
    }
    out += '\n';
  }
  return out;
}

GFMatrix multiply(const GFMatrix& a, const GFMatrix& b) {
  if (!(a.field() == b.field())) throw Error(Errc::spec_mismatch, "matrix product across fields");
  if (a.cols() != b.rows())
    throw Error(Errc::dimension_mismatch,
                fmt::format("product of {}x{} and {}x{}", a.rows(), a.cols(), b.rows(), b.cols()));
  GFMatrix out(a.field(), a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) a.field().axpy(out.row(i), b.row(k), a(i, k));
  return out;
}

std::vector<Symbol> multiply(const GFMatrix& a, std::span<const Symbol> x) {
  if (a.cols() != x.size())
    throw Error(Errc::dimension_mismatch, fmt::format("{}x{} matrix times length-{} vector", a.rows(), a.cols(), x.size()));
  std::vector<Symbol> y(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) y[i] = a.field().dot(a.row(i), x);
  return y;
}

GFMatrix vstack(const GFMatrix& top, const GFMatrix& bottom) {
  if (!(top.field() == bottom.field())) throw Error(Errc::spec_mismatch, "stacking matrices across fields");
  if (top.cols() != bottom.cols())
    throw Error(Errc::dimension_mismatch, fmt::format("stacking {} and {} columns", top.cols(), bottom.cols()));
  std::vector<Symbol> data(top.data().begin(), top.data().end());
  data.insert(data.end(), bottom.data().begin(), bottom.data().end());
  return GFMatrix(top.field(), top.rows() + bottom.rows(), top.cols(), std::move(data));
}

namespace {

// Gauss-Jordan on [a | b]; pivot is the first nonzero entry at or below the
// current row. Returns the pivot columns; a and b are left in reduced form
// with the first rank rows holding the pivots.
std::vector<std::size_t> gauss_jordan(GFMatrix& a, GFMatrix* b) {
  const FieldSpec& f = a.field();
  std::vector<std::size_t> pivots;
  std::size_t row = 0;
  for (std::size_t col = 0; col < a.cols() && row < a.rows(); ++col) {
    std::size_t p = row;
    while (p < a.rows() && a(p, col) == 0) ++p;
    if (p == a.rows()) continue;
    if (p != row) {
      std::swap_ranges(a.row(p).begin(), a.row(p).end(), a.row(row).begin());
      if (b) std::swap_ranges(b->row(p).begin(), b->row(p).end(), b->row(row).begin());
    }
    const Symbol scale = f.inv(a(row, col));
    f.scale(a.row(row), scale);
    if (b) f.scale(b->row(row), scale);
    for (std::size_t i = 0; i < a.rows(); ++i) {
      if (i == row) continue;
      const Symbol c = a(i, col);
      if (c == 0) continue;
      f.axpy(a.row(i), a.row(row), c);
      if (b) f.axpy(b->row(i), b->row(row), c);
    }
    pivots.push_back(col);
    ++row;
  }
  return pivots;
}

void require_square(const GFMatrix& m) {
  if (m.rows() != m.cols())
    throw Error(Errc::dimension_mismatch, fmt::format("expected a square matrix, got {}x{}", m.rows(), m.cols()));
}

}  // namespace

std::size_t rank(const GFMatrix& m) {
  GFMatrix work = m;
  return gauss_jordan(work, nullptr).size();
}

GFMatrix solve(const GFMatrix& m, const GFMatrix& y) {
  require_square(m);
  if (!(m.field() == y.field())) throw Error(Errc::spec_mismatch, "right-hand side from a different field");
  if (y.rows() != m.rows())
    throw Error(Errc::dimension_mismatch, fmt::format("{} equations but {} right-hand-side rows", m.rows(), y.rows()));
  GFMatrix a = m;
  GFMatrix b = y;
  if (gauss_jordan(a, &b).size() != m.rows())
    throw Error(Errc::singular_matrix, fmt::format("{}x{} system is singular", m.rows(), m.cols()));
  return b;
}

std::vector<Symbol> solve(const GFMatrix& m, std::span<const Symbol> y) {
  GFMatrix rhs(m.field(), y.size(), 1, std::vector<Symbol>(y.begin(), y.end()));
  GFMatrix x = solve(m, rhs);
  return {x.data().begin(), x.data().end()};
}

GFMatrix invert(const GFMatrix& m) {
  require_square(m);
  return solve(m, GFMatrix::identity(m.field(), m.rows()));
}

Echelon reduce_row_echelon(const GFMatrix& m, const GFMatrix& rhs) {
  if (rhs.rows() != m.rows())
    throw Error(Errc::dimension_mismatch, fmt::format("{} rows but {} right-hand-side rows", m.rows(), rhs.rows()));
  GFMatrix a = m;
  GFMatrix b = rhs;
  auto pivots = gauss_jordan(a, &b);
  const std::size_t k = pivots.size();
  Echelon out{GFMatrix(m.field(), k, m.cols()), GFMatrix(m.field(), k, rhs.cols()), pivots, {}, false};
  for (std::size_t i = 0; i < k; ++i) {
    std::copy(a.row(i).begin(), a.row(i).end(), out.reduced.row(i).begin());
    std::copy(b.row(i).begin(), b.row(i).end(), out.rhs.row(i).begin());
  }
  for (std::size_t i = k; i < b.rows(); ++i)
    for (Symbol v : b.row(i))
      if (v != 0) out.inconsistent = true;
  std::size_t next = 0;
  for (std::size_t c = 0; c < m.cols(); ++c) {
    if (next < k && pivots[next] == c) {
      ++next;
    } else {
      out.free_columns.push_back(c);
    }
  }
  return out;
}

RowBasis::RowBasis(FieldSpec field, std::size_t cols) : field_(field), cols_(cols) {}

void RowBasis::reduce(std::span<Symbol> v) const {
  for (std::size_t i = 0; i < pivots_.size(); ++i) {
    const Symbol c = v[pivots_[i]];
    if (c != 0) field_.axpy(v, row(i), c);
  }
}

bool RowBasis::contains(std::span<const Symbol> row_in) const {
  if (row_in.size() != cols_)
    throw Error(Errc::dimension_mismatch, fmt::format("row of length {} for a {}-column basis", row_in.size(), cols_));
  std::vector<Symbol> v(row_in.begin(), row_in.end());
  reduce(v);
  return std::all_of(v.begin(), v.end(), [](Symbol s) { return s == 0; });
}

bool RowBasis::try_insert(std::span<const Symbol> row_in) {
  if (row_in.size() != cols_)
    throw Error(Errc::dimension_mismatch, fmt::format("row of length {} for a {}-column basis", row_in.size(), cols_));
  std::vector<Symbol> v(row_in.begin(), row_in.end());
  reduce(v);
  const auto lead = std::find_if(v.begin(), v.end(), [](Symbol s) { return s != 0; });
  if (lead == v.end()) return false;
  const auto pivot = static_cast<std::size_t>(lead - v.begin());
  field_.scale(v, field_.inv(*lead));
  const auto pos = static_cast<std::size_t>(std::lower_bound(pivots_.begin(), pivots_.end(), pivot) - pivots_.begin());
  pivots_.insert(pivots_.begin() + static_cast<std::ptrdiff_t>(pos), pivot);
  rows_.insert(rows_.begin() + static_cast<std::ptrdiff_t>(pos * cols_), v.begin(), v.end());
  return true;
}

}  // namespace ncapprox
