#pragma once

#include <cstddef>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "ncapprox/gf.hpp"

namespace ncapprox {

/// Dense row-major matrix over a FieldSpec.
class GFMatrix {
 public:
  GFMatrix(FieldSpec field, std::size_t rows, std::size_t cols);
  GFMatrix(FieldSpec field, std::size_t rows, std::size_t cols, std::vector<Symbol> data);

  static GFMatrix identity(FieldSpec field, std::size_t n);
  /// Entries uniform over the whole field, zero included.
  static GFMatrix random(FieldSpec field, std::size_t rows, std::size_t cols, std::mt19937_64& rng);
  static GFMatrix from_rows(FieldSpec field, const std::vector<std::vector<Symbol>>& rows, std::size_t cols);

  const FieldSpec& field() const noexcept { return field_; }
  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::span<const Symbol> data() const noexcept { return data_; }

  Symbol operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }
  Symbol& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  GFElement element(std::size_t r, std::size_t c) const { return GFElement(field_, (*this)(r, c)); }

  std::span<const Symbol> row(std::size_t r) const noexcept { return {data_.data() + r * cols_, cols_}; }
  std::span<Symbol> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }

  /// Rows of space-separated hex values, one row per line.
  std::string dump() const;

  friend bool operator==(const GFMatrix& a, const GFMatrix& b) noexcept {
    return a.field_ == b.field_ && a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

 private:
  FieldSpec field_;
  std::size_t rows_;
  std::size_t cols_;
  std::vector<Symbol> data_;
};

GFMatrix multiply(const GFMatrix& a, const GFMatrix& b);
std::vector<Symbol> multiply(const GFMatrix& a, std::span<const Symbol> x);
/// [top; bottom]
GFMatrix vstack(const GFMatrix& top, const GFMatrix& bottom);

std::size_t rank(const GFMatrix& m);

/// Solves m * x = y for square m; Errc::singular_matrix if m is singular.
std::vector<Symbol> solve(const GFMatrix& m, std::span<const Symbol> y);
/// Multi-right-hand-side form: m * X = Y.
GFMatrix solve(const GFMatrix& m, const GFMatrix& y);
GFMatrix invert(const GFMatrix& m);

/// Reduced row-echelon form of [m | rhs] computed in place.
struct Echelon {
  GFMatrix reduced;                 // rank x cols(m), pivot entries equal 1
  GFMatrix rhs;                     // rank x cols(rhs)
  std::vector<std::size_t> pivots;  // strictly increasing
  std::vector<std::size_t> free_columns;
  /// True when a zero row of m met a nonzero rhs row.
  bool inconsistent = false;
};
Echelon reduce_row_echelon(const GFMatrix& m, const GFMatrix& rhs);

/// Incrementally built echelon basis, used to detect innovative rows.
///
/// Rows are stored normalized (pivot entry 1) and sorted by pivot column.
/// Single writer.
class RowBasis {
 public:
  RowBasis(FieldSpec field, std::size_t cols);

  /// Inserts `row` if it is linearly independent of the basis.
  bool try_insert(std::span<const Symbol> row);
  /// True if `row` lies in the span without modifying the basis.
  bool contains(std::span<const Symbol> row) const;

  std::size_t rank() const noexcept { return pivots_.size(); }
  std::size_t cols() const noexcept { return cols_; }
  const FieldSpec& field() const noexcept { return field_; }
  std::span<const std::size_t> pivots() const noexcept { return pivots_; }
  std::span<const Symbol> row(std::size_t i) const noexcept { return {rows_.data() + i * cols_, cols_}; }

 private:
  void reduce(std::span<Symbol> v) const;

  FieldSpec field_;
  std::size_t cols_;
  std::vector<Symbol> rows_;
  std::vector<std::size_t> pivots_;
};

}  // namespace ncapprox
