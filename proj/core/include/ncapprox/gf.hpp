#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "ncapprox/error.hpp"

namespace ncapprox {

/// Raw representative of a field element, always < 2^(r-z).
using Symbol = std::uint16_t;

/// Source-alphabet sample in [0, 2^r).
using Sample = std::uint32_t;

namespace detail {
struct FieldImpl;
}

/// Largest supported source bit-width.
inline constexpr unsigned kMaxFieldBits = 16;

/// True when `poly` (bit `degree` set) has no factor of degree 1..degree/2.
bool is_irreducible(std::uint32_t poly, unsigned degree) noexcept;

/// Default irreducible polynomial of the given degree (1..16).
std::uint32_t default_polynomial(unsigned degree);

/// The coding field for r-bit sources with z discarded low bits.
///
/// Arithmetic happens in GF(2^(r-z)); `poly()` is the reduction polynomial of
/// that field and therefore has degree r-z. Instances are interned: two specs
/// compare equal iff (r, z, poly) match, and copying is a pointer copy. All
/// state is immutable and shared, so a FieldSpec may be used from any thread.
class FieldSpec {
 public:
  /// Uses default_polynomial(r - z).
  explicit FieldSpec(unsigned r, unsigned z = 0);
  FieldSpec(unsigned r, unsigned z, std::uint32_t poly);

  unsigned r() const noexcept;
  unsigned z() const noexcept;
  /// Bits per field symbol, r - z.
  unsigned width() const noexcept;
  std::uint32_t poly() const noexcept;
  /// Number of field elements, 2^(r-z).
  std::uint32_t order() const noexcept;

  Symbol add(Symbol a, Symbol b) const noexcept { return a ^ b; }
  Symbol mul(Symbol a, Symbol b) const noexcept;
  /// Throws Errc::division_by_zero for a == 0.
  Symbol inv(Symbol a) const;
  Symbol div(Symbol a, Symbol b) const;

  /// dst[i] ^= c * src[i]
  void axpy(std::span<Symbol> dst, std::span<const Symbol> src, Symbol c) const noexcept;
  /// v[i] = c * v[i]
  void scale(std::span<Symbol> v, Symbol c) const noexcept;
  /// Sum over i of a[i] * b[i].
  Symbol dot(std::span<const Symbol> a, std::span<const Symbol> b) const noexcept;

  /// `r=<int> poly=0x<hex> z=<int>`
  std::string to_string() const;
  /// Parses the to_string() form; keys may appear in any order, poly optional.
  static FieldSpec parse(const std::string& text);

  friend bool operator==(const FieldSpec& a, const FieldSpec& b) noexcept { return a.impl_ == b.impl_; }

 private:
  const detail::FieldImpl* impl_;
};

/// A checked field element: value plus the field it belongs to.
class GFElement {
 public:
  GFElement(FieldSpec field, std::uint32_t value);

  Symbol value() const noexcept { return value_; }
  const FieldSpec& field() const noexcept { return field_; }

  friend bool operator==(const GFElement& a, const GFElement& b) noexcept {
    return a.field_ == b.field_ && a.value_ == b.value_;
  }

 private:
  FieldSpec field_;
  Symbol value_;
};

GFElement gf_add(const GFElement& a, const GFElement& b);
GFElement gf_mul(const GFElement& a, const GFElement& b);
GFElement gf_inv(const GFElement& a);

inline GFElement operator+(const GFElement& a, const GFElement& b) { return gf_add(a, b); }
inline GFElement operator*(const GFElement& a, const GFElement& b) { return gf_mul(a, b); }

/// Drops the z least-significant bits: s >> z. Throws Errc::out_of_range unless s < 2^r.
GFElement embed(Sample s, const FieldSpec& field);
Symbol embed_symbol(Sample s, const FieldSpec& field);

/// Midpoint reconstruction x * 2^z + 2^(z-1) (no offset when z = 0).
Sample lift(const GFElement& x);
Sample lift_symbol(Symbol x, const FieldSpec& field) noexcept;

}  // namespace ncapprox
