#include "ncapprox/gf.hpp"

#include <array>
#include <bit>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <tuple>
#include <vector>

#include <fmt/format.h>

namespace ncapprox {

const char* to_string(Errc code) noexcept {
  switch (code) {
    case Errc::spec_mismatch: return "spec-mismatch";
    case Errc::division_by_zero: return "division-by-zero";
    case Errc::out_of_range: return "out-of-range";
    case Errc::singular_matrix: return "singular-matrix";
    case Errc::dimension_mismatch: return "dimension-mismatch";
    case Errc::insufficient_model: return "insufficient-model";
    case Errc::budget_exceeded: return "budget-exceeded";
    case Errc::invalid_argument: return "invalid-argument";
    case Errc::parse_error: return "parse-error";
    case Errc::io_error: return "io-error";
  }
  return "unknown";
}

namespace {

unsigned degree_of(std::uint32_t p) noexcept {
  return p == 0 ? 0 : static_cast<unsigned>(std::bit_width(p)) - 1;
}

// Remainder of a modulo b, both polynomials over GF(2).
std::uint32_t poly_mod(std::uint32_t a, std::uint32_t b) noexcept {
  const unsigned db = degree_of(b);
  while (a != 0 && degree_of(a) >= db) a ^= b << (degree_of(a) - db);
  return a;
}

// Schoolbook carry-less product reduced by poly.
std::uint32_t clmul_mod(std::uint32_t a, std::uint32_t b, std::uint32_t poly, unsigned degree) noexcept {
  std::uint32_t acc = 0;
  while (b != 0) {
    if (b & 1u) acc ^= a;
    b >>= 1;
    a <<= 1;
    if (a & (1u << degree)) a ^= poly;
  }
  return acc;
}

// Primitive polynomials for widths 1..16, except width 8 which uses the
// AES polynomial 0x11B (irreducible, generator 3).
constexpr std::array<std::uint32_t, 17> kDefaultPolys = {
    0,      0x3,    0x7,    0xB,    0x13,   0x25,   0x43,   0x89,   0x11B,
    0x211,  0x409,  0x805,  0x1053, 0x201B, 0x4443, 0x8003, 0x1100B,
};

struct Tables {
  std::uint32_t order = 0;
  std::vector<Symbol> exp;  // 2 * (order - 1) entries, duplicated to skip a modulo
  std::vector<std::uint32_t> log;
};

std::unique_ptr<Tables> build_tables(std::uint32_t poly, unsigned degree) {
  auto t = std::make_unique<Tables>();
  t->order = 1u << degree;
  const std::uint32_t group = t->order - 1;
  // Smallest element of multiplicative order 2^degree - 1.
  std::uint32_t generator = 0;
  for (std::uint32_t g = (group == 1 ? 1 : 2); g < t->order; ++g) {
    std::uint32_t v = g;
    std::uint32_t k = 1;
    while (v != 1) {
      v = clmul_mod(v, g, poly, degree);
      ++k;
    }
    if (k == group) {
      generator = g;
      break;
    }
  }
  t->exp.resize(2 * group);
  t->log.assign(t->order, 0);
  std::uint32_t v = 1;
  for (std::uint32_t i = 0; i < group; ++i) {
    t->exp[i] = static_cast<Symbol>(v);
    t->exp[i + group] = static_cast<Symbol>(v);
    t->log[v] = i;
    v = clmul_mod(v, generator, poly, degree);
  }
  return t;
}

}  // namespace

namespace detail {
struct FieldImpl {
  unsigned r;
  unsigned z;
  std::uint32_t poly;
  const Tables* tables;
};
}  // namespace detail

namespace {

class Registry {
 public:
  static Registry& instance() {
    static Registry registry;
    return registry;
  }

  const detail::FieldImpl* intern(unsigned r, unsigned z, std::uint32_t poly) {
    std::lock_guard lock(mutex_);
    auto key = std::make_tuple(r, z, poly);
    if (auto it = specs_.find(key); it != specs_.end()) return it->second.get();
    auto& tables = tables_[poly];
    if (!tables) tables = build_tables(poly, r - z);
    auto impl = std::make_unique<detail::FieldImpl>(detail::FieldImpl{r, z, poly, tables.get()});
    const auto* raw = impl.get();
    specs_.emplace(key, std::move(impl));
    return raw;
  }

 private:
  std::mutex mutex_;
  std::map<std::uint32_t, std::unique_ptr<Tables>> tables_;
  std::map<std::tuple<unsigned, unsigned, std::uint32_t>, std::unique_ptr<detail::FieldImpl>> specs_;
};

const detail::FieldImpl* make_impl(unsigned r, unsigned z, std::uint32_t poly) {
  if (r < 1 || r > kMaxFieldBits)
    throw Error(Errc::invalid_argument, fmt::format("field bit-width r={} outside 1..{}", r, kMaxFieldBits));
  if (z >= r) throw Error(Errc::invalid_argument, fmt::format("discarded bits z={} must be < r={}", z, r));
  const unsigned width = r - z;
  if (degree_of(poly) != width)
    throw Error(Errc::invalid_argument,
                fmt::format("polynomial 0x{:x} has degree {}, coding field needs degree {}", poly,
                            degree_of(poly), width));
  if (!is_irreducible(poly, width))
    throw Error(Errc::invalid_argument, fmt::format("polynomial 0x{:x} is reducible", poly));
  return Registry::instance().intern(r, z, poly);
}

}  // namespace

bool is_irreducible(std::uint32_t poly, unsigned degree) noexcept {
  if (degree == 0 || degree_of(poly) != degree) return false;
  // Trial division by every polynomial of degree 1..degree/2.
  for (unsigned d = 1; d <= degree / 2; ++d) {
    for (std::uint32_t f = 1u << d; f < (2u << d); ++f) {
      if (poly_mod(poly, f) == 0) return false;
    }
  }
  return true;
}

std::uint32_t default_polynomial(unsigned degree) {
  if (degree < 1 || degree > kMaxFieldBits)
    throw Error(Errc::invalid_argument, fmt::format("no default polynomial of degree {}", degree));
  return kDefaultPolys[degree];
}

FieldSpec::FieldSpec(unsigned r, unsigned z)
    : impl_(make_impl(r, z, z < r && r - z <= kMaxFieldBits && r - z >= 1 ? kDefaultPolys[r - z] : 0)) {}

FieldSpec::FieldSpec(unsigned r, unsigned z, std::uint32_t poly) : impl_(make_impl(r, z, poly)) {}

unsigned FieldSpec::r() const noexcept { return impl_->r; }
unsigned FieldSpec::z() const noexcept { return impl_->z; }
unsigned FieldSpec::width() const noexcept { return impl_->r - impl_->z; }
std::uint32_t FieldSpec::poly() const noexcept { return impl_->poly; }
std::uint32_t FieldSpec::order() const noexcept { return impl_->tables->order; }

Symbol FieldSpec::mul(Symbol a, Symbol b) const noexcept {
  if (a == 0 || b == 0) return 0;
  const Tables& t = *impl_->tables;
  return t.exp[t.log[a] + t.log[b]];
}

Symbol FieldSpec::inv(Symbol a) const {
  if (a == 0) throw Error(Errc::division_by_zero, "zero has no multiplicative inverse");
  const Tables& t = *impl_->tables;
  const std::uint32_t group = t.order - 1;
  return t.exp[(group - t.log[a]) % group];
}

Symbol FieldSpec::div(Symbol a, Symbol b) const {
  if (b == 0) throw Error(Errc::division_by_zero, "division by zero");
  if (a == 0) return 0;
  const Tables& t = *impl_->tables;
  const std::uint32_t group = t.order - 1;
  return t.exp[t.log[a] + group - t.log[b]];
}

void FieldSpec::axpy(std::span<Symbol> dst, std::span<const Symbol> src, Symbol c) const noexcept {
  if (c == 0) return;
  const Tables& t = *impl_->tables;
  const std::uint32_t lc = t.log[c];
  const std::size_t n = std::min(dst.size(), src.size());
  for (std::size_t i = 0; i < n; ++i) {
    const Symbol v = src[i];
    if (v != 0) dst[i] ^= t.exp[t.log[v] + lc];
  }
}

void FieldSpec::scale(std::span<Symbol> v, Symbol c) const noexcept {
  if (c == 0) {
    std::fill(v.begin(), v.end(), Symbol{0});
    return;
  }
  const Tables& t = *impl_->tables;
  const std::uint32_t lc = t.log[c];
  for (auto& e : v)
    if (e != 0) e = t.exp[t.log[e] + lc];
}

Symbol FieldSpec::dot(std::span<const Symbol> a, std::span<const Symbol> b) const noexcept {
  Symbol acc = 0;
  const std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) acc ^= mul(a[i], b[i]);
  return acc;
}

std::string FieldSpec::to_string() const { return fmt::format("r={} poly=0x{:x} z={}", r(), poly(), z()); }

FieldSpec FieldSpec::parse(const std::string& text) {
  std::istringstream in(text);
  std::string token;
  int r = -1;
  int z = 0;
  std::uint32_t poly = 0;
  try {
    while (in >> token) {
      const auto eq = token.find('=');
      if (eq == std::string::npos) throw Error(Errc::parse_error, "expected key=value, got '" + token + "'");
      const std::string key = token.substr(0, eq);
      const std::string value = token.substr(eq + 1);
      if (key == "r") {
        r = std::stoi(value);
      } else if (key == "z") {
        z = std::stoi(value);
      } else if (key == "poly") {
        poly = static_cast<std::uint32_t>(std::stoul(value, nullptr, 0));
      } else {
        throw Error(Errc::parse_error, "unknown field key '" + key + "'");
      }
    }
  } catch (const std::logic_error&) {
    throw Error(Errc::parse_error, "malformed field spec '" + text + "'");
  }
  if (r < 0 || z < 0) throw Error(Errc::parse_error, "field spec needs r=<int>");
  if (poly == 0) return FieldSpec(static_cast<unsigned>(r), static_cast<unsigned>(z));
  return FieldSpec(static_cast<unsigned>(r), static_cast<unsigned>(z), poly);
}

GFElement::GFElement(FieldSpec field, std::uint32_t value) : field_(field), value_(0) {
  if (value >= field.order())
    throw Error(Errc::out_of_range, fmt::format("value {} not in GF({})", value, field.order()));
  value_ = static_cast<Symbol>(value);
}

namespace {
void require_same_field(const GFElement& a, const GFElement& b) {
  if (!(a.field() == b.field()))
    throw Error(Errc::spec_mismatch,
                fmt::format("operands from different fields ({} vs {})", a.field().to_string(), b.field().to_string()));
}
}  // namespace

GFElement gf_add(const GFElement& a, const GFElement& b) {
  require_same_field(a, b);
  return GFElement(a.field(), a.field().add(a.value(), b.value()));
}

GFElement gf_mul(const GFElement& a, const GFElement& b) {
  require_same_field(a, b);
  return GFElement(a.field(), a.field().mul(a.value(), b.value()));
}

GFElement gf_inv(const GFElement& a) { return GFElement(a.field(), a.field().inv(a.value())); }

Symbol embed_symbol(Sample s, const FieldSpec& field) {
  if (s >= (Sample{1} << field.r()))
    throw Error(Errc::out_of_range, fmt::format("sample {} outside [0, 2^{})", s, field.r()));
  return static_cast<Symbol>(s >> field.z());
}

GFElement embed(Sample s, const FieldSpec& field) { return GFElement(field, embed_symbol(s, field)); }

Sample lift_symbol(Symbol x, const FieldSpec& field) noexcept {
  const unsigned z = field.z();
  const Sample offset = z == 0 ? 0 : (Sample{1} << (z - 1));
  return (Sample{x} << z) + offset;
}

Sample lift(const GFElement& x) { return lift_symbol(x.value(), x.field()); }

}  // namespace ncapprox
