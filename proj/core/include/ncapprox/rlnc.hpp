#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "ncapprox/gf.hpp"
#include "ncapprox/matrix.hpp"

namespace ncapprox {

/// One coded packet: a coefficient row over the N sources of a window and
/// the matching combination of their w samples.
struct Packet {
  FieldSpec field;
  std::uint64_t window_id = 0;
  std::uint64_t unit_id = 0;
  std::vector<Symbol> coeffs;
  std::vector<Symbol> payload;

  friend bool operator==(const Packet&, const Packet&) = default;
};

/// N independent uniform symbols, zero included.
std::vector<Symbol> draw_coeffs(std::mt19937_64& rng, std::size_t n, const FieldSpec& field);

/// Inner product of coeffs and x.
Symbol encode(const FieldSpec& field, std::span<const Symbol> x, std::span<const Symbol> coeffs);

/// Applies one coefficient row to a whole window; `sources` is N x w.
Packet encode_packet(const GFMatrix& sources, std::span<const Symbol> coeffs, std::uint64_t window_id = 0,
                     std::uint64_t unit_id = 0);

/// Random combination of the inputs; the scalars may be zero.
Packet recode(std::span<const Packet> packets, std::mt19937_64& rng);
/// Combination with caller-provided scalars, one per packet.
Packet combine(std::span<const Packet> packets, std::span<const Symbol> scalars);

/// `window_id,unit_id,coeff_hex...,payload_hex...`
std::string to_csv(const Packet& p);
Packet packet_from_csv(const std::string& line, const FieldSpec& field, std::size_t n, std::size_t w);

/// Innovative packets received for one window.
class DecoderState {
 public:
  DecoderState(FieldSpec field, std::size_t n, std::size_t w, std::uint64_t window_id = 0,
               std::uint64_t unit_id = 0);

  /// Stores p and returns true iff its coefficient row is innovative.
  bool accumulate(const Packet& p);

  const FieldSpec& field() const noexcept { return field_; }
  std::size_t sources() const noexcept { return n_; }
  std::size_t samples() const noexcept { return w_; }
  std::size_t rank() const noexcept { return basis_.rank(); }
  std::uint64_t window_id() const noexcept { return window_id_; }
  std::uint64_t unit_id() const noexcept { return unit_id_; }

  /// Received rows as a K x N matrix, in arrival order.
  GFMatrix coefficients() const;
  /// Received payloads as a K x w matrix aligned with coefficients().
  GFMatrix payloads() const;

 private:
  FieldSpec field_;
  std::size_t n_;
  std::size_t w_;
  std::uint64_t window_id_;
  std::uint64_t unit_id_;
  RowBasis basis_;
  std::vector<Symbol> rows_;
  std::vector<Symbol> payloads_;
};

}  // namespace ncapprox
