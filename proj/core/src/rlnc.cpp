#include "ncapprox/rlnc.hpp"

#include <algorithm>
#include <charconv>

#include <fmt/format.h>

namespace ncapprox {

std::vector<Symbol> draw_coeffs(std::mt19937_64& rng, std::size_t n, const FieldSpec& field) {
  std::uniform_int_distribution<std::uint32_t> dist(0, field.order() - 1);
  std::vector<Symbol> out(n);
  for (auto& c : out) c = static_cast<Symbol>(dist(rng));
  return out;
}

Symbol encode(const FieldSpec& field, std::span<const Symbol> x, std::span<const Symbol> coeffs) {
  if (x.size() != coeffs.size())
    throw Error(Errc::dimension_mismatch, fmt::format("{} coefficients for {} sources", coeffs.size(), x.size()));
  return field.dot(coeffs, x);
}

Packet encode_packet(const GFMatrix& sources, std::span<const Symbol> coeffs, std::uint64_t window_id,
                     std::uint64_t unit_id) {
  if (coeffs.size() != sources.rows())
    throw Error(Errc::dimension_mismatch,
                fmt::format("{} coefficients for {} sources", coeffs.size(), sources.rows()));
  const FieldSpec& f = sources.field();
  Packet p{f, window_id, unit_id, {coeffs.begin(), coeffs.end()}, std::vector<Symbol>(sources.cols(), 0)};
  for (std::size_t n = 0; n < sources.rows(); ++n) f.axpy(p.payload, sources.row(n), coeffs[n]);
  return p;
}

Packet combine(std::span<const Packet> packets, std::span<const Symbol> scalars) {
  if (packets.empty()) throw Error(Errc::invalid_argument, "cannot recode an empty packet list");
  if (scalars.size() != packets.size())
    throw Error(Errc::dimension_mismatch, fmt::format("{} scalars for {} packets", scalars.size(), packets.size()));
  const Packet& head = packets.front();
  Packet out{head.field, head.window_id, head.unit_id, std::vector<Symbol>(head.coeffs.size(), 0),
             std::vector<Symbol>(head.payload.size(), 0)};
  for (std::size_t i = 0; i < packets.size(); ++i) {
    const Packet& p = packets[i];
    if (!(p.field == head.field)) throw Error(Errc::spec_mismatch, "recoding packets from different fields");
    if (p.window_id != head.window_id || p.unit_id != head.unit_id)
      throw Error(Errc::invalid_argument,
                  fmt::format("recoding window {}/{} with {}/{}", p.window_id, p.unit_id, head.window_id, head.unit_id));
    if (p.coeffs.size() != head.coeffs.size() || p.payload.size() != head.payload.size())
      throw Error(Errc::dimension_mismatch, "recoding packets of different shapes");
    head.field.axpy(out.coeffs, p.coeffs, scalars[i]);
    head.field.axpy(out.payload, p.payload, scalars[i]);
  }
  return out;
}

Packet recode(std::span<const Packet> packets, std::mt19937_64& rng) {
  if (packets.empty()) throw Error(Errc::invalid_argument, "cannot recode an empty packet list");
  const auto scalars = draw_coeffs(rng, packets.size(), packets.front().field);
  return combine(packets, scalars);
}

std::string to_csv(const Packet& p) {
  std::string out = fmt::format("{},{}", p.window_id, p.unit_id);
  for (Symbol c : p.coeffs) out += fmt::format(",{:x}", c);
  for (Symbol v : p.payload) out += fmt::format(",{:x}", v);
  return out;
}

namespace {

template <typename T>
T parse_field(std::string_view text, int base, const std::string& line) {
  T value{};
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value, base);
  if (ec != std::errc() || ptr != end || text.empty())
    throw Error(Errc::parse_error, fmt::format("bad packet field '{}' in '{}'", text, line));
  return value;
}

}  // namespace

Packet packet_from_csv(const std::string& line, const FieldSpec& field, std::size_t n, std::size_t w) {
  std::vector<std::string_view> cells;
  std::string_view rest(line);
  while (true) {
    const auto comma = rest.find(',');
    cells.push_back(rest.substr(0, comma));
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  if (cells.size() != 2 + n + w)
    throw Error(Errc::parse_error, fmt::format("expected {} packet fields, got {}", 2 + n + w, cells.size()));
  Packet p{field, parse_field<std::uint64_t>(cells[0], 10, line), parse_field<std::uint64_t>(cells[1], 10, line),
           {}, {}};
  auto symbol = [&](std::string_view cell) {
    const auto v = parse_field<std::uint32_t>(cell, 16, line);
    if (v >= field.order()) throw Error(Errc::out_of_range, fmt::format("symbol {:x} not in GF({})", v, field.order()));
    return static_cast<Symbol>(v);
  };
  for (std::size_t i = 0; i < n; ++i) p.coeffs.push_back(symbol(cells[2 + i]));
  for (std::size_t i = 0; i < w; ++i) p.payload.push_back(symbol(cells[2 + n + i]));
  return p;
}

DecoderState::DecoderState(FieldSpec field, std::size_t n, std::size_t w, std::uint64_t window_id,
                           std::uint64_t unit_id)
    : field_(field), n_(n), w_(w), window_id_(window_id), unit_id_(unit_id), basis_(field, n) {
  if (n == 0) throw Error(Errc::invalid_argument, "decoder window needs at least one source");
}

bool DecoderState::accumulate(const Packet& p) {
  if (!(p.field == field_)) throw Error(Errc::spec_mismatch, "packet from a different field");
  if (p.coeffs.size() != n_ || p.payload.size() != w_)
    throw Error(Errc::dimension_mismatch, fmt::format("packet shape {}x{} for a {}x{} window", p.coeffs.size(),
                                                      p.payload.size(), n_, w_));
  if (p.window_id != window_id_ || p.unit_id != unit_id_)
    throw Error(Errc::invalid_argument,
                fmt::format("packet for window {}/{} offered to {}/{}", p.window_id, p.unit_id, window_id_, unit_id_));
  if (!basis_.try_insert(p.coeffs)) return false;
  rows_.insert(rows_.end(), p.coeffs.begin(), p.coeffs.end());
  payloads_.insert(payloads_.end(), p.payload.begin(), p.payload.end());
  return true;
}

GFMatrix DecoderState::coefficients() const { return GFMatrix(field_, rank(), n_, rows_); }

GFMatrix DecoderState::payloads() const { return GFMatrix(field_, rank(), w_, payloads_); }

}  // namespace ncapprox
