#include "ncapprox/sources.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <tuple>

#include <fmt/format.h>

namespace ncapprox {

Sample clip_sample(double v, unsigned r) noexcept {
  const double top = static_cast<double>((Sample{1} << r) - 1);
  const double rounded = std::round(v);
  if (!(rounded > 0.0)) return 0;
  if (rounded >= top) return static_cast<Sample>(top);
  return static_cast<Sample>(rounded);
}

GFMatrix embed_window(const SignalWindow& window, const FieldSpec& field) {
  if (window.r != field.r())
    throw Error(Errc::spec_mismatch, fmt::format("{}-bit window embedded into r={} field", window.r, field.r()));
  GFMatrix m(field, window.sources, window.samples);
  for (std::size_t n = 0; n < window.sources; ++n)
    for (std::size_t t = 0; t < window.samples; ++t) m(n, t) = embed_symbol(window.at(n, t), field);
  return m;
}

SignalWindow gen_gaussian_correlated(std::size_t n, Sample base, std::span<const double> sigmas, unsigned r,
                                     std::mt19937_64& rng, std::size_t samples) {
  if (n == 0 || sigmas.size() != n - 1)
    throw Error(Errc::dimension_mismatch, fmt::format("{} sigmas for {} sources", sigmas.size(), n));
  for (double s : sigmas)
    if (!(s >= 0.0)) throw Error(Errc::invalid_argument, fmt::format("negative sigma {}", s));
  if (base >= (Sample{1} << r)) throw Error(Errc::out_of_range, fmt::format("base {} outside [0, 2^{})", base, r));
  SignalWindow w{r, n, samples, std::vector<Sample>(n * samples)};
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (std::size_t t = 0; t < samples; ++t) {
    w.data[t] = base;
    for (std::size_t i = 1; i < n; ++i)
      w.data[i * samples + t] = clip_sample(static_cast<double>(base) + sigmas[i - 1] * gauss(rng), r);
  }
  return w;
}

std::vector<double> synthetic_trace(std::size_t length, double lo, double hi, std::mt19937_64& rng) {
  if (length == 0 || !(hi > lo)) throw Error(Errc::invalid_argument, "trace needs a positive length and hi > lo");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> trace(length, 0.0);
  // Background swell plus a handful of Ricker wavelets (arrivals).
  const double swell_period = static_cast<double>(length) * (0.6 + 0.8 * unit(rng));
  const double swell_phase = 6.283185307179586 * unit(rng);
  for (std::size_t t = 0; t < length; ++t)
    trace[t] = 0.3 * std::sin(6.283185307179586 * static_cast<double>(t) / swell_period + swell_phase);
  const std::size_t arrivals = 4 + length / 64;
  for (std::size_t k = 0; k < arrivals; ++k) {
    const double centre = unit(rng) * static_cast<double>(length);
    const double width = 4.0 + 12.0 * unit(rng);
    const double amp = (unit(rng) < 0.5 ? -1.0 : 1.0) * (0.4 + unit(rng));
    for (std::size_t t = 0; t < length; ++t) {
      const double u = (static_cast<double>(t) - centre) / width;
      trace[t] += amp * (1.0 - 2.0 * u * u) * std::exp(-u * u);
    }
  }
  const auto [mn, mx] = std::minmax_element(trace.begin(), trace.end());
  const double span = *mx - *mn;
  const double lo_v = *mn;
  for (auto& v : trace) v = span > 0.0 ? lo + (hi - lo) * (v - lo_v) / span : 0.5 * (lo + hi);
  return trace;
}

SignalWindow gen_shifted_scaled(std::span<const double> base, std::span<const double> shifts,
                                std::span<const double> scales, double noise, unsigned r, std::size_t samples,
                                std::size_t offset, std::mt19937_64& rng) {
  if (shifts.size() != scales.size() || shifts.empty())
    throw Error(Errc::dimension_mismatch, fmt::format("{} shifts and {} scales", shifts.size(), scales.size()));
  if (!(noise >= 0.0)) throw Error(Errc::invalid_argument, "noise must be non-negative");
  const std::size_t n = shifts.size();
  SignalWindow w{r, n, samples, std::vector<Sample>(n * samples)};
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t t = 0; t < samples; ++t) {
      const double pos = static_cast<double>(offset + t) - shifts[i];
      const double floor_pos = std::floor(pos);
      const double frac = pos - floor_pos;
      const double last = floor_pos + (frac == 0.0 ? 0.0 : 1.0);
      if (floor_pos < 0.0 || last >= static_cast<double>(base.size()))
        throw Error(Errc::out_of_range, fmt::format("source {} reads base index {} outside [0, {})", i, pos, base.size()));
      const auto k = static_cast<std::size_t>(floor_pos);
      const double v = frac == 0.0 ? base[k] : (1.0 - frac) * base[k] + frac * base[k + 1];
      const double jitter = noise > 0.0 ? noise * gauss(rng) : 0.0;
      w.data[i * samples + t] = clip_sample(scales[i] * v + jitter, r);
    }
  }
  return w;
}

namespace {

void skip_pgm_space(std::istream& in) {
  while (true) {
    const int c = in.peek();
    if (c == '#') {
      std::string comment;
      std::getline(in, comment);
    } else if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      in.get();
    } else {
      return;
    }
  }
}

std::size_t read_pgm_number(std::istream& in) {
  skip_pgm_space(in);
  std::size_t v = 0;
  if (!(in >> v)) throw Error(Errc::parse_error, "malformed PGM header");
  return v;
}

}  // namespace

Frame read_pgm(std::istream& in) {
  char magic[2] = {0, 0};
  in.read(magic, 2);
  if (!in || magic[0] != 'P' || magic[1] != '5') throw Error(Errc::parse_error, "not a binary PGM (P5) stream");
  Frame f;
  f.width = read_pgm_number(in);
  f.height = read_pgm_number(in);
  const std::size_t maxval = read_pgm_number(in);
  if (maxval == 0 || maxval > 255) throw Error(Errc::parse_error, fmt::format("PGM maxval {} not in 1..255", maxval));
  in.get();  // single whitespace before the raster
  f.pixels.resize(f.width * f.height);
  in.read(reinterpret_cast<char*>(f.pixels.data()), static_cast<std::streamsize>(f.pixels.size()));
  if (in.gcount() != static_cast<std::streamsize>(f.pixels.size())) throw Error(Errc::parse_error, "truncated PGM raster");
  return f;
}

Frame read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io_error, fmt::format("cannot open '{}'", path));
  return read_pgm(in);
}

void write_pgm(std::ostream& out, const Frame& frame) {
  out << "P5\n" << frame.width << ' ' << frame.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(frame.pixels.data()), static_cast<std::streamsize>(frame.pixels.size()));
}

void write_pgm(const std::string& path, const Frame& frame) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::io_error, fmt::format("cannot write '{}'", path));
  write_pgm(out, frame);
}

std::vector<Frame> synthetic_sequence(std::size_t count, std::size_t width, std::size_t height, int dx, int dy,
                                      double noise, std::mt19937_64& rng) {
  if (count == 0 || width == 0 || height == 0) throw Error(Errc::invalid_argument, "empty frame sequence");
  const std::size_t margin_x = static_cast<std::size_t>(std::abs(dx)) * count;
  const std::size_t margin_y = static_cast<std::size_t>(std::abs(dy)) * count;
  const std::size_t cw = width + margin_x + 1;
  const std::size_t ch = height + margin_y + 1;

  // Coarse random lattice, bilinearly interpolated, plus a finer octave.
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto lattice = [&](std::size_t step, double amp) {
    const std::size_t gx = cw / step + 2;
    const std::size_t gy = ch / step + 2;
    std::vector<double> g(gx * gy);
    for (auto& v : g) v = amp * unit(rng);
    std::vector<double> out(cw * ch);
    for (std::size_t y = 0; y < ch; ++y) {
      for (std::size_t x = 0; x < cw; ++x) {
        const double fx = static_cast<double>(x) / static_cast<double>(step);
        const double fy = static_cast<double>(y) / static_cast<double>(step);
        const auto ix = static_cast<std::size_t>(fx);
        const auto iy = static_cast<std::size_t>(fy);
        const double tx = fx - static_cast<double>(ix);
        const double ty = fy - static_cast<double>(iy);
        const double top = (1 - tx) * g[iy * gx + ix] + tx * g[iy * gx + ix + 1];
        const double bottom = (1 - tx) * g[(iy + 1) * gx + ix] + tx * g[(iy + 1) * gx + ix + 1];
        out[y * cw + x] = (1 - ty) * top + ty * bottom;
      }
    }
    return out;
  };
  const auto coarse = lattice(16, 170.0);
  const auto fine = lattice(4, 60.0);

  const auto base_x = static_cast<std::ptrdiff_t>(dx >= 0 ? margin_x : 0);
  const auto base_y = static_cast<std::ptrdiff_t>(dy >= 0 ? margin_y : 0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<Frame> frames;
  for (std::size_t k = 0; k < count; ++k) {
    Frame f{width, height, std::vector<std::uint8_t>(width * height)};
    // Content moves by (dx, dy) per frame.
    const auto ox = base_x - static_cast<std::ptrdiff_t>(k) * dx;
    const auto oy = base_y - static_cast<std::ptrdiff_t>(k) * dy;
    for (std::size_t y = 0; y < height; ++y) {
      for (std::size_t x = 0; x < width; ++x) {
        const auto at = static_cast<std::size_t>(oy + static_cast<std::ptrdiff_t>(y)) * cw +
                        static_cast<std::size_t>(ox + static_cast<std::ptrdiff_t>(x));
        const double v = 20.0 + coarse[at] + fine[at] + (noise > 0.0 ? noise * gauss(rng) : 0.0);
        f.pixels[y * width + x] = static_cast<std::uint8_t>(clip_sample(v, 8));
      }
    }
    frames.push_back(std::move(f));
  }
  return frames;
}

PatchSet::PatchSet(std::vector<Frame> frames, std::size_t patch) : frames_(std::move(frames)), patch_(patch) {
  if (frames_.empty()) throw Error(Errc::invalid_argument, "patch set needs at least one frame");
  if (patch_ == 0) throw Error(Errc::invalid_argument, "patch size must be positive");
  const std::size_t w = frames_.front().width;
  const std::size_t h = frames_.front().height;
  for (const auto& f : frames_) {
    if (f.width != w || f.height != h)
      throw Error(Errc::dimension_mismatch, fmt::format("frame {}x{} in a {}x{} sequence", f.width, f.height, w, h));
    if (f.pixels.size() != w * h) throw Error(Errc::dimension_mismatch, "frame raster size does not match its dimensions");
  }
  if (w % patch_ != 0 || h % patch_ != 0)
    throw Error(Errc::dimension_mismatch, fmt::format("{}x{} frames are not divisible into {}x{} patches", w, h, patch_, patch_));
}

std::vector<Sample> PatchSet::patch(std::size_t frame, std::size_t p) const {
  const Frame& f = frames_.at(frame);
  if (p >= patch_count()) throw Error(Errc::out_of_range, fmt::format("patch {} of {}", p, patch_count()));
  const std::size_t px = (p % patches_x()) * patch_;
  const std::size_t py = (p / patches_x()) * patch_;
  std::vector<Sample> out(patch_ * patch_);
  for (std::size_t y = 0; y < patch_; ++y)
    for (std::size_t x = 0; x < patch_; ++x) out[y * patch_ + x] = f.at(px + x, py + y);
  return out;
}

SignalWindow PatchSet::unit(std::size_t p, std::size_t first, std::size_t count) const {
  if (first + count > frames()) throw Error(Errc::out_of_range, fmt::format("frames [{}, {}) of {}", first, first + count, frames()));
  SignalWindow w{8, count, patch_ * patch_, {}};
  w.data.reserve(count * w.samples);
  for (std::size_t n = 0; n < count; ++n) {
    const auto px = patch(first + n, p);
    w.data.insert(w.data.end(), px.begin(), px.end());
  }
  return w;
}

std::vector<Frame> PatchSet::assemble() const {
  std::vector<Frame> out;
  for (std::size_t n = 0; n < frames(); ++n) {
    Frame f{frames_[n].width, frames_[n].height, std::vector<std::uint8_t>(frames_[n].pixels.size())};
    for (std::size_t p = 0; p < patch_count(); ++p) {
      const auto px = patch(n, p);
      const std::size_t ox = (p % patches_x()) * patch_;
      const std::size_t oy = (p / patches_x()) * patch_;
      for (std::size_t y = 0; y < patch_; ++y)
        for (std::size_t x = 0; x < patch_; ++x)
          f.pixels[(oy + y) * f.width + ox + x] = static_cast<std::uint8_t>(px[y * patch_ + x]);
    }
    out.push_back(std::move(f));
  }
  return out;
}

PatchSet split_into_patches(std::vector<Frame> frames, std::size_t patch) { return PatchSet(std::move(frames), patch); }

std::vector<std::vector<MotionMatch>> block_match_similarity(const PatchSet& patches, int radius) {
  if (radius < 0) throw Error(Errc::invalid_argument, "search radius must be non-negative");
  const auto L = static_cast<int>(patches.patch_size());
  const std::size_t w = patches.patch_size() * patches.patch_size();
  std::vector<std::vector<MotionMatch>> out(patches.patch_count());
  for (std::size_t p = 0; p < patches.patch_count(); ++p) {
    for (std::size_t n = 0; n + 1 < patches.frames(); ++n) {
      const auto cur = patches.patch(n, p);
      const auto nxt = patches.patch(n + 1, p);
      MotionMatch best;
      best.frame = n;
      best.patch = p;
      std::uint64_t best_sad = UINT64_MAX;
      auto rank_of = [](int dx, int dy) { return std::make_tuple(std::abs(dx) + std::abs(dy), dy, dx); };
      for (int dy = -radius; dy <= radius; ++dy) {
        for (int dx = -radius; dx <= radius; ++dx) {
          std::uint64_t sad = 0;
          for (int y = 0; y < L; ++y) {
            const int ty = std::clamp(y + dy, 0, L - 1);
            for (int x = 0; x < L; ++x) {
              const int tx = std::clamp(x + dx, 0, L - 1);
              const auto a = static_cast<std::int64_t>(cur[static_cast<std::size_t>(y * L + x)]);
              const auto b = static_cast<std::int64_t>(nxt[static_cast<std::size_t>(ty * L + tx)]);
              sad += static_cast<std::uint64_t>(std::llabs(a - b));
            }
          }
          if (sad < best_sad || (sad == best_sad && rank_of(dx, dy) < rank_of(best.dx, best.dy))) {
            best_sad = sad;
            best.dx = dx;
            best.dy = dy;
          }
        }
      }
      best.distance = static_cast<double>(best_sad) / static_cast<double>(w);
      best.target.resize(w);
      for (int y = 0; y < L; ++y)
        for (int x = 0; x < L; ++x)
          best.target[static_cast<std::size_t>(y * L + x)] =
              static_cast<std::uint32_t>(std::clamp(y + best.dy, 0, L - 1) * L + std::clamp(x + best.dx, 0, L - 1));
      out[p].push_back(std::move(best));
    }
  }
  return out;
}

std::vector<PositionMatch> window_matches(std::span<const MotionMatch> patch_matches, std::size_t first,
                                          std::size_t count) {
  std::vector<PositionMatch> out;
  for (const auto& m : patch_matches) {
    if (m.frame < first || m.frame + 1 >= first + count) continue;
    out.push_back({m.frame - first, m.frame + 1 - first, m.target, m.distance});
  }
  return out;
}

SimilarityModel window_model(std::span<const MotionMatch> patch_matches, std::size_t first, std::size_t count) {
  std::vector<SimilarPair> pairs;
  for (const auto& m : patch_matches) {
    if (m.frame < first || m.frame + 1 >= first + count) continue;
    pairs.push_back({m.frame - first, m.frame + 1 - first, m.distance});
  }
  return SimilarityModel(count, std::move(pairs));
}

std::string similarity_csv(const std::vector<std::vector<MotionMatch>>& matches) {
  std::string out = "patch,p_i,p_j,distance\n";
  for (const auto& per_patch : matches)
    for (const auto& m : per_patch) out += fmt::format("{},{},{},{:.6f}\n", m.patch, m.frame, m.frame + 1, m.distance);
  return out;
}

}  // namespace ncapprox
