#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "ncapprox/decoder.hpp"
#include "ncapprox/gf.hpp"
#include "ncapprox/matrix.hpp"

namespace ncapprox {

/// N sources of w samples each, every value in [0, 2^r).
struct SignalWindow {
  unsigned r = 8;
  std::size_t sources = 0;
  std::size_t samples = 0;
  std::vector<Sample> data;  // row-major, one row per source

  Sample at(std::size_t n, std::size_t t) const { return data.at(n * samples + t); }
  std::span<const Sample> row(std::size_t n) const { return {data.data() + n * samples, samples}; }
};

/// Rounds and clips to [0, 2^r - 1].
Sample clip_sample(double v, unsigned r) noexcept;

/// embed() applied to every sample; rows are sources.
GFMatrix embed_window(const SignalWindow& window, const FieldSpec& field);

/// s_1 = base, s_i = clip(round(base + N(0, sigma_{i-1}))) for each of `samples` positions.
SignalWindow gen_gaussian_correlated(std::size_t n, Sample base, std::span<const double> sigmas, unsigned r,
                                     std::mt19937_64& rng, std::size_t samples = 1);

/// Smooth wavelet-like trace with values in [lo, hi], suitable as the common
/// signal behind shifted/scaled sources.
std::vector<double> synthetic_trace(std::size_t length, double lo, double hi, std::mt19937_64& rng);

/// Source i at sample t is clip(scales[i] * base(offset + t - shifts[i]) + N(0, noise)).
/// Fractional shifts interpolate linearly; base must cover every index used.
SignalWindow gen_shifted_scaled(std::span<const double> base, std::span<const double> shifts,
                                std::span<const double> scales, double noise, unsigned r, std::size_t samples,
                                std::size_t offset, std::mt19937_64& rng);

/// 8-bit grayscale raster.
struct Frame {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> pixels;  // row-major

  std::uint8_t at(std::size_t x, std::size_t y) const { return pixels.at(y * width + x); }
  friend bool operator==(const Frame&, const Frame&) = default;
};

/// Binary PGM (P5) with maxval <= 255.
Frame read_pgm(std::istream& in);
Frame read_pgm(const std::string& path);
void write_pgm(std::ostream& out, const Frame& frame);
void write_pgm(const std::string& path, const Frame& frame);

/// Frames cut from a smooth textured canvas that drifts by (dx, dy) pixels per
/// frame, with additive Gaussian pixel noise.
std::vector<Frame> synthetic_sequence(std::size_t count, std::size_t width, std::size_t height, int dx, int dy,
                                      double noise, std::mt19937_64& rng);

/// Row-major grid of L x L patches over a list of equally sized frames.
class PatchSet {
 public:
  PatchSet(std::vector<Frame> frames, std::size_t patch);

  std::size_t frames() const noexcept { return frames_.size(); }
  std::size_t patch_size() const noexcept { return patch_; }
  std::size_t patches_x() const noexcept { return frames_.front().width / patch_; }
  std::size_t patches_y() const noexcept { return frames_.front().height / patch_; }
  std::size_t patch_count() const noexcept { return patches_x() * patches_y(); }
  /// L*L pixels of patch p in frame n, row-major inside the patch.
  std::vector<Sample> patch(std::size_t frame, std::size_t p) const;
  /// Frames [first, first + count) of patch p as a SignalWindow with r = 8.
  SignalWindow unit(std::size_t p, std::size_t first, std::size_t count) const;
  const std::vector<Frame>& raw_frames() const noexcept { return frames_; }

  /// Puts patch pixels back into frames; inverse of splitting.
  std::vector<Frame> assemble() const;

 private:
  std::vector<Frame> frames_;
  std::size_t patch_;
};

/// Errc::dimension_mismatch unless every frame dimension is divisible by L.
PatchSet split_into_patches(std::vector<Frame> frames, std::size_t patch);

/// Best in-patch displacement of patch p between frame and frame + 1.
struct MotionMatch {
  std::size_t frame = 0;
  std::size_t patch = 0;
  int dx = 0;
  int dy = 0;
  /// Mean absolute pixel difference at the chosen displacement.
  double distance = 0.0;
  /// Pixel t of `frame` pairs with pixel target[t] of `frame + 1`.
  std::vector<std::uint32_t> target;
};

/// Exhaustive SAD search over |dx|, |dy| <= radius. Displaced coordinates are
/// clamped to the patch so that every pair stays inside one decoding unit.
/// Ties prefer the smaller |dx| + |dy|, then smaller dy, then smaller dx.
/// Result is indexed [patch][frame] for frames 0..F-2.
std::vector<std::vector<MotionMatch>> block_match_similarity(const PatchSet& patches, int radius);

/// Matches for frames [first, first + count) of one patch, re-indexed so that
/// frame `first` is source 0.
std::vector<PositionMatch> window_matches(std::span<const MotionMatch> patch_matches, std::size_t first,
                                          std::size_t count);

/// Frame-level pairs (n, n+1) of a window weighted by their match distances.
SimilarityModel window_model(std::span<const MotionMatch> patch_matches, std::size_t first, std::size_t count);

/// `patch,p_i,p_j,distance` lines with header.
std::string similarity_csv(const std::vector<std::vector<MotionMatch>>& matches);

}  // namespace ncapprox
