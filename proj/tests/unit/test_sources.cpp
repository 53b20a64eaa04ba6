#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "ncapprox/error.hpp"
#include "ncapprox/sources.hpp"

using namespace ncapprox;

TEST(SourceModels, GaussianCorrelatedSpread) {
  // s2 - s1 = round(N(0, 1)); rounding adds about 1/12 to the variance.
  std::mt19937_64 rng(51);
  const std::vector<double> sigmas{1.0};
  const auto w = gen_gaussian_correlated(2, 512, sigmas, 10, rng, 100000);
  double sum = 0, sq = 0;
  for (std::size_t t = 0; t < w.samples; ++t) {
    ASSERT_EQ(w.at(0, t), 512u);
    const double d = static_cast<double>(w.at(1, t)) - 512.0;
    sum += d;
    sq += d * d;
  }
  const double n = static_cast<double>(w.samples);
  const double sd = std::sqrt(sq / n - (sum / n) * (sum / n));
  EXPECT_NEAR(sd, 1.0, 0.05);
}

TEST(SourceModels, GaussianCorrelatedChecks) {
  std::mt19937_64 rng(52);
  EXPECT_THROW(gen_gaussian_correlated(3, 10, std::vector<double>{1.0}, 8, rng), Error);
  EXPECT_THROW(gen_gaussian_correlated(2, 10, std::vector<double>{-1.0}, 8, rng), Error);
  EXPECT_THROW(gen_gaussian_correlated(2, 256, std::vector<double>{1.0}, 8, rng), Error);
  const auto w = gen_gaussian_correlated(2, 0, std::vector<double>{50.0}, 4, rng, 2000);
  for (auto v : w.data) EXPECT_LE(v, 15u);
}

TEST(SourceModels, ClipSample) {
  EXPECT_EQ(clip_sample(-3.2, 10), 0u);
  EXPECT_EQ(clip_sample(1023.4, 10), 1023u);
  EXPECT_EQ(clip_sample(5000.0, 10), 1023u);
  EXPECT_EQ(clip_sample(7.5, 10), 8u);
  EXPECT_EQ(clip_sample(std::nan(""), 10), 0u);
}

TEST(SourceModels, ShiftedScaledDistanceGrowsWithIndexGap) {
  // Property: mean L1 distance from source 0 is monotone in the index gap
  // when shift and scale drift linearly with the index.
  std::mt19937_64 rng(53);
  const auto trace = synthetic_trace(600, 100.0, 900.0, rng);
  for (double v : trace) ASSERT_TRUE(v >= 100.0 && v <= 900.0);
  std::vector<double> shifts(30), scales(30);
  for (std::size_t i = 0; i < 30; ++i) {
    shifts[i] = 0.1 * static_cast<double>(i);
    scales[i] = 1.0 - 0.004 * static_cast<double>(i);
  }
  const auto w = gen_shifted_scaled(trace, shifts, scales, 0.0, 10, 400, 100, rng);
  double prev = -1.0;
  for (std::size_t i = 1; i < 30; ++i) {
    double l1 = 0;
    for (std::size_t t = 0; t < w.samples; ++t) l1 += std::abs(static_cast<double>(w.at(i, t)) - w.at(0, t));
    EXPECT_GT(l1, prev) << i;
    prev = l1;
  }
  for (auto v : w.data) EXPECT_LE(v, 1023u);
  EXPECT_THROW(gen_shifted_scaled(trace, shifts, scales, 0.0, 10, 400, 0, rng), Error);  // reads before index 0
}

TEST(SourceModels, ShiftedScaledInterpolates) {
  std::mt19937_64 rng(54);
  const std::vector<double> base{0, 10, 20, 30};
  const auto w = gen_shifted_scaled(base, std::vector<double>{0.5}, std::vector<double>{2.0}, 0.0, 8, 2, 1, rng);
  EXPECT_EQ(w.at(0, 0), 10u);  // 2 * (0 + 10) / 2
  EXPECT_EQ(w.at(0, 1), 30u);
}

TEST(SourceModels, QcifSplitsInto99Patches) {
  std::mt19937_64 rng(55);
  const auto frames = synthetic_sequence(2, 176, 144, 1, 0, 0.0, rng);
  const PatchSet ps = split_into_patches(frames, 16);
  EXPECT_EQ(ps.patches_x(), 11u);
  EXPECT_EQ(ps.patches_y(), 9u);
  EXPECT_EQ(ps.patch_count(), 99u);
  EXPECT_EQ(ps.assemble(), frames);
  const auto unit = ps.unit(5, 0, 2);
  EXPECT_EQ(unit.samples, 256u);
  EXPECT_EQ(unit.at(1, 17), frames[1].at(5 * 16 + 1, 1));
  EXPECT_THROW(split_into_patches(frames, 7), Error);
  EXPECT_THROW(ps.unit(0, 1, 2), Error);
}

TEST(SourceModels, BlockMatchingFindsKnownShift) {
  // Frame 1 is frame 0 moved right by 2 and up by 1: pixel (x, y) of frame 0
  // reappears at (x + 2, y - 1).
  std::mt19937_64 rng(56);
  std::uniform_int_distribution<int> px(0, 255);
  Frame f0{16, 16, std::vector<std::uint8_t>(256)};
  for (auto& p : f0.pixels) p = static_cast<std::uint8_t>(px(rng));
  Frame f1 = f0;
  for (std::size_t y = 0; y < 16; ++y)
    for (std::size_t x = 0; x < 16; ++x)
      if (x >= 2 && y + 1 < 16) f1.pixels[y * 16 + x] = f0.at(x - 2, y + 1);
  const auto matches = block_match_similarity(PatchSet({f0, f1}, 16), 3);
  ASSERT_EQ(matches.size(), 1u);
  ASSERT_EQ(matches[0].size(), 1u);
  EXPECT_EQ(matches[0][0].dx, 2);
  EXPECT_EQ(matches[0][0].dy, -1);
  EXPECT_EQ(matches[0][0].target[5 * 16 + 4], 4u * 16 + 6);

  const auto still = block_match_similarity(PatchSet({f0, f0}, 16), 2);
  EXPECT_EQ(still[0][0].dx, 0);
  EXPECT_EQ(still[0][0].distance, 0.0);
  EXPECT_THROW(block_match_similarity(PatchSet({f0}, 16), -1), Error);
}

TEST(SourceModels, WindowModelReindexesFrames) {
  std::mt19937_64 rng(57);
  const auto frames = synthetic_sequence(5, 16, 16, 0, 0, 1.0, rng);
  const auto matches = block_match_similarity(PatchSet(frames, 8), 0);
  const auto pm = window_matches(matches[0], 1, 3);
  ASSERT_EQ(pm.size(), 2u);
  EXPECT_EQ(pm[0].a, 0u);
  EXPECT_EQ(pm[1].b, 2u);
  const auto model = window_model(matches[0], 1, 3);
  EXPECT_EQ(model.sources(), 3u);
  EXPECT_EQ(model.pairs().size(), 2u);
  EXPECT_EQ(similarity_csv(matches).rfind("patch,p_i,p_j,distance\n", 0), 0u);
}

TEST(SourceModels, PgmRoundTrip) {
  std::mt19937_64 rng(58);
  const auto frames = synthetic_sequence(1, 24, 8, 0, 0, 2.0, rng);
  std::stringstream s;
  write_pgm(s, frames[0]);
  EXPECT_EQ(read_pgm(s), frames[0]);
  std::istringstream commented("P5\n# made by hand\n2 1\n255\n\x01\x02");
  const Frame f = read_pgm(commented);
  EXPECT_EQ(f.pixels, (std::vector<std::uint8_t>{1, 2}));
  std::istringstream bad("P2\n1 1\n255\n0");
  EXPECT_THROW(read_pgm(bad), Error);
  std::istringstream truncated("P5\n4 4\n255\n\x01");
  EXPECT_THROW(read_pgm(truncated), Error);
  EXPECT_THROW(read_pgm(std::string("/nonexistent/frame.pgm")), Error);
}

TEST(SourceModels, EmbedWindowChecksWidth) {
  const SignalWindow w{10, 1, 2, {1023, 4}};
  const FieldSpec f(10, 2);
  const GFMatrix m = embed_window(w, f);
  EXPECT_EQ(m(0, 0), 255u);
  EXPECT_EQ(m(0, 1), 1u);
  EXPECT_THROW(embed_window(w, FieldSpec(8)), Error);
}
