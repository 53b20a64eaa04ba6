#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <random>
#include <set>

#include "ncapprox/config.hpp"
#include "ncapprox/error.hpp"
#include "ncapprox/stats.hpp"

using namespace ncapprox;

namespace {

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return Errc::invalid_argument;  // unreachable in the tests below
}

}  // namespace

TEST(Config, ParsesKeysCommentsAndTopology) {
  const Config c = Config::from_string(
      "# sweep\n"
      "r = 10   # bits\n"
      "receive=2/3\n"
      "\n"
      "windows = 3, 4 6\n"
      "lossless = Yes\n"
      "node a source 0 1\n"
      "link a s bsc:0.1\n");
  EXPECT_EQ(c.get_int("r", 0), 10);
  EXPECT_NEAR(c.get_fraction("receive", 0), 2.0 / 3.0, 1e-15);
  EXPECT_EQ(c.get_doubles("windows", {}), (std::vector<double>{3, 4, 6}));
  EXPECT_TRUE(c.get_bool("lossless", false));
  EXPECT_EQ(c.get("missing", "x"), "x");
  EXPECT_EQ(c.get_count("missing", 7u), 7u);
  EXPECT_EQ(c.topology_lines(), (std::vector<std::string>{"node a source 0 1", "link a s bsc:0.1"}));
  EXPECT_EQ(c.get_int("r", 0), Config::from_string("r = 0xA").get_int("r", 0));
}

TEST(Config, RejectsMalformedInput) {
  EXPECT_EQ(code_of([] { Config::from_string("r 10"); }), Errc::parse_error);
  EXPECT_EQ(code_of([] { Config::from_string("= 3"); }), Errc::parse_error);
  EXPECT_EQ(code_of([] { Config::from_string("r = 1\nr = 2"); }), Errc::parse_error);
  EXPECT_EQ(code_of([] { Config::from_string("r = ten").get_int("r", 0); }), Errc::parse_error);
  EXPECT_EQ(code_of([] { Config::from_string("r = 1.5").get_int("r", 0); }), Errc::parse_error);
  EXPECT_EQ(code_of([] { Config::from_string("n = -1").get_count("n", 0); }), Errc::parse_error);
  EXPECT_EQ(code_of([] { Config::from_string("b = maybe").get_bool("b", false); }), Errc::parse_error);
  EXPECT_EQ(code_of([] { Config::from_string("x = 1/0").get_fraction("x", 0); }), Errc::parse_error);
  EXPECT_EQ(code_of([] { Config::from_string("x = ,").get_doubles("x", {}); }), Errc::parse_error);
  EXPECT_EQ(code_of([] { Config::load("/nonexistent/x.conf"); }), Errc::io_error);
  EXPECT_EQ(code_of([] { Config::from_string("r = 1\nzz = 2").require_known({"r"}); }), Errc::parse_error);
  EXPECT_NO_THROW(Config::from_string("r = 1").require_known({"r", "z"}));
}

TEST(Config, FractionParsing) {
  EXPECT_DOUBLE_EQ(parse_fraction("1/4"), 0.25);
  EXPECT_DOUBLE_EQ(parse_fraction(" 3 / 4 "), 0.75);
  EXPECT_DOUBLE_EQ(parse_fraction("0.125"), 0.125);
  EXPECT_THROW(parse_fraction("1/"), Error);
}

TEST(Config, HashIsCanonical) {
  // Published FNV-1a 64 test vectors.
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ull);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cull);
  EXPECT_EQ(fnv1a64("foobar"), 0x85944171f73967e8ull);

  const Config a = Config::from_string("r = 8\nz = 2\n");
  const Config b = Config::from_string("# same settings\nz=2\n  r   =   8  \n");
  EXPECT_EQ(a.canonical(), "r = 8\nz = 2\n");
  EXPECT_EQ(a.hash(), b.hash());
  EXPECT_EQ(a.hash().size(), 16u);
  EXPECT_NE(a.hash(), Config::from_string("r = 8\nz = 3\n").hash());
  Config c = a;
  c.set("trials", "5");
  EXPECT_NE(c.hash(), a.hash());
}

TEST(Stats, DeriveRngIsStableAndSeparatesStreams) {
  auto a = derive_rng(1, 2, 3), b = derive_rng(1, 2, 3);
  EXPECT_EQ(a(), b());
  std::set<std::uint64_t> firsts;
  for (std::uint64_t s = 0; s < 4; ++s)
    for (std::uint64_t t = 0; t < 4; ++t)
      for (std::uint64_t k = 0; k < 4; ++k) firsts.insert(derive_rng(s, t, k)());
  EXPECT_EQ(firsts.size(), 64u);
  EXPECT_NE(derive_rng(1ull << 32, 0)(), derive_rng(0, 0)());
}

TEST(Stats, Summarize) {
  const std::vector<double> v{2, 4, 4, 4, 5, 5, 7, 9};
  const Summary s = summarize(v);
  EXPECT_DOUBLE_EQ(s.mean, 5.0);
  EXPECT_NEAR(s.stddev, std::sqrt(32.0 / 7.0), 1e-12);
  EXPECT_NEAR(s.ci95, 1.959963984540054 * std::sqrt(32.0 / 7.0) / std::sqrt(8.0), 1e-12);
  EXPECT_EQ(summarize(std::vector<double>{}).count, 0u);
  EXPECT_EQ(summarize(std::vector<double>{3}).ci95, 0.0);
}

TEST(Stats, SpearmanSmallCases) {
  // n = 4, one swapped pair: rho = 1 - 6 * 2 / (4 * 15) = 0.8. With two degrees
  // of freedom the t tail is 1 - t / sqrt(2 + t^2), which gives p = 0.2 here.
  const std::vector<double> x{1, 2, 3, 4}, y{10, 30, 20, 40};
  const Correlation c = spearman(x, y);
  EXPECT_NEAR(c.rho, 0.8, 1e-12);
  EXPECT_NEAR(c.p_value, 0.2, 1e-9);

  const std::vector<double> down{9, 7, 7, 1};
  EXPECT_LT(spearman(x, down).rho, -0.9);
  // Ties take the average rank: ranks of down are 4, 2.5, 2.5, 1.
  const std::vector<double> rx{1, 2, 3, 4}, ry{4, 2.5, 2.5, 1};
  const double mr = 2.5;
  double sxy = 0, sxx = 0, syy = 0;
  for (int i = 0; i < 4; ++i) {
    sxy += (rx[i] - mr) * (ry[i] - mr);
    sxx += (rx[i] - mr) * (rx[i] - mr);
    syy += (ry[i] - mr) * (ry[i] - mr);
  }
  EXPECT_NEAR(spearman(x, down).rho, sxy / std::sqrt(sxx * syy), 1e-12);
  EXPECT_THROW(spearman(std::vector<double>{1, 2}, std::vector<double>{1, 2}), Error);
  EXPECT_THROW(spearman(x, std::vector<double>{1, 2, 3}), Error);
}

TEST(Stats, SpearmanOfIndependentNoiseIsUsuallyInsignificant) {
  // Property: under independence p < 0.01 should occur in about 1% of samples.
  std::mt19937_64 rng(61);
  std::normal_distribution<double> g;
  int significant = 0;
  for (int trial = 0; trial < 400; ++trial) {
    std::vector<double> a(50), b(50);
    for (auto& v : a) v = g(rng);
    for (auto& v : b) v = g(rng);
    significant += spearman(a, b).p_value < 0.01;
  }
  EXPECT_LE(significant, 12);
}

TEST(Stats, FitLine) {
  const std::vector<double> x{0, 1, 2, 3}, y{1, 3, 5, 7};
  const LineFit f = fit_line(x, y);
  EXPECT_NEAR(f.slope, 2.0, 1e-12);
  EXPECT_NEAR(f.intercept, 1.0, 1e-12);
  EXPECT_THROW(fit_line(std::vector<double>{1, 1}, std::vector<double>{1, 2}), Error);
  EXPECT_THROW(fit_line(std::vector<double>{1}, std::vector<double>{1}), Error);
}
