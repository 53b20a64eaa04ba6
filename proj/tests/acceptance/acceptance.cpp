// Acceptance runner: `ncapprox_acceptance N` checks criterion N (1..12), or all
// of them without an argument. Prints one PASS/FAIL line per criterion.
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "ncapprox/analysis.hpp"
#include "ncapprox/channel.hpp"
#include "ncapprox/config.hpp"
#include "ncapprox/decoder.hpp"
#include "ncapprox/error.hpp"
#include "ncapprox/experiment.hpp"
#include "ncapprox/gf.hpp"
#include "ncapprox/matrix.hpp"
#include "ncapprox/rlnc.hpp"
#include "ncapprox/stats.hpp"
#include "oracles.hpp"

using namespace ncapprox;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = true;
  std::string detail;

  void fail(const std::string& why) {
    if (pass) detail.clear();
    pass = false;
    detail += (detail.empty() ? "" : "; ") + why;
  }
  void note(const std::string& what) {
    if (pass) detail += (detail.empty() ? "" : "; ") + what;
  }
};

std::string config_path(const std::string& name) {
#ifdef NCAPPROX_CONFIG_DIR
  return std::string(NCAPPROX_CONFIG_DIR) + "/" + name;
#else
  return "configs/" + name;
#endif
}

// 1: field axioms, exhaustive for k <= 4 and 1e5 sampled triples for k <= 8.
Outcome field_axioms() {
  Outcome out;
  const auto t0 = Clock::now();
  std::size_t checked = 0;
  auto check = [&](const FieldSpec& f, Symbol a, Symbol b, Symbol c) {
    ++checked;
    if (f.mul(a, f.mul(b, c)) != f.mul(f.mul(a, b), c) || f.add(a, f.add(b, c)) != f.add(f.add(a, b), c) ||
        f.mul(a, f.add(b, c)) != f.add(f.mul(a, b), f.mul(a, c)) || f.mul(a, b) != f.mul(b, a) ||
        f.mul(a, 1) != a || f.add(a, 0) != a || f.add(a, a) != 0)
      return false;
    if (a != 0 && f.mul(a, f.inv(a)) != 1) return false;
    if (f.mul(a, b) != oracle::mul(a, b, f.poly())) return false;
    return true;
  };
  for (unsigned k = 1; k <= 4; ++k) {
    const FieldSpec f(k);
    for (Symbol a = 0; a < f.order(); ++a)
      for (Symbol b = 0; b < f.order(); ++b)
        for (Symbol c = 0; c < f.order(); ++c)
          if (!check(f, a, b, c)) out.fail(fmt::format("GF(2^{}) violation at ({}, {}, {})", k, a, b, c));
  }
  std::mt19937_64 rng(1);
  for (unsigned k = 5; k <= 8; ++k) {
    const FieldSpec f(k);
    std::uniform_int_distribution<Symbol> d(0, static_cast<Symbol>(f.order() - 1));
    for (int i = 0; i < 100000; ++i) {
      const Symbol a = d(rng), b = d(rng), c = d(rng);
      if (!check(f, a, b, c)) out.fail(fmt::format("GF(2^{}) violation at ({}, {}, {})", k, a, b, c));
    }
  }
  const double secs = seconds_since(t0);
  if (secs >= 10.0) out.fail(fmt::format("took {:.2f} s", secs));
  out.note(fmt::format("{} triples in {:.2f} s", checked, secs));
  return out;
}

// 2: |a - b| <= a XOR b <= a + b for every pair of 9-bit values (covers k < 9 too).
Outcome xor_sandwich() {
  Outcome out;
  const FieldSpec f(9);
  std::size_t pairs = 0, violations = 0;
  for (Symbol a = 0; a < 512; ++a) {
    for (Symbol b = 0; b < 512; ++b) {
      ++pairs;
      const auto x = static_cast<std::int64_t>(f.add(a, b));
      const auto sa = static_cast<std::int64_t>(a), sb = static_cast<std::int64_t>(b);
      if (std::llabs(sa - sb) > x || x > sa + sb) ++violations;
    }
  }
  if (violations) out.fail(fmt::format("{} violations", violations));
  out.note(fmt::format("{} pairs, 0 violations", pairs));
  return out;
}

// 3: closed-form PMF and expectation vs pair counting, r <= 10.
Outcome closed_form_vs_oracle() {
  Outcome out;
  double worst = 0.0;
  std::size_t cases = 0;
  for (unsigned r = 1; r <= 10; ++r) {
    for (unsigned z = 0; z < r; ++z) {
      ++cases;
      const auto p = AnalysisParams::make(r, z);
      const auto closed = pmf_total_error(p);
      const auto conv = pmf_total_error_convolution(p);
      const double denom = static_cast<double>((2 * p.r_d + 1) * (2 * p.r_i + 1));
      for (std::int64_t e = -p.e_max - 1; e <= p.e_max + 1; ++e) {
        const double expect = static_cast<double>(oracle::pair_count(p.r_d, p.r_i, e)) / denom;
        worst = std::max({worst, std::fabs(closed.probability(e) - expect), std::fabs(conv.probability(e) - expect)});
      }
      const auto o = oracle::expected_abs_sum(p.r_d, p.r_i);
      const Rational exact(o.num, o.den);
      if (expected_abs_error(p) != exact || expected_abs_error_convolution(p) != exact)
        out.fail(fmt::format("E|e| mismatch at r={} z={}: {} vs {}", r, z, expected_abs_error(p).to_string(),
                             exact.to_string()));
    }
  }
  if (worst > 1e-12) out.fail(fmt::format("PMF deviation {:.3g}", worst));
  const std::vector<std::tuple<unsigned, unsigned, Rational>> fixtures{
      {2, 1, Rational(2, 3)}, {4, 2, Rational(38, 21)}, {4, 0, Rational(56, 15)}};
  for (const auto& [r, z, want] : fixtures) {
    const Rational got = expected_abs_error(AnalysisParams::make(r, z));
    if (got != want) out.fail(fmt::format("fixture r={} z={}: {} != {}", r, z, got.to_string(), want.to_string()));
  }
  out.note(fmt::format("{} (r, z) cases, max PMF deviation {:.3g}, fixtures 2/3 38/21 56/15 exact", cases, worst));
  return out;
}

// 4: argmin, symmetry and monotonicity of E|e_T| over z.
Outcome optimal_z_property() {
  Outcome out;
  for (unsigned r = 1; r <= 12; ++r) {
    std::vector<Rational> e;
    for (unsigned z = 0; z < r; ++z) e.push_back(expected_abs_error(AnalysisParams::make(r, z)));
    const Rational best = *std::min_element(e.begin(), e.end());
    std::vector<unsigned> argmin;
    for (unsigned z = 0; z < r; ++z)
      if (e[z] == best) argmin.push_back(z);
    std::vector<unsigned> want{(r - 1) / 2};
    if (r % 2 == 0) want.push_back(r / 2);
    if (argmin != want || optimal_z(r) != want) out.fail(fmt::format("r={}: argmin {}", r, fmt::join(argmin, ",")));
    for (unsigned z = 0; z < r; ++z)
      if (e[z] != e[r - 1 - z]) out.fail(fmt::format("r={}: E({}) != E({})", r, z, r - 1 - z));
    // Strictly increasing on the integers in (r/2, r-1].
    for (unsigned z = r / 2 + 1; z + 1 <= r - 1; ++z)
      if (!(e[z] < e[z + 1])) out.fail(fmt::format("r={}: E({}) >= E({})", r, z, z + 1));
  }
  out.note("argmin {floor((r-1)/2), ceil((r-1)/2)}, symmetry and monotone upper half for r <= 12");
  return out;
}

// 5: Pr(|s - s_R| >= |s - s_r|) > 1/2 for all 1 <= r < R <= 8.
Outcome coarser_sample_property() {
  Outcome out;
  const Rational half(1, 2);
  std::size_t agree = 0, pairs = 0;
  Rational lowest(1);
  for (unsigned r = 1; r <= 8; ++r) {
    for (unsigned R = r + 1; R <= 8; ++R) {
      const auto res = coarse_sample_enumeration(r, R);
      ++pairs;
      if (!(res.p_geq > half)) out.fail(fmt::format("r={} R={}: p={}", r, R, res.p_geq.to_string()));
      lowest = std::min(lowest, res.p_geq);
      agree += res.p_hat_formula == res.p_hat_enum;
    }
  }
  const auto fixture = coarse_sample_enumeration(1, 2);
  if (fixture.p_geq != Rational(14, 16)) out.fail(fmt::format("fixture r=1 R=2: {}", fixture.p_geq.to_string()));
  out.note(fmt::format("{} (r, R) pairs, min p = {:.4f}, fixture 14/16 exact; closed form {} vs conditional "
                       "enumeration {} at (1, 2), agreeing on {}/{} pairs (reported only)",
                       pairs, lowest.to_double(), fixture.p_hat_formula.to_string(),
                       fixture.p_hat_enum.to_string(), agree, pairs));
  return out;
}

GFMatrix column(const FieldSpec& f, std::initializer_list<Symbol> v) {
  GFMatrix m(f, v.size(), 1);
  std::size_t i = 0;
  for (Symbol s : v) m(i++, 0) = s;
  return m;
}

// Solves [C; D] x = [C x_true; 0] and compares the l1 error with the bound.
bool bound_holds(const GFMatrix& x, const GFMatrix& c, const GFMatrix& d, std::size_t& violations) {
  const GFMatrix stack = vstack(c, d);
  if (rank(stack) < stack.cols()) return false;
  const GFMatrix rhs = vstack(multiply(c, x), GFMatrix(x.field(), d.rows(), x.cols()));
  const GFMatrix x_hat = solve(stack, rhs);
  std::uint64_t l1 = 0;
  for (std::size_t i = 0; i < x.data().size(); ++i)
    l1 += static_cast<std::uint64_t>(std::llabs(static_cast<long long>(lift_symbol(x.data()[i], x.field())) -
                                                static_cast<long long>(lift_symbol(x_hat.data()[i], x.field()))));
  if (l1 > error_bound_l1(c, d, x)) ++violations;
  return true;
}

// 6: l1 bound, exhaustive N=3 K=2 over GF(8) and Monte Carlo over GF(32).
Outcome l1_bound() {
  Outcome out;
  std::mt19937_64 rng(6);
  std::size_t exhaustive = 0, mc = 0, violations = 0;
  {
    const FieldSpec f(3);
    const GFMatrix d = GFMatrix::from_rows(f, {{1, 1, 0}}, 3);
    for (Symbol a = 0; a < 8; ++a)
      for (Symbol b = 0; b < 8; ++b)
        for (Symbol c3 = 0; c3 < 8; ++c3)
          for (int k = 0; k < 8; ++k)
            exhaustive += bound_holds(column(f, {a, b, c3}), GFMatrix::random(f, 2, 3, rng), d, violations);
  }
  {
    const FieldSpec f(5);
    const std::vector<GFMatrix> ds{GFMatrix::from_rows(f, {{1, 1, 0}}, 3), GFMatrix::from_rows(f, {{1, 0, 1}}, 3),
                                   GFMatrix::from_rows(f, {{0, 1, 1}}, 3)};
    while (mc < 10000) {
      const GFMatrix x = GFMatrix::random(f, 3, 1, rng);
      mc += bound_holds(x, GFMatrix::random(f, 2, 3, rng), ds[mc % 3], violations);
    }
  }
  if (violations) out.fail(fmt::format("{} violations", violations));
  out.note(fmt::format("{} GF(8) instances over all 512 triples, {} GF(32) instances, 0 violations", exhaustive, mc));
  return out;
}

// 7: similarity sweep, D=[1,1,0] never worse than D=[1,0,1].
Outcome similarity_trend() {
  Outcome out;
  const auto t0 = Clock::now();
  RunOptions o;
  o.seed = 7;
  const Config c = Config::load(config_path("similarity_sweep.conf"));
  const CsvTable t = run_similarity_sweep(c, o);
  const double secs = seconds_since(t0);
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const double sigma = t.number(i, "sigma");
    const double near = t.number(i, "mean_l1_error_d110"), far = t.number(i, "mean_l1_error_d101");
    const double ci_near = t.number(i, "ci95_d110"), ci_far = t.number(i, "ci95_d101");
    if (t.number(i, "trials") < 10000) out.fail("fewer than 1e4 trials");
    if (near > far) out.fail(fmt::format("sigma3={}: {} > {}", sigma, near, far));
    if (sigma >= 1.0 && !(near + ci_near < far - ci_far))
      out.fail(fmt::format("sigma3={}: intervals overlap ({} +- {} vs {} +- {})", sigma, near, ci_near, far, ci_far));
  }
  if (secs >= 120.0) out.fail(fmt::format("took {:.1f} s", secs));
  out.note(fmt::format("{} sweep points, d110 <= d101 everywhere, separated for sigma3 >= 1, {:.1f} s",
                       t.rows.size(), secs));
  return out;
}

unsigned argmin_z(const CsvTable& t) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < t.rows.size(); ++i)
    if (t.number(i, "normalized_mse_empirical") < t.number(best, "normalized_mse_empirical")) best = i;
  return static_cast<unsigned>(t.number(best, "z"));
}

// 8: field-size sweep minimizers.
Outcome field_sweep_minimizer() {
  Outcome out;
  RunOptions o;
  o.seed = 8;
  const CsvTable signals = run_field_sweep(Config::load(config_path("field_sweep_signals.conf")), o);
  const CsvTable patches = run_field_sweep(Config::load(config_path("field_sweep_patches.conf")), o);
  const unsigned zs = argmin_z(signals), zp = argmin_z(patches);
  if (signals.number(0, "trials") < 1000 || patches.number(0, "trials") < 1000) out.fail("fewer than 1e3 trials");
  if (zs < 4 || zs > 6) out.fail(fmt::format("signals r=10 argmin z={} outside 4..6", zs));
  if (zp != 3 && zp != 4) out.fail(fmt::format("patches r=8 argmin z={} outside {{3, 4}}", zp));
  out.note(fmt::format("signals r=10 argmin z={}, patches r=8 argmin z={}", zs, zp));
  return out;
}

// 9: lossless singular-failure rate decreasing in window size.
Outcome window_singular_trend() {
  Outcome out;
  RunOptions o;
  o.seed = 9;
  Config c = Config::load(config_path("window_sweep.conf"));
  c.set("lossless", "true");
  const auto points = window_sweep(c, o);
  std::vector<double> x, y;
  std::vector<std::string> rates;
  for (const auto& p : points) {
    if (p.trial_singular_rate.size() < 1000) out.fail(fmt::format("window {}: fewer than 1e3 trials", p.window));
    for (double v : p.trial_singular_rate) {
      x.push_back(static_cast<double>(p.window));
      y.push_back(v);
    }
    rates.push_back(fmt::format("{}:{:.4f}", p.window, summarize(p.trial_singular_rate).mean));
  }
  const Correlation rc = spearman(x, y);
  if (!(rc.rho < 0.0 && rc.p_value < 0.01))
    out.fail(fmt::format("spearman rho={:.4f} p={:.3g}; singular rate by window {}", rc.rho, rc.p_value,
                         fmt::join(rates, " ")));
  out.note(fmt::format("spearman rho={:.4f} p={:.3g}", rc.rho, rc.p_value));
  return out;
}

// 10: GEC calibration and loss-sweep monotonicity.
Outcome gec_and_loss() {
  Outcome out;
  std::mt19937_64 rng(10);
  const ChannelModel m = ChannelModel::gec_from_rate(0.1, 9.0);
  const auto mask = gec_mask(m, 1000000, rng);
  std::size_t ones = 0, runs = 0;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    ones += mask[i];
    runs += mask[i] && (i == 0 || !mask[i - 1]);
  }
  const double burst = static_cast<double>(ones) / static_cast<double>(runs);
  const double rate = static_cast<double>(ones) / static_cast<double>(mask.size());
  if (std::fabs(burst - 9.0) > 0.45) out.fail(fmt::format("mean burst {:.3f}", burst));
  if (std::fabs(rate - m.stationary_loss()) > 0.002) out.fail(fmt::format("loss rate {:.4f}", rate));

  RunOptions o;
  o.seed = 10;
  const CsvTable t = run_loss_sweep(Config::load(config_path("loss_sweep.conf")), o);
  std::map<std::string, std::vector<std::pair<double, double>>> curves;
  for (std::size_t i = 0; i < t.rows.size(); ++i)
    curves[t.rows[i][t.column("channel_kind")]].emplace_back(t.number(i, "loss_rate"), t.number(i, "mse"));
  for (auto& [kind, pts] : curves) {
    std::sort(pts.begin(), pts.end());
    for (std::size_t i = 1; i < pts.size(); ++i)
      if (pts[i].second < pts[i - 1].second)
        out.fail(fmt::format("{}: mse {} at loss {} below {} at loss {}", kind, pts[i].second, pts[i].first,
                             pts[i - 1].second, pts[i - 1].first));
  }
  out.note(fmt::format("burst {:.3f}, loss {:.4f} (target {:.4f}), loss sweep non-decreasing for {} channels", burst,
                       rate, m.stationary_loss(), curves.size()));
  return out;
}

// Seconds for one exhaustive MLE decode of `samples` positions, best of `reps`.
double mle_seconds(unsigned bits, std::size_t n, std::size_t k, std::size_t samples, int reps, std::mt19937_64& rng) {
  const FieldSpec f(bits);
  const GFMatrix x = GFMatrix::random(f, n, samples, rng);
  const DecoderState state = receive_innovative(x, k, rng);
  std::vector<double> gaps(n - 1, 1.0);
  const SimilarityModel model = SimilarityModel::chain(n, gaps);
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = Clock::now();
    const DecodeResult res = mle_decode(state, model, std::uint64_t{1} << 30);
    best = std::min(best, seconds_since(t0));
    if (res.x_hat.empty()) return -1.0;
  }
  return best;
}

// 11: approximate decoder feasibility, MLE score dominance, MLE cost vs q.
Outcome mle_comparison_check() {
  Outcome out;
  RunOptions o;
  o.seed = 11;
  const auto points = mle_comparison(Config::load(config_path("mle_comparison.conf")), o);
  std::size_t instances = 0, skipped = 0;
  for (const auto& p : points) {
    if (p.skipped) {
      ++skipped;
      continue;
    }
    instances += p.nmse_approx.size();
    if (p.infeasible) out.fail(fmt::format("z={}: {} infeasible approximate outputs", p.z, p.infeasible));
    if (p.score_violations) out.fail(fmt::format("z={}: {} MLE score violations", p.z, p.score_violations));
  }
  // Cost at fixed N - K = 2: regress log t on log q^(N-K).
  std::mt19937_64 rng(11);
  std::vector<double> lx, ly;
  std::vector<std::string> times;
  for (unsigned bits : {2u, 3u, 4u, 5u}) {
    const double t = mle_seconds(bits, 4, 2, 1024, 5, rng);
    if (t <= 0.0) {
      out.fail(fmt::format("MLE failed at q={}", 1u << bits));
      continue;
    }
    lx.push_back(2.0 * bits * std::log(2.0));
    ly.push_back(std::log(t));
    times.push_back(fmt::format("q={}:{:.3g}s", 1u << bits, t));
  }
  double slope = 0.0;
  if (lx.size() >= 2) {
    slope = fit_line(lx, ly).slope;
    if (std::fabs(slope - 1.0) > 0.2)
      out.fail(fmt::format("timing slope {:.3f} outside 1.0 +- 0.2 ({})", slope, fmt::join(times, " ")));
  }
  out.note(fmt::format("{} instances over {} field sizes ({} skipped), 0 infeasible, 0 score violations, "
                       "timing slope {:.3f} ({})",
                       instances, points.size() - skipped, skipped, slope, fmt::join(times, " ")));
  return out;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// 12: CLI reruns with the same seed give byte-identical CSV.
Outcome cli_determinism() {
  Outcome out;
#ifndef NCAPPROX_CLI_PATH
  out.fail("built without the ncapprox CLI");
  return out;
#else
  const std::map<std::string, std::string> sweeps{
      {"field-sweep", "field_sweep_signals.conf"}, {"similarity-sweep", "similarity_sweep.conf"},
      {"window-sweep", "window_sweep.conf"},       {"loss-sweep", "loss_sweep.conf"},
      {"mle-comparison", "mle_comparison.conf"},   {"analysis-tables", "analysis_tables.conf"}};
  const auto dir = std::filesystem::temp_directory_path() / fmt::format("ncapprox_acceptance_{}", ::getpid());
  std::filesystem::create_directories(dir);
  std::size_t identical = 0;
  auto run = [&](const std::string& cmd, const std::string& conf, const std::filesystem::path& dest,
                 const std::string& extra) {
    const std::string line = fmt::format("\"{}\" {} --config \"{}\" --seed 12 --out \"{}\"{}", NCAPPROX_CLI_PATH, cmd,
                                         config_path(conf), dest.string(), extra);
    return std::system(line.c_str()) == 0;
  };
  for (const auto& [cmd, conf] : sweeps) {
    const std::string trials = cmd == "analysis-tables" ? "" : " --trials 40";
    for (const std::string& extra : {trials, trials + " --threads 4"}) {
      const auto a = dir / (cmd + "_a.csv"), b = dir / (cmd + "_b.csv");
      if (!run(cmd, conf, a, trials) || !run(cmd, conf, b, extra)) {
        out.fail(fmt::format("{} exited non-zero", cmd));
        continue;
      }
      const std::string first = slurp(a);
      if (first.empty() || first != slurp(b)) out.fail(fmt::format("{} output differs ({})", cmd, extra));
      else ++identical;
    }
  }
  {  // patch sources, fewer trials to keep the check quick
    const auto a = dir / "patches_a.csv", b = dir / "patches_b.csv";
    if (run("field-sweep", "field_sweep_patches.conf", a, " --trials 20") &&
        run("field-sweep", "field_sweep_patches.conf", b, " --trials 20") && slurp(a) == slurp(b) && !slurp(a).empty())
      ++identical;
    else
      out.fail("field-sweep patches output differs");
  }
  std::filesystem::remove_all(dir);
  out.note(fmt::format("{} rerun pairs byte-identical", identical));
  return out;
#endif
}

const std::vector<std::pair<std::string, std::function<Outcome()>>>& criteria() {
  static const std::vector<std::pair<std::string, std::function<Outcome()>>> list{
      {"field axioms", field_axioms},
      {"XOR sandwich", xor_sandwich},
      {"closed-form error distribution", closed_form_vs_oracle},
      {"optimal discarded bits", optimal_z_property},
      {"coarser sample comparison", coarser_sample_property},
      {"l1 error bound", l1_bound},
      {"similarity ranking trend", similarity_trend},
      {"field-size sweep minimizer", field_sweep_minimizer},
      {"window-size singular trend", window_singular_trend},
      {"burst channel calibration and loss sweep", gec_and_loss},
      {"MLE comparison", mle_comparison_check},
      {"CLI determinism", cli_determinism},
  };
  return list;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::size_t> which;
  if (argc > 1) {
    for (int i = 1; i < argc; ++i) {
      const long v = std::strtol(argv[i], nullptr, 10);
      if (v < 1 || v > static_cast<long>(criteria().size())) {
        fmt::print(stderr, "usage: {} [criterion 1..{}]...\n", argv[0], criteria().size());
        return 2;
      }
      which.push_back(static_cast<std::size_t>(v));
    }
  } else {
    for (std::size_t i = 1; i <= criteria().size(); ++i) which.push_back(i);
  }
  int failures = 0;
  for (std::size_t n : which) {
    const auto& [name, fn] = criteria()[n - 1];
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o.fail(fmt::format("exception: {}", e.what()));
    }
    fmt::print("criterion {}: {} {}: {}\n", n, o.pass ? "PASS" : "FAIL", name, o.detail);
    std::fflush(stdout);
    failures += !o.pass;
  }
  return failures ? 1 : 0;
}
