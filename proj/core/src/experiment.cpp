#include "ncapprox/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <fmt/format.h>

#include "ncapprox/analysis.hpp"
#include "ncapprox/channel.hpp"
#include "ncapprox/sources.hpp"
#include "ncapprox/stats.hpp"

namespace ncapprox {

std::string CsvTable::to_string() const {
  std::string out;
  auto join = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  join(header);
  for (const auto& r : rows) join(r);
  return out;
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw Error(Errc::invalid_argument, fmt::format("no column '{}'", name));
}

double CsvTable::number(std::size_t row, const std::string& name) const {
  return std::stod(rows.at(row).at(column(name)));
}

DecoderState receive_innovative(const GFMatrix& sources, std::size_t k, std::mt19937_64& rng,
                                std::uint64_t window_id, std::uint64_t unit_id) {
  if (k > sources.rows()) throw Error(Errc::invalid_argument, fmt::format("{} innovative rows from {} sources", k, sources.rows()));
  DecoderState state(sources.field(), sources.rows(), sources.cols(), window_id, unit_id);
  while (state.rank() < k)
    state.accumulate(encode_packet(sources, draw_coeffs(rng, sources.rows(), sources.field()), window_id, unit_id));
  return state;
}

DecoderState receive_packets(const GFMatrix& sources, std::size_t count, std::mt19937_64& rng,
                             std::uint64_t window_id, std::uint64_t unit_id) {
  DecoderState state(sources.field(), sources.rows(), sources.cols(), window_id, unit_id);
  for (std::size_t i = 0; i < count; ++i)
    state.accumulate(encode_packet(sources, draw_coeffs(rng, sources.rows(), sources.field()), window_id, unit_id));
  return state;
}

double squared_error(const SignalWindow& truth, const DecodeResult& result, const FieldSpec& field) {
  const Sample fill = fallback_value(field);
  double total = 0.0;
  for (std::size_t i = 0; i < truth.data.size(); ++i) {
    const Sample est = result.s_hat.empty() ? fill : result.s_hat.at(i);
    const double diff = static_cast<double>(truth.data[i]) - static_cast<double>(est);
    total += diff * diff;
  }
  return total;
}

namespace {

std::string num(double v) { return fmt::format("{:.10g}", v); }

double full_scale_sq(unsigned r) {
  const double top = static_cast<double>((std::uint64_t{1} << r) - 1);
  return top * top;
}

std::size_t trial_count(const Config& config, const RunOptions& options, std::size_t fallback) {
  const std::size_t trials = options.trials ? *options.trials : config.get_count("trials", fallback);
  if (trials == 0) throw Error(Errc::invalid_argument, "trials must be positive");
  return trials;
}

unsigned get_r(const Config& config, unsigned fallback) {
  const auto r = config.get_count("r", fallback);
  if (r < 1 || r > kMaxFieldBits) throw Error(Errc::invalid_argument, fmt::format("r={} outside 1..{}", r, kMaxFieldBits));
  return static_cast<unsigned>(r);
}

// Runs body(trial) for every trial; results must be written to per-trial slots.
template <typename Body>
void for_trials(std::size_t trials, unsigned threads, Body&& body) {
  if (threads <= 1 || trials <= 1) {
    for (std::size_t t = 0; t < trials; ++t) body(t);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  const unsigned workers = std::min<unsigned>(threads, static_cast<unsigned>(trials));
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t t = w; t < trials; t += workers) {
        try {
          body(t);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

// Pixel sources are 8-bit.
unsigned patch_r(const Config& config) {
  const unsigned r = get_r(config, 8);
  if (r != 8) throw Error(Errc::invalid_argument, fmt::format("patch sources are 8-bit, r={} given", r));
  return r;
}

struct PatchParams {
  std::size_t width = 32;
  std::size_t height = 32;
  std::size_t patch = 8;
  int radius = 0;
  int motion_x = 0;
  int motion_y = 0;
  double pixel_noise = 0.3;
};

const std::set<std::string> kPatchKeys = {"width", "height", "patch", "radius", "motion_x", "motion_y", "pixel_noise"};

PatchParams patch_params(const Config& c) {
  PatchParams p;
  p.width = c.get_count("width", p.width);
  p.height = c.get_count("height", p.height);
  p.patch = c.get_count("patch", p.patch);
  p.radius = static_cast<int>(c.get_int("radius", p.radius));
  p.motion_x = static_cast<int>(c.get_int("motion_x", p.motion_x));
  p.motion_y = static_cast<int>(c.get_int("motion_y", p.motion_y));
  p.pixel_noise = c.get_double("pixel_noise", p.pixel_noise);
  if (p.patch == 0 || p.width % p.patch || p.height % p.patch)
    throw Error(Errc::invalid_argument, fmt::format("{}x{} frames do not divide into {}-pixel patches", p.width, p.height, p.patch));
  if (p.radius < 0) throw Error(Errc::invalid_argument, "radius must be non-negative");
  return p;
}

struct PatchScene {
  PatchSet patches;
  std::vector<std::vector<MotionMatch>> matches;
};

PatchScene make_scene(const PatchParams& p, std::size_t frames, std::mt19937_64& rng) {
  PatchSet set = split_into_patches(
      synthetic_sequence(frames, p.width, p.height, p.motion_x, p.motion_y, p.pixel_noise, rng), p.patch);
  auto matches = block_match_similarity(set, p.radius);
  return {std::move(set), std::move(matches)};
}

std::set<std::string> with(std::set<std::string> base, const std::set<std::string>& extra) {
  base.insert(extra.begin(), extra.end());
  return base;
}

std::size_t received_rows(double fraction, std::size_t n) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw Error(Errc::invalid_argument, fmt::format("receive fraction {} outside (0, 1]", fraction));
  const auto k = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-9));
  return std::clamp<std::size_t>(k, 1, n);
}

// Sensor array model: pairs ranked by index gap, the spacing proxy for distance.
SimilarityModel sensor_model(std::size_t n) {
  std::vector<SimilarPair> pairs;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) pairs.push_back({i, j, static_cast<double>(j - i)});
  return SimilarityModel(n, std::move(pairs));
}

}  // namespace

std::vector<FieldSweepPoint> field_sweep(const Config& config, const RunOptions& options) {
  const std::string source = config.get("source", "signals");
  const bool patches = source == "patches";
  if (!patches && source != "signals")
    throw Error(Errc::invalid_argument, fmt::format("source must be 'signals' or 'patches', got '{}'", source));
  config.require_known(with({"source", "r", "receive", "sources", "samples", "trials", "trace_length", "shift_step",
                             "scale_step", "noise", "max_retries", "window"},
                            kPatchKeys));
  const unsigned r = patches ? patch_r(config) : get_r(config, 10);
  const std::size_t trials = trial_count(config, options, 1000);
  const double receive = config.get_fraction("receive", 2.0 / 3.0);
  DecodePolicy policy;
  policy.max_retries = config.get_count("max_retries", 10);
  policy.fallback_fill = true;

  const std::size_t n = patches ? config.get_count("window", 3) : config.get_count("sources", 6);
  const std::size_t w = config.get_count("samples", 32);
  const std::size_t k = received_rows(receive, n);
  const std::size_t trace_length = config.get_count("trace_length", 256);
  const double shift_step = config.get_double("shift_step", 0.001);
  const double scale_step = config.get_double("scale_step", 0.00005);
  const double noise = config.get_double("noise", 0.03);
  const PatchParams pp = patch_params(config);
  if (n < 2) throw Error(Errc::invalid_argument, "field sweep needs at least two sources");
  if (!patches && trace_length < w + static_cast<std::size_t>(std::ceil(shift_step * static_cast<double>(n))) + 4)
    throw Error(Errc::invalid_argument, "trace_length too short for the window and shifts");
  const SimilarityModel model = sensor_model(n);

  std::vector<FieldSweepPoint> points(r);
  std::vector<std::vector<double>> failures(r, std::vector<double>(trials, 0.0));
  for (unsigned z = 0; z < r; ++z) {
    points[z].z = z;
    points[z].trial_nmse.assign(trials, 0.0);
    points[z].analytic = expected_abs_error(AnalysisParams::make(r, z));
  }

  for_trials(trials, options.threads, [&](std::size_t trial) {
    auto src_rng = derive_rng(options.seed, trial, 0);
    std::vector<SignalWindow> units;
    std::vector<std::vector<PositionMatch>> unit_matches;
    if (patches) {
      const PatchScene scene = make_scene(pp, n, src_rng);
      for (std::size_t p = 0; p < scene.patches.patch_count(); ++p) {
        units.push_back(scene.patches.unit(p, 0, n));
        unit_matches.push_back(window_matches(scene.matches[p], 0, n));
      }
    } else {
      const auto trace = synthetic_trace(trace_length, 0.0, static_cast<double>((1u << r) - 1), src_rng);
      std::vector<double> shifts(n), scales(n);
      for (std::size_t i = 0; i < n; ++i) {
        shifts[i] = shift_step * static_cast<double>(i);
        scales[i] = 1.0 - scale_step * static_cast<double>(i);
      }
      const std::size_t lead = static_cast<std::size_t>(std::ceil(shifts.back())) + 1;
      std::uniform_int_distribution<std::size_t> start(lead, trace_length - w - 1);
      units.push_back(gen_shifted_scaled(trace, shifts, scales, noise, r, w, start(src_rng), src_rng));
    }
    for (unsigned z = 0; z < r; ++z) {
      const FieldSpec field(r, z);
      auto coding_rng = derive_rng(options.seed, trial, 100 + z);
      double err = 0.0;
      std::size_t samples = 0;
      std::size_t failed = 0;
      for (std::size_t u = 0; u < units.size(); ++u) {
        const GFMatrix x = embed_window(units[u], field);
        const DecoderState state = receive_innovative(x, k, coding_rng, 0, u);
        const DecodeResult res = patches ? decode_matched(state, unit_matches[u], policy) : decode(state, model, policy);
        if (res.mode == DecodeMode::failed) ++failed;
        err += squared_error(units[u], res, field);
        samples += units[u].data.size();
      }
      points[z].trial_nmse[trial] = err / static_cast<double>(samples) / full_scale_sq(r);
      failures[z][trial] = static_cast<double>(failed) / static_cast<double>(units.size());
    }
  });
  for (unsigned z = 0; z < r; ++z) points[z].failure_rate = summarize(failures[z]).mean;
  return points;
}

CsvTable run_field_sweep(const Config& config, const RunOptions& options) {
  const auto points = field_sweep(config, options);
  const std::string hash = config.hash();
  CsvTable t{{"z", "normalized_mse_empirical", "mse_ci95", "failure_rate", "E_abs_analytic", "trials", "config_hash"}, {}};
  for (const auto& p : points) {
    const Summary s = summarize(p.trial_nmse);
    t.rows.push_back({std::to_string(p.z), num(s.mean), num(s.ci95), num(p.failure_rate), num(p.analytic.to_double()),
                      std::to_string(s.count), hash});
  }
  return t;
}

namespace {

struct SimilarityTrial {
  double s[3];
  double near_hat[3];
  double far_hat[3];
  double near_l1;
  double far_l1;
};

SimilarityTrial similarity_trial(const FieldSpec& field, Sample base, double sigma2, double sigma3, double g2, double g3,
                                 const GFMatrix& c) {
  SignalWindow w{field.r(), 3, 1, {base, clip_sample(base + sigma2 * g2, field.r()), clip_sample(base + sigma3 * g3, field.r())}};
  const GFMatrix x = embed_window(w, field);
  DecoderState state(field, 3, 1);
  for (std::size_t row = 0; row < 2; ++row) state.accumulate(encode_packet(x, c.row(row)));
  DecodePolicy policy;
  policy.max_retries = 0;
  const DecodeResult near = decode(state, SimilarityModel(3, {{0, 1, 0.0}}), policy);
  const DecodeResult far = decode(state, SimilarityModel(3, {{0, 2, 0.0}}), policy);
  if (near.mode != DecodeMode::approximate || far.mode != DecodeMode::approximate)
    throw Error(Errc::singular_matrix, "similarity trial drew a singular stack");
  SimilarityTrial out{};
  out.near_l1 = 0.0;
  out.far_l1 = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    out.s[i] = w.data[i];
    out.near_hat[i] = near.s_hat[i];
    out.far_hat[i] = far.s_hat[i];
    out.near_l1 += std::fabs(out.s[i] - out.near_hat[i]);
    out.far_l1 += std::fabs(out.s[i] - out.far_hat[i]);
  }
  return out;
}

// Coefficient matrix whose stacks with both [1 1 0] and [1 0 1] are nonsingular.
GFMatrix draw_similarity_c(const FieldSpec& field, std::mt19937_64& rng) {
  const GFMatrix near = GFMatrix::from_rows(field, {{1, 1, 0}}, 3);
  const GFMatrix far = GFMatrix::from_rows(field, {{1, 0, 1}}, 3);
  while (true) {
    GFMatrix c = GFMatrix::random(field, 2, 3, rng);
    if (rank(vstack(c, near)) == 3 && rank(vstack(c, far)) == 3) return c;
  }
}

GFMatrix swap_last_columns(const GFMatrix& c) {
  GFMatrix out = c;
  for (std::size_t row = 0; row < c.rows(); ++row) std::swap(out(row, 1), out(row, 2));
  return out;
}

}  // namespace

std::vector<SimilaritySweepPoint> similarity_sweep(const Config& config, const RunOptions& options) {
  config.require_known({"r", "base", "sigma2", "sigma3", "trials", "mode"});
  const unsigned r = get_r(config, 8);
  const FieldSpec field(r, 0);
  const auto base = static_cast<Sample>(config.get_count("base", std::size_t{1} << (r - 1)));
  const double sigma2 = config.get_double("sigma2", 0.2);
  const auto sigma3 = config.get_doubles("sigma3", {0.2, 0.3, 0.5, 1, 2, 3, 5, 7, 10});
  const std::size_t trials = trial_count(config, options, 10000);
  // Trials come in antithetic pairs: (g2, g3, C) and (g3, g2, C with columns 2, 3 swapped).
  const std::size_t pairs = (trials + 1) / 2;

  std::vector<SimilaritySweepPoint> points(sigma3.size());
  for (std::size_t i = 0; i < sigma3.size(); ++i) {
    points[i].sigma3 = sigma3[i];
    points[i].l1_near.assign(2 * pairs, 0.0);
    points[i].l1_far.assign(2 * pairs, 0.0);
  }
  for_trials(pairs, options.threads, [&](std::size_t pair) {
    auto rng = derive_rng(options.seed, pair, 0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double g2 = gauss(rng);
    const double g3 = gauss(rng);
    const GFMatrix c = draw_similarity_c(field, rng);
    const GFMatrix c_swapped = swap_last_columns(c);
    for (std::size_t i = 0; i < sigma3.size(); ++i) {
      const auto a = similarity_trial(field, base, sigma2, sigma3[i], g2, g3, c);
      const auto b = similarity_trial(field, base, sigma2, sigma3[i], g3, g2, c_swapped);
      points[i].l1_near[2 * pair] = a.near_l1;
      points[i].l1_far[2 * pair] = a.far_l1;
      points[i].l1_near[2 * pair + 1] = b.near_l1;
      points[i].l1_far[2 * pair + 1] = b.far_l1;
    }
  });
  return points;
}

CsvTable run_similarity_sweep(const Config& config, const RunOptions& options) {
  const std::string mode = config.get("mode", "sweep");
  const std::string hash = config.hash();
  if (mode == "trace") {
    config.require_known({"r", "base", "sigma2", "sigma3", "trials", "mode"});
    const unsigned r = get_r(config, 8);
    const FieldSpec field(r, 0);
    const auto base = static_cast<Sample>(config.get_count("base", std::size_t{1} << (r - 1)));
    const double sigma2 = config.get_double("sigma2", 1.0);
    const double sigma3 = config.get_doubles("sigma3", {10.0}).front();
    const std::size_t trials = trial_count(config, options, 100);
    CsvTable t{{"trial", "s1", "s2", "s3", "s1_hat_d110", "s2_hat_d110", "s3_hat_d110", "s1_hat_d101", "s2_hat_d101",
                "s3_hat_d101", "config_hash"},
               {}};
    for (std::size_t trial = 0; trial < trials; ++trial) {
      auto rng = derive_rng(options.seed, trial, 0);
      std::normal_distribution<double> gauss(0.0, 1.0);
      const double g2 = gauss(rng);
      const double g3 = gauss(rng);
      const auto tr = similarity_trial(field, base, sigma2, sigma3, g2, g3, draw_similarity_c(field, rng));
      std::vector<std::string> row{std::to_string(trial)};
      for (double v : tr.s) row.push_back(num(v));
      for (double v : tr.near_hat) row.push_back(num(v));
      for (double v : tr.far_hat) row.push_back(num(v));
      row.push_back(hash);
      t.rows.push_back(std::move(row));
    }
    return t;
  }
  if (mode != "sweep") throw Error(Errc::invalid_argument, fmt::format("mode must be 'sweep' or 'trace', got '{}'", mode));
  const auto points = similarity_sweep(config, options);
  CsvTable t{{"sigma", "mean_l1_error_d110", "ci95_d110", "mean_l1_error_d101", "ci95_d101", "trials", "config_hash"}, {}};
  for (const auto& p : points) {
    const Summary a = summarize(p.l1_near);
    const Summary b = summarize(p.l1_far);
    t.rows.push_back({num(p.sigma3), num(a.mean), num(a.ci95), num(b.mean), num(b.ci95), std::to_string(a.count), hash});
  }
  return t;
}

std::vector<WindowSweepPoint> window_sweep(const Config& config, const RunOptions& options) {
  config.require_known(with({"r", "z", "frames", "windows", "trials", "lossless", "loss_rate", "max_retries"}, kPatchKeys));
  const unsigned r = patch_r(config);
  const auto z = static_cast<unsigned>(config.get_count("z", 4));
  const FieldSpec field(r, z);
  const std::size_t frames = config.get_count("frames", 24);
  const auto windows_d = config.get_doubles("windows", {3, 4, 6, 8, 12});
  const std::size_t trials = trial_count(config, options, 1000);
  const bool lossless = config.get_bool("lossless", true);
  const double loss_rate = config.get_fraction("loss_rate", 1.0 / 24.0);
  DecodePolicy policy;
  policy.max_retries = config.get_count("max_retries", 10);
  policy.fallback_fill = true;
  const PatchParams pp = patch_params(config);
  if (!(loss_rate >= 0.0 && loss_rate <= 1.0)) throw Error(Errc::invalid_argument, "loss_rate must be a probability");

  std::vector<WindowSweepPoint> points;
  for (double wd : windows_d) {
    const auto win = static_cast<std::size_t>(wd);
    if (wd != static_cast<double>(win) || win == 0 || frames % win != 0)
      throw Error(Errc::invalid_argument, fmt::format("window {} does not divide {} frames", wd, frames));
    points.push_back({win, std::vector<double>(trials, 0.0), std::vector<double>(trials, 0.0)});
  }

  for_trials(trials, options.threads, [&](std::size_t trial) {
    auto src_rng = derive_rng(options.seed, trial, 0);
    const PatchScene scene = make_scene(pp, frames, src_rng);
    const std::size_t patch_count = scene.patches.patch_count();
    for (auto& point : points) {
      const std::size_t win = point.window;
      auto coding_rng = derive_rng(options.seed, trial, 1000 + win);
      auto loss_rng = derive_rng(options.seed, trial, 2000 + win);
      LossProcess loss(lossless ? ChannelModel::lossless() : ChannelModel::bsc(loss_rate));
      double err = 0.0;
      std::size_t samples = 0;
      std::size_t singular = 0;
      std::size_t units = 0;
      for (std::size_t first = 0; first < frames; first += win) {
        for (std::size_t p = 0; p < patch_count; ++p) {
          const SignalWindow unit = scene.patches.unit(p, first, win);
          const GFMatrix x = embed_window(unit, field);
          DecoderState state(field, win, unit.samples, first / win, p);
          for (std::size_t k = 0; k < win; ++k) {
            Packet pkt = encode_packet(x, draw_coeffs(coding_rng, win, field), first / win, p);
            if (!loss.next(loss_rng)) state.accumulate(pkt);
          }
          DecodeResult res;
          bool unit_singular = false;
          if (lossless) {
            // Every packet arrives; only a singular coefficient matrix can fail.
            if (state.rank() == win) {
              res = decode(state, SimilarityModel(win, {}), policy);
            } else {
              unit_singular = true;
              res.mode = DecodeMode::failed;
            }
          } else {
            res = decode_matched(state, window_matches(scene.matches[p], first, win), policy);
            unit_singular = res.mode == DecodeMode::failed;
          }
          if (unit_singular) ++singular;
          err += squared_error(unit, res, field);
          samples += unit.data.size();
          ++units;
        }
      }
      point.trial_nmse[trial] = err / static_cast<double>(samples) / full_scale_sq(r);
      point.trial_singular_rate[trial] = static_cast<double>(singular) / static_cast<double>(units);
    }
  });
  return points;
}

CsvTable run_window_sweep(const Config& config, const RunOptions& options) {
  const auto points = window_sweep(config, options);
  const std::string hash = config.hash();
  CsvTable t{{"window_size", "mse", "mse_ci95", "singular_rate", "singular_ci95", "trials", "config_hash"}, {}};
  for (const auto& p : points) {
    const Summary m = summarize(p.trial_nmse);
    const Summary s = summarize(p.trial_singular_rate);
    t.rows.push_back({std::to_string(p.window), num(m.mean), num(m.ci95), num(s.mean), num(s.ci95), std::to_string(m.count), hash});
  }
  return t;
}

namespace {

Topology loss_topology(const Config& config, const ChannelModel& channel) {
  if (config.topology_lines().empty()) return Topology::relay_chain(channel);
  std::vector<std::string> lines;
  for (std::string line : config.topology_lines()) {
    // `swept` marks the links whose channel the sweep varies.
    const auto at = line.find(" swept");
    if (at != std::string::npos) line.replace(at + 1, 5, channel.to_string());
    lines.push_back(line);
  }
  return Topology::parse(lines);
}

}  // namespace

std::vector<LossSweepPoint> loss_sweep(const Config& config, const RunOptions& options) {
  config.require_known(with({"r", "z", "frames", "window", "loss_rates", "channels", "burst", "trials", "max_retries"}, kPatchKeys));
  const unsigned r = patch_r(config);
  const auto z = static_cast<unsigned>(config.get_count("z", 2));
  const FieldSpec field(r, z);
  const std::size_t frames = config.get_count("frames", 12);
  const std::size_t win = config.get_count("window", 4);
  const auto rates = config.get_doubles("loss_rates", {0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35});
  const std::string channels_text = config.get("channels", "bsc,gec");
  const double burst = config.get_double("burst", 9.0);
  const std::size_t trials = trial_count(config, options, 200);
  DecodePolicy policy;
  policy.max_retries = config.get_count("max_retries", 10);
  policy.fallback_fill = true;
  const PatchParams pp = patch_params(config);
  if (win == 0 || frames % win) throw Error(Errc::invalid_argument, fmt::format("window {} does not divide {} frames", win, frames));

  std::vector<std::string> kinds;
  {
    std::string rest = channels_text;
    std::replace(rest.begin(), rest.end(), ',', ' ');
    std::istringstream in(rest);
    for (std::string k; in >> k;) {
      if (k != "bsc" && k != "gec") throw Error(Errc::invalid_argument, fmt::format("unknown channel kind '{}'", k));
      kinds.push_back(k);
    }
  }
  std::vector<LossSweepPoint> points;
  std::vector<Topology> topologies;
  for (const auto& kind : kinds) {
    for (double rate : rates) {
      const ChannelModel model = kind == "bsc" ? ChannelModel::bsc(rate) : ChannelModel::gec_from_rate(rate, burst);
      topologies.push_back(loss_topology(config, model));
      points.push_back({kind, rate, std::vector<double>(trials, 0.0)});
    }
  }

  for_trials(trials, options.threads, [&](std::size_t trial) {
    auto src_rng = derive_rng(options.seed, trial, 0);
    const PatchScene scene = make_scene(pp, frames, src_rng);
    for (std::size_t i = 0; i < points.size(); ++i) {
      // Same coding and loss streams at every point so curves differ only by the channel.
      auto coding_rng = derive_rng(options.seed, trial, 1);
      auto loss_rng = derive_rng(options.seed, trial, 2);
      TopologyRunner runner(topologies[i]);
      double err = 0.0;
      std::size_t samples = 0;
      for (std::size_t first = 0; first < frames; first += win) {
        for (std::size_t p = 0; p < scene.patches.patch_count(); ++p) {
          const SignalWindow unit = scene.patches.unit(p, first, win);
          const GFMatrix x = embed_window(unit, field);
          const auto sinks = runner.run_window(x, first / win, p, coding_rng, loss_rng);
          const DecodeResult res = decode_matched(sinks.front(), window_matches(scene.matches[p], first, win), policy);
          err += squared_error(unit, res, field);
          samples += unit.data.size();
        }
      }
      points[i].trial_nmse[trial] = err / static_cast<double>(samples) / full_scale_sq(r);
    }
  });
  return points;
}

CsvTable run_loss_sweep(const Config& config, const RunOptions& options) {
  const auto points = loss_sweep(config, options);
  const std::string hash = config.hash();
  CsvTable t{{"loss_rate", "channel_kind", "mse", "mse_ci95", "trials", "config_hash"}, {}};
  for (const auto& p : points) {
    const Summary s = summarize(p.trial_nmse);
    t.rows.push_back({num(p.loss_rate), p.channel, num(s.mean), num(s.ci95), std::to_string(s.count), hash});
  }
  return t;
}

namespace {

bool satisfies(const DecoderState& state, const DecodeResult& res) {
  if (res.mode == DecodeMode::failed) return true;
  const FieldSpec& field = state.field();
  const GFMatrix x(field, state.sources(), state.samples(), res.x_hat);
  if (!(multiply(state.coefficients(), x) == state.payloads())) return false;
  if (res.constraints) {
    const GFMatrix dx = multiply(res.constraints->d, x);
    for (Symbol v : dx.data())
      if (v != 0) return false;
  }
  return true;
}

SimilarityModel gaussian_model(std::span<const double> sigmas) {
  // Source 0 is the reference; source i deviates by N(0, sigma_i).
  const std::size_t n = sigmas.size() + 1;
  auto sigma = [&](std::size_t i) { return i == 0 ? 0.0 : sigmas[i - 1]; };
  std::vector<SimilarPair> pairs;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) pairs.push_back({i, j, std::sqrt(sigma(i) * sigma(i) + sigma(j) * sigma(j))});
  return SimilarityModel(n, std::move(pairs));
}

}  // namespace

std::vector<MleComparisonPoint> mle_comparison(const Config& config, const RunOptions& options) {
  config.require_known({"r", "sources", "received", "samples", "base", "sigmas", "budget", "trials", "max_retries", "z_min"});
  const unsigned r = get_r(config, 5);
  const std::size_t n = config.get_count("sources", 4);
  const std::size_t k = config.get_count("received", 3);
  const std::size_t w = config.get_count("samples", 16);
  const auto base = static_cast<Sample>(config.get_count("base", std::size_t{1} << (r - 1)));
  std::vector<double> default_sigmas;
  for (std::size_t i = 1; i < n; ++i) default_sigmas.push_back(0.5 * static_cast<double>(i));
  const auto sigmas = config.get_doubles("sigmas", default_sigmas);
  const auto budget = static_cast<std::uint64_t>(config.get_int("budget", 1 << 20));
  const std::size_t trials = trial_count(config, options, 200);
  const auto z_min = static_cast<unsigned>(config.get_count("z_min", 0));
  DecodePolicy policy;
  policy.max_retries = config.get_count("max_retries", 10);
  policy.fallback_fill = true;
  if (k == 0 || k > n) throw Error(Errc::invalid_argument, fmt::format("received={} outside 1..{}", k, n));
  if (sigmas.size() + 1 != n) throw Error(Errc::invalid_argument, fmt::format("need {} sigmas", n - 1));
  const SimilarityModel model = gaussian_model(sigmas);

  std::vector<MleComparisonPoint> points;
  for (unsigned z = z_min; z < r; ++z) {
    MleComparisonPoint p;
    p.z = z;
    p.q = FieldSpec(r, z).order();
    std::uint64_t candidates = 1;
    for (std::size_t i = k; i < n; ++i) candidates = candidates > budget ? candidates : candidates * p.q;
    p.skipped = candidates > budget;
    if (!p.skipped) {
      p.nmse_approx.assign(trials, 0.0);
      p.nmse_mle.assign(trials, 0.0);
    }
    points.push_back(std::move(p));
  }
  std::vector<std::vector<double>> t_approx(points.size(), std::vector<double>(trials, 0.0));
  std::vector<std::vector<double>> t_mle(points.size(), std::vector<double>(trials, 0.0));
  std::vector<std::vector<int>> infeasible(points.size(), std::vector<int>(trials, 0));
  std::vector<std::vector<int>> violations(points.size(), std::vector<int>(trials, 0));

  for_trials(trials, options.threads, [&](std::size_t trial) {
    auto src_rng = derive_rng(options.seed, trial, 0);
    const SignalWindow truth = gen_gaussian_correlated(n, base, sigmas, r, src_rng, w);
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (points[i].skipped) continue;
      const FieldSpec field(r, points[i].z);
      auto coding_rng = derive_rng(options.seed, trial, 100 + points[i].z);
      const DecoderState state = receive_innovative(embed_window(truth, field), k, coding_rng);
      using clock = std::chrono::steady_clock;
      const auto t0 = clock::now();
      const DecodeResult approx = decode(state, model, policy);
      const auto t1 = clock::now();
      const DecodeResult mle = mle_decode(state, model, budget);
      const auto t2 = clock::now();
      t_approx[i][trial] = std::chrono::duration<double>(t1 - t0).count();
      t_mle[i][trial] = std::chrono::duration<double>(t2 - t1).count();
      const double denom = static_cast<double>(truth.data.size()) * full_scale_sq(r);
      points[i].nmse_approx[trial] = squared_error(truth, approx, field) / denom;
      points[i].nmse_mle[trial] = squared_error(truth, mle, field) / denom;
      infeasible[i][trial] = satisfies(state, approx) ? 0 : 1;
      if (approx.mode != DecodeMode::failed &&
          similarity_score(field, model, mle.x_hat, w) > similarity_score(field, model, approx.x_hat, w))
        violations[i][trial] = 1;
    }
  });
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t t = 0; t < trials; ++t) {
      points[i].seconds_approx += t_approx[i][t];
      points[i].seconds_mle += t_mle[i][t];
      points[i].infeasible += static_cast<std::size_t>(infeasible[i][t]);
      points[i].score_violations += static_cast<std::size_t>(violations[i][t]);
    }
  }
  return points;
}

CsvTable run_mle_comparison(const Config& config, const RunOptions& options) {
  const auto points = mle_comparison(config, options);
  const std::string hash = config.hash();
  CsvTable t{{"z", "q", "status", "mse_approx", "mse_mle", "time_approx", "time_mle", "infeasible", "score_violations",
              "trials", "config_hash"},
             {}};
  for (const auto& p : points) {
    if (p.skipped) {
      t.rows.push_back({std::to_string(p.z), std::to_string(p.q), "skipped", "", "", "", "", "", "", "0", hash});
      continue;
    }
    const Summary a = summarize(p.nmse_approx);
    const Summary m = summarize(p.nmse_mle);
    const double n = static_cast<double>(a.count);
    t.rows.push_back({std::to_string(p.z), std::to_string(p.q), "ok", num(a.mean), num(m.mean),
                      options.timing ? num(p.seconds_approx / n) : "", options.timing ? num(p.seconds_mle / n) : "",
                      std::to_string(p.infeasible), std::to_string(p.score_violations), std::to_string(a.count), hash});
  }
  return t;
}

CsvTable run_analysis_tables(const Config& config, const RunOptions&) {
  config.require_known({"r_min", "r_max"});
  const auto r_min = static_cast<unsigned>(config.get_count("r_min", 1));
  const auto r_max = static_cast<unsigned>(config.get_count("r_max", 10));
  if (r_min < 1 || r_max < r_min || r_max > 16) throw Error(Errc::invalid_argument, "need 1 <= r_min <= r_max <= 16");
  const std::string hash = config.hash();
  CsvTable t{{"r", "z", "a", "b", "H", "E_abs_closed", "E_abs_convolution", "E_abs_exact", "config_hash"}, {}};
  for (unsigned r = r_min; r <= r_max; ++r) {
    for (unsigned z = 0; z < r; ++z) {
      const AnalysisParams p = AnalysisParams::make(r, z);
      const Rational closed = expected_abs_error(p);
      const double conv = pmf_total_error_convolution(p).mean_abs();
      t.rows.push_back({std::to_string(r), std::to_string(z), std::to_string(p.a), std::to_string(p.b),
                        num(p.h.to_double()), num(closed.to_double()), num(conv), closed.to_string(), hash});
    }
  }
  return t;
}

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = {"field-sweep", "similarity-sweep", "window-sweep",
                                                 "loss-sweep",  "mle-comparison",   "analysis-tables"};
  return names;
}

CsvTable run_experiment(const std::string& name, const Config& config, const RunOptions& options) {
  if (name == "field-sweep") return run_field_sweep(config, options);
  if (name == "similarity-sweep") return run_similarity_sweep(config, options);
  if (name == "window-sweep") return run_window_sweep(config, options);
  if (name == "loss-sweep") return run_loss_sweep(config, options);
  if (name == "mle-comparison") return run_mle_comparison(config, options);
  if (name == "analysis-tables") return run_analysis_tables(config, options);
  throw Error(Errc::invalid_argument, fmt::format("unknown experiment '{}'", name));
}

std::string plot_script(const std::string& name, const std::string& csv_path) {
  struct Plot {
    const char* x;
    std::vector<const char*> ys;
    const char* group;
    bool logy;
  };
  Plot plot{"z", {"normalized_mse_empirical"}, nullptr, true};
  if (name == "similarity-sweep") plot = {"sigma", {"mean_l1_error_d110", "mean_l1_error_d101"}, nullptr, false};
  if (name == "window-sweep") plot = {"window_size", {"mse", "singular_rate"}, nullptr, false};
  if (name == "loss-sweep") plot = {"loss_rate", {"mse"}, "channel_kind", true};
  if (name == "mle-comparison") plot = {"z", {"mse_approx", "mse_mle"}, nullptr, true};
  if (name == "analysis-tables") plot = {"z", {"E_abs_closed"}, "r", true};

  std::string ys;
  for (const char* y : plot.ys) ys += fmt::format("\"{}\", ", y);
  return fmt::format(R"PY(#!/usr/bin/env python3
import sys

import matplotlib.pyplot as plt
import pandas as pd

csv = sys.argv[1] if len(sys.argv) > 1 else "{csv}"
df = pd.read_csv(csv)
fig, ax = plt.subplots()
group = {group}
for y in [{ys}]:
    if group:
        for key, part in df.groupby(group):
            ax.plot(part["{x}"], part[y], marker="o", label=f"{{y}} ({{group}}={{key}})")
    else:
        ax.plot(df["{x}"], df[y], marker="o", label=y)
ax.set_xlabel("{x}")
{logy}ax.legend()
ax.set_title("{name}")
fig.savefig(csv.rsplit(".", 1)[0] + ".png", dpi=150)
)PY",
                     fmt::arg("csv", csv_path), fmt::arg("group", plot.group ? fmt::format("\"{}\"", plot.group) : "None"),
                     fmt::arg("ys", ys), fmt::arg("x", plot.x), fmt::arg("logy", plot.logy ? "ax.set_yscale(\"log\")\n" : ""),
                     fmt::arg("name", name));
}

}  // namespace ncapprox
