#include "ncapprox/channel.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <queue>
#include <set>
#include <sstream>

#include <fmt/format.h>

namespace ncapprox {

namespace {

void check_probability(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0)) throw Error(Errc::invalid_argument, fmt::format("{} = {} is not a probability", what, p));
}

double parse_double(const std::string& text) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::logic_error&) {
    throw Error(Errc::parse_error, fmt::format("'{}' is not a number", text));
  }
  if (used != text.size()) throw Error(Errc::parse_error, fmt::format("'{}' is not a number", text));
  return v;
}

std::size_t parse_count(const std::string& text) {
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(text, &used);
  } catch (const std::logic_error&) {
    throw Error(Errc::parse_error, fmt::format("'{}' is not a count", text));
  }
  if (used != text.size() || text.front() == '-') throw Error(Errc::parse_error, fmt::format("'{}' is not a count", text));
  return static_cast<std::size_t>(v);
}

}  // namespace

ChannelModel ChannelModel::lossless() { return {}; }

ChannelModel ChannelModel::bsc(double p) {
  check_probability(p, "loss rate");
  ChannelModel m;
  m.kind = ChannelKind::bsc;
  m.loss_rate = p;
  return m;
}

ChannelModel ChannelModel::gec(double p_gb, double p_bg) {
  check_probability(p_gb, "p_gb");
  check_probability(p_bg, "p_bg");
  ChannelModel m;
  m.kind = ChannelKind::gec;
  m.p_gb = p_gb;
  m.p_bg = p_bg;
  return m;
}

ChannelModel ChannelModel::gec_from_rate(double loss, double mean_burst) {
  if (!(loss >= 0.0 && loss < 1.0)) throw Error(Errc::invalid_argument, fmt::format("GEC loss rate {} outside [0, 1)", loss));
  if (!(mean_burst >= 1.0)) throw Error(Errc::invalid_argument, fmt::format("mean burst {} below 1", mean_burst));
  const double p_bg = 1.0 / mean_burst;
  const double p_gb = loss * p_bg / (1.0 - loss);
  if (p_gb > 1.0)
    throw Error(Errc::invalid_argument, fmt::format("loss {} unreachable with mean burst {}", loss, mean_burst));
  return gec(p_gb, p_bg);
}

double ChannelModel::stationary_loss() const noexcept {
  switch (kind) {
    case ChannelKind::lossless: return 0.0;
    case ChannelKind::bsc: return loss_rate;
    case ChannelKind::gec: return p_gb + p_bg > 0.0 ? p_gb / (p_gb + p_bg) : 0.0;
  }
  return 0.0;
}

double ChannelModel::mean_burst() const noexcept {
  switch (kind) {
    case ChannelKind::lossless: return 0.0;
    case ChannelKind::bsc: return loss_rate < 1.0 ? 1.0 / (1.0 - loss_rate) : INFINITY;
    case ChannelKind::gec: return p_bg > 0.0 ? 1.0 / p_bg : INFINITY;
  }
  return 0.0;
}

std::string ChannelModel::to_string() const {
  switch (kind) {
    case ChannelKind::lossless: return "lossless";
    case ChannelKind::bsc: return fmt::format("bsc:{}", loss_rate);
    case ChannelKind::gec: return fmt::format("gec:{}:{}", stationary_loss(), mean_burst());
  }
  return "lossless";
}

ChannelModel ChannelModel::parse(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream in(text);
  std::string part;
  while (std::getline(in, part, ':')) parts.push_back(part);
  if (parts.size() == 1 && parts[0] == "lossless") return lossless();
  if (parts.size() == 2 && parts[0] == "bsc") return bsc(parse_double(parts[1]));
  if (parts.size() == 3 && parts[0] == "gec") return gec_from_rate(parse_double(parts[1]), parse_double(parts[2]));
  throw Error(Errc::parse_error, fmt::format("unknown channel '{}'", text));
}

LossProcess::LossProcess(ChannelModel model) : model_(model) {}

bool LossProcess::next(std::mt19937_64& rng) {
  if (model_.kind == ChannelKind::lossless) return false;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double u = unit(rng);
  if (model_.kind == ChannelKind::bsc) return u < model_.loss_rate;
  if (!started_) {
    started_ = true;
    bad_ = u < model_.stationary_loss();
  } else if (bad_) {
    bad_ = !(u < model_.p_bg);
  } else {
    bad_ = u < model_.p_gb;
  }
  return bad_;
}

std::vector<std::uint8_t> bsc_mask(double p, std::size_t n, std::mt19937_64& rng) {
  LossProcess process(ChannelModel::bsc(p));
  std::vector<std::uint8_t> mask(n);
  for (auto& m : mask) m = process.next(rng) ? 1 : 0;
  return mask;
}

std::vector<std::uint8_t> gec_mask(const ChannelModel& model, std::size_t n, std::mt19937_64& rng) {
  if (model.kind != ChannelKind::gec) throw Error(Errc::invalid_argument, "gec_mask needs a GEC model");
  LossProcess process(model);
  std::vector<std::uint8_t> mask(n);
  for (auto& m : mask) m = process.next(rng) ? 1 : 0;
  return mask;
}

void Topology::add_node(TopologyNode node) { nodes_.push_back(std::move(node)); }

void Topology::add_link(TopologyLink link) { links_.push_back(std::move(link)); }

std::size_t Topology::index_of(const std::string& id) const {
  for (std::size_t i = 0; i < nodes_.size(); ++i)
    if (nodes_[i].id == id) return i;
  throw Error(Errc::invalid_argument, fmt::format("unknown node '{}'", id));
}

std::vector<std::size_t> Topology::order() const {
  std::vector<std::size_t> indegree(nodes_.size(), 0);
  std::vector<std::vector<std::size_t>> out(nodes_.size());
  for (const auto& l : links_) {
    const auto from = index_of(l.from);
    const auto to = index_of(l.to);
    out[from].push_back(to);
    ++indegree[to];
  }
  std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
  for (std::size_t i = 0; i < nodes_.size(); ++i)
    if (indegree[i] == 0) ready.push(i);
  std::vector<std::size_t> result;
  while (!ready.empty()) {
    const auto i = ready.top();
    ready.pop();
    result.push_back(i);
    for (auto j : out[i])
      if (--indegree[j] == 0) ready.push(j);
  }
  if (result.size() != nodes_.size()) throw Error(Errc::invalid_argument, "topology has a cycle");
  return result;
}

void Topology::validate() const {
  std::set<std::string> ids;
  for (const auto& n : nodes_)
    if (!ids.insert(n.id).second) throw Error(Errc::invalid_argument, fmt::format("node '{}' declared twice", n.id));
  bool has_sink = false;
  for (const auto& n : nodes_) has_sink = has_sink || n.role == NodeRole::sink;
  if (!has_sink) throw Error(Errc::invalid_argument, "topology has no sink");
  for (const auto& l : links_) {
    if (nodes_[index_of(l.to)].role == NodeRole::source)
      throw Error(Errc::invalid_argument, fmt::format("link into source '{}'", l.to));
    if (nodes_[index_of(l.from)].role == NodeRole::sink)
      throw Error(Errc::invalid_argument, fmt::format("link out of sink '{}'", l.from));
  }
  const auto topo = order();
  std::vector<bool> reached(nodes_.size(), false);
  for (auto i : topo) {
    if (nodes_[i].role == NodeRole::source) reached[i] = true;
    if (!reached[i]) continue;
    for (const auto& l : links_)
      if (index_of(l.from) == i) reached[index_of(l.to)] = true;
  }
  for (std::size_t i = 0; i < nodes_.size(); ++i)
    if (nodes_[i].role == NodeRole::sink && !reached[i])
      throw Error(Errc::invalid_argument, fmt::format("sink '{}' unreachable from any source", nodes_[i].id));
}

Topology Topology::parse(const std::vector<std::string>& lines) {
  Topology t;
  for (const auto& raw : lines) {
    const std::string line = raw.substr(0, raw.find('#'));
    std::istringstream in(line);
    std::vector<std::string> tok;
    for (std::string s; in >> s;) tok.push_back(s);
    if (tok.empty()) continue;
    if (tok[0] == "node") {
      if (tok.size() < 3) throw Error(Errc::parse_error, fmt::format("node line needs id and role: '{}'", raw));
      TopologyNode node;
      node.id = tok[1];
      if (tok[2] == "source") {
        node.role = NodeRole::source;
      } else if (tok[2] == "relay") {
        node.role = NodeRole::relay;
      } else if (tok[2] == "sink") {
        node.role = NodeRole::sink;
      } else {
        throw Error(Errc::parse_error, fmt::format("unknown role '{}'", tok[2]));
      }
      for (std::size_t i = 3; i < tok.size(); ++i) {
        if (tok[i].rfind("fanin=", 0) == 0) {
          node.fanin = parse_count(tok[i].substr(6));
        } else {
          node.observes.push_back(parse_count(tok[i]));
        }
      }
      t.add_node(std::move(node));
    } else if (tok[0] == "link") {
      if (tok.size() < 4 || tok.size() > 5)
        throw Error(Errc::parse_error, fmt::format("link line needs from, to, channel: '{}'", raw));
      TopologyLink link{tok[1], tok[2], ChannelModel::parse(tok[3]), 0};
      if (tok.size() == 5) {
        if (tok[4].rfind("count=", 0) != 0) throw Error(Errc::parse_error, fmt::format("unexpected '{}'", tok[4]));
        link.count = parse_count(tok[4].substr(6));
      }
      t.add_link(std::move(link));
    } else {
      throw Error(Errc::parse_error, fmt::format("unknown topology line '{}'", raw));
    }
  }
  t.validate();
  return t;
}

std::vector<std::string> Topology::to_lines() const {
  std::vector<std::string> out;
  for (const auto& n : nodes_) {
    const char* role = n.role == NodeRole::source ? "source" : n.role == NodeRole::relay ? "relay" : "sink";
    std::string line = fmt::format("node {} {}", n.id, role);
    for (auto i : n.observes) line += fmt::format(" {}", i);
    if (n.fanin) line += fmt::format(" fanin={}", n.fanin);
    out.push_back(line);
  }
  for (const auto& l : links_) {
    std::string line = fmt::format("link {} {} {}", l.from, l.to, l.channel.to_string());
    if (l.count) line += fmt::format(" count={}", l.count);
    out.push_back(line);
  }
  return out;
}

Topology Topology::relay_chain(const ChannelModel& channel) {
  Topology t;
  t.add_node({"src", NodeRole::source, {}, 0});
  t.add_node({"relay", NodeRole::relay, {}, 0});
  t.add_node({"sink", NodeRole::sink, {}, 0});
  t.add_link({"src", "relay", channel, 0});
  t.add_link({"relay", "sink", ChannelModel::lossless(), 0});
  return t;
}

Topology Topology::direct() {
  Topology t;
  t.add_node({"src", NodeRole::source, {}, 0});
  t.add_node({"sink", NodeRole::sink, {}, 0});
  t.add_link({"src", "sink", ChannelModel::lossless(), 0});
  return t;
}

TopologyRunner::TopologyRunner(Topology topology) : topology_(std::move(topology)) {
  topology_.validate();
  order_ = topology_.order();
  for (const auto& l : topology_.links()) links_.emplace_back(l.channel);
}

std::vector<DecoderState> TopologyRunner::run_window(const GFMatrix& sources, std::uint64_t window_id,
                                                     std::uint64_t unit_id, std::mt19937_64& coding_rng,
                                                     std::mt19937_64& loss_rng) {
  const FieldSpec& field = sources.field();
  const std::size_t n = sources.rows();
  const auto& nodes = topology_.nodes();
  const auto& links = topology_.links();
  std::vector<std::vector<Packet>> inbox(nodes.size());
  std::vector<std::size_t> from(links.size());
  std::vector<std::size_t> to(links.size());
  for (std::size_t l = 0; l < links.size(); ++l) {
    from[l] = topology_.index_of(links[l].from);
    to[l] = topology_.index_of(links[l].to);
  }

  for (auto node_index : order_) {
    const TopologyNode& node = nodes[node_index];
    if (node.role == NodeRole::sink) continue;
    std::vector<Packet>& buffer = inbox[node_index];
    for (std::size_t l = 0; l < links.size(); ++l) {
      if (from[l] != node_index) continue;
      const std::size_t count = links[l].count ? links[l].count : n;
      for (std::size_t k = 0; k < count; ++k) {
        std::optional<Packet> packet;
        if (node.role == NodeRole::source) {
          std::vector<Symbol> coeffs = draw_coeffs(coding_rng, n, field);
          if (!node.observes.empty()) {
            std::vector<Symbol> masked(n, 0);
            for (auto i : node.observes) masked.at(i) = coeffs.at(i);
            coeffs = std::move(masked);
          }
          packet = encode_packet(sources, coeffs, window_id, unit_id);
        } else if (!buffer.empty()) {
          if (node.fanin == 0 || node.fanin >= buffer.size()) {
            packet = recode(buffer, coding_rng);
          } else {
            std::vector<std::size_t> pick(buffer.size());
            for (std::size_t i = 0; i < pick.size(); ++i) pick[i] = i;
            std::vector<Packet> subset;
            for (std::size_t i = 0; i < node.fanin; ++i) {
              std::uniform_int_distribution<std::size_t> d(i, pick.size() - 1);
              std::swap(pick[i], pick[d(coding_rng)]);
              subset.push_back(buffer[pick[i]]);
            }
            packet = recode(subset, coding_rng);
          }
        }
        const bool lost = links_[l].next(loss_rng);
        if (packet && !lost) inbox[to[l]].push_back(std::move(*packet));
      }
    }
  }

  std::vector<DecoderState> sinks;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].role != NodeRole::sink) continue;
    DecoderState state(field, n, sources.cols(), window_id, unit_id);
    for (const auto& p : inbox[i]) state.accumulate(p);
    sinks.push_back(std::move(state));
  }
  return sinks;
}

std::vector<DecoderState> run_topology(const Topology& topology, const GFMatrix& sources, std::mt19937_64& rng) {
  TopologyRunner runner(topology);
  return runner.run_window(sources, 0, 0, rng, rng);
}

}  // namespace ncapprox
