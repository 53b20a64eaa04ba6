#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "ncapprox/matrix.hpp"
#include "ncapprox/rlnc.hpp"

namespace ncapprox {

enum class ChannelKind { lossless, bsc, gec };

/// Packet-loss model of one link. A GEC loses every packet sent in the bad state.
struct ChannelModel {
  ChannelKind kind = ChannelKind::lossless;
  double loss_rate = 0.0;  // BSC only
  double p_gb = 0.0;       // GEC good -> bad
  double p_bg = 1.0;       // GEC bad -> good

  static ChannelModel lossless();
  static ChannelModel bsc(double p);
  static ChannelModel gec(double p_gb, double p_bg);
  /// p_bg = 1 / burst, p_gb = loss * p_bg / (1 - loss).
  static ChannelModel gec_from_rate(double loss, double mean_burst);

  double stationary_loss() const noexcept;
  /// Expected run length of consecutive losses.
  double mean_burst() const noexcept;

  /// `lossless`, `bsc:<p>` or `gec:<loss>:<burst>`.
  std::string to_string() const;
  static ChannelModel parse(const std::string& text);
};

/// Stateful per-link loss process; a GEC starts from its stationary state.
class LossProcess {
 public:
  explicit LossProcess(ChannelModel model);

  /// True if the next packet is lost.
  bool next(std::mt19937_64& rng);
  const ChannelModel& model() const noexcept { return model_; }

 private:
  ChannelModel model_;
  bool started_ = false;
  bool bad_ = false;
};

/// 1 marks a lost packet.
std::vector<std::uint8_t> bsc_mask(double p, std::size_t n, std::mt19937_64& rng);
std::vector<std::uint8_t> gec_mask(const ChannelModel& model, std::size_t n, std::mt19937_64& rng);

enum class NodeRole { source, relay, sink };

struct TopologyNode {
  std::string id;
  NodeRole role = NodeRole::relay;
  /// Source indices a source node can observe; empty means all of them.
  std::vector<std::size_t> observes;
  /// Packets combined per recoded output; 0 combines the whole buffer.
  std::size_t fanin = 0;
};

struct TopologyLink {
  std::string from;
  std::string to;
  ChannelModel channel;
  /// Packets sent per window; 0 means one per source.
  std::size_t count = 0;
};

/// Directed acyclic relay network.
///
/// Text form, one item per line:
///   node <id> <source|relay|sink> [i j ...] [fanin=k]
///   link <from> <to> <channel-spec> [count=n]
class Topology {
 public:
  void add_node(TopologyNode node);
  void add_link(TopologyLink link);

  /// Errc::invalid_argument on cycles, unknown ids, or unreachable sinks.
  void validate() const;
  /// Node indices in a topological order (ties by declaration order).
  std::vector<std::size_t> order() const;

  const std::vector<TopologyNode>& nodes() const noexcept { return nodes_; }
  const std::vector<TopologyLink>& links() const noexcept { return links_; }
  std::size_t index_of(const std::string& id) const;

  /// Parses `node`/`link` lines, ignoring blanks and `#` comments.
  static Topology parse(const std::vector<std::string>& lines);
  std::vector<std::string> to_lines() const;

  /// source -> relay over `channel`, relay -> sink lossless.
  static Topology relay_chain(const ChannelModel& channel);
  /// Single lossless source -> sink link.
  static Topology direct();

 private:
  std::vector<TopologyNode> nodes_;
  std::vector<TopologyLink> links_;
};

/// Replays packets through a topology window after window; link loss state
/// persists between calls so bursts may straddle windows.
class TopologyRunner {
 public:
  explicit TopologyRunner(Topology topology);

  /// `sources` is N x w. Returns one DecoderState per sink, in node order.
  /// Coefficient and loss draws use separate generators so that loss
  /// patterns do not shift the coding randomness.
  std::vector<DecoderState> run_window(const GFMatrix& sources, std::uint64_t window_id, std::uint64_t unit_id,
                                       std::mt19937_64& coding_rng, std::mt19937_64& loss_rng);

  const Topology& topology() const noexcept { return topology_; }

 private:
  Topology topology_;
  std::vector<LossProcess> links_;
  std::vector<std::size_t> order_;
};

/// One-shot convenience wrapper over TopologyRunner.
std::vector<DecoderState> run_topology(const Topology& topology, const GFMatrix& sources, std::mt19937_64& rng);

}  // namespace ncapprox
