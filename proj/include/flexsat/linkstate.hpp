#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "flexsat/constellation.hpp"

namespace flexsat {

inline constexpr const char* kTagLowRely = "low-rely";

// Reliability floor used when turning R into an additive -log metric;
// keeps filtered-but-unpruned links finite.
inline constexpr double kReliabilityFloor = 1e-13;
inline constexpr double kMaxNegLogReliability = 30.0;

// Operational state of one undirected link. reliability is always
// delivery_rate * (1 - utilization); the low-rely tag tracks the
// threshold comparison.
struct LinkState {
  double utilization = 0.0;
  double delivery_rate = 1.0;
  double reliability = 1.0;
  std::set<std::string> affinity_tags;

  bool has_tag(const std::string& tag) const {
    return affinity_tags.count(tag) != 0;
  }
};

// Per-link state keyed by the undirected node pair. Unmeasured links read
// as fresh (delivery 1.0, utilization 0) so a cold topology is not pruned.
class LinkStateTable {
 public:
  explicit LinkStateTable(double smoothing = 0.3, double reliability_threshold = 0.7);

  const LinkState& get(NodeId a, NodeId b) const;

  // offered/delivered are Mbps over the last slot. utilization is the
  // instantaneous offered/capacity; the delivery rate is an exponential
  // moving average and is left untouched when nothing was offered.
  void update(NodeId a, NodeId b, double capacity_mbps, double offered_mbps,
              double delivered_mbps);

  double smoothing() const { return smoothing_; }
  double reliability_threshold() const { return reliability_threshold_; }

  using Map = std::map<std::pair<NodeId, NodeId>, LinkState>;
  const Map& entries() const { return entries_; }

 private:
  Map entries_;
  LinkState fresh_;
  double smoothing_;
  double reliability_threshold_;
};

enum class MetricKind { kEnergy, kReliability, kDelay };

// One Flex-Algo slice: a metric, a link filter, and the MILP weight row
// that reproduces it.
struct SliceConfig {
  int algo_id = 130;
  MetricKind metric = MetricKind::kEnergy;
  double node_delay_ms = 10.0;
  double alpha = 1.0, beta = 0.0, gamma = 0.0;
  std::set<std::string> excluded_tags;  // links carrying any of these are pruned

  bool admits(const LinkState& state) const {
    for (const std::string& tag : excluded_tags) {
      if (state.has_tag(tag)) return false;
    }
    return true;
  }
};

SliceConfig slice_energy_130();
SliceConfig slice_reliability_129();
SliceConfig slice_delay_128();

struct SlicePath {
  int algo_id = 0;
  std::vector<NodeId> node_sequence;
  std::vector<NodeId> sid_stack;
  double total_metric = 0.0;
  double total_delay_ms = 0.0;
};

// Link metric under a slice. pair_power is (p_i + p_j) / 2 for the link
// endpoints; head_is_satellite charges the node delay on arcs entering a
// satellite. Returns nullopt where the link must be treated as unusable
// (zero reliability under the reliability metric).
std::optional<double> slice_metric(const SliceConfig& slice, const Link& link,
                                   const LinkState& state, double pair_power,
                                   bool head_is_satellite);

// Slice shortest-path trees (Dijkstra over the filtered topology).
// node_powers[i] is the current power proxy of node i (0 for ground
// stations); ids below satellite_count are satellites. Ties between
// equal-metric paths go first to lower latency, then to the
// lexicographically smallest node sequence. Unreachable destinations are
// absent.
std::map<NodeId, SlicePath> compute_slice_tree(const TopologySnapshot& snapshot,
                                               const LinkStateTable& states,
                                               const SliceConfig& slice,
                                               NodeId source,
                                               const std::vector<double>& node_powers,
                                               int satellite_count);

// Minimal SID stack for a path: maximal prefixes that coincide with the
// slice SPF are compressed to their endpoint. The source is never in the
// stack; the last SID is the destination.
std::vector<NodeId> build_sid_stack(const std::vector<NodeId>& path,
                                    const TopologySnapshot& snapshot,
                                    const LinkStateTable& states,
                                    const SliceConfig& slice,
                                    const std::vector<double>& node_powers,
                                    int satellite_count);

// Path delay accounting shared by all slices: sum of link delays plus the
// node delay once per satellite on the path.
double path_delay_ms(const std::vector<NodeId>& path, const TopologySnapshot& snapshot,
                     int satellite_count, double node_delay_ms = 10.0);

}  // namespace flexsat
