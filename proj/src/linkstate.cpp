#include "flexsat/linkstate.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>

namespace flexsat {

namespace {

std::pair<NodeId, NodeId> canon(NodeId a, NodeId b) {
  return a < b ? std::make_pair(a, b) : std::make_pair(b, a);
}

void recompute(LinkState& st, double threshold) {
  st.reliability = st.delivery_rate * (1.0 - st.utilization);
  if (st.reliability < threshold) {
    st.affinity_tags.insert(kTagLowRely);
  } else {
    st.affinity_tags.erase(kTagLowRely);
  }
}

}  // namespace

LinkStateTable::LinkStateTable(double smoothing, double reliability_threshold)
    : smoothing_(smoothing), reliability_threshold_(reliability_threshold) {
  if (smoothing <= 0.0 || smoothing > 1.0) {
    throw std::invalid_argument("link state: smoothing factor out of (0,1]");
  }
}

const LinkState& LinkStateTable::get(NodeId a, NodeId b) const {
  auto it = entries_.find(canon(a, b));
  return it == entries_.end() ? fresh_ : it->second;
}

void LinkStateTable::update(NodeId a, NodeId b, double capacity_mbps,
                            double offered_mbps, double delivered_mbps) {
  if (offered_mbps < delivered_mbps || delivered_mbps < 0.0) {
    throw std::invalid_argument("link state: delivered exceeds offered");
  }
  if (capacity_mbps <= 0.0) {
    throw std::invalid_argument("link state: non-positive capacity");
  }
  LinkState& st = entries_[canon(a, b)];
  st.utilization = std::min(offered_mbps / capacity_mbps, 1.0);
  if (offered_mbps > 0.0) {
    double inst = delivered_mbps / offered_mbps;
    st.delivery_rate = (1.0 - smoothing_) * st.delivery_rate + smoothing_ * inst;
  }
  recompute(st, reliability_threshold_);
}

SliceConfig slice_energy_130() {
  SliceConfig s;
  s.algo_id = 130;
  s.metric = MetricKind::kEnergy;
  s.alpha = 1.0;
  s.beta = 0.0;
  s.gamma = 0.0;
  return s;
}

SliceConfig slice_reliability_129() {
  SliceConfig s;
  s.algo_id = 129;
  s.metric = MetricKind::kReliability;
  s.alpha = 0.0;
  s.beta = 1.0;
  s.gamma = 0.0;
  s.excluded_tags.insert(kTagLowRely);
  return s;
}

SliceConfig slice_delay_128() {
  SliceConfig s;
  s.algo_id = 128;
  s.metric = MetricKind::kDelay;
  s.alpha = 0.0;
  s.beta = 0.0;
  s.gamma = 1.0;
  return s;
}

std::optional<double> slice_metric(const SliceConfig& slice, const Link& link,
                                   const LinkState& state, double pair_power,
                                   bool head_is_satellite) {
  switch (slice.metric) {
    case MetricKind::kEnergy:
      return pair_power;
    case MetricKind::kReliability: {
      if (state.reliability <= 0.0) return std::nullopt;
      double m = -std::log(std::max(state.reliability, kReliabilityFloor));
      return std::min(m, kMaxNegLogReliability);
    }
    case MetricKind::kDelay:
      return link.delay_ms + (head_is_satellite ? slice.node_delay_ms : 0.0);
  }
  return std::nullopt;
}

double path_delay_ms(const std::vector<NodeId>& path, const TopologySnapshot& snapshot,
                     int satellite_count, double node_delay_ms) {
  double total = 0.0;
  for (size_t i = 0; i + 1 < path.size(); ++i) {
    const Link* l = snapshot.find_link(path[i], path[i + 1]);
    if (l == nullptr) {
      throw std::invalid_argument("path_delay_ms: path uses a link absent from snapshot");
    }
    total += l->delay_ms;
  }
  for (NodeId n : path) {
    if (n >= 0 && n < satellite_count) total += node_delay_ms;
  }
  return total;
}

namespace {

// Reconstructs source..node through the parent chain.
std::vector<NodeId> unwind(const std::vector<NodeId>& parent, NodeId node) {
  std::vector<NodeId> path;
  for (NodeId v = node; v != -1; v = parent[v]) path.push_back(v);
  std::reverse(path.begin(), path.end());
  return path;
}

}  // namespace

std::map<NodeId, SlicePath> compute_slice_tree(const TopologySnapshot& snapshot,
                                               const LinkStateTable& states,
                                               const SliceConfig& slice,
                                               NodeId source,
                                               const std::vector<double>& node_powers,
                                               int satellite_count) {
  int n = snapshot.node_count();
  if (source < 0 || source >= n) {
    throw std::invalid_argument("compute_slice_tree: source not in snapshot");
  }
  if (static_cast<int>(node_powers.size()) < n) {
    throw std::invalid_argument("compute_slice_tree: node_powers too short");
  }

  // Outgoing adjacency with precomputed metrics. Each arc carries the
  // slice metric plus a secondary latency component: zero-metric ties are
  // common (a fresh link has -log R = 0), and resolving them by latency
  // keeps equal-metric detours minimal instead of arbitrary.
  struct Arc {
    NodeId to;
    double metric;
    double latency;
  };
  std::vector<std::vector<Arc>> adj(n);
  for (const Link& l : snapshot.links) {
    const LinkState& st = states.get(l.a, l.b);
    if (!slice.admits(st)) continue;
    double pair_power = 0.5 * (node_powers[l.a] + node_powers[l.b]);
    bool head_sat = l.b < satellite_count;
    auto m = slice_metric(slice, l, st, pair_power, head_sat);
    if (!m) continue;
    double lat = l.delay_ms + (head_sat ? slice.node_delay_ms : 0.0);
    adj[l.a].push_back({l.b, *m, lat});
  }

  constexpr double kInf = std::numeric_limits<double>::infinity();
  using Cost = std::pair<double, double>;  // (metric, latency), lexicographic
  const Cost kInfCost{kInf, kInf};
  std::vector<Cost> dist(n, kInfCost);
  std::vector<NodeId> parent(n, -1);
  std::vector<char> done(n, 0);
  dist[source] = {0.0, 0.0};

  using QItem = std::pair<Cost, NodeId>;
  std::priority_queue<QItem, std::vector<QItem>, std::greater<QItem>> queue;
  queue.push({dist[source], source});

  while (!queue.empty()) {
    auto [d, u] = queue.top();
    queue.pop();
    if (done[u] || d > dist[u]) continue;
    done[u] = 1;
    for (const Arc& arc : adj[u]) {
      NodeId v = arc.to;
      if (done[v]) continue;
      Cost nd{dist[u].first + arc.metric, dist[u].second + arc.latency};
      if (nd < dist[v]) {
        dist[v] = nd;
        parent[v] = u;
        queue.push({nd, v});
      } else if (nd == dist[v] && parent[v] != u) {
        // Full tie: keep the lexicographically smaller node sequence.
        std::vector<NodeId> cur = unwind(parent, v);
        std::vector<NodeId> alt = unwind(parent, u);
        alt.push_back(v);
        if (alt < cur) {
          parent[v] = u;
          queue.push({nd, v});
        }
      }
    }
  }

  std::map<NodeId, SlicePath> out;
  for (NodeId v = 0; v < n; ++v) {
    if (v == source || dist[v] == kInfCost) continue;
    SlicePath sp;
    sp.algo_id = slice.algo_id;
    sp.node_sequence = unwind(parent, v);
    sp.total_metric = dist[v].first;
    sp.total_delay_ms = path_delay_ms(sp.node_sequence, snapshot, satellite_count,
                                      slice.node_delay_ms);
    // A tree path is the slice SPF path by construction, so it compresses
    // to a single SID.
    sp.sid_stack = {v};
    out.emplace(v, std::move(sp));
  }
  return out;
}

std::vector<NodeId> build_sid_stack(const std::vector<NodeId>& path,
                                    const TopologySnapshot& snapshot,
                                    const LinkStateTable& states,
                                    const SliceConfig& slice,
                                    const std::vector<double>& node_powers,
                                    int satellite_count) {
  if (path.empty()) {
    throw std::invalid_argument("build_sid_stack: empty path");
  }
  {
    std::set<NodeId> uniq(path.begin(), path.end());
    if (uniq.size() != path.size()) {
      throw std::invalid_argument("build_sid_stack: path is not simple");
    }
  }
  std::vector<NodeId> stack;
  if (path.size() == 1) return stack;

  // Greedy compression: from each anchor, extend while the remaining
  // prefix is exactly what the slice SPF would pick on its own.
  size_t anchor = 0;
  while (anchor + 1 < path.size()) {
    auto tree = compute_slice_tree(snapshot, states, slice, path[anchor],
                                   node_powers, satellite_count);
    size_t best = anchor + 1;
    for (size_t j = anchor + 1; j < path.size(); ++j) {
      auto it = tree.find(path[j]);
      if (it == tree.end()) break;
      const std::vector<NodeId>& spf = it->second.node_sequence;
      if (spf.size() != j - anchor + 1) continue;
      if (!std::equal(spf.begin(), spf.end(), path.begin() + anchor)) continue;
      best = j;
    }
    stack.push_back(path[best]);
    anchor = best;
  }
  return stack;
}

}  // namespace flexsat
