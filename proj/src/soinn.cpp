#include "topoproto/soinn.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace topoproto::soinn {

void SoinnParams::validate() const {
  if (!(eta2 > 0.0 && eta2 <= eta1 && eta1 < 1.0)) {
    throw ConfigError("soinn params need 0 < eta2 <= eta1 < 1 (eta1 = " +
                      std::to_string(eta1) + ", eta2 = " + std::to_string(eta2) +
                      ")");
  }
  if (age_max < 1) throw ConfigError("soinn params need age_max >= 1");
  if (t_soinn < 1) throw ConfigError("soinn params need t_soinn >= 1");
}

std::size_t ClassTopology::dim() const {
  return nodes_.empty() ? 0 : nodes_.begin()->second.raw.size();
}

const TopoNode& ClassTopology::node(int id) const {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) {
    throw ConfigError("topology has no node " + std::to_string(id));
  }
  return it->second;
}

std::vector<int> ClassTopology::neighbors(int id) const {
  std::vector<int> out;
  for (const auto& [key, age] : edges_) {
    (void)age;
    if (key.first == id) out.push_back(key.second);
    else if (key.second == id) out.push_back(key.first);
  }
  std::sort(out.begin(), out.end());
  return out;
}

int ClassTopology::degree(int id) const {
  int deg = 0;
  for (const auto& [key, age] : edges_) {
    (void)age;
    if (key.first == id || key.second == id) ++deg;
  }
  return deg;
}

void ClassTopology::add_node(int id, RawVector raw) {
  if (nodes_.count(id) > 0) {
    throw ConfigError("topology already has node " + std::to_string(id));
  }
  if (!nodes_.empty() && raw.size() != dim()) {
    throw DimensionMismatchError("node " + std::to_string(id) +
                                 " dimension differs from topology");
  }
  UnitVector unit = normalize(raw);
  nodes_.emplace(id, TopoNode{id, std::move(unit), std::move(raw)});
}

void ClassTopology::add_edge(int a, int b, int age) {
  if (a == b) throw ConfigError("self-loop edge rejected");
  if (!has_node(a) || !has_node(b)) {
    throw ConfigError("edge endpoints must exist in the topology");
  }
  if (age < 0) throw ConfigError("edge age must be non-negative");
  edges_[EdgeKey{std::min(a, b), std::max(a, b)}] = age;
}

void ClassTopology::set_node_coords(int id, RawVector raw) {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) {
    throw ConfigError("topology has no node " + std::to_string(id));
  }
  UnitVector unit = normalize(raw);  // ZeroNorm propagates
  it->second.unit = std::move(unit);
  it->second.raw = std::move(raw);
}

void ClassTopology::refresh_edge(int a, int b) { add_edge(a, b, 0); }

void ClassTopology::age_edges_incident(int id, int except_neighbor) {
  for (auto& [key, age] : edges_) {
    const bool incident = key.first == id || key.second == id;
    if (!incident) continue;
    const int other = key.first == id ? key.second : key.first;
    if (other == except_neighbor) continue;
    ++age;
  }
}

void ClassTopology::prune_edges_older_than(int age_max) {
  for (auto it = edges_.begin(); it != edges_.end();) {
    if (it->second > age_max) it = edges_.erase(it);
    else ++it;
  }
}

void ClassTopology::remove_node(int id) {
  for (auto it = edges_.begin(); it != edges_.end();) {
    if (it->first.first == id || it->first.second == id) it = edges_.erase(it);
    else ++it;
  }
  nodes_.erase(id);
}

ClassTopology init_from_centers(const std::vector<UnitVector>& centers) {
  if (centers.empty()) throw EmptyInputError("init_from_centers: no centers");
  ClassTopology graph;
  int id = 0;
  for (const auto& c : centers) {
    graph.add_node(id++, c.data());
  }
  return graph;
}

std::pair<int, std::optional<int>> find_winners(const ClassTopology& graph,
                                                const UnitVector& z) {
  if (graph.node_count() == 0) throw EmptyInputError("find_winners: empty graph");

  int s1 = -1;
  int s2 = -1;
  double best1 = -2.0;
  double best2 = -2.0;
  for (const auto& [id, node] : graph.nodes()) {
    const double c = cosine_sim(z, node.unit);
    // Strict comparisons + ascending iteration give lowest-id tie-breaks.
    if (c > best1) {
      best2 = best1;
      s2 = s1;
      best1 = c;
      s1 = id;
    } else if (c > best2) {
      best2 = c;
      s2 = id;
    }
  }
  if (s2 < 0) return {s1, std::nullopt};
  return {s1, s2};
}

void present_signal(ClassTopology& graph, const UnitVector& z,
                    const SoinnParams& params) {
  params.validate();
  auto [s1, s2] = find_winners(graph, z);

  if (s2.has_value()) graph.refresh_edge(s1, *s2);
  graph.age_edges_incident(s1, s2.has_value() ? *s2 : -1);

  // Snapshot the neighbor list before any movement.
  const std::vector<int> nbrs = graph.neighbors(s1);
  try {
    graph.set_node_coords(s1, slerp(graph.node(s1).unit, z, params.eta1).data());
  } catch (const AntipodalInputsError&) {
    // Geodesic undefined for this node; skip its move, keep the rest.
  }
  for (int j : nbrs) {
    try {
      graph.set_node_coords(j, slerp(graph.node(j).unit, z, params.eta2).data());
    } catch (const AntipodalInputsError&) {
    }
  }

  graph.prune_edges_older_than(params.age_max);
}

namespace {

// Drops degree-0 nodes; when everything is isolated, keeps the node nearest
// the mean of z (highest cosine, ties to the lowest id).
void prune_isolated(ClassTopology& graph, const FeatureSet& z) {
  std::vector<int> isolated;
  for (const auto& [id, node] : graph.nodes()) {
    (void)node;
    if (graph.degree(id) == 0) isolated.push_back(id);
  }
  if (isolated.empty()) return;

  int keep = -1;
  if (isolated.size() == graph.node_count()) {
    keep = *isolated.begin();
    RawVector mean(z.dim(), 0.0);
    for (const auto& row : z.rows()) {
      for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += row.vector[i];
    }
    try {
      const UnitVector target = normalize(mean);
      double best = -2.0;
      for (const auto& [id, node] : graph.nodes()) {
        const double c = cosine_sim(target, node.unit);
        if (c > best) {
          best = c;
          keep = id;
        }
      }
    } catch (const ZeroNormError&) {
      // Degenerate mean: fall back to the lowest node id.
    }
  }
  for (int id : isolated) {
    if (id != keep) graph.remove_node(id);
  }
}

}  // namespace

void refine(ClassTopology& graph, const FeatureSet& z,
            const SoinnParams& params) {
  params.validate();
  if (graph.node_count() == 0) throw EmptyInputError("refine: empty graph");
  if (z.empty()) throw EmptyInputError("refine: empty feature set");

  Rng rng(params.rng_seed);
  std::vector<std::size_t> order(z.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (int pass = 0; pass < params.t_soinn; ++pass) {
    rng.shuffle(order);
    for (std::size_t idx : order) {
      present_signal(graph, z[idx].vector, params);
    }
    prune_isolated(graph, z);
  }
}

}  // namespace topoproto::soinn
