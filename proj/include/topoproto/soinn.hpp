#pragma once

// Spherical SOINN refinement: competitive Hebbian topology learning with edge
// aging, SLERP node migration, and isolated-node pruning. No node insertion
// and no density-based deletion; the node set only ever shrinks.

#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "topoproto/feature_set.hpp"
#include "topoproto/rng.hpp"

namespace topoproto::soinn {

struct SoinnParams {
  double eta1 = 0.1;   // winner learning rate
  double eta2 = 0.01;  // neighbor learning rate
  int age_max = 20;
  int t_soinn = 1;     // refinement passes over the data
  std::uint64_t rng_seed = 0;

  void validate() const;  // 0 < eta2 <= eta1 < 1, age_max >= 1, t_soinn >= 1
};

struct TopoNode {
  int node_id;
  UnitVector unit;  // always normalize(raw), bit-for-bit
  RawVector raw;
};

using EdgeKey = std::pair<int, int>;  // (lo, hi), lo < hi

// Graph of sub-prototype nodes and aged edges for one class. Node and edge
// containers are ordered maps so iteration is deterministic.
class ClassTopology {
 public:
  const std::map<int, TopoNode>& nodes() const { return nodes_; }
  const std::map<EdgeKey, int>& edges() const { return edges_; }  // value: age
  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  std::size_t dim() const;
  bool has_node(int id) const { return nodes_.count(id) > 0; }
  const TopoNode& node(int id) const;
  std::vector<int> neighbors(int id) const;  // ascending node ids
  int degree(int id) const;

  // Mutators keep the invariants: no self-loops, edge endpoints present,
  // unit == normalize(raw).
  void add_node(int id, RawVector raw);
  void add_edge(int a, int b, int age);
  void set_node_coords(int id, RawVector raw);
  void refresh_edge(int a, int b);  // create at age 0 or reset to 0
  void age_edges_incident(int id, int except_neighbor);  // -1: age all
  void prune_edges_older_than(int age_max);
  void remove_node(int id);  // drops incident edges

 private:
  std::map<int, TopoNode> nodes_;
  std::map<EdgeKey, int> edges_;
};

// One fresh node per center (ids 0..n-1), empty edge set.
ClassTopology init_from_centers(const std::vector<UnitVector>& centers);

// Winner and runner-up by cosine similarity; ties go to the lowest node id.
// The runner-up is absent when the graph has a single node.
std::pair<int, std::optional<int>> find_winners(const ClassTopology& graph,
                                                const UnitVector& z);

// One competitive Hebbian step, in order: find winners; create or refresh
// edge (s1, s2) at age 0; age the other edges incident to s1; move s1 by
// slerp(., z, eta1) and its topological neighbors by slerp(., z, eta2);
// prune edges older than age_max. Antipodal updates are skipped per node.
void present_signal(ClassTopology& graph, const UnitVector& z,
                    const SoinnParams& params);

// t_soinn passes over z in a seeded shuffled order, pruning isolated nodes
// after each pass. If pruning would empty the graph, the node nearest the
// mean of z is retained.
void refine(ClassTopology& graph, const FeatureSet& z,
            const SoinnParams& params);

}  // namespace topoproto::soinn
