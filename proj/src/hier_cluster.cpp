#include "topoproto/hier_cluster.hpp"

#include <algorithm>
#include <limits>
#include <string>

namespace topoproto::cluster {

Dendrogram upgma_cosine_linkage(const FeatureSet& z) {
  if (z.empty()) throw EmptyInputError("upgma_cosine_linkage: empty feature set");

  const int n = static_cast<int>(z.size());
  Dendrogram out;
  out.leaf_sample_ids.reserve(z.size());
  for (const auto& row : z.rows()) out.leaf_sample_ids.push_back(row.sample_id);
  if (n == 1) return out;

  const int total = 2 * n - 1;
  constexpr double kInf = std::numeric_limits<double>::infinity();
  // dist[b] holds distances to every cluster id < b; rows of merged clusters
  // are released as soon as they retire.
  std::vector<std::vector<double>> dist(total);
  std::vector<int> sizes(total, 0);
  // Per-cluster nearest neighbor among active ids ABOVE it, ties to the
  // smallest partner. Scanning rows in ascending id with these caches picks
  // the same pair as a full lexicographic scan would.
  std::vector<double> nn_dist(total, kInf);
  std::vector<int> nn_partner(total, -1);
  std::vector<int> active;
  active.reserve(n);

  for (int i = 0; i < n; ++i) {
    sizes[i] = 1;
    active.push_back(i);
    dist[i].resize(i);
    for (int j = 0; j < i; ++j) {
      const double d = 1.0 - cosine_sim(z[i].vector, z[j].vector);
      dist[i][j] = d;
      // pair (j, i) lives in row j
      if (d < nn_dist[j]) {
        nn_dist[j] = d;
        nn_partner[j] = i;
      }
    }
  }

  auto distance_at = [&dist](int a, int b) {
    return a < b ? dist[b][a] : dist[a][b];
  };
  auto rescan_row = [&](int a) {
    nn_dist[a] = kInf;
    nn_partner[a] = -1;
    for (int b : active) {
      if (b <= a) continue;
      const double d = distance_at(a, b);
      if (d < nn_dist[a]) {
        nn_dist[a] = d;
        nn_partner[a] = b;
      }
    }
  };

  out.steps.reserve(n - 1);
  for (int step = 0; step < n - 1; ++step) {
    double best = kInf;
    int best_a = -1;
    for (int a : active) {
      if (nn_dist[a] < best) {
        best = nn_dist[a];
        best_a = a;
      }
    }
    const int best_b = nn_partner[best_a];

    const int merged = n + step;
    sizes[merged] = sizes[best_a] + sizes[best_b];
    dist[merged].resize(merged, 0.0);
    const double wa = static_cast<double>(sizes[best_a]) / sizes[merged];
    const double wb = static_cast<double>(sizes[best_b]) / sizes[merged];
    for (int k : active) {
      if (k == best_a || k == best_b) continue;
      // Lance-Williams average update: exact UPGMA recurrence.
      dist[merged][k] = wa * distance_at(best_a, k) + wb * distance_at(best_b, k);
    }
    dist[best_a].clear();
    dist[best_a].shrink_to_fit();
    dist[best_b].clear();
    dist[best_b].shrink_to_fit();

    active.erase(std::remove_if(active.begin(), active.end(),
                                [&](int id) { return id == best_a || id == best_b; }),
                 active.end());

    for (int k : active) {
      if (nn_partner[k] == best_a || nn_partner[k] == best_b) {
        rescan_row(k);  // cached partner retired
      }
      // the new cluster is a fresh candidate partner for every lower row;
      // strict comparison keeps the smaller existing partner on ties
      const double d = dist[merged][k];
      if (d < nn_dist[k]) {
        nn_dist[k] = d;
        nn_partner[k] = merged;
      }
    }
    active.push_back(merged);
    nn_dist[merged] = kInf;  // no active ids above the newest cluster
    nn_partner[merged] = -1;

    out.steps.push_back(MergeStep{best_a, best_b, best, merged});
  }
  return out;
}

ClusterAssignment cut_to_k(const Dendrogram& tree, int k) {
  if (k < 1) {
    throw ConfigError("cut_to_k: target cluster count must be >= 1, got " +
                      std::to_string(k));
  }
  const int n = tree.leaf_count();
  if (n == 0) throw EmptyInputError("cut_to_k: empty dendrogram");

  const int merges_applied = std::max(0, n - k);

  // Union the first merges_applied steps over leaf representatives.
  std::vector<int> parent(n);
  for (int i = 0; i < n; ++i) parent[i] = i;
  auto find = [&parent](int x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };

  std::vector<int> rep(n + merges_applied, -1);
  for (int i = 0; i < n; ++i) rep[i] = i;
  for (int s = 0; s < merges_applied; ++s) {
    const MergeStep& step = tree.steps[static_cast<std::size_t>(s)];
    const int ra = find(rep[step.left]);
    const int rb = find(rep[step.right]);
    parent[rb] = ra;
    rep[step.merged] = ra;
  }

  // Order clusters by their smallest member sample id.
  std::map<int, SampleId> min_sample_of_root;
  for (int i = 0; i < n; ++i) {
    const int root = find(i);
    const SampleId sid = tree.leaf_sample_ids[static_cast<std::size_t>(i)];
    auto it = min_sample_of_root.find(root);
    if (it == min_sample_of_root.end() || sid < it->second) {
      min_sample_of_root[root] = sid;
    }
  }
  std::vector<std::pair<SampleId, int>> ordered;
  ordered.reserve(min_sample_of_root.size());
  for (const auto& [root, sid] : min_sample_of_root) ordered.emplace_back(sid, root);
  std::sort(ordered.begin(), ordered.end());

  std::map<int, int> index_of_root;
  for (std::size_t i = 0; i < ordered.size(); ++i) {
    index_of_root[ordered[i].second] = static_cast<int>(i);
  }

  ClusterAssignment out;
  out.cluster_count = static_cast<int>(ordered.size());
  for (int i = 0; i < n; ++i) {
    out.labels[tree.leaf_sample_ids[static_cast<std::size_t>(i)]] =
        index_of_root.at(find(i));
  }
  return out;
}

std::vector<UnitVector> cluster_centers(const ClusterAssignment& assignment,
                                        const FeatureSet& z) {
  if (z.empty()) throw EmptyInputError("cluster_centers: empty feature set");
  if (assignment.labels.size() != z.size()) {
    throw ConfigError("cluster_centers: assignment covers " +
                      std::to_string(assignment.labels.size()) +
                      " samples, feature set has " + std::to_string(z.size()));
  }

  const std::size_t d = z.dim();
  std::vector<RawVector> sums(static_cast<std::size_t>(assignment.cluster_count),
                              RawVector(d, 0.0));
  std::vector<std::size_t> counts(static_cast<std::size_t>(assignment.cluster_count), 0);

  for (const auto& row : z.rows()) {
    auto it = assignment.labels.find(row.sample_id);
    if (it == assignment.labels.end()) {
      throw ConfigError("cluster_centers: sample " +
                        std::to_string(row.sample_id) + " is unlabeled");
    }
    const auto c = static_cast<std::size_t>(it->second);
    for (std::size_t i = 0; i < d; ++i) sums[c][i] += row.vector[i];
    ++counts[c];
  }

  std::vector<UnitVector> centers;
  centers.reserve(sums.size());
  for (std::size_t c = 0; c < sums.size(); ++c) {
    if (counts[c] == 0) {
      throw ConfigError("cluster_centers: cluster " + std::to_string(c) +
                        " is empty");
    }
    RawVector mean(d);
    for (std::size_t i = 0; i < d; ++i) {
      mean[i] = sums[c][i] / static_cast<double>(counts[c]);
    }
    centers.push_back(normalize(mean));  // ZeroNorm propagates
  }
  return centers;
}

}  // namespace topoproto::cluster
