#pragma once

// Batch agglomerative clustering with average linkage (UPGMA) under cosine
// distance. Produces the full merge tree, flat cuts, and cluster centers used
// to seed the topology of a class.

#include <map>
#include <vector>

#include "topoproto/feature_set.hpp"

namespace topoproto::cluster {

struct MergeStep {
  int left;         // lower cluster id of the merged pair
  int right;        // higher cluster id
  double distance;  // mean pairwise cosine distance across the pair
  int merged;       // id of the new cluster (leaf_count + step index)
};

// Merge tree over the input rows. Leaves carry ids 0..n-1 in row order; each
// merge step creates id n+k. Linkage distances live in [0, 2] and are not
// required to be monotone (cosine UPGMA can invert).
struct Dendrogram {
  std::vector<SampleId> leaf_sample_ids;
  std::vector<MergeStep> steps;

  int leaf_count() const { return static_cast<int>(leaf_sample_ids.size()); }
};

struct ClusterAssignment {
  std::map<SampleId, int> labels;  // sample -> cluster index in [0, cluster_count)
  int cluster_count = 0;
};

// Builds the full UPGMA merge tree. Ties on the minimal linkage distance are
// broken by the lexicographically smallest (min_id, max_id) cluster pair.
// Uses the Lance-Williams average update, which reproduces the mean pairwise
// distance exactly.
Dendrogram upgma_cosine_linkage(const FeatureSet& z);

// Cuts the tree to k clusters by undoing the last k-1 merges; when the tree
// has at most k leaves every leaf becomes a singleton. Cluster indices are
// assigned by ascending smallest member sample id.
ClusterAssignment cut_to_k(const Dendrogram& tree, int k);

// Normalized mean of each cluster's members, ordered by cluster index.
std::vector<UnitVector> cluster_centers(const ClusterAssignment& assignment,
                                        const FeatureSet& z);

}  // namespace topoproto::cluster
