#pragma once

// Procrustes quantification of manifold deformation between two embeddings
// of the same samples, plus radius diagnostics for the quantization-error
// bound of the topology.

#include <map>
#include <utility>
#include <vector>

#include "topoproto/classifier.hpp"
#include "topoproto/feature_set.hpp"

namespace topoproto::drift {

struct FeatureMatrix {
  std::vector<std::pair<SampleId, RawVector>> rows;

  std::size_t size() const { return rows.size(); }
  std::size_t dim() const { return rows.empty() ? 0 : rows.front().second.size(); }
};

FeatureMatrix to_feature_matrix(const FeatureSet& z);

struct ProcrustesResult {
  double distance = 0.0;             // in [0, sqrt(2)]
  std::vector<RawVector> rotation;   // d x d orthogonal map (diagnostic)
};

// Full Procrustes distance: rows matched by sample id, both matrices
// column-centered and scaled to unit Frobenius norm, the optimal orthogonal
// (rotation + reflection) map taken from the SVD of the cross-covariance,
// distance = Frobenius norm of the aligned residual. Bitwise-identical
// inputs short-circuit to exactly zero.
ProcrustesResult procrustes_distance(const FeatureMatrix& h1,
                                     const FeatureMatrix& h2);

// Mean per-class Procrustes distance over class_ids.
double average_procrustes(const std::vector<int>& class_ids,
                          const std::map<int, FeatureMatrix>& reference,
                          const std::map<int, FeatureMatrix>& current);

struct RadiusReport {
  double global_radius = 0.0;  // max Euclidean distance sample -> class mean
  double local_radius = 0.0;   // max over nodes of the node's member radius
  std::vector<std::pair<int, double>> per_node_radii;  // ascending node id
};

// Assigns each sample to its nearest node by cosine and measures Euclidean
// radii: global against the mean direction, local per node.
RadiusReport manifold_radii(const FeatureSet& z,
                            const classifier::ClassModel& model);

}  // namespace topoproto::drift
