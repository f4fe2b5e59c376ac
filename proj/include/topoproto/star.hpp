#pragma once

// Residual drift alignment: every topology node is paired with one anchor
// sample. Re-embedding the anchor under the current backbone gives a
// pointwise drift, smoothed by EMA and applied to transport the node's raw
// coordinates; the class mean follows the average node drift.

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "topoproto/classifier.hpp"

namespace topoproto::star {

using SampleRef = SampleId;

struct Anchor {
  int node_id = -1;
  SampleRef sample_ref = -1;
  RawVector h_ref;  // reference feature of the anchor sample
  RawVector delta;  // smoothed drift, persists across alignment rounds
};

// Integration seam for backbones: re-embeds a stored sample under the
// current feature extractor. Must be deterministic within one alignment
// round and tolerate concurrent calls.
class FeatureExtractor {
 public:
  virtual ~FeatureExtractor() = default;
  virtual RawVector embed(SampleRef ref) const = 0;
};

class FunctionExtractor : public FeatureExtractor {
 public:
  using Fn = std::function<RawVector(SampleRef)>;
  explicit FunctionExtractor(Fn fn) : fn_(std::move(fn)) {}
  RawVector embed(SampleRef ref) const override { return fn_(ref); }

 private:
  Fn fn_;
};

// Anchor records per tracked class, exactly one per topology node.
class AnchorStore {
 public:
  bool empty() const { return per_class_.empty(); }
  bool has_class(int class_id) const { return per_class_.count(class_id) > 0; }
  const std::map<int, Anchor>& anchors(int class_id) const;
  std::map<int, Anchor>& anchors_mut(int class_id);
  void set_class(int class_id, std::map<int, Anchor> anchors);
  void erase_class(int class_id) { per_class_.erase(class_id); }
  const std::map<int, std::map<int, Anchor>>& per_class() const {
    return per_class_;
  }
  std::vector<int> class_ids() const;

 private:
  std::map<int, std::map<int, Anchor>> per_class_;
};

// Picks, for every node, the training sample with maximal cosine to the
// node's direction (ties: lowest sample id). One sample may anchor several
// nodes. h_ref starts at the sample's coordinates and delta at zero.
std::map<int, Anchor> select_anchors(const classifier::ClassModel& model,
                                     const FeatureSet& z);

struct AlignStats {
  int nodes_transported = 0;
  int nodes_skipped = 0;  // transport would have produced a zero vector
  std::vector<std::string> events;

  void merge(const AlignStats& other);
};

// One alignment round for a class: per node, drift = embed(anchor) - h_ref;
// delta <- (1 - lambda) * delta + lambda * drift; raw <- raw + delta;
// unit renormalized; h_ref refreshed. The class mean then moves by the
// average delta over nodes. Nodes whose transported raw would vanish are
// left untransported and logged.
AlignStats align_class(int class_id, classifier::ClassifierState& state,
                       AnchorStore& store, const FeatureExtractor& extractor,
                       double lambda);

// align_class over every tracked class; classes are independent and may be
// processed by up to `threads` workers.
AlignStats align_all(classifier::ClassifierState& state, AnchorStore& store,
                     const FeatureExtractor& extractor, double lambda,
                     int threads = 1);

}  // namespace topoproto::star
