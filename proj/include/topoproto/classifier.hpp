#pragma once

// Topology-aware incremental classifier. Each class is modeled by a global
// mean direction plus a graph of local sub-prototypes; inference fuses the
// two views: alpha * cos(x, mean) + (1 - alpha) * max_node cos(x, node).

#include <map>

#include "topoproto/feature_set.hpp"
#include "topoproto/soinn.hpp"

namespace topoproto::classifier {

struct ClassifierConfig {
  double alpha = 0.5;  // global/local balance at inference
  int k_init = 60;     // target cluster count for the initial skeleton
  soinn::SoinnParams soinn;
  double lambda = 0.999;  // drift-alignment momentum

  void validate() const;
};

struct ClassModel {
  int class_id = -1;
  soinn::ClassTopology topology;
  RawVector mean_raw;
  UnitVector mean_unit;
};

// Immutable during inference; fitting inserts whole models. Class ids are
// disjoint across tasks and all models share one dimension.
class ClassifierState {
 public:
  explicit ClassifierState(ClassifierConfig config);

  const ClassifierConfig& config() const { return config_; }
  std::size_t dimension() const { return dimension_; }
  bool empty() const { return classes_.empty(); }
  std::size_t class_count() const { return classes_.size(); }
  const std::map<int, ClassModel>& classes() const { return classes_; }
  bool has_class(int class_id) const { return classes_.count(class_id) > 0; }
  const ClassModel& model(int class_id) const;
  ClassModel& model_mut(int class_id);

  void insert(ClassModel model);

 private:
  std::map<int, ClassModel> classes_;
  ClassifierConfig config_;
  std::size_t dimension_ = 0;
};

using ScoreVector = std::map<int, double>;  // class id -> score

// Fits one class: arithmetic mean + normalized mean direction, hierarchical
// skeleton cut to k_init, then SOINN refinement over the same samples. The
// refinement seed is derived from (config seed, class id).
ClassModel fit_class(int class_id, const FeatureSet& z,
                     const ClassifierConfig& config);

// Global-view score only: cos(x, mean_c) per class.
ScoreVector ncm_score(const UnitVector& x, const ClassifierState& state);

// Dual-view score: alpha * global + (1 - alpha) * best node cosine.
ScoreVector dual_view_score(const UnitVector& x, const ClassifierState& state);

// Argmax of the dual-view score; ties go to the lowest class id.
int predict(const UnitVector& x, const ClassifierState& state);

// Convex combination (1 - w) * local + w * external over matching class sets.
ScoreVector fuse_scores(const ScoreVector& local, const ScoreVector& external,
                        double w);

struct NodeStats {
  double avg_nodes_per_class = 0.0;
  std::map<int, std::size_t> per_class;
};

NodeStats node_stats(const ClassifierState& state);

}  // namespace topoproto::classifier
