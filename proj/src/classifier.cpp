#include "topoproto/classifier.hpp"

#include <string>

#include "topoproto/hier_cluster.hpp"

namespace topoproto::classifier {

void ClassifierConfig::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw ConfigError("alpha must lie in [0, 1], got " + std::to_string(alpha));
  }
  if (!(lambda > 0.0 && lambda <= 1.0)) {
    throw ConfigError("lambda must lie in (0, 1], got " + std::to_string(lambda));
  }
  if (k_init < 1) {
    throw ConfigError("k_init must be >= 1, got " + std::to_string(k_init));
  }
  soinn.validate();
}

ClassifierState::ClassifierState(ClassifierConfig config)
    : config_(std::move(config)) {
  config_.validate();
}

const ClassModel& ClassifierState::model(int class_id) const {
  auto it = classes_.find(class_id);
  if (it == classes_.end()) {
    throw MissingClassError("no model for class " + std::to_string(class_id));
  }
  return it->second;
}

ClassModel& ClassifierState::model_mut(int class_id) {
  auto it = classes_.find(class_id);
  if (it == classes_.end()) {
    throw MissingClassError("no model for class " + std::to_string(class_id));
  }
  return it->second;
}

void ClassifierState::insert(ClassModel model) {
  if (classes_.count(model.class_id) > 0) {
    throw ConfigError("class " + std::to_string(model.class_id) +
                      " is already fitted; class ids are disjoint across tasks");
  }
  if (model.topology.node_count() == 0) {
    throw ConfigError("class model must carry a nonempty topology");
  }
  const std::size_t d = model.mean_unit.dim();
  if (dimension_ == 0) {
    dimension_ = d;
  } else if (d != dimension_) {
    throw DimensionMismatchError("class " + std::to_string(model.class_id) +
                                 " has dimension " + std::to_string(d) +
                                 ", state holds " + std::to_string(dimension_));
  }
  classes_.emplace(model.class_id, std::move(model));
}

ClassModel fit_class(int class_id, const FeatureSet& z,
                     const ClassifierConfig& config) {
  config.validate();
  if (z.empty()) throw EmptyInputError("fit_class: empty feature set");

  const std::size_t d = z.dim();
  RawVector mean_raw(d, 0.0);
  for (const auto& row : z.rows()) {
    for (std::size_t i = 0; i < d; ++i) mean_raw[i] += row.vector[i];
  }
  for (std::size_t i = 0; i < d; ++i) {
    mean_raw[i] /= static_cast<double>(z.size());
  }
  UnitVector mean_unit = normalize(mean_raw);  // ZeroNorm propagates

  const cluster::Dendrogram tree = cluster::upgma_cosine_linkage(z);
  const cluster::ClusterAssignment cut = cluster::cut_to_k(tree, config.k_init);
  const std::vector<UnitVector> centers = cluster::cluster_centers(cut, z);

  soinn::ClassTopology topology = soinn::init_from_centers(centers);
  soinn::SoinnParams params = config.soinn;
  params.rng_seed = mix_seed(config.soinn.rng_seed,
                             static_cast<std::uint64_t>(class_id));
  soinn::refine(topology, z, params);

  return ClassModel{class_id, std::move(topology), std::move(mean_raw),
                    std::move(mean_unit)};
}

namespace {

void require_scorable(const UnitVector& x, const ClassifierState& state) {
  if (state.empty()) throw EmptyStateError("classifier state holds no classes");
  if (x.dim() != state.dimension()) {
    throw DimensionMismatchError("query has dimension " +
                                 std::to_string(x.dim()) + ", state holds " +
                                 std::to_string(state.dimension()));
  }
}

double best_node_cosine(const UnitVector& x, const soinn::ClassTopology& g) {
  double best = -2.0;
  for (const auto& [id, node] : g.nodes()) {
    (void)id;
    const double c = cosine_sim(x, node.unit);
    if (c > best) best = c;
  }
  return best;
}

}  // namespace

ScoreVector ncm_score(const UnitVector& x, const ClassifierState& state) {
  require_scorable(x, state);
  ScoreVector scores;
  for (const auto& [cid, model] : state.classes()) {
    scores[cid] = cosine_sim(x, model.mean_unit);
  }
  return scores;
}

ScoreVector dual_view_score(const UnitVector& x, const ClassifierState& state) {
  require_scorable(x, state);
  const double alpha = state.config().alpha;
  ScoreVector scores;
  for (const auto& [cid, model] : state.classes()) {
    const double global = cosine_sim(x, model.mean_unit);
    const double local = best_node_cosine(x, model.topology);
    scores[cid] = alpha * global + (1.0 - alpha) * local;
  }
  return scores;
}

int predict(const UnitVector& x, const ClassifierState& state) {
  const ScoreVector scores = dual_view_score(x, state);
  int best_class = scores.begin()->first;
  double best = scores.begin()->second;
  for (const auto& [cid, s] : scores) {
    if (s > best) {  // strict: ties keep the lowest class id
      best = s;
      best_class = cid;
    }
  }
  return best_class;
}

ScoreVector fuse_scores(const ScoreVector& local, const ScoreVector& external,
                        double w) {
  if (!(w >= 0.0 && w <= 1.0)) {
    throw ConfigError("fusion weight must lie in [0, 1], got " +
                      std::to_string(w));
  }
  if (local.size() != external.size()) {
    throw ClassSetMismatchError("score vectors cover different class sets");
  }
  ScoreVector fused;
  auto it = external.begin();
  for (const auto& [cid, s] : local) {
    if (it->first != cid) {
      throw ClassSetMismatchError("score vectors cover different class sets");
    }
    fused[cid] = (1.0 - w) * s + w * it->second;
    ++it;
  }
  return fused;
}

NodeStats node_stats(const ClassifierState& state) {
  if (state.empty()) throw EmptyStateError("node_stats: empty state");
  NodeStats stats;
  double total = 0.0;
  for (const auto& [cid, model] : state.classes()) {
    const std::size_t n = model.topology.node_count();
    stats.per_class[cid] = n;
    total += static_cast<double>(n);
  }
  stats.avg_nodes_per_class = total / static_cast<double>(state.class_count());
  return stats;
}

}  // namespace topoproto::classifier
