#include "topoproto/star.hpp"

#include <string>

#include "topoproto/parallel.hpp"

namespace topoproto::star {

const std::map<int, Anchor>& AnchorStore::anchors(int class_id) const {
  auto it = per_class_.find(class_id);
  if (it == per_class_.end()) {
    throw MissingClassError("no anchors for class " + std::to_string(class_id));
  }
  return it->second;
}

std::map<int, Anchor>& AnchorStore::anchors_mut(int class_id) {
  auto it = per_class_.find(class_id);
  if (it == per_class_.end()) {
    throw MissingClassError("no anchors for class " + std::to_string(class_id));
  }
  return it->second;
}

void AnchorStore::set_class(int class_id, std::map<int, Anchor> anchors) {
  per_class_[class_id] = std::move(anchors);
}

std::vector<int> AnchorStore::class_ids() const {
  std::vector<int> ids;
  ids.reserve(per_class_.size());
  for (const auto& [cid, anchors] : per_class_) {
    (void)anchors;
    ids.push_back(cid);
  }
  return ids;
}

std::map<int, Anchor> select_anchors(const classifier::ClassModel& model,
                                     const FeatureSet& z) {
  if (z.empty()) throw EmptyInputError("select_anchors: empty feature set");

  std::map<int, Anchor> anchors;
  for (const auto& [node_id, node] : model.topology.nodes()) {
    double best = -2.0;
    const FeatureRow* pick = nullptr;
    for (const auto& row : z.rows()) {
      const double c = cosine_sim(node.unit, row.vector);
      if (c > best || (c == best && pick != nullptr &&
                       row.sample_id < pick->sample_id)) {
        best = c;
        pick = &row;
      }
    }
    Anchor a;
    a.node_id = node_id;
    a.sample_ref = pick->sample_id;
    a.h_ref = pick->vector.data();
    a.delta = RawVector(z.dim(), 0.0);
    anchors.emplace(node_id, std::move(a));
  }
  return anchors;
}

void AlignStats::merge(const AlignStats& other) {
  nodes_transported += other.nodes_transported;
  nodes_skipped += other.nodes_skipped;
  events.insert(events.end(), other.events.begin(), other.events.end());
}

AlignStats align_class(int class_id, classifier::ClassifierState& state,
                       AnchorStore& store, const FeatureExtractor& extractor,
                       double lambda) {
  if (!(lambda > 0.0 && lambda <= 1.0)) {
    throw ConfigError("lambda must lie in (0, 1], got " + std::to_string(lambda));
  }
  classifier::ClassModel& model = state.model_mut(class_id);
  std::map<int, Anchor>& anchors = store.anchors_mut(class_id);

  AlignStats stats;
  const std::size_t d = state.dimension();
  RawVector delta_sum(d, 0.0);

  for (const auto& [node_id, node] : model.topology.nodes()) {
    (void)node;
    auto it = anchors.find(node_id);
    if (it == anchors.end()) {
      throw MissingClassError("class " + std::to_string(class_id) +
                              " has no anchor for node " +
                              std::to_string(node_id));
    }
    Anchor& anchor = it->second;

    RawVector current = extractor.embed(anchor.sample_ref);
    if (current.size() != d) {
      throw DimensionMismatchError("extractor returned dimension " +
                                   std::to_string(current.size()) +
                                   ", expected " + std::to_string(d));
    }
    if (!all_finite(current)) {
      throw ConfigError("extractor returned non-finite features for sample " +
                        std::to_string(anchor.sample_ref));
    }

    for (std::size_t i = 0; i < d; ++i) {
      const double drift = current[i] - anchor.h_ref[i];
      anchor.delta[i] = (1.0 - lambda) * anchor.delta[i] + lambda * drift;
    }

    RawVector moved(d);
    const RawVector& raw = model.topology.node(node_id).raw;
    for (std::size_t i = 0; i < d; ++i) moved[i] = raw[i] + anchor.delta[i];
    if (norm(moved) <= kNormEps) {
      ++stats.nodes_skipped;
      stats.events.push_back("class " + std::to_string(class_id) + " node " +
                             std::to_string(node_id) +
                             ": transported coordinates vanished, left in place");
    } else {
      model.topology.set_node_coords(node_id, std::move(moved));
      ++stats.nodes_transported;
    }

    anchor.h_ref = std::move(current);
    for (std::size_t i = 0; i < d; ++i) delta_sum[i] += anchor.delta[i];
  }

  const auto node_count = static_cast<double>(model.topology.node_count());
  RawVector new_mean(d);
  for (std::size_t i = 0; i < d; ++i) {
    new_mean[i] = model.mean_raw[i] + delta_sum[i] / node_count;
  }
  if (norm(new_mean) <= kNormEps) {
    stats.events.push_back("class " + std::to_string(class_id) +
                           ": shifted mean vanished, left in place");
  } else {
    model.mean_raw = std::move(new_mean);
    model.mean_unit = normalize(model.mean_raw);
  }
  return stats;
}

AlignStats align_all(classifier::ClassifierState& state, AnchorStore& store,
                     const FeatureExtractor& extractor, double lambda,
                     int threads) {
  const std::vector<int> ids = store.class_ids();
  for (int cid : ids) {
    if (!state.has_class(cid)) {
      throw MissingClassError("anchor store tracks class " +
                              std::to_string(cid) +
                              " which is absent from the state");
    }
  }

  std::vector<AlignStats> per_class(ids.size());
  parallel_for(ids.size(), threads, [&](std::size_t i) {
    per_class[i] = align_class(ids[i], state, store, extractor, lambda);
  });

  AlignStats total;
  for (const auto& s : per_class) total.merge(s);
  return total;
}

}  // namespace topoproto::star
