#include "topoproto/feature_set.hpp"

#include <string>

namespace topoproto {

void FeatureSet::add(SampleId sample_id, UnitVector vector) {
  if (!rows_.empty() && vector.dim() != dim()) {
    throw DimensionMismatchError(
        "feature set holds dimension " + std::to_string(dim()) +
        ", sample " + std::to_string(sample_id) + " has " +
        std::to_string(vector.dim()));
  }
  if (!ids_.insert(sample_id).second) {
    throw ConfigError("duplicate sample id " + std::to_string(sample_id));
  }
  rows_.push_back(FeatureRow{sample_id, std::move(vector)});
}

}  // namespace topoproto
