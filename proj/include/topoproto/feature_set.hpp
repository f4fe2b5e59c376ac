#pragma once

#include <cstdint>
#include <unordered_set>
#include <vector>

#include "topoproto/geometry.hpp"

namespace topoproto {

using SampleId = std::int64_t;

struct FeatureRow {
  SampleId sample_id;
  UnitVector vector;
};

// Ordered collection of unit features with unique sample ids and a single
// shared dimension. Row order is preserved (and meaningful: downstream
// passes iterate it deterministically).
class FeatureSet {
 public:
  FeatureSet() = default;

  void add(SampleId sample_id, UnitVector vector);

  const std::vector<FeatureRow>& rows() const { return rows_; }
  const FeatureRow& operator[](std::size_t i) const { return rows_[i]; }
  std::size_t size() const { return rows_.size(); }
  bool empty() const { return rows_.empty(); }
  std::size_t dim() const {
    return rows_.empty() ? 0 : rows_.front().vector.dim();
  }
  bool contains(SampleId sample_id) const {
    return ids_.count(sample_id) > 0;
  }

 private:
  std::vector<FeatureRow> rows_;
  std::unordered_set<SampleId> ids_;
};

}  // namespace topoproto
