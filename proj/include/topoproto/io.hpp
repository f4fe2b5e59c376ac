#pragma once

// Line-oriented text formats shared by the synthetic and real pipelines:
//
//   features v1   #topo-proto-features v1 d=<dim>
//                 sample_id,task_id,class_id,f_1,...,f_d
//
//   state v1      #topo-proto-state v1 with [meta] and [class <id>] sections
//                 listing mean_raw, nodes, edges and anchors
//
//   scores v1     #topo-proto-scores v1 classes=<c1>,<c2>,...
//                 sample_id,s_1,...,s_k
//
// Doubles are written with 17 significant digits, which round-trips IEEE
// doubles exactly; state save/load therefore reproduces scores bit for bit.

#include <map>
#include <string>
#include <vector>

#include "topoproto/classifier.hpp"
#include "topoproto/star.hpp"

namespace topoproto::io {

std::string format_double(double x);

struct FeatureRecord {
  SampleId sample_id;
  int task_id;
  int class_id;
  RawVector values;
};

struct TaskFeatures {
  std::map<int, std::map<int, FeatureSet>> by_task;  // task -> class -> set
  std::size_t dim = 0;

  std::vector<int> task_ids() const;
};

// Parses a features file. Vectors are normalized on load; zero-norm rows,
// duplicate sample ids within a task, and classes spanning several tasks are
// rejected with the offending line number.
TaskFeatures load_features(const std::string& path);

void write_features(const std::string& path, std::size_t dim,
                    const std::vector<FeatureRecord>& records);

void save_state(const classifier::ClassifierState& state,
                const star::AnchorStore& store, const std::string& path);

struct LoadedState {
  classifier::ClassifierState state;
  star::AnchorStore store;
};

LoadedState load_state(const std::string& path);

struct ScoreTable {
  std::vector<int> class_ids;
  std::map<SampleId, std::vector<double>> rows;
};

ScoreTable load_scores(const std::string& path);

}  // namespace topoproto::io
