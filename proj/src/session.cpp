#include "topoproto/session.hpp"

#include <chrono>
#include <filesystem>
#include <memory>
#include <ostream>

#include "topoproto/drift.hpp"
#include "topoproto/io.hpp"
#include "topoproto/parallel.hpp"
#include "topoproto/star.hpp"

namespace topoproto::session {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Uniform view over synthetic and file-backed streams.
class SessionStream {
 public:
  virtual ~SessionStream() = default;
  virtual int task_count() const = 0;
  virtual std::map<int, FeatureSet> train(int t) = 0;
  virtual std::map<int, FeatureSet> heldout(int t) = 0;
  virtual std::unique_ptr<star::FeatureExtractor> extractor(int t) = 0;
};

class SyntheticStream : public SessionStream {
 public:
  explicit SyntheticStream(synth::TaskStream stream)
      : stream_(std::move(stream)) {}

  int task_count() const override { return stream_.task_count(); }
  std::map<int, FeatureSet> train(int t) override {
    return stream_.train_features(t);
  }
  std::map<int, FeatureSet> heldout(int t) override {
    return stream_.heldout_at(t);
  }
  std::unique_ptr<star::FeatureExtractor> extractor(int t) override {
    return stream_.extractor_at(t);
  }

 private:
  synth::TaskStream stream_;
};

class FileExtractor : public star::FeatureExtractor {
 public:
  explicit FileExtractor(const std::string& path) {
    const io::TaskFeatures loaded = io::load_features(path);
    for (const auto& [t, classes] : loaded.by_task) {
      (void)t;
      for (const auto& [cid, fs] : classes) {
        (void)cid;
        for (const auto& row : fs.rows()) {
          table_[row.sample_id] = row.vector.data();
        }
      }
    }
  }

  RawVector embed(star::SampleRef ref) const override {
    auto it = table_.find(ref);
    if (it == table_.end()) {
      throw SampleMismatchError("re-embedding file has no sample " +
                                std::to_string(ref));
    }
    return it->second;
  }

 private:
  std::map<SampleId, RawVector> table_;
};

class FileStream : public SessionStream {
 public:
  FileStream(const std::string& train_path,
             std::vector<std::string> eval_paths,
             std::vector<std::string> reembed_paths, bool star_enabled)
      : eval_paths_(std::move(eval_paths)),
        reembed_paths_(std::move(reembed_paths)) {
    if (train_path.empty()) {
      throw ConfigError("file session needs a training features file");
    }
    train_ = io::load_features(train_path);
    task_order_ = train_.task_ids();
    if (task_order_.empty()) {
      throw ConfigError("training file '" + train_path + "' holds no tasks");
    }
    if (eval_paths_.size() != task_order_.size()) {
      throw ConfigError("expected one eval file per task (" +
                        std::to_string(task_order_.size()) + "), got " +
                        std::to_string(eval_paths_.size()));
    }
    if (star_enabled && reembed_paths_.size() != task_order_.size() - 1) {
      throw ConfigError(
          "alignment over files needs one re-embedding file per task after "
          "the first (" +
          std::to_string(task_order_.size() - 1) + "), got " +
          std::to_string(reembed_paths_.size()));
    }
  }

  int task_count() const override {
    return static_cast<int>(task_order_.size());
  }

  std::map<int, FeatureSet> train(int t) override {
    return train_.by_task.at(task_order_.at(static_cast<std::size_t>(t)));
  }

  std::map<int, FeatureSet> heldout(int t) override {
    const io::TaskFeatures loaded =
        io::load_features(eval_paths_.at(static_cast<std::size_t>(t)));
    std::map<int, FeatureSet> merged;
    for (const auto& [task, classes] : loaded.by_task) {
      (void)task;
      for (const auto& [cid, fs] : classes) {
        if (!merged.emplace(cid, fs).second) {
          throw ConfigError("eval file '" +
                            eval_paths_.at(static_cast<std::size_t>(t)) +
                            "' lists class " + std::to_string(cid) + " twice");
        }
      }
    }
    return merged;
  }

  std::unique_ptr<star::FeatureExtractor> extractor(int t) override {
    if (t < 1) throw ConfigError("no re-embedding before the second task");
    return std::make_unique<FileExtractor>(
        reembed_paths_.at(static_cast<std::size_t>(t - 1)));
  }

 private:
  io::TaskFeatures train_;
  std::vector<int> task_order_;
  std::vector<std::string> eval_paths_;
  std::vector<std::string> reembed_paths_;
};

std::unique_ptr<SessionStream> open_stream(const RunConfig& config) {
  if (config.source.synthetic.has_value()) {
    return std::make_unique<SyntheticStream>(
        synth::make_stream(*config.source.synthetic));
  }
  return std::make_unique<FileStream>(
      config.source.train_path, config.source.eval_paths,
      config.source.reembed_paths, config.star_enabled);
}

}  // namespace

Report run_session(const RunConfig& config,
                   classifier::ClassifierState* out_state,
                   star::AnchorStore* out_store) {
  config.classifier.validate();
  if (config.fusion_w != 0.0) {
    throw ConfigError(
        "sessions carry no external scores; score fusion is available in the "
        "predict command");
  }

  std::unique_ptr<SessionStream> stream = open_stream(config);
  const int tasks = stream->task_count();

  classifier::ClassifierState state{config.classifier};
  star::AnchorStore store;

  Report report;
  report.alpha = config.classifier.alpha;
  report.k_init = config.classifier.k_init;
  report.age_max = config.classifier.soinn.age_max;
  report.t_soinn = config.classifier.soinn.t_soinn;
  report.eta1 = config.classifier.soinn.eta1;
  report.eta2 = config.classifier.soinn.eta2;
  report.lambda = config.classifier.lambda;
  report.model_seed = config.classifier.soinn.rng_seed;
  report.stream_seed =
      config.source.synthetic ? config.source.synthetic->seed : 0;
  report.star = config.star_enabled;
  report.fusion_w = config.fusion_w;

  std::vector<int> init_classes;
  std::map<int, drift::FeatureMatrix> procrustes_ref;

  for (int t = 0; t < tasks; ++t) {
    // Align the classes of earlier tasks to the current embedding.
    if (config.star_enabled && t > 0 && !store.empty()) {
      const auto start = Clock::now();
      const std::unique_ptr<star::FeatureExtractor> extractor =
          stream->extractor(t);
      star::align_all(state, store, *extractor, config.classifier.lambda,
                      config.threads);
      report.timings.align_seconds += seconds_since(start);
    }

    {
      const auto start = Clock::now();
      const std::map<int, FeatureSet> train = stream->train(t);
      std::vector<std::pair<int, const FeatureSet*>> items;
      items.reserve(train.size());
      for (const auto& [cid, fs] : train) items.emplace_back(cid, &fs);

      std::vector<std::optional<classifier::ClassModel>> fitted(items.size());
      std::vector<std::map<int, star::Anchor>> anchors(items.size());
      parallel_for(items.size(), config.threads, [&](std::size_t i) {
        fitted[i] = classifier::fit_class(items[i].first, *items[i].second,
                                          config.classifier);
        if (config.star_enabled) {
          anchors[i] = star::select_anchors(*fitted[i], *items[i].second);
        }
      });
      for (std::size_t i = 0; i < items.size(); ++i) {
        state.insert(std::move(*fitted[i]));
        if (config.star_enabled) {
          store.set_class(items[i].first, std::move(anchors[i]));
        }
      }
      report.timings.fit_seconds += seconds_since(start);
      // Training features go out of scope here; anchors are the only
      // retained per-sample state.
    }

    const std::map<int, FeatureSet> eval = stream->heldout(t);

    {
      const auto start = Clock::now();
      std::vector<std::pair<const UnitVector*, int>> queries;
      for (const auto& [cid, fs] : eval) {
        for (const auto& row : fs.rows()) {
          queries.emplace_back(&row.vector, cid);
        }
      }
      std::vector<char> correct(queries.size(), 0);
      parallel_for(queries.size(), config.threads, [&](std::size_t i) {
        correct[i] =
            classifier::predict(*queries[i].first, state) == queries[i].second;
      });
      std::size_t hits = 0;
      for (char c : correct) hits += static_cast<std::size_t>(c);
      report.per_task_accuracy.push_back(
          queries.empty() ? 0.0
                          : static_cast<double>(hits) /
                                static_cast<double>(queries.size()));
      report.timings.eval_seconds += seconds_since(start);
    }

    {
      const auto start = Clock::now();
      if (t == 0) {
        for (const auto& [cid, fs] : eval) {
          init_classes.push_back(cid);
          procrustes_ref.emplace(cid, drift::to_feature_matrix(fs));
        }
      }
      std::map<int, drift::FeatureMatrix> current;
      for (int cid : init_classes) {
        auto it = eval.find(cid);
        if (it == eval.end()) {
          throw MissingClassError("eval snapshot for task " +
                                  std::to_string(t) + " lacks initial class " +
                                  std::to_string(cid));
        }
        current.emplace(cid, drift::to_feature_matrix(it->second));
      }
      report.procrustes_curve.push_back(
          drift::average_procrustes(init_classes, procrustes_ref, current));
      report.timings.drift_seconds += seconds_since(start);
    }
  }

  double total = 0.0;
  for (double a : report.per_task_accuracy) total += a;
  report.a_avg = total / static_cast<double>(report.per_task_accuracy.size());
  report.a_last = report.per_task_accuracy.back();
  report.node_stats = classifier::node_stats(state);

  if (out_state != nullptr) *out_state = std::move(state);
  if (out_store != nullptr) *out_store = std::move(store);
  return report;
}

void write_report_text(const Report& report, std::ostream& out) {
  out << "incremental session over " << report.per_task_accuracy.size()
      << " tasks\n";
  out << "  alpha=" << report.alpha << " k_init=" << report.k_init
      << " age_max=" << report.age_max << " t_soinn=" << report.t_soinn
      << " eta1=" << report.eta1 << " eta2=" << report.eta2
      << " lambda=" << report.lambda << " star=" << (report.star ? "on" : "off")
      << "\n";
  out << "  model_seed=" << report.model_seed
      << " stream_seed=" << report.stream_seed << "\n\n";
  out << "  task  accuracy   procrustes\n";
  for (std::size_t t = 0; t < report.per_task_accuracy.size(); ++t) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "  %4zu  %8.4f   %10.6f\n", t,
                  report.per_task_accuracy[t], report.procrustes_curve[t]);
    out << buf;
  }
  out << "\n";
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "  a_avg=%.4f a_last=%.4f avg_nodes_per_class=%.2f\n",
                report.a_avg, report.a_last,
                report.node_stats.avg_nodes_per_class);
  out << buf;
  std::snprintf(buf, sizeof buf,
                "  timings: fit=%.3fs align=%.3fs eval=%.3fs drift=%.3fs\n",
                report.timings.fit_seconds, report.timings.align_seconds,
                report.timings.eval_seconds, report.timings.drift_seconds);
  out << buf;
}

void write_report_table(const Report& report, std::ostream& out) {
  out << "#topo-proto-report v1\n";
  out << "config,alpha," << io::format_double(report.alpha) << "\n";
  out << "config,k_init," << report.k_init << "\n";
  out << "config,age_max," << report.age_max << "\n";
  out << "config,t_soinn," << report.t_soinn << "\n";
  out << "config,eta1," << io::format_double(report.eta1) << "\n";
  out << "config,eta2," << io::format_double(report.eta2) << "\n";
  out << "config,lambda," << io::format_double(report.lambda) << "\n";
  out << "config,model_seed," << report.model_seed << "\n";
  out << "config,stream_seed," << report.stream_seed << "\n";
  out << "config,star," << (report.star ? 1 : 0) << "\n";
  out << "config,fusion_w," << io::format_double(report.fusion_w) << "\n";
  for (std::size_t t = 0; t < report.per_task_accuracy.size(); ++t) {
    out << "task," << t << ",accuracy,"
        << io::format_double(report.per_task_accuracy[t]) << ",procrustes,"
        << io::format_double(report.procrustes_curve[t]) << "\n";
  }
  for (const auto& [cid, count] : report.node_stats.per_class) {
    out << "class_nodes," << cid << "," << count << "\n";
  }
  out << "summary,a_avg," << io::format_double(report.a_avg) << ",a_last,"
      << io::format_double(report.a_last) << ",avg_nodes,"
      << io::format_double(report.node_stats.avg_nodes_per_class) << "\n";
}

std::vector<Report> sweep(const RunConfig& base, const SweepGrid& grid) {
  const std::vector<double> alphas =
      grid.alpha.empty() ? std::vector<double>{base.classifier.alpha}
                         : grid.alpha;
  const std::vector<int> k_inits =
      grid.k_init.empty() ? std::vector<int>{base.classifier.k_init}
                          : grid.k_init;
  const std::vector<int> age_maxes =
      grid.age_max.empty() ? std::vector<int>{base.classifier.soinn.age_max}
                           : grid.age_max;
  const std::vector<int> t_soinns =
      grid.t_soinn.empty() ? std::vector<int>{base.classifier.soinn.t_soinn}
                           : grid.t_soinn;
  const std::vector<double> lambdas =
      grid.lambda.empty() ? std::vector<double>{base.classifier.lambda}
                          : grid.lambda;

  std::vector<Report> reports;
  for (double alpha : alphas) {
    for (int k_init : k_inits) {
      for (int age_max : age_maxes) {
        for (int t_soinn : t_soinns) {
          for (double lambda : lambdas) {
            RunConfig config = base;
            config.classifier.alpha = alpha;
            config.classifier.k_init = k_init;
            config.classifier.soinn.age_max = age_max;
            config.classifier.soinn.t_soinn = t_soinn;
            config.classifier.lambda = lambda;
            reports.push_back(run_session(config));
          }
        }
      }
    }
  }
  return reports;
}

void write_sweep_table(const std::vector<Report>& reports, std::ostream& out) {
  out << "#topo-proto-sweep v1\n";
  out << "alpha,k_init,age_max,t_soinn,lambda,a_avg,a_last,avg_nodes\n";
  for (const auto& r : reports) {
    out << io::format_double(r.alpha) << ',' << r.k_init << ',' << r.age_max
        << ',' << r.t_soinn << ',' << io::format_double(r.lambda) << ','
        << io::format_double(r.a_avg) << ',' << io::format_double(r.a_last)
        << ',' << io::format_double(r.node_stats.avg_nodes_per_class) << "\n";
  }
}

std::vector<std::string> export_stream(const synth::TaskStream& stream,
                                       const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  std::vector<std::string> written;

  std::vector<io::FeatureRecord> all_train;
  for (int t = 0; t < stream.task_count(); ++t) {
    for (const auto& [cid, fs] : stream.train_features(t)) {
      for (const auto& row : fs.rows()) {
        all_train.push_back(
            io::FeatureRecord{row.sample_id, t, cid, row.vector.data()});
      }
    }
  }
  const std::string all_train_path = out_dir + "/train_all.features";
  io::write_features(all_train_path, stream.dim(), all_train);
  written.push_back(all_train_path);

  for (int t = 0; t < stream.task_count(); ++t) {
    std::vector<io::FeatureRecord> train_records;
    for (const auto& [cid, fs] : stream.train_features(t)) {
      for (const auto& row : fs.rows()) {
        train_records.push_back(
            io::FeatureRecord{row.sample_id, t, cid, row.vector.data()});
      }
    }
    const std::string train_path =
        out_dir + "/task" + std::to_string(t) + "_train.features";
    io::write_features(train_path, stream.dim(), train_records);
    written.push_back(train_path);

    std::vector<io::FeatureRecord> eval_records;
    for (const auto& [cid, fs] : stream.heldout_at(t)) {
      for (const auto& row : fs.rows()) {
        eval_records.push_back(
            io::FeatureRecord{row.sample_id, t, cid, row.vector.data()});
      }
    }
    const std::string eval_path =
        out_dir + "/task" + std::to_string(t) + "_eval.features";
    io::write_features(eval_path, stream.dim(), eval_records);
    written.push_back(eval_path);

    if (t >= 1) {
      // Current-task re-embeddings of every earlier training sample; this is
      // what the file-backed extractor serves to the alignment pass.
      const synth::DriftMap& map = stream.drift_at(t);
      std::vector<io::FeatureRecord> reembed_records;
      for (int c = 0; c < t * stream.classes_per_task(); ++c) {
        for (const auto& row : stream.base_train().at(c).rows()) {
          reembed_records.push_back(io::FeatureRecord{
              row.sample_id, t, c, map.apply(row.vector.data())});
        }
      }
      const std::string reembed_path =
          out_dir + "/task" + std::to_string(t) + "_reembed.features";
      io::write_features(reembed_path, stream.dim(), reembed_records);
      written.push_back(reembed_path);
    }
  }
  return written;
}

}  // namespace topoproto::session
