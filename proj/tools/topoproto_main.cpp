// Command-line front end: synthetic stream generation, fitting, prediction,
// full incremental benchmarks, drift reports, and hyperparameter sweeps.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "topoproto/drift.hpp"
#include "topoproto/io.hpp"
#include "topoproto/session.hpp"

namespace tp = topoproto;

namespace {

struct CommonModelFlags {
  double alpha = 0.5;
  int k_init = 60;
  int age_max = 20;
  int t_soinn = 1;
  double eta1 = 0.1;
  double eta2 = 0.01;
  double lambda = 0.999;
  double fusion_w = 0.0;
  std::uint64_t seed = 0;
  int threads = 1;

  void attach(CLI::App* cmd) {
    cmd->add_option("--alpha", alpha, "global/local balance factor");
    cmd->add_option("--k-init", k_init, "target cluster count");
    cmd->add_option("--age-max", age_max, "maximum edge age");
    cmd->add_option("--t-soinn", t_soinn, "refinement passes");
    cmd->add_option("--eta1", eta1, "winner learning rate");
    cmd->add_option("--eta2", eta2, "neighbor learning rate");
    cmd->add_option("--lambda", lambda, "alignment momentum");
    cmd->add_option("--fusion-w", fusion_w, "external score fusion weight");
    cmd->add_option("--seed", seed, "random seed");
    cmd->add_option("--threads", threads, "worker pool size");
  }

  tp::classifier::ClassifierConfig to_config() const {
    tp::classifier::ClassifierConfig config;
    config.alpha = alpha;
    config.k_init = k_init;
    config.lambda = lambda;
    config.soinn.eta1 = eta1;
    config.soinn.eta2 = eta2;
    config.soinn.age_max = age_max;
    config.soinn.t_soinn = t_soinn;
    config.soinn.rng_seed = seed;
    return config;
  }
};

struct StreamFlags {
  std::size_t dim = 16;
  int classes = 10;
  int classes_per_task = 1;
  std::size_t samples = 150;
  std::size_t heldout = 50;
  std::string shape = "crescent";
  double kappa = 60.0;
  double arc_angle = 2.0;
  double lobe_separation = 1.5;
  std::string drift = "none";
  double drift_max = 0.5;
  double lipschitz = 10.0;

  void attach(CLI::App* cmd) {
    cmd->add_option("--dim", dim, "feature dimension");
    cmd->add_option("--classes", classes, "total class count");
    cmd->add_option("--classes-per-task", classes_per_task, "classes per task");
    cmd->add_option("--samples", samples, "training samples per class");
    cmd->add_option("--heldout", heldout, "heldout samples per class");
    cmd->add_option("--shape", shape, "vmf | crescent | dumbbell | mix");
    cmd->add_option("--kappa", kappa, "vMF concentration");
    cmd->add_option("--arc-angle", arc_angle, "crescent arc (radians)");
    cmd->add_option("--lobe-separation", lobe_separation,
                    "dumbbell separation (radians)");
    cmd->add_option("--drift", drift,
                    "none | rotation | translation | warp");
    cmd->add_option("--drift-max", drift_max,
                    "drift intensity at the final task (linear ramp)");
    cmd->add_option("--lipschitz", lipschitz, "warp certification ceiling");
  }

  tp::synth::StreamSpec to_spec(std::uint64_t seed, int k_init) const {
    tp::synth::StreamSpec spec;
    spec.dim = dim;
    spec.n_classes = classes;
    spec.classes_per_task = classes_per_task;
    spec.samples_per_class = samples;
    spec.heldout_per_class = heldout;
    spec.kappa = kappa;
    spec.arc_angle = arc_angle;
    spec.lobe_separation = lobe_separation;
    spec.seed = seed;
    spec.k_init_hint = k_init;

    using Shape = tp::synth::ManifoldShape;
    if (shape == "vmf") spec.shape_cycle = {Shape::kVmf};
    else if (shape == "crescent") spec.shape_cycle = {Shape::kCrescent};
    else if (shape == "dumbbell") spec.shape_cycle = {Shape::kDumbbell};
    else if (shape == "mix")
      spec.shape_cycle = {Shape::kCrescent, Shape::kDumbbell, Shape::kVmf};
    else throw tp::UnknownKindError("unknown shape '" + shape + "'");

    using Kind = tp::synth::DriftKind;
    if (drift == "none") spec.drift.kind = Kind::kNone;
    else if (drift == "rotation") spec.drift.kind = Kind::kRigidRotation;
    else if (drift == "translation")
      spec.drift.kind = Kind::kTranslationRenormalize;
    else if (drift == "warp") spec.drift.kind = Kind::kNonlinearWarp;
    else throw tp::UnknownKindError("unknown drift kind '" + drift + "'");

    if (spec.drift.kind != Kind::kNone) {
      const int tasks = classes / std::max(1, classes_per_task);
      for (int t = 0; t < tasks; ++t) {
        spec.drift.schedule.push_back(
            tasks > 1 ? drift_max * static_cast<double>(t) /
                            static_cast<double>(tasks - 1)
                      : drift_max);
      }
      spec.drift.lipschitz_bound = lipschitz;
      spec.drift.rng_seed = seed;
    }
    return spec;
  }
};

std::vector<double> parse_double_list(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw tp::ConfigError("malformed number '" + item + "' in list");
    }
  }
  return out;
}

std::vector<int> parse_int_list(const std::string& csv) {
  std::vector<int> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      out.push_back(std::stoi(item));
    } catch (const std::exception&) {
      throw tp::ConfigError("malformed integer '" + item + "' in list");
    }
  }
  return out;
}

void write_table_file(const std::string& path,
                      const std::function<void(std::ostream&)>& writer) {
  if (path.empty()) return;
  std::ofstream out(path);
  if (!out) throw tp::IoError("cannot open '" + path + "' for writing");
  writer(out);
}

int run_gen(const CommonModelFlags& model, const StreamFlags& stream_flags,
            const std::string& out_dir) {
  const tp::synth::TaskStream stream =
      tp::synth::make_stream(stream_flags.to_spec(model.seed, model.k_init));
  const std::vector<std::string> written =
      tp::session::export_stream(stream, out_dir);
  for (const auto& path : written) std::cout << path << "\n";
  return 0;
}

int run_fit(const CommonModelFlags& model, const std::string& features_path,
            const std::string& state_out) {
  const tp::io::TaskFeatures features = tp::io::load_features(features_path);
  tp::classifier::ClassifierState state{model.to_config()};
  tp::star::AnchorStore store;
  for (const auto& [task, classes] : features.by_task) {
    (void)task;
    for (const auto& [cid, fs] : classes) {
      tp::classifier::ClassModel fitted =
          tp::classifier::fit_class(cid, fs, state.config());
      store.set_class(cid, tp::star::select_anchors(fitted, fs));
      state.insert(std::move(fitted));
    }
  }
  tp::io::save_state(state, store, state_out);
  const auto stats = tp::classifier::node_stats(state);
  std::cout << "fitted " << state.class_count() << " classes, avg "
            << stats.avg_nodes_per_class << " nodes/class -> " << state_out
            << "\n";
  return 0;
}

int run_predict(const std::string& state_path, const std::string& features_path,
                const std::string& scores_path, double fusion_w,
                const std::string& out_path) {
  const tp::io::LoadedState loaded = tp::io::load_state(state_path);
  const tp::io::TaskFeatures features = tp::io::load_features(features_path);

  std::map<tp::SampleId, std::map<int, double>> external;
  if (!scores_path.empty()) {
    const tp::io::ScoreTable table = tp::io::load_scores(scores_path);
    for (const auto& [sid, row] : table.rows) {
      std::map<int, double>& per_class = external[sid];
      for (std::size_t i = 0; i < table.class_ids.size(); ++i) {
        per_class[table.class_ids[i]] = row[i];
      }
    }
  }

  std::ostream* out = &std::cout;
  std::ofstream file;
  if (!out_path.empty()) {
    file.open(out_path);
    if (!file) throw tp::IoError("cannot open '" + out_path + "'");
    out = &file;
  }

  std::size_t total = 0;
  std::size_t hits = 0;
  *out << "sample_id,true_class,predicted_class\n";
  for (const auto& [task, classes] : features.by_task) {
    (void)task;
    for (const auto& [cid, fs] : classes) {
      for (const auto& row : fs.rows()) {
        tp::classifier::ScoreVector scores =
            tp::classifier::dual_view_score(row.vector, loaded.state);
        if (!external.empty()) {
          auto it = external.find(row.sample_id);
          if (it == external.end()) {
            throw tp::SampleMismatchError("no external scores for sample " +
                                          std::to_string(row.sample_id));
          }
          scores = tp::classifier::fuse_scores(scores, it->second, fusion_w);
        }
        int best = scores.begin()->first;
        double best_score = scores.begin()->second;
        for (const auto& [c, s] : scores) {
          if (s > best_score) {
            best_score = s;
            best = c;
          }
        }
        *out << row.sample_id << ',' << cid << ',' << best << "\n";
        ++total;
        hits += best == cid ? 1 : 0;
      }
    }
  }
  std::cerr << "accuracy " << (total == 0 ? 0.0
                                          : static_cast<double>(hits) /
                                                static_cast<double>(total))
            << " over " << total << " samples\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "topoproto: topology-aware incremental classification on the unit "
      "hypersphere"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "write a synthetic stream as feature files");
  CommonModelFlags gen_model;
  StreamFlags gen_stream;
  std::string gen_out = "stream";
  gen_model.attach(gen);
  gen_stream.attach(gen);
  gen->add_option("--out", gen_out, "output directory");

  // fit
  auto* fit = app.add_subcommand("fit", "fit classes from a features file");
  CommonModelFlags fit_model;
  std::string fit_features;
  std::string fit_state_out = "state.topoproto";
  fit_model.attach(fit);
  fit->add_option("--features", fit_features, "training features file")
      ->required();
  fit->add_option("--state-out", fit_state_out, "state file to write");

  // predict
  auto* predict = app.add_subcommand("predict", "score a features file against a state");
  std::string predict_state;
  std::string predict_features;
  std::string predict_scores;
  std::string predict_out;
  double predict_fusion_w = 0.0;
  predict->add_option("--state", predict_state, "state file")->required();
  predict->add_option("--features", predict_features, "features to classify")
      ->required();
  predict->add_option("--scores", predict_scores,
                      "external per-sample score file for fusion");
  predict->add_option("--fusion-w", predict_fusion_w, "fusion weight");
  predict->add_option("--out", predict_out, "prediction CSV (default stdout)");

  // bench
  auto* bench = app.add_subcommand("bench", "run a full incremental session");
  CommonModelFlags bench_model;
  StreamFlags bench_stream;
  bool bench_star = true;
  std::string bench_train;
  std::vector<std::string> bench_eval;
  std::vector<std::string> bench_reembed;
  std::string bench_report;
  std::string bench_table;
  std::string bench_state_out;
  bench_model.attach(bench);
  bench_stream.attach(bench);
  bench->add_flag("--star,!--no-star", bench_star, "drift alignment");
  bench->add_option("--train", bench_train,
                    "training features file (file mode instead of synthetic)");
  bench->add_option("--eval", bench_eval, "eval features file per task");
  bench->add_option("--reembed", bench_reembed,
                    "re-embedding file per task after the first");
  bench->add_option("--report-out", bench_report, "human-readable report path");
  bench->add_option("--table-out", bench_table, "machine-readable table path");
  bench->add_option("--state-out", bench_state_out, "final state file");

  // drift
  auto* drift_cmd = app.add_subcommand("drift", "Procrustes drift report");
  std::string drift_ref;
  std::vector<std::string> drift_cur;
  drift_cmd->add_option("--ref", drift_ref, "reference features file")->required();
  drift_cmd->add_option("--cur", drift_cur, "snapshot features file(s)")
      ->required();

  // sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "grid of sessions over hyperparameters");
  CommonModelFlags sweep_model;
  StreamFlags sweep_stream;
  bool sweep_star = true;
  std::string sweep_alpha;
  std::string sweep_k_init;
  std::string sweep_age_max;
  std::string sweep_t_soinn;
  std::string sweep_lambda;
  std::string sweep_table;
  sweep_model.attach(sweep_cmd);
  sweep_stream.attach(sweep_cmd);
  sweep_cmd->add_flag("--star,!--no-star", sweep_star, "drift alignment");
  sweep_cmd->add_option("--alpha-list", sweep_alpha, "comma list of alpha values");
  sweep_cmd->add_option("--k-init-list", sweep_k_init, "comma list of k_init values");
  sweep_cmd->add_option("--age-max-list", sweep_age_max, "comma list of age_max values");
  sweep_cmd->add_option("--t-soinn-list", sweep_t_soinn, "comma list of t_soinn values");
  sweep_cmd->add_option("--lambda-list", sweep_lambda, "comma list of lambda values");
  sweep_cmd->add_option("--table-out", sweep_table, "machine-readable table path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      return run_gen(gen_model, gen_stream, gen_out);
    }
    if (fit->parsed()) {
      return run_fit(fit_model, fit_features, fit_state_out);
    }
    if (predict->parsed()) {
      return run_predict(predict_state, predict_features, predict_scores,
                         predict_fusion_w, predict_out);
    }
    if (bench->parsed()) {
      tp::session::RunConfig config;
      config.classifier = bench_model.to_config();
      config.star_enabled = bench_star;
      config.fusion_w = bench_model.fusion_w;
      config.threads = bench_model.threads;
      if (bench_train.empty()) {
        config.source.synthetic =
            bench_stream.to_spec(bench_model.seed, bench_model.k_init);
      } else {
        config.source.train_path = bench_train;
        config.source.eval_paths = bench_eval;
        config.source.reembed_paths = bench_reembed;
      }

      tp::classifier::ClassifierState state{config.classifier};
      tp::star::AnchorStore store;
      const tp::session::Report report =
          tp::session::run_session(config, &state, &store);

      tp::session::write_report_text(report, std::cout);
      write_table_file(bench_table, [&](std::ostream& out) {
        tp::session::write_report_table(report, out);
      });
      write_table_file(bench_report, [&](std::ostream& out) {
        tp::session::write_report_text(report, out);
      });
      if (!bench_state_out.empty()) {
        tp::io::save_state(state, store, bench_state_out);
      }
      return 0;
    }
    if (drift_cmd->parsed()) {
      const tp::io::TaskFeatures ref = tp::io::load_features(drift_ref);
      std::map<int, tp::drift::FeatureMatrix> ref_matrices;
      for (const auto& [task, classes] : ref.by_task) {
        (void)task;
        for (const auto& [cid, fs] : classes) {
          ref_matrices.emplace(cid, tp::drift::to_feature_matrix(fs));
        }
      }
      std::vector<int> class_ids;
      for (const auto& [cid, m] : ref_matrices) {
        (void)m;
        class_ids.push_back(cid);
      }

      std::cout << "snapshot,avg_procrustes";
      for (int cid : class_ids) std::cout << ",class_" << cid;
      std::cout << "\n";
      for (const auto& cur_path : drift_cur) {
        const tp::io::TaskFeatures cur = tp::io::load_features(cur_path);
        std::map<int, tp::drift::FeatureMatrix> cur_matrices;
        for (const auto& [task, classes] : cur.by_task) {
          (void)task;
          for (const auto& [cid, fs] : classes) {
            cur_matrices.emplace(cid, tp::drift::to_feature_matrix(fs));
          }
        }
        std::cout << cur_path << ','
                  << tp::io::format_double(tp::drift::average_procrustes(
                         class_ids, ref_matrices, cur_matrices));
        for (int cid : class_ids) {
          std::cout << ','
                    << tp::io::format_double(
                           tp::drift::procrustes_distance(
                               ref_matrices.at(cid), cur_matrices.at(cid))
                               .distance);
        }
        std::cout << "\n";
      }
      return 0;
    }
    if (sweep_cmd->parsed()) {
      tp::session::RunConfig config;
      config.classifier = sweep_model.to_config();
      config.star_enabled = sweep_star;
      config.threads = sweep_model.threads;
      config.source.synthetic =
          sweep_stream.to_spec(sweep_model.seed, sweep_model.k_init);

      tp::session::SweepGrid grid;
      grid.alpha = parse_double_list(sweep_alpha);
      grid.k_init = parse_int_list(sweep_k_init);
      grid.age_max = parse_int_list(sweep_age_max);
      grid.t_soinn = parse_int_list(sweep_t_soinn);
      grid.lambda = parse_double_list(sweep_lambda);

      const std::vector<tp::session::Report> reports =
          tp::session::sweep(config, grid);
      tp::session::write_sweep_table(reports, std::cout);
      write_table_file(sweep_table, [&](std::ostream& out) {
        tp::session::write_sweep_table(reports, out);
      });
      return 0;
    }
  } catch (const tp::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
