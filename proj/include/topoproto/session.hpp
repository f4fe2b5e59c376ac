#pragma once

// End-to-end incremental session: per task, align old classes (optional),
// fit the new ones, evaluate every seen class under the current embedding
// without task ids, and track the deformation of the initial classes.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "topoproto/classifier.hpp"
#include "topoproto/synth.hpp"

namespace topoproto::session {

// Either a synthetic stream spec or feature files. File mode expects one
// eval file per task and, when alignment is enabled, one re-embedding file
// per task after the first.
struct StreamSource {
  std::optional<synth::StreamSpec> synthetic;
  std::string train_path;
  std::vector<std::string> eval_paths;
  std::vector<std::string> reembed_paths;
};

struct RunConfig {
  classifier::ClassifierConfig classifier;
  bool star_enabled = true;
  double fusion_w = 0.0;  // carried for the record; sessions run without
                          // external scores (see the predict command)
  StreamSource source;
  int threads = 1;
};

struct PhaseTimings {
  double fit_seconds = 0.0;
  double align_seconds = 0.0;
  double eval_seconds = 0.0;
  double drift_seconds = 0.0;
};

struct Report {
  std::vector<double> per_task_accuracy;
  double a_avg = 0.0;
  double a_last = 0.0;
  classifier::NodeStats node_stats;
  std::vector<double> procrustes_curve;  // initial classes vs task 0
  PhaseTimings timings;
  // Deterministic config echo for the machine-readable table.
  double alpha = 0.0;
  int k_init = 0;
  int age_max = 0;
  int t_soinn = 0;
  double eta1 = 0.0;
  double eta2 = 0.0;
  double lambda = 0.0;
  std::uint64_t model_seed = 0;
  std::uint64_t stream_seed = 0;
  bool star = false;
  double fusion_w = 0.0;
};

// Runs the full session and optionally hands back the final state/anchors.
Report run_session(const RunConfig& config,
                   classifier::ClassifierState* out_state = nullptr,
                   star::AnchorStore* out_store = nullptr);

// Human-readable summary; includes wall-clock timings.
void write_report_text(const Report& report, std::ostream& out);

// Machine-readable table; excludes timings so identical (config, seed) runs
// are byte-identical.
void write_report_table(const Report& report, std::ostream& out);

struct SweepGrid {
  std::vector<double> alpha;
  std::vector<int> k_init;
  std::vector<int> age_max;
  std::vector<int> t_soinn;
  std::vector<double> lambda;
};

// One run_session per grid point with shared seeds; empty grid dimensions
// fall back to the base config value.
std::vector<Report> sweep(const RunConfig& base, const SweepGrid& grid);

void write_sweep_table(const std::vector<Report>& reports, std::ostream& out);

// Materializes a synthetic stream as feature files under out_dir:
// task<t>_train, task<t>_eval and (t >= 1) task<t>_reembed. Returns the
// paths written in that order per task.
std::vector<std::string> export_stream(const synth::TaskStream& stream,
                                       const std::string& out_dir);

}  // namespace topoproto::session
