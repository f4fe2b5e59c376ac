#pragma once

// Deterministic synthetic feature streams on the unit hypersphere: vMF
// sampling, non-convex manifold shapes (crescent, dumbbell), drift families
// with certified Lipschitz bounds, and the vMF MAP reference rule.

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <vector>

#include "topoproto/feature_set.hpp"
#include "topoproto/star.hpp"

namespace topoproto::synth {

enum class ManifoldShape { kVmf, kCrescent, kDumbbell };

struct ManifoldSpec {
  ManifoldShape shape;
  UnitVector mean_direction;
  double kappa = 50.0;               // concentration, >= 0
  double arc_angle = 2.0;            // crescent: radians in (0, pi]
  double lobe_separation = 1.5;      // dumbbell: radians in (0, pi)
  std::array<double, 2> lobe_weights{0.5, 0.5};
  // Fixes the in-plane direction of the arc or lobe axis. Part of the spec,
  // not of the draw: every sampling call sees the same manifold.
  std::uint64_t frame_seed = 0;

  static ManifoldSpec vmf(UnitVector mu, double kappa);
  static ManifoldSpec crescent(UnitVector mu, double kappa, double arc_angle,
                               std::uint64_t frame_seed = 0);
  static ManifoldSpec dumbbell(UnitVector mu, double kappa, double separation,
                               std::array<double, 2> weights = {0.5, 0.5},
                               std::uint64_t frame_seed = 0);
  void validate() const;
};

enum class DriftKind {
  kNone,
  kRigidRotation,
  kTranslationRenormalize,
  kNonlinearWarp,
};

struct DriftSpec {
  DriftKind kind = DriftKind::kNone;
  double lipschitz_bound = 10.0;  // certification ceiling for the warp family
  std::vector<double> schedule;   // per-task intensity
  std::uint64_t rng_seed = 0;
};

// A drift map phi_t: the backbone change between the reference embedding and
// task t. The structural randomness is fixed by the spec seed; only the
// intensity varies with the task index, so rotations compose as powers of
// one base map. lipschitz() returns a certified bound valid on the sphere.
class DriftMap {
 public:
  RawVector apply(const RawVector& x) const;
  double lipschitz() const { return lipschitz_; }
  DriftKind kind() const { return kind_; }
  double intensity() const { return intensity_; }

 private:
  friend DriftMap apply_drift(const DriftSpec&, std::size_t, std::size_t);
  DriftMap() = default;

  DriftKind kind_ = DriftKind::kNone;
  double intensity_ = 0.0;
  double lipschitz_ = 1.0;
  std::size_t dim_ = 0;
  // rigid rotation: plane rotations expressed in a random orthonormal basis
  std::vector<RawVector> basis_;
  std::vector<double> plane_angles_;
  // translation
  RawVector translation_dir_;
  // nonlinear warp: x -> normalize(x + s * a .* sin(w * x[perm] + phase))
  std::vector<std::size_t> warp_perm_;
  std::vector<double> warp_amp_;
  std::vector<double> warp_phase_;
  double warp_freq_ = 0.0;
};

// Builds phi_t for the given task index and feature dimension. Throws
// UnknownKindError for an unhandled kind and ConfigError when the task has
// no schedule entry or the warp cannot be certified under lipschitz_bound.
DriftMap apply_drift(const DriftSpec& spec, std::size_t task_index,
                     std::size_t dim);

// n draws from vMF(mu, kappa) via rejection sampling of the cosine-to-mean
// component plus a uniform tangent direction. Deterministic given the seed;
// sample ids run from first_id.
FeatureSet sample_vmf(const UnitVector& mu, double kappa, std::size_t n,
                      std::uint64_t seed, SampleId first_id = 0);

FeatureSet sample_manifold(const ManifoldSpec& spec, std::size_t n,
                           std::uint64_t seed, SampleId first_id = 0);

// Lobe centers a dumbbell spec resolves to (via its frame_seed).
std::array<UnitVector, 2> dumbbell_lobe_centers(const ManifoldSpec& spec);

struct VmfClassParams {
  UnitVector mu_g;
  double kappa_g = 1.0;
  std::vector<UnitVector> nodes;
  double kappa_l = 1.0;
};

// MAP rule of the hybrid vMF model: argmax over classes of
// kappa_g * cos(x, mu) + kappa_l * max_node cos(x, node). Ties go to the
// lowest class id, matching predict().
int vmf_map_oracle(const UnitVector& x,
                   const std::map<int, VmfClassParams>& classes);

struct StreamSpec {
  std::size_t dim = 16;
  int n_classes = 10;
  int classes_per_task = 1;
  std::size_t samples_per_class = 150;
  std::size_t heldout_per_class = 50;
  // Auto-generated class manifolds cycle through these shapes with seeded
  // uniform mean directions; class_specs overrides them entirely when set.
  std::vector<ManifoldShape> shape_cycle{ManifoldShape::kCrescent};
  double kappa = 60.0;
  double arc_angle = 2.0;
  double lobe_separation = 1.5;
  std::array<double, 2> lobe_weights{0.5, 0.5};
  std::vector<ManifoldSpec> class_specs;
  DriftSpec drift;
  std::uint64_t seed = 0;
  int k_init_hint = 60;  // warn when samples_per_class falls below this
};

// Ordered class-incremental stream: disjoint labels per task, per-task drift
// applied to both the new classes' training features and every class's
// heldout features, so evaluation sees old classes under the current
// backbone.
class TaskStream {
 public:
  int task_count() const;
  int classes_per_task() const { return spec_.classes_per_task; }
  std::size_t dim() const { return spec_.dim; }
  std::vector<int> classes_of_task(int t) const;
  std::vector<int> classes_seen(int t) const;

  std::map<int, FeatureSet> train_features(int t) const;
  std::map<int, FeatureSet> heldout_at(int t) const;
  const DriftMap& drift_at(int t) const;

  // Serves phi_t(base sample) for every generated sample id. The extractor
  // borrows the stream; keep the stream alive while using it.
  std::unique_ptr<star::FeatureExtractor> extractor_at(int t) const;

  const std::map<int, FeatureSet>& base_train() const { return base_train_; }
  const std::map<int, FeatureSet>& base_heldout() const { return base_heldout_; }

 private:
  friend TaskStream make_stream(const StreamSpec&);
  TaskStream() = default;

  void check_task(int t) const;

  StreamSpec spec_;
  std::map<int, FeatureSet> base_train_;
  std::map<int, FeatureSet> base_heldout_;
  std::map<SampleId, RawVector> base_by_id_;
  std::vector<DriftMap> drift_maps_;
};

TaskStream make_stream(const StreamSpec& spec);

}  // namespace topoproto::synth
