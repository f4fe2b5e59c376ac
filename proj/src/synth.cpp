#include "topoproto/synth.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

namespace topoproto::synth {

namespace {

constexpr SampleId kClassIdStride = 1000000;
constexpr SampleId kHeldoutOffset = 500000;

// Warp family constants: per-coordinate sinusoid amplitude budget (L2 over
// coordinates) and frequency. Kept internal; the certified bound below is
// what callers rely on.
constexpr double kWarpAmplitude = 0.8;
constexpr double kWarpFrequency = 2.0;

RawVector random_gaussian(Rng& rng, std::size_t d) {
  RawVector v(d);
  for (auto& x : v) x = rng.normal();
  return v;
}

UnitVector random_direction(Rng& rng, std::size_t d) {
  for (;;) {
    RawVector g = random_gaussian(rng, d);
    if (norm(g) > 1e-6) return normalize(g);
  }
}

// Unit vector orthogonal to mu, uniform over the tangent sphere.
RawVector tangent_direction(Rng& rng, const RawVector& mu) {
  for (;;) {
    RawVector g = random_gaussian(rng, mu.size());
    const double proj = dot(g, mu);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] -= proj * mu[i];
    const double n = norm(g);
    if (n > 1e-6) {
      for (auto& x : g) x /= n;
      return g;
    }
  }
}

// Rejection sampler for the cosine-to-mean component of a vMF draw
// (Wood 1994). The beta envelope degenerates to the uniform-sphere marginal
// at kappa = 0, where every proposal is accepted.
struct VmfSampler {
  double kappa;
  std::size_t d;
  double b;
  double x0;
  double c;

  VmfSampler(double kappa_in, std::size_t dim) : kappa(kappa_in), d(dim) {
    const double dm1 = static_cast<double>(d) - 1.0;
    b = dm1 / (2.0 * kappa + std::sqrt(4.0 * kappa * kappa + dm1 * dm1));
    x0 = (1.0 - b) / (1.0 + b);
    c = kappa * x0 + dm1 * std::log(1.0 - x0 * x0);
  }

  RawVector draw(Rng& rng, const RawVector& mu) const {
    const double dm1 = static_cast<double>(d) - 1.0;
    double w;
    for (;;) {
      const double z = rng.beta(dm1 / 2.0, dm1 / 2.0);
      const double u = rng.uniform01_open_low();
      w = (1.0 - (1.0 + b) * z) / (1.0 - (1.0 - b) * z);
      if (kappa * w + dm1 * std::log(1.0 - x0 * w) - c >= std::log(u)) break;
    }
    const RawVector t = tangent_direction(rng, mu);
    const double s = std::sqrt(std::max(0.0, 1.0 - w * w));
    RawVector out(d);
    for (std::size_t i = 0; i < d; ++i) out[i] = w * mu[i] + s * t[i];
    return out;
  }
};

}  // namespace

ManifoldSpec ManifoldSpec::vmf(UnitVector mu, double kappa) {
  ManifoldSpec spec{ManifoldShape::kVmf, std::move(mu)};
  spec.kappa = kappa;
  spec.validate();
  return spec;
}

ManifoldSpec ManifoldSpec::crescent(UnitVector mu, double kappa,
                                    double arc_angle,
                                    std::uint64_t frame_seed) {
  ManifoldSpec spec{ManifoldShape::kCrescent, std::move(mu)};
  spec.kappa = kappa;
  spec.arc_angle = arc_angle;
  spec.frame_seed = frame_seed;
  spec.validate();
  return spec;
}

ManifoldSpec ManifoldSpec::dumbbell(UnitVector mu, double kappa,
                                    double separation,
                                    std::array<double, 2> weights,
                                    std::uint64_t frame_seed) {
  ManifoldSpec spec{ManifoldShape::kDumbbell, std::move(mu)};
  spec.kappa = kappa;
  spec.lobe_separation = separation;
  spec.lobe_weights = weights;
  spec.frame_seed = frame_seed;
  spec.validate();
  return spec;
}

void ManifoldSpec::validate() const {
  if (kappa < 0.0) throw ConfigError("manifold kappa must be >= 0");
  if (shape == ManifoldShape::kCrescent &&
      !(arc_angle > 0.0 && arc_angle <= std::numbers::pi)) {
    throw ConfigError("crescent arc_angle must lie in (0, pi]");
  }
  if (shape == ManifoldShape::kDumbbell) {
    if (!(lobe_separation > 0.0 && lobe_separation < std::numbers::pi)) {
      throw ConfigError("dumbbell lobe_separation must lie in (0, pi)");
    }
    if (lobe_weights[0] < 0.0 || lobe_weights[1] < 0.0 ||
        lobe_weights[0] + lobe_weights[1] <= 0.0) {
      throw ConfigError("dumbbell lobe_weights must be non-negative and sum > 0");
    }
  }
}

FeatureSet sample_vmf(const UnitVector& mu, double kappa, std::size_t n,
                      std::uint64_t seed, SampleId first_id) {
  if (n == 0) throw EmptyInputError("sample_vmf: n must be >= 1");
  if (kappa < 0.0) throw ConfigError("sample_vmf: kappa must be >= 0");

  Rng rng(seed);
  const VmfSampler sampler(kappa, mu.dim());
  FeatureSet out;
  for (std::size_t i = 0; i < n; ++i) {
    out.add(first_id + static_cast<SampleId>(i),
            normalize(sampler.draw(rng, mu.data())));
  }
  return out;
}

namespace {

// In-plane partner direction for crescent arcs and dumbbell lobes, fully
// determined by the spec so every draw sees the same manifold.
RawVector shape_partner_direction(const ManifoldSpec& spec) {
  Rng rng(mix_seed(spec.frame_seed, 0xF4A3E));
  return tangent_direction(rng, spec.mean_direction.data());
}

std::array<RawVector, 2> lobe_centers_from(const ManifoldSpec& spec,
                                           const RawVector& partner) {
  const std::size_t d = spec.mean_direction.dim();
  const double half = spec.lobe_separation / 2.0;
  std::array<RawVector, 2> centers{RawVector(d), RawVector(d)};
  for (std::size_t i = 0; i < d; ++i) {
    const double along = std::cos(half) * spec.mean_direction[i];
    const double across = std::sin(half) * partner[i];
    centers[0][i] = along + across;
    centers[1][i] = along - across;
  }
  return centers;
}

}  // namespace

std::array<UnitVector, 2> dumbbell_lobe_centers(const ManifoldSpec& spec) {
  spec.validate();
  if (spec.shape != ManifoldShape::kDumbbell) {
    throw ConfigError("dumbbell_lobe_centers needs a dumbbell spec");
  }
  const RawVector partner = shape_partner_direction(spec);
  const auto centers = lobe_centers_from(spec, partner);
  return {normalize(centers[0]), normalize(centers[1])};
}

FeatureSet sample_manifold(const ManifoldSpec& spec, std::size_t n,
                           std::uint64_t seed, SampleId first_id) {
  spec.validate();
  if (n == 0) throw EmptyInputError("sample_manifold: n must be >= 1");

  if (spec.shape == ManifoldShape::kVmf) {
    return sample_vmf(spec.mean_direction, spec.kappa, n, seed, first_id);
  }

  Rng rng(seed);
  const std::size_t d = spec.mean_direction.dim();
  const VmfSampler noise(spec.kappa, d);
  FeatureSet out;

  if (spec.shape == ManifoldShape::kCrescent) {
    // Points spread along a great-circle arc centered on the mean direction,
    // with vMF noise transverse to the arc.
    const RawVector partner = shape_partner_direction(spec);
    const double half = spec.arc_angle / 2.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double t = rng.uniform(-half, half);
      RawVector p(d);
      for (std::size_t j = 0; j < d; ++j) {
        p[j] = std::cos(t) * spec.mean_direction[j] + std::sin(t) * partner[j];
      }
      out.add(first_id + static_cast<SampleId>(i),
              normalize(noise.draw(rng, p)));
    }
    return out;
  }

  // Dumbbell: mixture of two vMF lobes on either side of the mean. A weight
  // that is exactly zero removes its lobe without consuming randomness.
  const RawVector partner = shape_partner_direction(spec);
  const auto centers = lobe_centers_from(spec, partner);
  const double w1 =
      spec.lobe_weights[0] / (spec.lobe_weights[0] + spec.lobe_weights[1]);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t lobe;
    if (spec.lobe_weights[1] == 0.0) lobe = 0;
    else if (spec.lobe_weights[0] == 0.0) lobe = 1;
    else lobe = rng.uniform01() < w1 ? 0 : 1;
    out.add(first_id + static_cast<SampleId>(i),
            normalize(noise.draw(rng, centers[lobe])));
  }
  return out;
}

DriftMap apply_drift(const DriftSpec& spec, std::size_t task_index,
                     std::size_t dim) {
  if (dim < 2) throw ConfigError("apply_drift: dimension must be >= 2");

  DriftMap map;
  map.kind_ = spec.kind;
  map.dim_ = dim;

  if (spec.kind == DriftKind::kNone) {
    map.intensity_ = 0.0;
    map.lipschitz_ = 1.0;
    return map;
  }

  if (task_index >= spec.schedule.size()) {
    throw ConfigError("apply_drift: task " + std::to_string(task_index) +
                      " has no schedule entry (schedule size " +
                      std::to_string(spec.schedule.size()) + ")");
  }
  const double s = spec.schedule[task_index];
  if (s < 0.0) throw ConfigError("apply_drift: negative intensity");
  map.intensity_ = s;

  switch (spec.kind) {
    case DriftKind::kRigidRotation: {
      // Random orthonormal basis (Gram-Schmidt on gaussian rows) plus one
      // base angle per coordinate plane; intensity scales the angles, so
      // phi_t is the base rotation raised to the schedule intensity.
      Rng rng(mix_seed(spec.rng_seed, 0xA11CE));
      map.basis_.reserve(dim);
      while (map.basis_.size() < dim) {
        RawVector g = random_gaussian(rng, dim);
        for (const auto& row : map.basis_) {
          const double proj = dot(g, row);
          for (std::size_t i = 0; i < dim; ++i) g[i] -= proj * row[i];
        }
        const double n = norm(g);
        if (n <= 1e-8) continue;
        for (auto& x : g) x /= n;
        map.basis_.push_back(std::move(g));
      }
      const std::size_t planes = dim / 2;
      map.plane_angles_.reserve(planes);
      for (std::size_t p = 0; p < planes; ++p) {
        map.plane_angles_.push_back(rng.uniform(0.2, 1.0) *
                                    std::numbers::pi / 2.0);
      }
      map.lipschitz_ = 1.0;
      return map;
    }
    case DriftKind::kTranslationRenormalize: {
      if (s >= 0.9) {
        throw ConfigError(
            "translation intensity must stay below 0.9 to keep points "
            "normalizable");
      }
      Rng rng(mix_seed(spec.rng_seed, 0x7A215));
      map.translation_dir_ = random_direction(rng, dim).data();
      // x -> x + s*u is 1-Lipschitz; renormalization contributes 2/(1 - s)
      // on the sphere.
      map.lipschitz_ = 2.0 / (1.0 - s);
      return map;
    }
    case DriftKind::kNonlinearWarp: {
      if (spec.lipschitz_bound <= 0.0) {
        throw ConfigError("nonlinear warp needs a positive lipschitz_bound");
      }
      Rng rng(mix_seed(spec.rng_seed, 0x3A9B));
      map.warp_perm_.resize(dim);
      std::iota(map.warp_perm_.begin(), map.warp_perm_.end(), std::size_t{0});
      rng.shuffle(map.warp_perm_);
      map.warp_amp_.resize(dim);
      double amp_norm = 0.0;
      for (auto& a : map.warp_amp_) {
        a = rng.uniform(0.5, 1.0);
        amp_norm += a * a;
      }
      amp_norm = std::sqrt(amp_norm);
      for (auto& a : map.warp_amp_) a *= kWarpAmplitude / amp_norm;
      map.warp_phase_.resize(dim);
      for (auto& p : map.warp_phase_) {
        p = rng.uniform(0.0, 2.0 * std::numbers::pi);
      }
      map.warp_freq_ = kWarpFrequency;

      if (s * kWarpAmplitude >= 0.85) {
        throw ConfigError(
            "warp intensity too large: points could leave the normalizable "
            "region");
      }
      // The permuted per-coordinate sinusoid has one Jacobian entry per row
      // and column, so its spectral norm is at most freq * max amplitude;
      // normalization contributes 2 / (1 - s * ||amplitudes||).
      double amp_max = 0.0;
      for (double a : map.warp_amp_) amp_max = std::max(amp_max, a);
      const double inner = 1.0 + s * map.warp_freq_ * amp_max;
      const double certified = inner * 2.0 / (1.0 - s * kWarpAmplitude);
      if (certified > spec.lipschitz_bound) {
        throw ConfigError(
            "warp certification failed: certified Lipschitz bound " +
            std::to_string(certified) + " exceeds the requested " +
            std::to_string(spec.lipschitz_bound) +
            "; lower the intensity or raise the bound");
      }
      map.lipschitz_ = certified;
      return map;
    }
    case DriftKind::kNone:
      break;
  }
  throw UnknownKindError("apply_drift: unhandled drift kind");
}

RawVector DriftMap::apply(const RawVector& x) const {
  if (x.size() != dim_ && kind_ != DriftKind::kNone) {
    throw DimensionMismatchError("drift map built for dimension " +
                                 std::to_string(dim_) + ", input has " +
                                 std::to_string(x.size()));
  }
  switch (kind_) {
    case DriftKind::kNone:
      return x;
    case DriftKind::kRigidRotation: {
      RawVector coords(dim_);
      for (std::size_t i = 0; i < dim_; ++i) coords[i] = dot(basis_[i], x);
      for (std::size_t p = 0; p < plane_angles_.size(); ++p) {
        const double angle = intensity_ * plane_angles_[p];
        const double c = std::cos(angle);
        const double s = std::sin(angle);
        const double a = coords[2 * p];
        const double b = coords[2 * p + 1];
        coords[2 * p] = c * a - s * b;
        coords[2 * p + 1] = s * a + c * b;
      }
      RawVector out(dim_, 0.0);
      for (std::size_t i = 0; i < dim_; ++i) {
        for (std::size_t j = 0; j < dim_; ++j) {
          out[j] += coords[i] * basis_[i][j];
        }
      }
      return out;
    }
    case DriftKind::kTranslationRenormalize: {
      RawVector out(dim_);
      for (std::size_t i = 0; i < dim_; ++i) {
        out[i] = x[i] + intensity_ * translation_dir_[i];
      }
      return normalize(out).data();
    }
    case DriftKind::kNonlinearWarp: {
      RawVector out(dim_);
      for (std::size_t i = 0; i < dim_; ++i) {
        const double field =
            warp_amp_[i] * std::sin(warp_freq_ * x[warp_perm_[i]] + warp_phase_[i]);
        out[i] = x[i] + intensity_ * field;
      }
      return normalize(out).data();
    }
  }
  throw UnknownKindError("drift map has an unhandled kind");
}

int vmf_map_oracle(const UnitVector& x,
                   const std::map<int, VmfClassParams>& classes) {
  if (classes.empty()) throw EmptyInputError("vmf_map_oracle: no classes");

  int best_class = classes.begin()->first;
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& [cid, params] : classes) {
    double local = -2.0;
    for (const auto& v : params.nodes) {
      local = std::max(local, cosine_sim(x, v));
    }
    const double score =
        params.kappa_g * cosine_sim(x, params.mu_g) + params.kappa_l * local;
    if (score > best) {
      best = score;
      best_class = cid;
    }
  }
  return best_class;
}

namespace {

class SyntheticExtractor : public star::FeatureExtractor {
 public:
  SyntheticExtractor(const std::map<SampleId, RawVector>* table,
                     const DriftMap* map)
      : table_(table), map_(map) {}

  RawVector embed(star::SampleRef ref) const override {
    auto it = table_->find(ref);
    if (it == table_->end()) {
      throw SampleMismatchError("no base feature for sample " +
                                std::to_string(ref));
    }
    return map_->apply(it->second);
  }

 private:
  const std::map<SampleId, RawVector>* table_;
  const DriftMap* map_;
};

}  // namespace

int TaskStream::task_count() const {
  return spec_.n_classes / spec_.classes_per_task;
}

void TaskStream::check_task(int t) const {
  if (t < 0 || t >= task_count()) {
    throw ConfigError("task index " + std::to_string(t) +
                      " outside [0, " + std::to_string(task_count()) + ")");
  }
}

std::vector<int> TaskStream::classes_of_task(int t) const {
  check_task(t);
  std::vector<int> out;
  for (int c = t * spec_.classes_per_task; c < (t + 1) * spec_.classes_per_task;
       ++c) {
    out.push_back(c);
  }
  return out;
}

std::vector<int> TaskStream::classes_seen(int t) const {
  check_task(t);
  std::vector<int> out;
  for (int c = 0; c < (t + 1) * spec_.classes_per_task; ++c) out.push_back(c);
  return out;
}

std::map<int, FeatureSet> TaskStream::train_features(int t) const {
  check_task(t);
  const DriftMap& map = drift_maps_[static_cast<std::size_t>(t)];
  std::map<int, FeatureSet> out;
  for (int c : classes_of_task(t)) {
    FeatureSet fs;
    for (const auto& row : base_train_.at(c).rows()) {
      fs.add(row.sample_id, normalize(map.apply(row.vector.data())));
    }
    out.emplace(c, std::move(fs));
  }
  return out;
}

std::map<int, FeatureSet> TaskStream::heldout_at(int t) const {
  check_task(t);
  const DriftMap& map = drift_maps_[static_cast<std::size_t>(t)];
  std::map<int, FeatureSet> out;
  for (int c : classes_seen(t)) {
    FeatureSet fs;
    for (const auto& row : base_heldout_.at(c).rows()) {
      fs.add(row.sample_id, normalize(map.apply(row.vector.data())));
    }
    out.emplace(c, std::move(fs));
  }
  return out;
}

const DriftMap& TaskStream::drift_at(int t) const {
  check_task(t);
  return drift_maps_[static_cast<std::size_t>(t)];
}

std::unique_ptr<star::FeatureExtractor> TaskStream::extractor_at(int t) const {
  check_task(t);
  return std::make_unique<SyntheticExtractor>(
      &base_by_id_, &drift_maps_[static_cast<std::size_t>(t)]);
}

TaskStream make_stream(const StreamSpec& spec) {
  if (spec.dim < 2) throw ConfigError("stream dimension must be >= 2");
  if (spec.n_classes < 1 || spec.classes_per_task < 1) {
    throw ConfigError("stream needs n_classes >= 1 and classes_per_task >= 1");
  }
  if (spec.n_classes % spec.classes_per_task != 0) {
    throw InvalidPartitionError(
        std::to_string(spec.n_classes) + " classes do not split into tasks of " +
        std::to_string(spec.classes_per_task));
  }
  if (spec.samples_per_class == 0 || spec.heldout_per_class == 0) {
    throw ConfigError("stream needs samples_per_class and heldout_per_class >= 1");
  }
  if (spec.samples_per_class + spec.heldout_per_class >
      static_cast<std::size_t>(kClassIdStride)) {
    throw ConfigError("per-class sample counts exceed the id budget");
  }
  if (!spec.class_specs.empty() &&
      spec.class_specs.size() != static_cast<std::size_t>(spec.n_classes)) {
    throw ConfigError("class_specs must cover every class when given");
  }
  if (spec.class_specs.empty() && spec.shape_cycle.empty()) {
    throw ConfigError("shape_cycle must be nonempty");
  }
  if (spec.samples_per_class < static_cast<std::size_t>(spec.k_init_hint)) {
    std::cerr << "warning: samples_per_class (" << spec.samples_per_class
              << ") is below the target cluster count (" << spec.k_init_hint
              << "); the initial skeleton will be capped by the sample count\n";
  }

  TaskStream stream;
  stream.spec_ = spec;

  const int tasks = spec.n_classes / spec.classes_per_task;
  if (spec.drift.kind != DriftKind::kNone &&
      spec.drift.schedule.size() < static_cast<std::size_t>(tasks)) {
    throw ConfigError("drift schedule has " +
                      std::to_string(spec.drift.schedule.size()) +
                      " entries for " + std::to_string(tasks) + " tasks");
  }

  for (int c = 0; c < spec.n_classes; ++c) {
    ManifoldSpec ms = [&] {
      if (!spec.class_specs.empty()) {
        return spec.class_specs[static_cast<std::size_t>(c)];
      }
      Rng rng(mix_seed(spec.seed, 0x11D0 + static_cast<std::uint64_t>(c)));
      UnitVector mean = random_direction(rng, spec.dim);
      ManifoldSpec auto_spec{
          spec.shape_cycle[static_cast<std::size_t>(c) % spec.shape_cycle.size()],
          std::move(mean)};
      auto_spec.kappa = spec.kappa;
      auto_spec.arc_angle = spec.arc_angle;
      auto_spec.lobe_separation = spec.lobe_separation;
      auto_spec.lobe_weights = spec.lobe_weights;
      auto_spec.frame_seed = mix_seed(spec.seed, 0xF0A0 + static_cast<std::uint64_t>(c));
      return auto_spec;
    }();
    ms.validate();
    if (ms.mean_direction.dim() != spec.dim) {
      throw DimensionMismatchError("class " + std::to_string(c) +
                                   " manifold dimension differs from the stream");
    }

    const SampleId base = static_cast<SampleId>(c) * kClassIdStride;
    stream.base_train_.emplace(
        c, sample_manifold(ms, spec.samples_per_class,
                           mix_seed(spec.seed, 0x5A00 + static_cast<std::uint64_t>(c)),
                           base));
    stream.base_heldout_.emplace(
        c, sample_manifold(ms, spec.heldout_per_class,
                           mix_seed(spec.seed, 0x8E00 + static_cast<std::uint64_t>(c)),
                           base + kHeldoutOffset));
  }

  for (int t = 0; t < tasks; ++t) {
    stream.drift_maps_.push_back(
        apply_drift(spec.drift, static_cast<std::size_t>(t), spec.dim));
  }

  for (const auto& [cid, fs] : stream.base_train_) {
    (void)cid;
    for (const auto& row : fs.rows()) {
      stream.base_by_id_.emplace(row.sample_id, row.vector.data());
    }
  }
  for (const auto& [cid, fs] : stream.base_heldout_) {
    (void)cid;
    for (const auto& row : fs.rows()) {
      stream.base_by_id_.emplace(row.sample_id, row.vector.data());
    }
  }
  return stream;
}

}  // namespace topoproto::synth
