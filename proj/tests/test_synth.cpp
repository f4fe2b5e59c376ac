#include <doctest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "topoproto/classifier.hpp"
#include "topoproto/drift.hpp"
#include "topoproto/synth.hpp"

using namespace topoproto;
using namespace topoproto::synth;
using oracles::basis_vec;
using oracles::random_unit;

TEST_CASE("uniform sampling at kappa zero") {
  const FeatureSet z = sample_vmf(basis_vec(8, 0), 0.0, 10000, 123);
  RawVector mean(8, 0.0);
  for (const auto& row : z.rows()) {
    for (std::size_t i = 0; i < 8; ++i) mean[i] += row.vector[i];
  }
  for (auto& x : mean) x /= static_cast<double>(z.size());
  CHECK(norm(mean) < 0.05);
}

TEST_CASE("high concentration locks onto the mean direction") {
  const UnitVector mu = basis_vec(8, 2);
  const FeatureSet z = sample_vmf(mu, 500.0, 10000, 321);
  RawVector mean(8, 0.0);
  for (const auto& row : z.rows()) {
    for (std::size_t i = 0; i < 8; ++i) mean[i] += row.vector[i];
  }
  const UnitVector direction = normalize(mean);
  CHECK(geodesic_angle(direction, mu) < 0.02);
}

TEST_CASE("single draw is unit norm; bad input rejected") {
  const FeatureSet z = sample_vmf(basis_vec(4, 0), 10.0, 1, 5);
  CHECK(std::abs(norm(z[0].vector.data()) - 1.0) <= 1e-9);
  CHECK_THROWS_AS(sample_vmf(basis_vec(4, 0), 10.0, 0, 5), EmptyInputError);
  CHECK_THROWS_AS(sample_vmf(basis_vec(4, 0), -1.0, 5, 5), ConfigError);
}

TEST_CASE("every emitted vector is unit norm") {
  const UnitVector mu = basis_vec(6, 0);
  for (const auto& spec :
       {ManifoldSpec::vmf(mu, 30.0), ManifoldSpec::crescent(mu, 80.0, 2.0, 3),
        ManifoldSpec::dumbbell(mu, 80.0, 1.5, {0.5, 0.5}, 4)}) {
    const FeatureSet z = sample_manifold(spec, 200, 9);
    for (const auto& row : z.rows()) {
      CHECK(std::abs(norm(row.vector.data()) - 1.0) <= 1e-9);
    }
  }
}

TEST_CASE("crescent spread matches its arc and centers on the mean") {
  const UnitVector mu = basis_vec(8, 0);
  const double arc = 2.0;
  const auto spec = ManifoldSpec::crescent(mu, 500.0, arc, 17);
  const FeatureSet z = sample_manifold(spec, 600, 33);

  double max_pairwise = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    for (std::size_t j = i + 1; j < z.size(); ++j) {
      max_pairwise = std::max(max_pairwise,
                              geodesic_angle(z[i].vector, z[j].vector));
    }
  }
  CHECK(max_pairwise > arc - 0.35);
  CHECK(max_pairwise < arc + 0.45);

  RawVector mean(8, 0.0);
  for (const auto& row : z.rows()) {
    for (std::size_t i = 0; i < 8; ++i) mean[i] += row.vector[i];
  }
  CHECK(geodesic_angle(normalize(mean), mu) < 0.1);
}

TEST_CASE("degenerate dumbbell weight behaves like one vMF lobe") {
  const UnitVector mu = basis_vec(8, 0);
  const auto spec = ManifoldSpec::dumbbell(mu, 200.0, 1.6, {1.0, 0.0}, 21);
  const auto lobes = dumbbell_lobe_centers(spec);
  const FeatureSet dumbbell = sample_manifold(spec, 400, 55);
  // a zero weight consumes no lobe randomness, so the draw stream matches a
  // plain vMF sample at the first lobe center exactly
  const FeatureSet plain = sample_vmf(lobes[0], 200.0, 400, 55);
  REQUIRE(dumbbell.size() == plain.size());
  for (std::size_t i = 0; i < dumbbell.size(); ++i) {
    CHECK(dumbbell[i].vector == plain[i].vector);
  }
}

TEST_CASE("dumbbell lobes land where declared") {
  const UnitVector mu = basis_vec(8, 3);
  const double separation = 1.7;
  const auto spec = ManifoldSpec::dumbbell(mu, 300.0, separation, {0.5, 0.5}, 8);
  const auto lobes = dumbbell_lobe_centers(spec);
  CHECK(geodesic_angle(lobes[0], lobes[1]) ==
        doctest::Approx(separation).epsilon(1e-9));
  CHECK(geodesic_angle(lobes[0], mu) ==
        doctest::Approx(separation / 2).epsilon(1e-9));
}

TEST_CASE("manifold spec validation") {
  const UnitVector mu = basis_vec(4, 0);
  CHECK_THROWS_AS(ManifoldSpec::vmf(mu, -2.0), ConfigError);
  CHECK_THROWS_AS(ManifoldSpec::crescent(mu, 10.0, 0.0), ConfigError);
  CHECK_THROWS_AS(ManifoldSpec::crescent(mu, 10.0, 4.0), ConfigError);
  CHECK_THROWS_AS(ManifoldSpec::dumbbell(mu, 10.0, 0.0), ConfigError);
  CHECK_THROWS_AS(ManifoldSpec::dumbbell(mu, 10.0, 1.0, {0.0, 0.0}), ConfigError);
}

TEST_CASE("drift kinds: identity, rotation, translation, warp") {
  DriftSpec spec;
  spec.kind = DriftKind::kNone;
  const DriftMap none = apply_drift(spec, 0, 8);
  const RawVector x = basis_vec(8, 0).data();
  CHECK(none.apply(x) == x);
  CHECK(none.lipschitz() == 1.0);

  spec.kind = DriftKind::kRigidRotation;
  spec.schedule = {0.0, 0.5, 1.0};
  spec.rng_seed = 77;
  const DriftMap rot = apply_drift(spec, 2, 8);
  const RawVector rx = rot.apply(x);
  CHECK(std::abs(norm(rx) - 1.0) <= 1e-12);
  CHECK(rot.lipschitz() == 1.0);

  spec.kind = DriftKind::kTranslationRenormalize;
  const DriftMap trans = apply_drift(spec, 1, 8);
  CHECK(std::abs(norm(trans.apply(x)) - 1.0) <= 1e-12);

  spec.kind = DriftKind::kNonlinearWarp;
  spec.lipschitz_bound = 30.0;
  const DriftMap warp = apply_drift(spec, 2, 8);
  CHECK(std::abs(norm(warp.apply(x)) - 1.0) <= 1e-12);
  CHECK(warp.lipschitz() > 1.0);
  CHECK(warp.lipschitz() <= 30.0);

  CHECK_THROWS_AS(apply_drift(spec, 5, 8), ConfigError);  // off-schedule
  spec.lipschitz_bound = 1.01;  // cannot be certified this tight
  CHECK_THROWS_AS(apply_drift(spec, 2, 8), ConfigError);
}

TEST_CASE("rigid rotation is invisible to the procrustes metric") {
  Rng rng(31);
  DriftSpec spec;
  spec.kind = DriftKind::kRigidRotation;
  spec.schedule = {0.7};
  spec.rng_seed = 4;
  const DriftMap rot = apply_drift(spec, 0, 8);

  drift::FeatureMatrix h;
  drift::FeatureMatrix moved;
  for (int i = 0; i < 40; ++i) {
    const RawVector v = random_unit(rng, 8).data();
    h.rows.emplace_back(i, v);
    moved.rows.emplace_back(i, rot.apply(v));
  }
  CHECK(drift::procrustes_distance(h, moved).distance < 1e-9);
}

TEST_CASE("a strong warp crosses the quasi-linear threshold") {
  Rng rng(32);
  DriftSpec spec;
  spec.kind = DriftKind::kNonlinearWarp;
  spec.schedule = {1.0};
  spec.rng_seed = 5;
  spec.lipschitz_bound = 30.0;
  const DriftMap warp = apply_drift(spec, 0, 8);

  drift::FeatureMatrix h;
  drift::FeatureMatrix moved;
  for (int i = 0; i < 80; ++i) {
    const RawVector v = random_unit(rng, 8).data();
    h.rows.emplace_back(i, v);
    moved.rows.emplace_back(i, warp.apply(v));
  }
  CHECK(drift::procrustes_distance(h, moved).distance > 0.1);
}

TEST_CASE("certified Lipschitz bound holds over random pairs") {
  DriftSpec spec;
  spec.kind = DriftKind::kNonlinearWarp;
  spec.schedule = {0.8};
  spec.rng_seed = 6;
  spec.lipschitz_bound = 30.0;
  const DriftMap warp = apply_drift(spec, 0, 12);
  const double bound = warp.lipschitz();

  Rng rng(99);
  for (int trial = 0; trial < 100000; ++trial) {
    const RawVector a = random_unit(rng, 12).data();
    const RawVector b = random_unit(rng, 12).data();
    const RawVector fa = warp.apply(a);
    const RawVector fb = warp.apply(b);
    RawVector dx(12);
    RawVector df(12);
    for (std::size_t i = 0; i < 12; ++i) {
      dx[i] = a[i] - b[i];
      df[i] = fa[i] - fb[i];
    }
    CHECK(norm(df) <= bound * norm(dx) + 1e-9);
  }
}

TEST_CASE("map oracle degenerates to the expected rules") {
  Rng rng(12);
  std::map<int, VmfClassParams> classes;
  classifier::ClassifierConfig config;
  config.alpha = 0.5;
  classifier::ClassifierState state{config};
  for (int c = 0; c < 5; ++c) {
    VmfClassParams params{random_unit(rng, 16), 4.0, {}, 4.0};
    for (int i = 0; i < 3; ++i) params.nodes.push_back(random_unit(rng, 16));
    classes.emplace(c, params);
    state.insert(classifier::ClassModel{
        c, soinn::init_from_centers(params.nodes), params.mu_g.data(),
        params.mu_g});
  }

  // kappa_l = 0 reduces to the plain nearest-mean argmax
  std::map<int, VmfClassParams> global_only = classes;
  for (auto& [cid, params] : global_only) {
    (void)cid;
    params.kappa_l = 0.0;
  }
  for (int trial = 0; trial < 200; ++trial) {
    const UnitVector x = random_unit(rng, 16);
    const auto scores = classifier::ncm_score(x, state);
    int best = scores.begin()->first;
    double sb = scores.begin()->second;
    for (const auto& [cid, s] : scores) {
      if (s > sb) {
        sb = s;
        best = cid;
      }
    }
    CHECK(vmf_map_oracle(x, global_only) == best);
  }

  // kappa_g = kappa_l agrees with predict at alpha = 0.5
  for (int trial = 0; trial < 1000; ++trial) {
    const UnitVector x = random_unit(rng, 16);
    CHECK(vmf_map_oracle(x, classes) == classifier::predict(x, state));
  }

  CHECK_THROWS_AS(vmf_map_oracle(basis_vec(16, 0), {}), EmptyInputError);
}

TEST_CASE("make_stream partitions classes into tasks") {
  StreamSpec spec;
  spec.dim = 6;
  spec.n_classes = 10;
  spec.classes_per_task = 1;
  spec.samples_per_class = 20;
  spec.heldout_per_class = 8;
  spec.k_init_hint = 10;
  spec.seed = 3;
  const TaskStream ten = make_stream(spec);
  CHECK(ten.task_count() == 10);
  CHECK(ten.classes_of_task(3) == std::vector<int>{3});

  spec.n_classes = 100;
  spec.classes_per_task = 10;
  spec.samples_per_class = 12;
  spec.heldout_per_class = 4;
  const TaskStream hundred = make_stream(spec);
  CHECK(hundred.task_count() == 10);
  CHECK(hundred.classes_of_task(0).size() == 10);
  CHECK(hundred.classes_seen(9).size() == 100);

  spec.n_classes = 10;
  spec.classes_per_task = 3;
  CHECK_THROWS_AS(make_stream(spec), InvalidPartitionError);
}

TEST_CASE("driftless streams keep heldout features fixed across tasks") {
  StreamSpec spec;
  spec.dim = 6;
  spec.n_classes = 4;
  spec.classes_per_task = 1;
  spec.samples_per_class = 15;
  spec.heldout_per_class = 6;
  spec.k_init_hint = 8;
  spec.seed = 10;
  const TaskStream stream = make_stream(spec);

  const auto first = stream.heldout_at(0);
  const auto last = stream.heldout_at(3);
  for (const auto& [cid, fs] : first) {
    const FeatureSet& later = last.at(cid);
    REQUIRE(fs.size() == later.size());
    for (std::size_t i = 0; i < fs.size(); ++i) {
      CHECK(fs[i].sample_id == later[i].sample_id);
      CHECK(fs[i].vector == later[i].vector);
    }
  }
}

TEST_CASE("identical seeds produce bit-identical streams") {
  StreamSpec spec;
  spec.dim = 8;
  spec.n_classes = 4;
  spec.classes_per_task = 2;
  spec.samples_per_class = 20;
  spec.heldout_per_class = 10;
  spec.k_init_hint = 10;
  spec.seed = 77;
  spec.drift.kind = DriftKind::kNonlinearWarp;
  spec.drift.schedule = {0.0, 0.5};
  spec.drift.rng_seed = 77;
  spec.drift.lipschitz_bound = 30.0;

  const TaskStream a = make_stream(spec);
  const TaskStream b = make_stream(spec);
  for (int t = 0; t < a.task_count(); ++t) {
    const auto ta = a.train_features(t);
    const auto tb = b.train_features(t);
    for (const auto& [cid, fs] : ta) {
      const FeatureSet& other = tb.at(cid);
      REQUIRE(fs.size() == other.size());
      for (std::size_t i = 0; i < fs.size(); ++i) {
        CHECK(fs[i].vector == other[i].vector);
      }
    }
  }
}

TEST_CASE("stream extractor serves drifted base features") {
  StreamSpec spec;
  spec.dim = 8;
  spec.n_classes = 2;
  spec.classes_per_task = 1;
  spec.samples_per_class = 10;
  spec.heldout_per_class = 5;
  spec.k_init_hint = 5;
  spec.seed = 21;
  spec.drift.kind = DriftKind::kRigidRotation;
  spec.drift.schedule = {0.0, 0.8};
  spec.drift.rng_seed = 21;
  const TaskStream stream = make_stream(spec);

  const auto extractor = stream.extractor_at(1);
  const auto& base = stream.base_train().at(0);
  const DriftMap& map = stream.drift_at(1);
  for (const auto& row : base.rows()) {
    CHECK(extractor->embed(row.sample_id) == map.apply(row.vector.data()));
  }
  CHECK_THROWS_AS(extractor->embed(999999999), SampleMismatchError);
}
