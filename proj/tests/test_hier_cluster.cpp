#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "topoproto/hier_cluster.hpp"
#include "topoproto/synth.hpp"

using namespace topoproto;
using namespace topoproto::cluster;
using oracles::basis_vec;
using oracles::random_unit;

namespace {

FeatureSet make_set(const std::vector<UnitVector>& vectors) {
  FeatureSet z;
  SampleId id = 0;
  for (const auto& v : vectors) z.add(id++, v);
  return z;
}

}  // namespace

TEST_CASE("duplicate pair merges at distance zero") {
  const UnitVector a = normalize(RawVector{3.0, 4.0, 0.0});
  const Dendrogram tree = upgma_cosine_linkage(make_set({a, a}));
  REQUIRE(tree.steps.size() == 1);
  CHECK(tree.steps[0].left == 0);
  CHECK(tree.steps[0].right == 1);
  CHECK(tree.steps[0].distance <= 1e-12);
}

TEST_CASE("orthogonal pair merges at distance one") {
  const Dendrogram tree =
      upgma_cosine_linkage(make_set({basis_vec(3, 0), basis_vec(3, 1)}));
  REQUIRE(tree.steps.size() == 1);
  CHECK(tree.steps[0].distance == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("empty input rejected") {
  CHECK_THROWS_AS(upgma_cosine_linkage(FeatureSet{}), EmptyInputError);
}

TEST_CASE("five vMF samples match the brute-force recomputation") {
  const UnitVector mu = basis_vec(4, 0);
  const FeatureSet z = synth::sample_vmf(mu, 5.0, 5, 99);
  const Dendrogram fast = upgma_cosine_linkage(z);
  const Dendrogram slow = oracles::brute_force_upgma(z);
  REQUIRE(fast.steps.size() == slow.steps.size());
  for (std::size_t i = 0; i < fast.steps.size(); ++i) {
    CHECK(fast.steps[i].left == slow.steps[i].left);
    CHECK(fast.steps[i].right == slow.steps[i].right);
    CHECK(fast.steps[i].merged == slow.steps[i].merged);
    CHECK(fast.steps[i].distance ==
          doctest::Approx(slow.steps[i].distance).epsilon(1e-12));
  }
  CHECK(oracles::partition_of(cut_to_k(fast, 2)) ==
        oracles::brute_force_cut(z, 2));
}

TEST_CASE("cut with fewer points than target yields singletons") {
  const FeatureSet z =
      make_set({basis_vec(3, 0), basis_vec(3, 1), basis_vec(3, 2)});
  const ClusterAssignment cut = cut_to_k(upgma_cosine_linkage(z), 5);
  CHECK(cut.cluster_count == 3);
  CHECK(cut.labels.at(0) != cut.labels.at(1));
  CHECK(cut.labels.at(1) != cut.labels.at(2));
}

TEST_CASE("cut to one cluster holds everything") {
  Rng rng(3);
  std::vector<UnitVector> vectors;
  for (int i = 0; i < 6; ++i) vectors.push_back(random_unit(rng, 4));
  const ClusterAssignment cut =
      cut_to_k(upgma_cosine_linkage(make_set(vectors)), 1);
  CHECK(cut.cluster_count == 1);
  for (const auto& [sid, label] : cut.labels) {
    (void)sid;
    CHECK(label == 0);
  }
}

TEST_CASE("cut rejects bad k") {
  const FeatureSet z = make_set({basis_vec(3, 0), basis_vec(3, 1)});
  CHECK_THROWS_AS(cut_to_k(upgma_cosine_linkage(z), 0), ConfigError);
}

TEST_CASE("cluster centers: singleton, mean, and degenerate") {
  const UnitVector e1 = basis_vec(3, 0);
  const UnitVector e2 = basis_vec(3, 1);

  {
    const FeatureSet z = make_set({e1});
    const auto centers =
        cluster_centers(cut_to_k(upgma_cosine_linkage(z), 1), z);
    REQUIRE(centers.size() == 1);
    CHECK(cosine_sim(centers[0], e1) == doctest::Approx(1.0));
  }
  {
    const FeatureSet z = make_set({e1, e2});
    const auto centers =
        cluster_centers(cut_to_k(upgma_cosine_linkage(z), 1), z);
    REQUIRE(centers.size() == 1);
    CHECK(centers[0][0] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
    CHECK(centers[0][1] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
  }
  {
    const UnitVector neg = normalize(RawVector{-1.0, 0.0, 0.0});
    const FeatureSet z = make_set({e1, neg});
    CHECK_THROWS_AS(cluster_centers(cut_to_k(upgma_cosine_linkage(z), 1), z),
                    ZeroNormError);
  }
}

TEST_CASE("oracle equivalence over random small sets") {
  Rng rng(2024);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 2 + rng.below(7);  // up to 8
    const std::size_t d = 2 + rng.below(5);  // up to 6
    std::vector<UnitVector> vectors;
    for (std::size_t i = 0; i < n; ++i) vectors.push_back(random_unit(rng, d));
    const FeatureSet z = make_set(vectors);

    const Dendrogram fast = upgma_cosine_linkage(z);
    const Dendrogram slow = oracles::brute_force_upgma(z);
    REQUIRE(fast.steps.size() == slow.steps.size());
    for (std::size_t i = 0; i < fast.steps.size(); ++i) {
      CHECK(fast.steps[i].left == slow.steps[i].left);
      CHECK(fast.steps[i].right == slow.steps[i].right);
      CHECK(std::abs(fast.steps[i].distance - slow.steps[i].distance) <= 1e-12);
      CHECK(fast.steps[i].distance >= 0.0);
      CHECK(fast.steps[i].distance <= 2.0);
    }
    for (int k = 1; k <= static_cast<int>(n); ++k) {
      CHECK(oracles::partition_of(cut_to_k(fast, k)) ==
            oracles::brute_force_cut(z, k));
    }
  }
}

TEST_CASE("oracle equivalence at sizes that stress the neighbor cache") {
  Rng rng(909090);
  for (const std::size_t n : {30, 45, 60}) {
    std::vector<UnitVector> vectors;
    for (std::size_t i = 0; i < n; ++i) vectors.push_back(random_unit(rng, 8));
    const FeatureSet z = make_set(vectors);

    const Dendrogram fast = upgma_cosine_linkage(z);
    const Dendrogram slow = oracles::brute_force_upgma(z);
    REQUIRE(fast.steps.size() == slow.steps.size());
    for (std::size_t i = 0; i < fast.steps.size(); ++i) {
      REQUIRE(fast.steps[i].left == slow.steps[i].left);
      REQUIRE(fast.steps[i].right == slow.steps[i].right);
      CHECK(std::abs(fast.steps[i].distance - slow.steps[i].distance) <= 1e-12);
    }
    for (const int k : {1, 2, 7, static_cast<int>(n) / 2}) {
      CHECK(oracles::partition_of(cut_to_k(fast, k)) ==
            oracles::brute_force_cut(z, k));
    }
  }
}

TEST_CASE("permutation invariance of the partition") {
  Rng rng(515);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 5 + rng.below(4);
    std::vector<std::pair<SampleId, UnitVector>> rows;
    for (std::size_t i = 0; i < n; ++i) {
      rows.emplace_back(static_cast<SampleId>(i), random_unit(rng, 4));
    }
    FeatureSet original;
    for (const auto& [sid, v] : rows) original.add(sid, v);

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    rng.shuffle(order);
    FeatureSet permuted;
    for (std::size_t i : order) permuted.add(rows[i].first, rows[i].second);

    const int k = 2 + static_cast<int>(rng.below(3));
    CHECK(oracles::partition_of(cut_to_k(upgma_cosine_linkage(original), k)) ==
          oracles::partition_of(cut_to_k(upgma_cosine_linkage(permuted), k)));
  }
}
