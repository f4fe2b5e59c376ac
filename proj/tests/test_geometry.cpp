#include <doctest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "topoproto/geometry.hpp"

using namespace topoproto;
using oracles::basis_vec;
using oracles::random_unit;

TEST_CASE("normalize scales and preserves direction") {
  const UnitVector u = normalize(RawVector{2.0, 0.0, 0.0});
  CHECK(u[0] == doctest::Approx(1.0));
  CHECK(u[1] == 0.0);
  CHECK(u[2] == 0.0);

  const UnitVector v = normalize(RawVector{1.0, 1.0});
  CHECK(v[0] == doctest::Approx(0.70710678).epsilon(1e-8));
  CHECK(v[1] == doctest::Approx(0.70710678).epsilon(1e-8));
}

TEST_CASE("normalize rejects degenerate input") {
  CHECK_THROWS_AS(normalize(RawVector{0.0, 0.0, 0.0}), ZeroNormError);
  CHECK_THROWS_AS(normalize(RawVector{1e-13, 0.0}), ZeroNormError);
  CHECK_THROWS_AS(normalize(RawVector{1.0}), ConfigError);
}

TEST_CASE("unit vector construction checks the invariant") {
  CHECK_NOTHROW(UnitVector::trusted(RawVector{1.0, 0.0}));
  CHECK_THROWS_AS(UnitVector::trusted(RawVector{1.0, 1.0}), ConfigError);
}

TEST_CASE("cosine similarity basics") {
  const UnitVector e1 = basis_vec(3, 0);
  const UnitVector e2 = basis_vec(3, 1);
  CHECK(cosine_sim(e1, e1) == 1.0);
  CHECK(cosine_sim(e1, e2) == 0.0);

  const UnitVector mid = normalize(RawVector{1.0, 1.0, 0.0});
  CHECK(cosine_sim(e1, mid) == doctest::Approx(0.70710678).epsilon(1e-8));

  CHECK_THROWS_AS(cosine_sim(basis_vec(3, 0), basis_vec(4, 0)),
                  DimensionMismatchError);
}

TEST_CASE("geodesic angle basics") {
  const UnitVector e1 = basis_vec(4, 0);
  const UnitVector e2 = basis_vec(4, 1);
  CHECK(geodesic_angle(e1, e1) == 0.0);
  CHECK(geodesic_angle(e1, e2) ==
        doctest::Approx(std::numbers::pi / 2).epsilon(1e-10));

  const UnitVector neg = normalize(RawVector{-1.0, 0.0, 0.0, 0.0});
  CHECK(geodesic_angle(e1, neg) ==
        doctest::Approx(std::numbers::pi).epsilon(1e-10));
}

TEST_CASE("slerp endpoints are returned bitwise") {
  Rng rng(41);
  const UnitVector v = random_unit(rng, 6);
  const UnitVector z = random_unit(rng, 6);
  CHECK(slerp(v, z, 0.0) == v);
  CHECK(slerp(v, z, 1.0) == z);
}

TEST_CASE("slerp great-circle midpoint") {
  const UnitVector e1 = basis_vec(3, 0);
  const UnitVector e2 = basis_vec(3, 1);
  const UnitVector mid = slerp(e1, e2, 0.5);
  CHECK(mid[0] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
  CHECK(mid[1] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
  CHECK(mid[2] == doctest::Approx(0.0));
}

TEST_CASE("slerp rejects antipodal inputs and bad eta") {
  const UnitVector e1 = basis_vec(3, 0);
  const UnitVector neg = normalize(RawVector{-1.0, 0.0, 0.0});
  CHECK_THROWS_AS(slerp(e1, neg, 0.5), AntipodalInputsError);
  CHECK_THROWS_AS(slerp(e1, e1, 1.5), ConfigError);
  CHECK_THROWS_AS(slerp(e1, basis_vec(4, 0), 0.5), DimensionMismatchError);
}

TEST_CASE("slerp nearly-parallel fallback stays unit") {
  const UnitVector v = basis_vec(3, 0);
  const UnitVector z = normalize(RawVector{1.0, 1e-9, 0.0});
  const UnitVector out = slerp(v, z, 0.25);
  CHECK(std::abs(norm(out.data()) - 1.0) <= 1e-12);
  CHECK(geodesic_angle(v, out) <= geodesic_angle(v, z));
}

TEST_CASE("slerp properties over random pairs") {
  Rng rng(7);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t d = 2 + rng.below(14);
    const UnitVector v = random_unit(rng, d);
    const UnitVector z = random_unit(rng, d);
    const double omega = geodesic_angle(v, z);
    if (omega > std::numbers::pi - kAngleEps) continue;
    const double eta = rng.uniform01();
    const UnitVector out = slerp(v, z, eta);

    CHECK(std::abs(norm(out.data()) - 1.0) <= 1e-9);
    if (omega > kAngleEps) {
      CHECK(std::abs(geodesic_angle(v, out) - eta * omega) <= 1e-6);
    }

    // out lies in span{v, z}: project the plane away and check the rest
    RawVector residual = out.data();
    const double proj_v = dot(residual, v.data());
    for (std::size_t i = 0; i < d; ++i) residual[i] -= proj_v * v[i];
    RawVector z_perp = z.data();
    const double zv = dot(z_perp, v.data());
    for (std::size_t i = 0; i < d; ++i) z_perp[i] -= zv * v[i];
    const double zn = norm(z_perp);
    if (zn > 1e-9) {
      for (auto& x : z_perp) x /= zn;
      const double proj_z = dot(residual, z_perp);
      for (std::size_t i = 0; i < d; ++i) residual[i] -= proj_z * z_perp[i];
    }
    CHECK(norm(residual) <= 1e-9);
  }
}

TEST_CASE("cosine is symmetric and bounded, angle matches arccos") {
  Rng rng(13);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t d = 2 + rng.below(10);
    const UnitVector a = random_unit(rng, d);
    const UnitVector b = random_unit(rng, d);
    CHECK(cosine_sim(a, b) == cosine_sim(b, a));
    CHECK(cosine_sim(a, b) <= 1.0);
    CHECK(std::abs(geodesic_angle(a, b) - std::acos(cosine_sim(a, b))) <= 1e-9);
  }
}
