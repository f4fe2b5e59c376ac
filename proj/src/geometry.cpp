#include "topoproto/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace topoproto {

namespace {

void require_same_dim(std::size_t a, std::size_t b, const char* where) {
  if (a != b) {
    throw DimensionMismatchError(std::string(where) + ": dimensions differ (" +
                                 std::to_string(a) + " vs " +
                                 std::to_string(b) + ")");
  }
}

}  // namespace

double dot(const RawVector& a, const RawVector& b) {
  require_same_dim(a.size(), b.size(), "dot");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double norm(const RawVector& v) { return std::sqrt(dot(v, v)); }

bool all_finite(const RawVector& v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

UnitVector UnitVector::trusted(RawVector v) {
  if (v.size() < 2) {
    throw ConfigError("unit vector needs dimension >= 2, got " +
                      std::to_string(v.size()));
  }
  if (!all_finite(v)) throw ConfigError("unit vector has non-finite entries");
  const double n = norm(v);
  if (std::abs(n - 1.0) > 1e-6) {
    throw ConfigError("vector is not unit-norm (||v|| = " + std::to_string(n) +
                      ")");
  }
  return UnitVector(std::move(v));
}

UnitVector normalize(const RawVector& v, double eps) {
  if (v.size() < 2) {
    throw ConfigError("normalize needs dimension >= 2, got " +
                      std::to_string(v.size()));
  }
  if (!all_finite(v)) throw ConfigError("normalize: non-finite entries");
  const double n = norm(v);
  if (n <= eps) {
    throw ZeroNormError("cannot normalize vector with norm " +
                        std::to_string(n));
  }
  RawVector out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] / n;
  return UnitVector(std::move(out));
}

double cosine_sim(const UnitVector& a, const UnitVector& b) {
  const double d = dot(a.data(), b.data());
  return std::clamp(d, -1.0, 1.0);
}

double geodesic_angle(const UnitVector& a, const UnitVector& b) {
  return std::acos(cosine_sim(a, b));
}

UnitVector slerp(const UnitVector& v, const UnitVector& z, double eta) {
  require_same_dim(v.dim(), z.dim(), "slerp");
  if (!(eta >= 0.0 && eta <= 1.0)) {
    throw ConfigError("slerp: eta must lie in [0, 1], got " +
                      std::to_string(eta));
  }
  if (eta == 0.0) return v;
  if (eta == 1.0) return z;

  const double omega = geodesic_angle(v, z);
  if (omega > std::numbers::pi - kAngleEps) {
    throw AntipodalInputsError(
        "slerp: inputs are antipodal, the geodesic is undefined");
  }

  RawVector out(v.dim());
  if (omega < kAngleEps) {
    // sin(omega) underflows; linear interpolation is identical to first order.
    for (std::size_t i = 0; i < out.size(); ++i) {
      out[i] = (1.0 - eta) * v[i] + eta * z[i];
    }
  } else {
    const double s = std::sin(omega);
    const double a = std::sin((1.0 - eta) * omega) / s;
    const double b = std::sin(eta * omega) / s;
    for (std::size_t i = 0; i < out.size(); ++i) {
      out[i] = a * v[i] + b * z[i];
    }
  }
  // The closed form is unit-norm analytically; renormalize to clear rounding.
  return normalize(out);
}

}  // namespace topoproto
