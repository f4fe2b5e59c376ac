#pragma once

// Unit-hypersphere primitives: normalization, cosine similarity, geodesic
// angle, and spherical linear interpolation on S^{d-1}.

#include <cstddef>
#include <vector>

#include "topoproto/errors.hpp"

namespace topoproto {

using RawVector = std::vector<double>;

// Smallest magnitude considered normalizable.
inline constexpr double kNormEps = 1e-12;
// SLERP guard band (radians): below it fall back to linear interpolation,
// within it of pi the geodesic is ambiguous and slerp refuses.
inline constexpr double kAngleEps = 1e-7;

double dot(const RawVector& a, const RawVector& b);
double norm(const RawVector& v);
bool all_finite(const RawVector& v);

// Direction constrained to the unit hypersphere (norm 1 within 1e-6, d >= 2).
// Construct through normalize() or trusted(); both enforce the invariant.
class UnitVector {
 public:
  // Wraps a vector that is already unit-norm (within 1e-6). Throws
  // ConfigError when it is not; use normalize() for arbitrary input.
  static UnitVector trusted(RawVector v);

  const RawVector& data() const { return v_; }
  std::size_t dim() const { return v_.size(); }
  double operator[](std::size_t i) const { return v_[i]; }

  bool operator==(const UnitVector& other) const { return v_ == other.v_; }
  bool operator!=(const UnitVector& other) const { return v_ != other.v_; }

 private:
  friend UnitVector normalize(const RawVector&, double);
  explicit UnitVector(RawVector v) : v_(std::move(v)) {}

  RawVector v_;
};

// Scales v to unit norm, preserving direction. Throws ZeroNormError when
// ||v|| <= eps and ConfigError on non-finite input or d < 2.
UnitVector normalize(const RawVector& v, double eps = kNormEps);

// Dot product clamped to [-1, 1] to absorb rounding.
double cosine_sim(const UnitVector& a, const UnitVector& b);

// Great-circle angle in [0, pi].
double geodesic_angle(const UnitVector& a, const UnitVector& b);

// Point at fraction eta along the geodesic from v to z. Endpoints are
// returned bitwise for eta == 0 and eta == 1. Throws AntipodalInputsError
// when the angle exceeds pi - kAngleEps.
UnitVector slerp(const UnitVector& v, const UnitVector& z, double eta);

}  // namespace topoproto
