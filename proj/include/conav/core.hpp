#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace conav {

using Complex = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Plain 2-vector used for gradients, velocities and control inputs.
struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  constexpr Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
  constexpr Vec2 operator-() const { return {-x, -y}; }
  double norm() const { return std::hypot(x, y); }
  constexpr double dot(const Vec2& o) const { return x * o.x + y * o.y; }
};

inline Vec2 to_vec(Complex z) { return {z.real(), z.imag()}; }
inline Complex to_complex(const Vec2& v) { return {v.x, v.y}; }

/// Row-major 2x2 real matrix.
using Mat2 = std::array<std::array<double, 2>, 2>;

inline bool is_finite(Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

// Error hierarchy. Every failure raised by the library derives from conav::Error.

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Precondition violated by the caller (wrong sizes, bad parameters).
class ContractError : public Error {
 public:
  using Error::Error;
};

/// A point was given on the wrong side of a curve or outside the free space.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A curve has a node with (numerically) zero speed.
class DegenerateCurveError : public Error {
 public:
  using Error::Error;
};

/// A curve is not simple, or is otherwise unusable as a boundary.
class InvalidCurveError : public Error {
 public:
  using Error::Error;
};

/// The map center coincides with a boundary node or has the wrong winding.
class SingularConfigurationError : public Error {
 public:
  using Error::Error;
};

/// Dense solve failed or the system is too badly conditioned.
class SolverError : public Error {
 public:
  SolverError(const std::string& what, double condition)
      : Error(what), condition_(condition) {}
  double condition() const { return condition_; }

 private:
  double condition_;
};

/// A map stage could not be constructed (branch tracking, monotonicity).
class ConstructionError : public Error {
 public:
  using Error::Error;
};

/// Cache file written for a different workspace, node count or tolerance.
class StaleCacheError : public Error {
 public:
  using Error::Error;
};

/// Cache or input file is malformed.
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace conav
