#pragma once

// Cauchy-type integrals of boundary data, evaluated off the curve by the trapezoidal rule
// in normalized (barycentric) form.
//
// With ccw weights w_j = gamma'(s_j) * 2pi/N (sign-flipped for clockwise curves):
//   interior:  h(z) = [sum w_j h_j/(g_j - z)] / [sum w_j/(g_j - z)]
//   exterior:  h(z) = [2pi i h_inf - sum w_j h_j/(g_j - z)] / [2pi i - sum w_j/(g_j - z)]
// Both reproduce constants exactly and cancel the leading near-boundary quadrature error.

#include <conav/core.hpp>
#include <conav/geometry.hpp>

#include <cstddef>
#include <span>
#include <vector>

namespace conav {

enum class Side { interior, exterior };

/// Raw quadrature sums at one point: n0 = sum wh/(g-z), d0 = sum w/(g-z), n1/d1 the squared-denominator
/// analogues, and the squared distance to the nearest node.
struct CauchySums {
  Complex n0{}, d0{}, n1{}, d1{};
  double min_dist2 = 0.0;
};

/// Complex boundary values h(gamma(s_j)) on a curve, with quadrature weights precomputed.
class BoundaryFunction {
 public:
  BoundaryFunction() = default;

  BoundaryFunction(ParametricCurve curve, std::vector<Complex> values)
      : curve_(std::move(curve)), values_(std::move(values)) {
    const std::size_t n = curve_.size();
    if (values_.size() != n) throw ContractError("BoundaryFunction: value count must match node count");
    const double sign = curve_.orientation() == Orientation::counterclockwise ? 1.0 : -1.0;
    const double h = curve_.node_spacing();
    gx_.resize(n);
    gy_.resize(n);
    w_.resize(2 * n);
    wh_.resize(2 * n);
    for (std::size_t j = 0; j < n; ++j) {
      if (!is_finite(values_[j])) throw ContractError("BoundaryFunction: non-finite value");
      gx_[j] = curve_[j].real();
      gy_[j] = curve_[j].imag();
      const Complex w = sign * h * curve_.dgamma()[j];
      const Complex wh = w * values_[j];
      w_[2 * j] = w.real();
      w_[2 * j + 1] = w.imag();
      wh_[2 * j] = wh.real();
      wh_[2 * j + 1] = wh.imag();
    }
  }

  const ParametricCurve& curve() const { return curve_; }
  const std::vector<Complex>& values() const { return values_; }
  std::size_t size() const { return values_.size(); }

  /// Quadrature sums at z. Derivative sums are only accumulated when requested.
  template <bool WithDerivative>
  CauchySums sums(Complex z) const {
    const std::size_t n = gx_.size();
    const double zx = z.real(), zy = z.imag();
    double n0r = 0, n0i = 0, d0r = 0, d0i = 0, n1r = 0, n1i = 0, d1r = 0, d1i = 0;
    double min_r2 = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      const double dx = gx_[j] - zx;
      const double dy = gy_[j] - zy;
      const double r2 = dx * dx + dy * dy;
      min_r2 = r2 < min_r2 ? r2 : min_r2;
      const double ir = dx / r2, ii = -dy / r2;  // 1/(g - z)
      const double wr = w_[2 * j], wi = w_[2 * j + 1];
      const double hr = wh_[2 * j], hi = wh_[2 * j + 1];
      n0r += hr * ir - hi * ii;
      n0i += hr * ii + hi * ir;
      d0r += wr * ir - wi * ii;
      d0i += wr * ii + wi * ir;
      if constexpr (WithDerivative) {
        const double qr = ir * ir - ii * ii, qi = 2.0 * ir * ii;  // 1/(g - z)^2
        n1r += hr * qr - hi * qi;
        n1i += hr * qi + hi * qr;
        d1r += wr * qr - wi * qi;
        d1i += wr * qi + wi * qr;
      }
    }
    return {{n0r, n0i}, {d0r, d0i}, {n1r, n1i}, {d1r, d1i}, min_r2};
  }

 private:
  ParametricCurve curve_;
  std::vector<Complex> values_;
  std::vector<double> gx_, gy_;
  std::vector<double> w_, wh_;  // interleaved re/im
};

namespace detail {

inline const Complex kTwoPiI{0.0, kTwoPi};

// Side membership from the quadrature denominator; falls back to the polygon winding number
// when the point is close enough to the nodes for the sum to be unreliable.
inline void check_side(const BoundaryFunction& bf, const CauchySums& s, Complex z, Side side) {
  if (s.min_dist2 == 0.0) throw SingularConfigurationError("Cauchy evaluation at a boundary node");
  const double gap = bf.curve().mean_node_gap();
  bool inside;
  if (s.min_dist2 > 4.0 * gap * gap) {
    inside = std::abs(s.d0 / kTwoPiI) > 0.5;
  } else {
    const int wn = winding_number(bf.curve(), z);
    inside = wn != 0;
  }
  if (side == Side::interior && !inside)
    throw DomainError("cauchy_interior: point is outside the curve (use the exterior evaluator)");
  if (side == Side::exterior && inside)
    throw DomainError("cauchy_exterior: point is inside the curve (use the interior evaluator)");
}

}  // namespace detail

/// Value and complex derivative of a Cauchy-integral-represented function.
struct CauchyResult {
  Complex value{};
  Complex derivative{};
  double min_node_distance = 0.0;
};

/// Evaluate h and h' at z from the sums (no side check).
inline CauchyResult cauchy_from_sums(const CauchySums& s, Side side, Complex value_at_infinity = {}) {
  CauchyResult r;
  r.min_node_distance = std::sqrt(s.min_dist2);
  if (side == Side::interior) {
    r.value = s.n0 / s.d0;
    r.derivative = (s.n1 * s.d0 - s.n0 * s.d1) / (s.d0 * s.d0);
  } else {
    const Complex a = detail::kTwoPiI;
    const Complex num = value_at_infinity * a - s.n0;
    const Complex den = a - s.d0;
    r.value = num / den;
    r.derivative = (-s.n1 * den + num * s.d1) / (den * den);
  }
  return r;
}

/// (1/2pi i) \oint h(g)/(g - z) dg for z inside the curve.
inline Complex cauchy_interior(const BoundaryFunction& bf, Complex z) {
  const auto s = bf.sums<false>(z);
  detail::check_side(bf, s, z, Side::interior);
  return s.n0 / s.d0;
}

/// h(inf) - (1/2pi i) \oint_ccw h(g)/(g - z) dg for z outside the curve.
inline Complex cauchy_exterior(const BoundaryFunction& bf, Complex z, Complex value_at_infinity) {
  const auto s = bf.sums<false>(z);
  detail::check_side(bf, s, z, Side::exterior);
  return cauchy_from_sums(s, Side::exterior, value_at_infinity).value;
}

/// Complex derivative of the interior or exterior representation. Constants differentiate to exactly 0.
/// value_at_infinity does not affect the exterior derivative of the exact integral, but enters the
/// normalized quotient; pass the same value used for cauchy_exterior.
inline Complex cauchy_derivative(const BoundaryFunction& bf, Complex z, Side side, Complex value_at_infinity = {}) {
  const auto s = bf.sums<true>(z);
  detail::check_side(bf, s, z, side);
  return cauchy_from_sums(s, side, value_at_infinity).derivative;
}

}  // namespace conav
