#pragma once

// Conformal maps of simply connected domains bounded by one curve.
//
// interior (bounded domain, ccw curve):   T(z) = e^{-c} (z - z_c) exp((z - z_c) f(z)),   T(z_c) = 0, T'(z_c) = e^{-c} > 0
// exterior (unbounded domain, cw curve):  T(z) = e^{c} (z - z_c) exp(-f(z)),             T(inf) = inf, T'(inf) = e^{c} > 0
// affine   (normalization only):          T(z) = e^{-c} (z - z_c)
//
// f is recovered on the boundary from the Riemann-Hilbert solve and evaluated off the curve by
// normalized Cauchy integrals; the closed forms above are then applied pointwise.

#include <conav/boundary_integral.hpp>
#include <conav/cauchy.hpp>
#include <conav/core.hpp>
#include <conav/geometry.hpp>

#include <string>
#include <vector>

namespace conav {

enum class StageKind : std::uint8_t { interior = 0, exterior = 1, affine = 2 };

inline const char* to_string(StageKind k) {
  switch (k) {
    case StageKind::interior: return "interior";
    case StageKind::exterior: return "exterior";
    case StageKind::affine: return "affine";
  }
  return "unknown";
}

/// Evaluations closer than this many mean node gaps to the stage curve are flagged as degraded.
inline constexpr double kNearBoundaryGaps = 5.0;

struct StageValue {
  Complex value{};
  Complex derivative{};
  bool near_boundary = false;  // inside the accuracy floor; value is still returned
};

class MapStage {
 public:
  MapStage() = default;

  MapStage(StageKind kind, Complex center, double c_const, BoundaryFunction f, std::vector<Complex> map_boundary)
      : kind_(kind), center_(center), c_const_(c_const), f_(std::move(f)), map_boundary_(std::move(map_boundary)) {
    scale_ = kind_ == StageKind::exterior ? std::exp(c_const_) : std::exp(-c_const_);
    if (kind_ != StageKind::affine) floor_ = kNearBoundaryGaps * f_.curve().mean_node_gap();
  }

  /// z -> (z - center) / radius.
  static MapStage affine(Complex center, double radius) {
    return MapStage(StageKind::affine, center, std::log(radius), BoundaryFunction{}, {});
  }

  StageKind kind() const { return kind_; }
  Complex center() const { return center_; }
  double c_const() const { return c_const_; }
  /// e^{-c} for interior/affine stages, e^{c} for exterior stages.
  double scale() const { return scale_; }
  const ParametricCurve& curve() const { return f_.curve(); }
  const BoundaryFunction& f_function() const { return f_; }
  const std::vector<Complex>& f_boundary() const { return f_.values(); }
  const std::vector<Complex>& map_boundary() const { return map_boundary_; }
  double accuracy_floor() const { return floor_; }

  /// Stage value (and derivative when WithDerivative) at z; throws DomainError on the wrong side.
  template <bool WithDerivative = true>
  StageValue eval(Complex z) const {
    StageValue out;
    const Complex u = z - center_;
    if (kind_ == StageKind::affine) {
      out.value = scale_ * u;
      out.derivative = scale_;
      return out;
    }
    const Side side = kind_ == StageKind::interior ? Side::interior : Side::exterior;
    const auto sums = f_.sums<WithDerivative>(z);
    detail::check_side(f_, sums, z, side);
    const auto f = cauchy_from_sums(sums, side);
    out.near_boundary = f.min_node_distance < floor_;
    if (kind_ == StageKind::interior) {
      const Complex e = std::exp(u * f.value);
      out.value = scale_ * u * e;
      if constexpr (WithDerivative) out.derivative = scale_ * e * (1.0 + u * (u * f.derivative + f.value));
    } else {
      const Complex e = std::exp(-f.value);
      out.value = scale_ * u * e;
      if constexpr (WithDerivative) out.derivative = scale_ * e * (1.0 - u * f.derivative);
    }
    return out;
  }

 private:
  StageKind kind_ = StageKind::affine;
  Complex center_{};
  double c_const_ = 0.0;
  double scale_ = 1.0;
  double floor_ = 0.0;
  BoundaryFunction f_;
  std::vector<Complex> map_boundary_;
};

namespace detail {

// Continuous branch of arg(gamma_j - z) along the nodes, starting in (-pi, pi].
inline std::vector<double> unwrapped_arg(const ParametricCurve& curve, Complex z) {
  const auto& g = curve.gamma();
  std::vector<double> out(g.size());
  out[0] = std::arg(g[0] - z);
  for (std::size_t j = 1; j < g.size(); ++j) out[j] = out[j - 1] + std::arg((g[j] - z) / (g[j - 1] - z));
  return out;
}

// theta must increase strictly from node to node and by exactly 2pi over the period.
inline void check_boundary_correspondence(const std::vector<double>& theta, const char* who) {
  const std::size_t n = theta.size();
  for (std::size_t j = 0; j < n; ++j) {
    const double next = j + 1 < n ? theta[j + 1] : theta[0] + kTwoPi;
    const double step = next - theta[j];
    if (!(step > 0.0) || step >= kPi)
      throw ConstructionError(std::string(who) + ": boundary correspondence is not monotone at node " +
                              std::to_string(j) + " (curve under-resolved; increase the node count)");
  }
}

}  // namespace detail

/// Map the interior of a counterclockwise curve onto the unit disk with z_c -> 0, T'(z_c) > 0.
inline MapStage build_interior_map(const ParametricCurve& curve, Complex z_c) {
  if (curve.orientation() != Orientation::counterclockwise)
    throw DomainError("build_interior_map: curve must be counterclockwise");
  if (winding_number(curve, z_c) != 1) throw DomainError("build_interior_map: center is not inside the curve");
  const auto ops = build_kernels(curve, z_c, KernelKind::interior);
  const std::size_t n = curve.size();
  std::vector<double> mu(n);
  for (std::size_t j = 0; j < n; ++j) mu[j] = -std::log(std::abs(curve[j] - z_c));
  const auto bd = solve_riemann_hilbert(ops, mu);

  const auto arg_g = detail::unwrapped_arg(curve, z_c);
  std::vector<double> theta(n);
  for (std::size_t j = 0; j < n; ++j) theta[j] = bd.upsilon[j] + arg_g[j];
  detail::check_boundary_correspondence(theta, "build_interior_map");

  std::vector<Complex> f(n), image(n);
  for (std::size_t j = 0; j < n; ++j) {
    f[j] = Complex(bd.mu[j] + bd.c_const, bd.upsilon[j]) / (curve[j] - z_c);
    image[j] = std::polar(1.0, theta[j]);
  }
  return MapStage(StageKind::interior, z_c, bd.c_const, BoundaryFunction(curve, std::move(f)), std::move(image));
}

/// Map the exterior of a clockwise curve onto the exterior of the unit disk with inf -> inf, T'(inf) > 0.
/// z_c is any point strictly inside the curve.
inline MapStage build_exterior_map(const ParametricCurve& curve, Complex z_c) {
  if (curve.orientation() != Orientation::clockwise)
    throw DomainError("build_exterior_map: curve must be clockwise");
  if (winding_number(curve, z_c) != -1) throw DomainError("build_exterior_map: center is not inside the curve");
  const auto ops = build_kernels(curve, z_c, KernelKind::exterior);
  const std::size_t n = curve.size();
  std::vector<double> mu(n);
  for (std::size_t j = 0; j < n; ++j) mu[j] = std::log(std::abs(curve[j] - z_c));
  const auto bd = solve_riemann_hilbert(ops, mu);

  const auto arg_g = detail::unwrapped_arg(curve, z_c);
  std::vector<double> theta(n);
  for (std::size_t j = 0; j < n; ++j) theta[j] = bd.upsilon[j] - arg_g[j];
  detail::check_boundary_correspondence(theta, "build_exterior_map");

  std::vector<Complex> f(n), image(n);
  for (std::size_t j = 0; j < n; ++j) {
    f[j] = Complex(bd.mu[j] + bd.c_const, bd.upsilon[j]);
    image[j] = std::polar(1.0, -theta[j]);
  }
  return MapStage(StageKind::exterior, z_c, bd.c_const, BoundaryFunction(curve, std::move(f)), std::move(image));
}

/// Stage value at z (must lie on the stage's domain side of its curve).
inline StageValue evaluate_stage(const MapStage& stage, Complex z) { return stage.eval<false>(z); }

/// Complex derivative of the stage at z.
inline Complex stage_derivative(const MapStage& stage, Complex z) { return stage.eval<true>(z).derivative; }

}  // namespace conav
