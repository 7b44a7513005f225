#pragma once

// Iterative construction of the conformal map of a multiply connected workspace onto a circle domain.
//
// One iteration runs M+1 steps. Step k <= M maps the exterior of the current image of obstacle k onto
// the exterior of the unit circle (centered on that obstacle's tracked point); step M+1 maps the interior
// of the current image of the external curve onto the unit disk with the anchor at the origin. After every
// step all other curves and tracked points are pushed through the new stage and re-differentiated
// spectrally. Iteration stops when the largest displacement of any boundary node between two successive
// iterations is at most the tolerance.

#include <conav/core.hpp>
#include <conav/geometry.hpp>
#include <conav/simply_connected.hpp>

#include <Eigen/Dense>

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace conav {

struct IterationReport {
  std::vector<double> deltas;           // sup-node displacement per iteration
  std::vector<double> ratio_estimates;  // deltas[n+1] / deltas[n]
  bool converged = false;
};

class NonConvergenceError : public Error {
 public:
  NonConvergenceError(const std::string& what, IterationReport report) : Error(what), report_(std::move(report)) {}
  const IterationReport& report() const { return report_; }

 private:
  IterationReport report_;
};

/// Raised when a converged image curve is not circular enough to fit.
class FitError : public Error {
 public:
  using Error::Error;
};

struct KoebeOptions {
  double tol = 1e-13;
  int max_iter = 50;
  /// When non-empty, the kernels of every stage are written here (debug only).
  std::string kernel_dump_dir;
};

/// Ordered stack of stages T_n o ... o T_1 plus the current images of the boundary and tracked points.
/// Curve index convention: 0..M-1 internal obstacles, M the external curve.
struct CompositeMap {
  Workspace source;
  std::vector<MapStage> stages;
  std::vector<ParametricCurve> image_curves;
  std::vector<Complex> tracked_points;  // 0..M-1 obstacle centers, M the anchor
  int n_iterations = 0;
  double final_delta = 0.0;

  std::size_t obstacle_count() const { return source.internal.size(); }
};

struct Circle {
  Complex center{};
  double radius = 0.0;
};

/// Circle domain: unit external circle minus disjoint obstacle disks.
struct SphereWorld {
  Complex external_center{0.0, 0.0};
  double external_radius = 1.0;
  std::vector<Circle> obstacles;
  std::vector<double> fit_residuals;  // max node distance to each fitted obstacle circle
  double external_fit_residual = 0.0;
};

/// Result of applying the composite map to a point.
struct CompositeValue {
  Complex value{};
  Complex derivative{};
  bool near_boundary = false;
};

namespace detail {

inline void push_through(const MapStage& stage, std::vector<ParametricCurve>& curves, std::vector<Complex>& points,
                         std::size_t own) {
  for (std::size_t i = 0; i < curves.size(); ++i) {
    std::vector<Complex> vals(curves[i].size());
    if (i == own) {
      vals = stage.map_boundary();
    } else {
      for (std::size_t j = 0; j < vals.size(); ++j) vals[j] = stage.eval<false>(curves[i][j]).value;
    }
    curves[i] = ParametricCurve::from_samples(std::move(vals));
  }
  for (std::size_t i = 0; i < points.size(); ++i)
    points[i] = i == own ? Complex(0.0) : stage.eval<false>(points[i]).value;
}

inline void check_topology(const std::vector<ParametricCurve>& curves, int iteration) {
  for (std::size_t i = 0; i < curves.size(); ++i) {
    if (self_intersects(curves[i]))
      throw ConstructionError("run_koebe: image curve " + std::to_string(i) + " self-intersects at iteration " +
                              std::to_string(iteration));
    for (std::size_t j = i + 1; j < curves.size(); ++j)
      if (polygons_cross(curves[i], curves[j]))
        throw ConstructionError("run_koebe: image curves " + std::to_string(i) + " and " + std::to_string(j) +
                                " intersect at iteration " + std::to_string(iteration));
  }
}

}  // namespace detail

/// Build the composite map. Throws NonConvergenceError (with the report) if max_iter is exhausted.
inline std::pair<CompositeMap, IterationReport> run_koebe(const Workspace& ws, const KoebeOptions& opts = {}) {
  if (!(opts.tol > 0.0)) throw ContractError("run_koebe: tolerance must be positive");
  if (opts.max_iter < 1) throw ContractError("run_koebe: max_iter must be >= 1");
  const auto report_check = validate_workspace(ws);
  if (!report_check.valid()) throw DomainError("run_koebe: invalid workspace: " + report_check.violations[0].message);

  const std::size_t m = ws.internal.size();
  CompositeMap cm;
  cm.source = ws;
  cm.image_curves = ws.internal;
  cm.image_curves.push_back(ws.external);
  cm.tracked_points = ws.obstacle_centers;
  cm.tracked_points.push_back(ws.interior_anchor);

  IterationReport report;
  for (int iter = 1; iter <= opts.max_iter; ++iter) {
    const auto previous = cm.image_curves;
    for (std::size_t k = 0; k <= m; ++k) {
      MapStage stage;
      try {
        stage = k < m ? build_exterior_map(cm.image_curves[k], cm.tracked_points[k])
                      : build_interior_map(cm.image_curves[k], cm.tracked_points[k]);
      } catch (const Error& e) {
        throw ConstructionError("run_koebe: iteration " + std::to_string(iter) + ", step " + std::to_string(k + 1) +
                                ": " + e.what());
      }
      if (!opts.kernel_dump_dir.empty()) {
        const auto ops = build_kernels(cm.image_curves[k], cm.tracked_points[k],
                                       k < m ? KernelKind::exterior : KernelKind::interior);
        write_kernel_dump(ops, opts.kernel_dump_dir + "/iter" + std::to_string(iter) + "_step" + std::to_string(k + 1));
      }
      detail::push_through(stage, cm.image_curves, cm.tracked_points, k);
      cm.stages.push_back(std::move(stage));
    }
    detail::check_topology(cm.image_curves, iter);

    double delta = 0.0;
    for (std::size_t i = 0; i <= m; ++i)
      for (std::size_t j = 0; j < previous[i].size(); ++j)
        delta = std::max(delta, std::abs(cm.image_curves[i][j] - previous[i][j]));
    if (!report.deltas.empty()) report.ratio_estimates.push_back(delta / report.deltas.back());
    report.deltas.push_back(delta);
    cm.n_iterations = iter;
    cm.final_delta = delta;
    if (delta <= opts.tol) {
      report.converged = true;
      return {std::move(cm), std::move(report)};
    }
  }
  throw NonConvergenceError("run_koebe: no convergence after " + std::to_string(opts.max_iter) +
                                " iterations (last delta " + std::to_string(report.deltas.back()) + ")",
                            report);
}

/// Apply every stage in order, accumulating the derivative by the chain rule.
inline CompositeValue evaluate_composite_full(const CompositeMap& cm, Complex z) {
  CompositeValue out;
  out.value = z;
  out.derivative = 1.0;
  for (const auto& stage : cm.stages) {
    const auto s = stage.eval<true>(out.value);
    out.value = s.value;
    out.derivative *= s.derivative;
    out.near_boundary = out.near_boundary || s.near_boundary;
  }
  return out;
}

inline Complex evaluate_composite(const CompositeMap& cm, Complex z) {
  Complex w = z;
  for (const auto& stage : cm.stages) w = stage.eval<false>(w).value;
  return w;
}

inline Complex composite_derivative(const CompositeMap& cm, Complex z) {
  return evaluate_composite_full(cm, z).derivative;
}

/// Cauchy-Riemann Jacobian [[a, -b], [b, a]] of the composite at z, where T'(z) = a + ib.
inline Mat2 jacobian_from_derivative(Complex d) { return {{{d.real(), -d.imag()}, {d.imag(), d.real()}}}; }

inline Mat2 jacobian_2x2(const CompositeMap& cm, Complex z) {
  return jacobian_from_derivative(composite_derivative(cm, z));
}

/// Algebraic (Kasa) least-squares circle through the points; returns the circle and the max
/// distance of any point from it.
inline std::pair<Circle, double> fit_circle(std::span<const Complex> pts) {
  const auto n = static_cast<Eigen::Index>(pts.size());
  if (n < 3) throw ContractError("fit_circle: need at least 3 points");
  Complex mean = 0.0;
  for (auto p : pts) mean += p;
  mean /= static_cast<double>(n);
  Eigen::MatrixXd a(n, 3);
  Eigen::VectorXd b(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const Complex p = pts[static_cast<std::size_t>(j)] - mean;
    a(j, 0) = p.real();
    a(j, 1) = p.imag();
    a(j, 2) = 1.0;
    b(j) = -std::norm(p);
  }
  const Eigen::Vector3d sol = a.colPivHouseholderQr().solve(b);
  Circle c;
  c.center = mean + Complex(-0.5 * sol(0), -0.5 * sol(1));
  c.radius = std::sqrt(0.25 * (sol(0) * sol(0) + sol(1) * sol(1)) - sol(2));
  double residual = 0.0;
  for (auto p : pts) residual = std::max(residual, std::abs(std::abs(p - c.center) - c.radius));
  return {c, residual};
}

/// Tolerances for fit_circles.
inline constexpr double kFitRelativeTolerance = 1e-6;
inline constexpr double kExternalNormalizationTolerance = 1e-10;

/// Fit circles to the converged image curves. If the external image deviates from the unit circle
/// by more than 1e-10, an affine normalization stage is appended to the composite first.
inline SphereWorld fit_circles(CompositeMap& cm) {
  const std::size_t m = cm.obstacle_count();
  if (cm.image_curves.size() != m + 1) throw ContractError("fit_circles: composite has no image curves");
  auto [ext, ext_res] = fit_circle(cm.image_curves[m].gamma());
  if (std::abs(ext.center) > kExternalNormalizationTolerance ||
      std::abs(ext.radius - 1.0) > kExternalNormalizationTolerance) {
    auto stage = MapStage::affine(ext.center, ext.radius);
    for (auto& curve : cm.image_curves) {
      std::vector<Complex> vals(curve.size());
      for (std::size_t j = 0; j < vals.size(); ++j) vals[j] = stage.eval<false>(curve[j]).value;
      curve = ParametricCurve::from_samples(std::move(vals));
    }
    for (auto& p : cm.tracked_points) p = stage.eval<false>(p).value;
    cm.stages.push_back(std::move(stage));
    std::tie(ext, ext_res) = fit_circle(cm.image_curves[m].gamma());
  }
  if (ext_res > kFitRelativeTolerance * ext.radius)
    throw FitError("fit_circles: external image is not circular (residual " + std::to_string(ext_res) +
                   "); run more iterations");

  SphereWorld sw;
  sw.external_center = 0.0;
  sw.external_radius = 1.0;
  sw.external_fit_residual = ext_res;
  for (std::size_t i = 0; i < m; ++i) {
    const auto [circle, residual] = fit_circle(cm.image_curves[i].gamma());
    if (residual > kFitRelativeTolerance * circle.radius)
      throw FitError("fit_circles: obstacle " + std::to_string(i) + " image is not circular (residual " +
                     std::to_string(residual) + "); run more iterations");
    sw.obstacles.push_back(circle);
    sw.fit_residuals.push_back(residual);
  }
  return sw;
}

}  // namespace conav
