#pragma once

// Workspaces as collections of smooth closed parametric curves sampled at uniform nodes.

#include <conav/core.hpp>
#include <conav/spectral.hpp>

#include <algorithm>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace conav {

enum class Orientation { counterclockwise, clockwise };

inline const char* to_string(Orientation o) {
  return o == Orientation::counterclockwise ? "counterclockwise" : "clockwise";
}

/// Samples of a 2*pi-periodic curve and its first two derivatives at s_j = 2*pi*j/N.
/// Orientation is measured from the node polygon, not declared.
class ParametricCurve {
 public:
  ParametricCurve() = default;

  ParametricCurve(std::vector<Complex> gamma, std::vector<Complex> dgamma, std::vector<Complex> ddgamma)
      : gamma_(std::move(gamma)), dgamma_(std::move(dgamma)), ddgamma_(std::move(ddgamma)) {
    const std::size_t n = gamma_.size();
    if (n < 4 || !spectral::is_power_of_two(n))
      throw ContractError("ParametricCurve: node count must be a power of two >= 4");
    if (dgamma_.size() != n || ddgamma_.size() != n)
      throw ContractError("ParametricCurve: derivative arrays must match node count");
    for (std::size_t j = 0; j < n; ++j) {
      if (!is_finite(gamma_[j]) || !is_finite(dgamma_[j]) || !is_finite(ddgamma_[j]))
        throw InvalidCurveError("ParametricCurve: non-finite sample at node " + std::to_string(j));
    }
    compute_derived();
  }

  /// Curve from node values only; derivatives are spectral derivatives of the samples.
  static ParametricCurve from_samples(std::vector<Complex> gamma) {
    auto d1 = spectral::derivative(gamma, 1);
    auto d2 = spectral::derivative(gamma, 2);
    return ParametricCurve(std::move(gamma), std::move(d1), std::move(d2));
  }

  std::size_t size() const { return gamma_.size(); }
  double node_spacing() const { return kTwoPi / static_cast<double>(gamma_.size()); }

  const std::vector<Complex>& gamma() const { return gamma_; }
  const std::vector<Complex>& dgamma() const { return dgamma_; }
  const std::vector<Complex>& ddgamma() const { return ddgamma_; }
  Complex operator[](std::size_t j) const { return gamma_[j]; }

  Orientation orientation() const { return orientation_; }
  double signed_area() const { return signed_area_; }
  double arclength() const { return arclength_; }
  double diameter() const { return diameter_; }
  /// Mean arclength between consecutive nodes.
  double mean_node_gap() const { return arclength_ / static_cast<double>(gamma_.size()); }
  /// Upper bound on the gap between the node polygon and the true curve (twice the max chord sagitta).
  double resolution() const { return resolution_; }
  double min_speed() const { return min_speed_; }

  /// Axis-aligned bounding box of the nodes: {min corner, max corner}.
  std::pair<Complex, Complex> bounding_box() const { return {bbox_lo_, bbox_hi_}; }

 private:
  void compute_derived() {
    const std::size_t n = gamma_.size();
    const double h = node_spacing();
    double area2 = 0.0;
    double length = 0.0;
    double max_curv_term = 0.0;
    min_speed_ = std::numeric_limits<double>::infinity();
    bbox_lo_ = bbox_hi_ = gamma_[0];
    for (std::size_t j = 0; j < n; ++j) {
      const Complex a = gamma_[j];
      // trapezoidal rule on Im(conj(gamma) gamma'), exact for trigonometric curves
      area2 += (std::conj(a) * dgamma_[j]).imag() * h;
      const double speed = std::abs(dgamma_[j]);
      length += speed * h;
      min_speed_ = std::min(min_speed_, speed);
      if (speed > 0.0) {
        // normal component of gamma'' drives the chord sagitta
        const double normal = std::abs((std::conj(dgamma_[j]) * ddgamma_[j]).imag()) / speed;
        max_curv_term = std::max(max_curv_term, normal);
      }
      bbox_lo_ = {std::min(bbox_lo_.real(), a.real()), std::min(bbox_lo_.imag(), a.imag())};
      bbox_hi_ = {std::max(bbox_hi_.real(), a.real()), std::max(bbox_hi_.imag(), a.imag())};
    }
    signed_area_ = 0.5 * area2;
    orientation_ = signed_area_ >= 0.0 ? Orientation::counterclockwise : Orientation::clockwise;
    arclength_ = length;
    resolution_ = 2.0 * max_curv_term * h * h / 8.0;
    double diam2 = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) diam2 = std::max(diam2, std::norm(gamma_[i] - gamma_[j]));
    diameter_ = std::sqrt(diam2);
  }

  std::vector<Complex> gamma_;
  std::vector<Complex> dgamma_;
  std::vector<Complex> ddgamma_;
  Orientation orientation_ = Orientation::counterclockwise;
  double signed_area_ = 0.0;
  double arclength_ = 0.0;
  double diameter_ = 0.0;
  double resolution_ = 0.0;
  double min_speed_ = 0.0;
  Complex bbox_lo_{};
  Complex bbox_hi_{};
};

// ---------------------------------------------------------------------------
// Curve specifications

enum class CurveKind { circle, ellipse, trig_polynomial, point_list };

/// One term c * e^{i n s} of a trigonometric polynomial curve.
struct TrigTerm {
  int n = 0;
  Complex c{};
};

/// Input description of a boundary curve. Which fields are meaningful depends on kind.
struct CurveSpec {
  CurveKind kind = CurveKind::circle;
  Complex center{};
  double radius = 1.0;                 // circle
  double semi_a = 1.0, semi_b = 1.0;   // ellipse semi-axes (before rotation)
  double rotation = 0.0;               // ellipse rotation [rad]
  Orientation orientation = Orientation::counterclockwise;  // circle, ellipse
  std::vector<TrigTerm> terms;         // trig_polynomial: gamma(s) = center + sum c_n e^{ins}
  std::vector<Complex> points;         // point_list: samples at uniform parameter values

  static CurveSpec circle(Complex c, double r, Orientation o = Orientation::counterclockwise) {
    CurveSpec s;
    s.kind = CurveKind::circle;
    s.center = c;
    s.radius = r;
    s.orientation = o;
    return s;
  }
  static CurveSpec ellipse(Complex c, double a, double b, double rot = 0.0,
                           Orientation o = Orientation::counterclockwise) {
    CurveSpec s;
    s.kind = CurveKind::ellipse;
    s.center = c;
    s.semi_a = a;
    s.semi_b = b;
    s.rotation = rot;
    s.orientation = o;
    return s;
  }
  static CurveSpec trig_polynomial(Complex c, std::vector<TrigTerm> terms) {
    CurveSpec s;
    s.kind = CurveKind::trig_polynomial;
    s.center = c;
    s.terms = std::move(terms);
    return s;
  }
  static CurveSpec point_list(std::vector<Complex> pts) {
    CurveSpec s;
    s.kind = CurveKind::point_list;
    s.points = std::move(pts);
    return s;
  }
};

namespace detail {

// Evaluate center + sum c_n e^{i n s_j} and its derivatives exactly at the uniform nodes,
// using a table of N-th roots of unity (n*s_j is always a multiple of 2*pi/N).
inline ParametricCurve sample_trig(Complex center, std::span<const TrigTerm> terms, std::size_t n_nodes) {
  std::vector<Complex> roots(n_nodes);
  for (std::size_t k = 0; k < n_nodes; ++k) roots[k] = std::polar(1.0, kTwoPi * static_cast<double>(k) / n_nodes);
  std::vector<Complex> g(n_nodes, center), d1(n_nodes), d2(n_nodes);
  const long nn = static_cast<long>(n_nodes);
  for (const auto& t : terms) {
    const double m = static_cast<double>(t.n);
    const Complex c1 = Complex(0.0, m) * t.c;
    const Complex c2 = -m * m * t.c;
    for (std::size_t j = 0; j < n_nodes; ++j) {
      long idx = (static_cast<long>(t.n) * static_cast<long>(j)) % nn;
      if (idx < 0) idx += nn;
      const Complex e = roots[static_cast<std::size_t>(idx)];
      g[j] += t.c * e;
      d1[j] += c1 * e;
      d2[j] += c2 * e;
    }
  }
  return ParametricCurve(std::move(g), std::move(d1), std::move(d2));
}

// Trigonometric interpolant coefficients of m uniform samples (Nyquist term split evenly).
inline std::vector<TrigTerm> interpolant_terms(std::span<const Complex> pts) {
  const std::size_t m = pts.size();
  const auto c = spectral::coefficients(pts);
  std::vector<TrigTerm> terms;
  terms.reserve(m + 1);
  for (std::size_t k = 0; k < m; ++k) {
    long w = static_cast<long>(k) <= static_cast<long>(m / 2) ? static_cast<long>(k)
                                                              : static_cast<long>(k) - static_cast<long>(m);
    if (m % 2 == 0 && 2 * static_cast<std::size_t>(std::abs(w)) == m) {
      terms.push_back({static_cast<int>(w), 0.5 * c[k]});
      terms.push_back({static_cast<int>(-w), 0.5 * c[k]});
    } else {
      terms.push_back({static_cast<int>(w), c[k]});
    }
  }
  return terms;
}

inline double orient3(Complex a, Complex b, Complex c) {
  return (b.real() - a.real()) * (c.imag() - a.imag()) - (b.imag() - a.imag()) * (c.real() - a.real());
}

inline bool on_segment(Complex a, Complex b, Complex p) {
  return std::min(a.real(), b.real()) <= p.real() && p.real() <= std::max(a.real(), b.real()) &&
         std::min(a.imag(), b.imag()) <= p.imag() && p.imag() <= std::max(a.imag(), b.imag());
}

}  // namespace detail

/// True iff closed segments [a,b] and [c,d] intersect.
inline bool segments_intersect(Complex a, Complex b, Complex c, Complex d) {
  const double d1 = detail::orient3(c, d, a);
  const double d2 = detail::orient3(c, d, b);
  const double d3 = detail::orient3(a, b, c);
  const double d4 = detail::orient3(a, b, d);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) return true;
  if (d1 == 0 && detail::on_segment(c, d, a)) return true;
  if (d2 == 0 && detail::on_segment(c, d, b)) return true;
  if (d3 == 0 && detail::on_segment(a, b, c)) return true;
  if (d4 == 0 && detail::on_segment(a, b, d)) return true;
  return false;
}

/// True if two non-adjacent edges of the node polygon intersect (resolution-limited test).
inline bool self_intersects(const ParametricCurve& curve) {
  const auto& g = curve.gamma();
  const std::size_t n = g.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Complex a = g[i], b = g[(i + 1) % n];
    for (std::size_t j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;  // adjacent through the wrap-around
      if (segments_intersect(a, b, g[j], g[(j + 1) % n])) return true;
    }
  }
  return false;
}

/// True if any edge of one node polygon crosses an edge of the other.
inline bool polygons_cross(const ParametricCurve& p, const ParametricCurve& q) {
  const auto [plo, phi] = p.bounding_box();
  const auto [qlo, qhi] = q.bounding_box();
  if (plo.real() > qhi.real() || qlo.real() > phi.real() || plo.imag() > qhi.imag() || qlo.imag() > phi.imag())
    return false;
  const auto& a = p.gamma();
  const auto& b = q.gamma();
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j)
      if (segments_intersect(a[i], a[(i + 1) % a.size()], b[j], b[(j + 1) % b.size()])) return true;
  return false;
}

/// Signed winding number of the node polygon about p (crossing rule, no trigonometry).
inline int winding_number(const ParametricCurve& curve, Complex p) {
  const auto& g = curve.gamma();
  const std::size_t n = g.size();
  int wn = 0;
  for (std::size_t j = 0; j < n; ++j) {
    const Complex a = g[j], b = g[(j + 1) % n];
    if (a.imag() <= p.imag()) {
      if (b.imag() > p.imag() && detail::orient3(a, b, p) > 0) ++wn;
    } else {
      if (b.imag() <= p.imag() && detail::orient3(a, b, p) < 0) --wn;
    }
  }
  return wn;
}

/// Euclidean distance from p to the closed node polygon.
inline double distance_to_polygon(const ParametricCurve& curve, Complex p) {
  const auto& g = curve.gamma();
  const std::size_t n = g.size();
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < n; ++j) {
    const Complex a = g[j];
    const Complex e = g[(j + 1) % n] - a;
    const double len2 = std::norm(e);
    double t = len2 > 0.0 ? ((p - a) * std::conj(e)).real() / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    best = std::min(best, std::norm(p - (a + t * e)));
  }
  return std::sqrt(best);
}

/// Sample a curve specification at n_nodes uniform parameter values.
/// Throws DegenerateCurveError on a zero-speed node and InvalidCurveError on self-intersection.
inline ParametricCurve sample_curve(const CurveSpec& spec, std::size_t n_nodes) {
  if (n_nodes < 16 || !spectral::is_power_of_two(n_nodes))
    throw ContractError("sample_curve: n_nodes must be a power of two >= 16");
  const double sign = spec.orientation == Orientation::counterclockwise ? 1.0 : -1.0;
  ParametricCurve curve;
  switch (spec.kind) {
    case CurveKind::circle: {
      if (spec.radius == 0.0) throw DegenerateCurveError("sample_curve: circle of zero radius");
      if (!(spec.radius > 0.0)) throw ContractError("sample_curve: circle radius must be positive");
      curve = detail::sample_trig(spec.center, std::vector<TrigTerm>{{static_cast<int>(sign), spec.radius}}, n_nodes);
      break;
    }
    case CurveKind::ellipse: {
      if (!(spec.semi_a > 0.0 && spec.semi_b > 0.0))
        throw ContractError("sample_curve: ellipse semi-axes must be positive");
      // e^{i rot} (a cos s + i sign b sin s) = e^{i rot}[(a + sign b)/2 e^{is} + (a - sign b)/2 e^{-is}]
      const Complex rot = std::polar(1.0, spec.rotation);
      curve = detail::sample_trig(spec.center,
                                  std::vector<TrigTerm>{{1, rot * 0.5 * (spec.semi_a + sign * spec.semi_b)},
                                                        {-1, rot * 0.5 * (spec.semi_a - sign * spec.semi_b)}},
                                  n_nodes);
      break;
    }
    case CurveKind::trig_polynomial: {
      if (spec.terms.empty()) throw ContractError("sample_curve: trig_polynomial needs at least one term");
      curve = detail::sample_trig(spec.center, spec.terms, n_nodes);
      break;
    }
    case CurveKind::point_list: {
      if (spec.points.size() < 3) throw ContractError("sample_curve: point_list needs at least 3 points");
      curve = detail::sample_trig(Complex(0.0), detail::interpolant_terms(spec.points), n_nodes);
      break;
    }
  }
  double max_speed = 0.0;
  for (const auto& d : curve.dgamma()) max_speed = std::max(max_speed, std::abs(d));
  if (curve.min_speed() <= 1e-12 * std::max(1.0, max_speed))
    throw DegenerateCurveError("sample_curve: curve has a zero-speed node");
  if (self_intersects(curve)) throw InvalidCurveError("sample_curve: curve is self-intersecting");
  return curve;
}

// ---------------------------------------------------------------------------
// Workspace

/// Bounded free space: inside the counterclockwise external curve, outside every clockwise internal curve.
struct Workspace {
  ParametricCurve external;
  std::vector<ParametricCurve> internal;
  std::vector<Complex> obstacle_centers;  // one point strictly inside each internal curve
  Complex interior_anchor{};              // a point of the free space

  std::size_t obstacle_count() const { return internal.size(); }
};

enum class ViolationKind {
  orientation,
  self_intersection,
  containment,
  disjointness,
  center_placement,
  anchor_placement,
  count_mismatch,
  node_count_mismatch,
};

inline const char* to_string(ViolationKind k) {
  switch (k) {
    case ViolationKind::orientation: return "orientation";
    case ViolationKind::self_intersection: return "self_intersection";
    case ViolationKind::containment: return "containment";
    case ViolationKind::disjointness: return "disjointness";
    case ViolationKind::center_placement: return "center_placement";
    case ViolationKind::anchor_placement: return "anchor_placement";
    case ViolationKind::count_mismatch: return "count_mismatch";
    case ViolationKind::node_count_mismatch: return "node_count_mismatch";
  }
  return "unknown";
}

struct Violation {
  ViolationKind kind;
  std::string message;
  int curve_a = -1;  // internal index, or -1 for the external curve / not applicable
  int curve_b = -1;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool valid() const { return violations.empty(); }
  bool has(ViolationKind k) const {
    return std::any_of(violations.begin(), violations.end(), [k](const Violation& v) { return v.kind == k; });
  }
};

/// Check every workspace invariant and report all violations (never throws).
inline ValidationReport validate_workspace(const Workspace& ws) {
  ValidationReport report;
  auto add = [&report](ViolationKind k, std::string msg, int a = -1, int b = -1) {
    report.violations.push_back({k, std::move(msg), a, b});
  };
  auto name = [](int i) { return i < 0 ? std::string("external") : "internal[" + std::to_string(i) + "]"; };
  const int m = static_cast<int>(ws.internal.size());

  if (ws.external.orientation() != Orientation::counterclockwise)
    add(ViolationKind::orientation, "external curve must be counterclockwise");
  if (self_intersects(ws.external)) add(ViolationKind::self_intersection, "external curve self-intersects");
  for (int i = 0; i < m; ++i) {
    const auto& c = ws.internal[i];
    if (c.size() != ws.external.size())
      add(ViolationKind::node_count_mismatch, name(i) + " node count differs from the external curve", i);
    if (c.orientation() != Orientation::clockwise)
      add(ViolationKind::orientation, name(i) + " must be clockwise", i);
    if (self_intersects(c)) add(ViolationKind::self_intersection, name(i) + " self-intersects", i);
    const bool crosses_ext = polygons_cross(c, ws.external);
    const bool inside = winding_number(ws.external, c[0]) == 1;
    if (crosses_ext || !inside)
      add(ViolationKind::containment, name(i) + " is not strictly inside the external curve", i);
  }
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      const auto& a = ws.internal[i];
      const auto& b = ws.internal[j];
      if (polygons_cross(a, b) || winding_number(a, b[0]) != 0 || winding_number(b, a[0]) != 0)
        add(ViolationKind::disjointness, name(i) + " and " + name(j) + " overlap", i, j);
    }
  }
  if (static_cast<int>(ws.obstacle_centers.size()) != m) {
    add(ViolationKind::count_mismatch, "expected " + std::to_string(m) + " obstacle centers, got " +
                                           std::to_string(ws.obstacle_centers.size()));
  } else {
    for (int i = 0; i < m; ++i) {
      const Complex z = ws.obstacle_centers[i];
      if (winding_number(ws.internal[i], z) == 0 ||
          distance_to_polygon(ws.internal[i], z) <= ws.internal[i].resolution())
        add(ViolationKind::center_placement, "center of " + name(i) + " is not strictly inside it", i);
    }
  }
  bool anchor_ok = winding_number(ws.external, ws.interior_anchor) == 1 &&
                   distance_to_polygon(ws.external, ws.interior_anchor) > ws.external.resolution();
  for (int i = 0; i < m && anchor_ok; ++i)
    anchor_ok = winding_number(ws.internal[i], ws.interior_anchor) == 0 &&
                distance_to_polygon(ws.internal[i], ws.interior_anchor) > ws.internal[i].resolution();
  if (!anchor_ok) add(ViolationKind::anchor_placement, "interior anchor is not in the free space");
  return report;
}

namespace detail {
inline bool near_box(const ParametricCurve& c, Complex p, double margin) {
  const auto [lo, hi] = c.bounding_box();
  return p.real() >= lo.real() - margin && p.real() <= hi.real() + margin && p.imag() >= lo.imag() - margin &&
         p.imag() <= hi.imag() + margin;
}
}  // namespace detail

/// Winding-number membership test. Points within a curve's polygon resolution of that curve
/// are reported as outside (conservative).
inline bool point_in_free_space(const Workspace& ws, Complex p) {
  if (!is_finite(p)) return false;
  if (winding_number(ws.external, p) != 1) return false;
  if (distance_to_polygon(ws.external, p) <= ws.external.resolution()) return false;
  for (const auto& c : ws.internal) {
    if (!detail::near_box(c, p, c.resolution())) continue;
    if (winding_number(c, p) != 0) return false;
    if (distance_to_polygon(c, p) <= c.resolution()) return false;
  }
  return true;
}

/// Minimum distance from p to all boundary node polygons.
inline double clearance(const Workspace& ws, Complex p) {
  double d = distance_to_polygon(ws.external, p);
  for (const auto& c : ws.internal) d = std::min(d, distance_to_polygon(c, p));
  return d;
}

}  // namespace conav
