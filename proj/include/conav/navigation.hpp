#pragma once

// Koditschek-Rimon navigation function on a sphere world and its pullback to the workspace.
//
//   beta_0 = rho_0^2 - |q - q_0|^2      (positive inside the external circle)
//   beta_i = |q - q_i|^2 - rho_i^2      (positive outside obstacle i)
//   beta   = prod_i beta_i
//   r_d    = |q - q_d|^2                (squared distance; the unsquared form printed with the
//                                        definition is inconsistent with the gradient prefactor)
//   phi    = r_d / (r_d^k + beta)^{1/k}
//
// The gradient is evaluated as
//   grad phi = (r_d^k + beta)^{-(k+1)/k} [ 2 beta (q - q_d) - (r_d/k) grad beta ],
//   grad beta = sum_i grad beta_i prod_{j != i} beta_j,
// which equals 2 beta (r_d^k+beta)^{-(k+1)/k} [(q - q_d) - (r_d/2k) sum_i grad beta_i / beta_i] in the
// interior and stays finite on the boundary. Note grad beta_0 = -2 (q - q_0): the sign differs from the
// other obstacles, unlike the uniform-sign sum sometimes written for the saddle condition.

#include <conav/core.hpp>
#include <conav/geometry.hpp>
#include <conav/koebe.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace conav {

struct NavParams {
  int k = 6;
  Complex goal_workspace{};  // x_d
  Complex goal_image{};      // q_d = T(x_d)
};

struct BetaValues {
  std::vector<double> betas;  // beta_0 (external) first, then the obstacles
  double product = 1.0;
};

struct NavEvaluation {
  double phi = 0.0;
  Vec2 grad{};
  double beta = 0.0;
  std::vector<double> betas;
  bool on_boundary = false;  // some beta_i == 0; grad is the finite boundary limit
};

/// Negative obstacle values above this are treated as round-off on the boundary.
inline constexpr double kBetaSlack = 1e-12;

inline BetaValues beta(const SphereWorld& sw, Complex q) {
  BetaValues out;
  out.betas.reserve(sw.obstacles.size() + 1);
  out.betas.push_back(sw.external_radius * sw.external_radius - std::norm(q - sw.external_center));
  for (const auto& c : sw.obstacles) out.betas.push_back(std::norm(q - c.center) - c.radius * c.radius);
  for (double b : out.betas) out.product *= b;
  return out;
}

inline void check_params(const NavParams& p) {
  if (p.k < 1) throw ContractError("navigation: k must be a positive integer");
}

namespace detail {

// Gradient of beta_i with respect to q.
inline Vec2 grad_beta_i(const SphereWorld& sw, std::size_t i, Complex q) {
  if (i == 0) return to_vec(-2.0 * (q - sw.external_center));
  return to_vec(2.0 * (q - sw.obstacles[i - 1].center));
}

}  // namespace detail

/// Full evaluation at q. Throws DomainError if q lies outside the closed sphere world.
inline NavEvaluation evaluate_navigation(const SphereWorld& sw, const NavParams& params, Complex q) {
  check_params(params);
  NavEvaluation out;
  auto bv = beta(sw, q);
  for (std::size_t i = 0; i < bv.betas.size(); ++i) {
    double& b = bv.betas[i];
    if (b < -kBetaSlack)
      throw DomainError("navigation: point (" + std::to_string(q.real()) + ", " + std::to_string(q.imag()) +
                        ") is outside the sphere world (beta_" + std::to_string(i) + " < 0)");
    if (b <= 0.0) {
      b = 0.0;
      out.on_boundary = true;
    }
  }
  double product = 1.0;
  for (double b : bv.betas) product *= b;

  const std::size_t n = bv.betas.size();
  std::vector<double> prefix(n + 1, 1.0), suffix(n + 1, 1.0);
  for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] * bv.betas[i];
  for (std::size_t i = n; i-- > 0;) suffix[i] = suffix[i + 1] * bv.betas[i];
  Vec2 grad_beta{};
  for (std::size_t i = 0; i < n; ++i) grad_beta = grad_beta + detail::grad_beta_i(sw, i, q) * (prefix[i] * suffix[i + 1]);

  const double k = params.k;
  const Complex dq = q - params.goal_image;
  const double r = std::norm(dq);
  const double denom = std::pow(r, k) + product;
  out.beta = product;
  out.betas = std::move(bv.betas);
  if (denom <= 0.0) {
    // goal on the boundary; not a valid configuration but keep the value finite
    out.phi = 0.0;
    return out;
  }
  out.phi = std::min(1.0, r / std::pow(denom, 1.0 / k));
  const double scale = std::pow(denom, -(k + 1.0) / k);
  out.grad = (to_vec(dq) * (2.0 * product) - grad_beta * (r / k)) * scale;
  return out;
}

inline double phi_kr(const SphereWorld& sw, const NavParams& params, Complex q) {
  return evaluate_navigation(sw, params, q).phi;
}

inline Vec2 grad_phi_kr(const SphereWorld& sw, const NavParams& params, Complex q) {
  return evaluate_navigation(sw, params, q).grad;
}

/// The weighted-average vector (q - q_d) - (r_d/2k) sum_i grad beta_i / beta_i, which vanishes at the
/// critical points of phi other than q_d. Requires q strictly inside the sphere world.
inline Vec2 saddle_vector(const SphereWorld& sw, const NavParams& params, Complex q) {
  check_params(params);
  const auto bv = beta(sw, q);
  Vec2 sum{};
  for (std::size_t i = 0; i < bv.betas.size(); ++i) {
    if (!(bv.betas[i] > 0.0)) throw DomainError("saddle_vector: point is not strictly inside the sphere world");
    sum = sum + detail::grad_beta_i(sw, i, q) * (1.0 / bv.betas[i]);
  }
  const Complex dq = q - params.goal_image;
  return to_vec(dq) - sum * (std::norm(dq) / (2.0 * params.k));
}

inline double saddle_residual(const SphereWorld& sw, const NavParams& params, Complex q) {
  return saddle_vector(sw, params, q).norm();
}

/// Navigation quantities pulled back to a workspace point.
struct PullbackValue {
  Vec2 gradient{};       // J^T grad phi(T(x))
  double phi = 0.0;      // phi(T(x))
  Complex image{};       // T(x)
  Complex derivative{};  // T'(x)
  bool near_boundary = false;
  bool on_boundary = false;
};

/// Relative tolerance of the runtime check J^T g == det(J) J^{-1} g.
inline constexpr double kConformalIdentityTol = 1e-10;

inline PullbackValue pullback(const CompositeMap& cm, const SphereWorld& sw, const NavParams& params, Complex x) {
  const auto t = evaluate_composite_full(cm, x);
  const auto nav = evaluate_navigation(sw, params, t.value);
  const Mat2 j = jacobian_from_derivative(t.derivative);
  const Vec2 g = nav.grad;
  PullbackValue out;
  out.gradient = {j[0][0] * g.x + j[1][0] * g.y, j[0][1] * g.x + j[1][1] * g.y};

  const double det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
  if (!(det > 0.0)) throw DomainError("pullback: composite derivative vanishes");
  // det(J) J^{-1} g, with J^{-1} = adj(J)/det
  const Vec2 alt{j[1][1] * g.x - j[0][1] * g.y, -j[1][0] * g.x + j[0][0] * g.y};
  if ((alt - out.gradient).norm() > kConformalIdentityTol * std::max(1.0, out.gradient.norm()))
    throw ContractError("pullback: Jacobian is not conformal");

  out.phi = nav.phi;
  out.image = t.value;
  out.derivative = t.derivative;
  out.near_boundary = t.near_boundary;
  out.on_boundary = nav.on_boundary;
  return out;
}

inline Vec2 pullback_gradient(const CompositeMap& cm, const SphereWorld& sw, const NavParams& params, Complex x) {
  return pullback(cm, sw, params, x).gradient;
}

/// Goal parameters with q_d = T(x_d).
inline NavParams make_nav_params(const CompositeMap& cm, Complex goal_workspace, int k = 6) {
  NavParams p;
  p.k = k;
  p.goal_workspace = goal_workspace;
  if (!point_in_free_space(cm.source, goal_workspace)) throw DomainError("navigation: goal is not in free space");
  p.goal_image = evaluate_composite(cm, goal_workspace);
  return p;
}

// ---- grids ----

struct GridSpec {
  double x_min = -1.0, x_max = 1.0, y_min = -1.0, y_max = 1.0;
  std::size_t nx = 200, ny = 200;

  double x(std::size_t i) const { return nx == 1 ? x_min : x_min + (x_max - x_min) * double(i) / double(nx - 1); }
  double y(std::size_t j) const { return ny == 1 ? y_min : y_min + (y_max - y_min) * double(j) / double(ny - 1); }
};

enum class GridSide { workspace, sphere_world };

struct GridSample {
  double x = 0.0, y = 0.0;
  std::optional<double> phi;  // empty outside the free space
  double grad_norm = 0.0;
};

/// Row-major samples (index j * nx + i). Workspace side evaluates phi(T(x)) and |J^T grad phi|;
/// lattice points outside the free space (or where evaluation fails) are left empty.
inline std::vector<GridSample> evaluate_grid(const CompositeMap* cm, const SphereWorld& sw, const NavParams& params,
                                             const GridSpec& spec, GridSide side, unsigned threads = 0) {
  if (spec.nx == 0 || spec.ny == 0) throw ContractError("evaluate_grid: empty lattice");
  if (side == GridSide::workspace && cm == nullptr) throw ContractError("evaluate_grid: workspace side needs a map");
  check_params(params);
  std::vector<GridSample> out(spec.nx * spec.ny);

  auto eval_row = [&](std::size_t j) {
    for (std::size_t i = 0; i < spec.nx; ++i) {
      GridSample& s = out[j * spec.nx + i];
      s.x = spec.x(i);
      s.y = spec.y(j);
      const Complex p(s.x, s.y);
      try {
        if (side == GridSide::workspace) {
          if (!point_in_free_space(cm->source, p)) continue;
          const auto pb = pullback(*cm, sw, params, p);
          s.phi = pb.phi;
          s.grad_norm = pb.gradient.norm();
        } else {
          const auto b = beta(sw, p);
          if (!std::all_of(b.betas.begin(), b.betas.end(), [](double v) { return v > 0.0; })) continue;
          const auto nav = evaluate_navigation(sw, params, p);
          s.phi = nav.phi;
          s.grad_norm = nav.grad.norm();
        }
      } catch (const Error&) {
        s.phi.reset();
      }
    }
  };

  unsigned n_threads = threads > 0 ? threads : std::max(1u, std::thread::hardware_concurrency());
  n_threads = static_cast<unsigned>(std::min<std::size_t>(n_threads, spec.ny));
  if (n_threads <= 1) {
    for (std::size_t j = 0; j < spec.ny; ++j) eval_row(j);
    return out;
  }
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < n_threads; ++t)
    pool.emplace_back([&, t] {
      for (std::size_t j = t; j < spec.ny; j += n_threads) eval_row(j);
    });
  for (auto& th : pool) th.join();
  return out;
}

/// Lattice points whose value is strictly below all eight neighbours, all of which must be in free space.
inline std::vector<std::size_t> grid_local_minima(const std::vector<GridSample>& grid, const GridSpec& spec) {
  std::vector<std::size_t> minima;
  for (std::size_t j = 1; j + 1 < spec.ny; ++j) {
    for (std::size_t i = 1; i + 1 < spec.nx; ++i) {
      const auto& c = grid[j * spec.nx + i];
      if (!c.phi) continue;
      bool is_min = true;
      for (int dj = -1; dj <= 1 && is_min; ++dj)
        for (int di = -1; di <= 1 && is_min; ++di) {
          if (di == 0 && dj == 0) continue;
          const auto& nb = grid[(j + dj) * spec.nx + (i + di)];
          if (!nb.phi || *nb.phi <= *c.phi) is_min = false;
        }
      if (is_min) minima.push_back(j * spec.nx + i);
    }
  }
  return minima;
}

/// Index of the smallest valid sample, or grid.size() when none is valid.
inline std::size_t grid_argmin(const std::vector<GridSample>& grid) {
  std::size_t best = grid.size();
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (grid[i].phi && (best == grid.size() || *grid[i].phi < *grid[best].phi)) best = i;
  return best;
}

namespace detail {
inline std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}
}  // namespace detail

/// CSV with header x,y,phi,grad_norm; points outside the free space carry "null" in the last two columns.
inline void write_grid_csv(const std::string& path, const std::vector<GridSample>& grid) {
  std::ofstream out(path);
  if (!out) throw FormatError("write_grid_csv: cannot open " + path);
  out << "x,y,phi,grad_norm\n";
  for (const auto& s : grid) {
    out << detail::fmt_double(s.x) << ',' << detail::fmt_double(s.y) << ',';
    if (s.phi)
      out << detail::fmt_double(*s.phi) << ',' << detail::fmt_double(s.grad_norm) << '\n';
    else
      out << "null,null\n";
  }
  if (!out) throw FormatError("write_grid_csv: write failed for " + path);
}

}  // namespace conav
