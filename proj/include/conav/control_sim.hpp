#pragma once

// Closed-loop simulation in the original workspace.
//
//   kinematic:  x' = u,      u   = -K J^T grad phi(T(x))
//   dynamic:    m x'' = tau, tau = -K J^T grad phi(T(x)) - lambda x'
//
// Classical RK4 at a fixed step. A step is retried with half the step (at most max_halvings times) when
// it would leave the free space, when an intermediate stage cannot be evaluated, when the displacement
// exceeds 0.1 x clearance, or when it would increase the Lyapunov value by more than the slack. Exhausting
// the halvings ends the run with collision_guard: an integration failure, not a real collision.

#include <conav/core.hpp>
#include <conav/geometry.hpp>
#include <conav/koebe.hpp>
#include <conav/navigation.hpp>

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace conav {

enum class Model { kinematic, dynamic };

inline const char* to_string(Model m) { return m == Model::kinematic ? "kinematic" : "dynamic"; }

struct ControlParams {
  double gain_K = 1.0;
  double mass_m = 1.0;
  double lambda = 3.2;
  double step_dt = 0.0;  // 0 selects a step from the initial state (see default_step)
  int max_steps = 20000;
  double goal_tol = 1e-3;
  bool allow_nonzero_v0 = false;  // unsafe: no stability guarantee
  int max_halvings = 10;
};

enum class Outcome { converged, max_steps, collision_guard, saddle_stall };

inline const char* to_string(Outcome o) {
  switch (o) {
    case Outcome::converged: return "converged";
    case Outcome::max_steps: return "max_steps";
    case Outcome::collision_guard: return "collision_guard";
    case Outcome::saddle_stall: return "saddle_stall";
  }
  return "unknown";
}

struct RobotState {
  Complex position{};
  Vec2 velocity{};
  double time = 0.0;
};

struct Trajectory {
  Model model = Model::kinematic;
  std::vector<RobotState> states;
  std::vector<double> clearance;     // distance to the node polygons
  std::vector<double> lyapunov;      // phi(T(x)) kinematic, K phi(T(x)) + m|v|^2/2 dynamic
  std::vector<double> phi;           // phi(T(x))
  std::vector<double> control_norm;  // |u| or |tau|
  Outcome outcome = Outcome::max_steps;
  std::optional<double> saddle_residual;  // at the stall point
  double step_dt = 0.0;
  int halvings = 0;  // total halvings over the run
  std::string message;

  std::size_t steps() const { return states.empty() ? 0 : states.size() - 1; }
  double min_clearance() const {
    return clearance.empty() ? 0.0 : *std::min_element(clearance.begin(), clearance.end());
  }
  const RobotState& final_state() const { return states.back(); }
};

/// Allowed per-step increase of the Lyapunov value.
inline constexpr double kLyapunovSlack = 1e-9;
/// Control norm below which a run away from the goal is declared stalled.
inline constexpr double kStallNorm = 1e-10;
/// Fraction of the clearance one step may cover.
inline constexpr double kCflFraction = 0.1;

namespace detail {

struct FieldSample {
  Vec2 gradient{};  // J^T grad phi
  double phi = 0.0;
  Complex image{};
};

inline FieldSample field(const CompositeMap& cm, const SphereWorld& sw, const NavParams& nav, Complex x) {
  const auto pb = pullback(cm, sw, nav, x);
  return {pb.gradient, pb.phi, pb.image};
}

}  // namespace detail

/// Step from the initial state: the CFL bound at x0, capped by the linear stability bound at the goal
/// (RK4 on x' = -L x needs L dt < 2.78; 0.25/L keeps the contraction monotone).
inline double default_step(const CompositeMap& cm, const SphereWorld& sw, const NavParams& nav,
                           const ControlParams& ctrl, Model model, Complex x0) {
  const auto goal = evaluate_composite_full(cm, nav.goal_workspace);
  const auto b = beta(sw, goal.value);
  const double hess = 2.0 / std::pow(std::max(b.product, 1e-300), 1.0 / nav.k);
  const double rate = ctrl.gain_K * std::norm(goal.derivative) * hess;
  double dt = 0.25 / rate;
  if (model == Model::dynamic) {
    // largest eigenvalue magnitude of [[0, 1], [-rate/m, -lambda/m]] is at most lambda/m + sqrt(rate/m)
    dt = std::min(dt, 0.5 / (ctrl.lambda / ctrl.mass_m + std::sqrt(rate / ctrl.mass_m)));
  }
  const double g = detail::field(cm, sw, nav, x0).gradient.norm() * ctrl.gain_K;
  if (g > 0.0) dt = std::min(dt, kCflFraction * clearance(cm.source, x0) / g);
  return std::min(dt, 0.05);
}

namespace detail {

inline void validate_run(const CompositeMap& cm, const NavParams& nav, const ControlParams& ctrl, Complex x0) {
  if (!(ctrl.gain_K > 0.0)) throw ContractError("simulate: gain K must be positive");
  if (!(ctrl.mass_m > 0.0)) throw ContractError("simulate: mass must be positive");
  if (!(ctrl.lambda >= 0.0)) throw ContractError("simulate: lambda must be non-negative");
  if (ctrl.step_dt < 0.0) throw ContractError("simulate: step must be positive (or 0 for automatic)");
  if (ctrl.max_steps < 1) throw ContractError("simulate: max_steps must be >= 1");
  if (!(ctrl.goal_tol > 0.0)) throw ContractError("simulate: goal tolerance must be positive");
  if (!point_in_free_space(cm.source, x0))
    throw DomainError("simulate: start (" + std::to_string(x0.real()) + ", " + std::to_string(x0.imag()) +
                      ") is not in free space");
  if (!point_in_free_space(cm.source, nav.goal_workspace)) throw DomainError("simulate: goal is not in free space");
}

// State layout: (x, y) for kinematic, (x, y, vx, vy) for dynamic.
using State = std::array<double, 4>;

struct Derivative {
  State d{};
  double control_norm = 0.0;
  double phi = 0.0;
  Complex image{};
};

inline Derivative rhs(const CompositeMap& cm, const SphereWorld& sw, const NavParams& nav, const ControlParams& ctrl,
                      Model model, const State& s) {
  const auto f = field(cm, sw, nav, {s[0], s[1]});
  Derivative out;
  out.phi = f.phi;
  out.image = f.image;
  if (model == Model::kinematic) {
    const Vec2 u = f.gradient * (-ctrl.gain_K);
    out.d = {u.x, u.y, 0.0, 0.0};
    out.control_norm = u.norm();
  } else {
    const Vec2 v{s[2], s[3]};
    const Vec2 tau = f.gradient * (-ctrl.gain_K) - v * ctrl.lambda;
    out.d = {v.x, v.y, tau.x / ctrl.mass_m, tau.y / ctrl.mass_m};
    out.control_norm = tau.norm();
  }
  return out;
}

inline State axpy(const State& s, double h, const State& d) {
  return {s[0] + h * d[0], s[1] + h * d[1], s[2] + h * d[2], s[3] + h * d[3]};
}

inline double lyapunov_of(Model model, const ControlParams& ctrl, double phi, const State& s) {
  if (model == Model::kinematic) return phi;
  return ctrl.gain_K * phi + 0.5 * ctrl.mass_m * (s[2] * s[2] + s[3] * s[3]);
}

inline Trajectory simulate(const CompositeMap& cm, const SphereWorld& sw, const NavParams& nav,
                           const ControlParams& ctrl, Model model, Complex x0, Vec2 v0) {
  validate_run(cm, nav, ctrl, x0);
  if (model == Model::dynamic && (v0.x != 0.0 || v0.y != 0.0) && !ctrl.allow_nonzero_v0)
    throw ContractError("simulate_dynamic: nonzero initial velocity requires allow_nonzero_v0");
  if (model == Model::kinematic) v0 = {};

  Trajectory tr;
  tr.model = model;
  const double dt = ctrl.step_dt > 0.0 ? ctrl.step_dt : default_step(cm, sw, nav, ctrl, model, x0);
  tr.step_dt = dt;
  const bool check_monotone = model == Model::kinematic || ctrl.lambda > 0.0;

  State s{x0.real(), x0.imag(), v0.x, v0.y};
  double t = 0.0;
  auto d_cur = rhs(cm, sw, nav, ctrl, model, s);
  auto record = [&](const Derivative& d) {
    tr.states.push_back({{s[0], s[1]}, {s[2], s[3]}, t});
    tr.clearance.push_back(clearance(cm.source, {s[0], s[1]}));
    tr.phi.push_back(d.phi);
    tr.lyapunov.push_back(lyapunov_of(model, ctrl, d.phi, s));
    tr.control_norm.push_back(d.control_norm);
  };
  auto at_goal = [&](const State& st) {
    const bool pos = std::abs(Complex(st[0], st[1]) - nav.goal_workspace) <= ctrl.goal_tol;
    return model == Model::kinematic ? pos : pos && std::hypot(st[2], st[3]) <= ctrl.goal_tol;
  };
  record(d_cur);

  for (int step = 0; step < ctrl.max_steps; ++step) {
    if (at_goal(s)) {
      tr.outcome = Outcome::converged;
      return tr;
    }
    const double speed = model == Model::kinematic ? d_cur.control_norm : std::hypot(s[2], s[3]);
    if (d_cur.control_norm < kStallNorm && speed < kStallNorm) {
      tr.outcome = Outcome::saddle_stall;
      try {
        tr.saddle_residual = saddle_residual(sw, nav, d_cur.image);
      } catch (const Error&) {
      }
      tr.message = "control vanished away from the goal";
      return tr;
    }

    const double clear = tr.clearance.back();
    double h = dt;
    bool accepted = false;
    State next{};
    Derivative d_next;
    for (int attempt = 0; attempt <= ctrl.max_halvings; ++attempt, h *= 0.5) {
      if (attempt > 0) ++tr.halvings;
      const double accel = model == Model::kinematic ? 0.0 : d_cur.control_norm / ctrl.mass_m;
      if ((speed + accel * h) * h > kCflFraction * clear) continue;
      try {
        const auto k1 = d_cur.d;
        const auto k2 = rhs(cm, sw, nav, ctrl, model, axpy(s, 0.5 * h, k1)).d;
        const auto k3 = rhs(cm, sw, nav, ctrl, model, axpy(s, 0.5 * h, k2)).d;
        const auto k4 = rhs(cm, sw, nav, ctrl, model, axpy(s, h, k3)).d;
        for (int i = 0; i < 4; ++i) next[i] = s[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        if (!point_in_free_space(cm.source, {next[0], next[1]})) continue;
        d_next = rhs(cm, sw, nav, ctrl, model, next);
      } catch (const Error&) {
        continue;
      }
      if (check_monotone &&
          lyapunov_of(model, ctrl, d_next.phi, next) > tr.lyapunov.back() + kLyapunovSlack)
        continue;
      accepted = true;
      break;
    }
    if (!accepted) {
      tr.outcome = Outcome::collision_guard;
      tr.message = "step rejected after " + std::to_string(ctrl.max_halvings) + " halvings at t=" + std::to_string(t);
      return tr;
    }
    s = next;
    t += h;
    d_cur = d_next;
    record(d_cur);
  }
  tr.outcome = at_goal(s) ? Outcome::converged : Outcome::max_steps;
  return tr;
}

}  // namespace detail

inline Trajectory simulate_kinematic(const CompositeMap& cm, const SphereWorld& sw, const NavParams& nav,
                                     const ControlParams& ctrl, Complex x0) {
  return detail::simulate(cm, sw, nav, ctrl, Model::kinematic, x0, {});
}

inline Trajectory simulate_dynamic(const CompositeMap& cm, const SphereWorld& sw, const NavParams& nav,
                                   const ControlParams& ctrl, Complex x0, Vec2 v0 = {}) {
  return detail::simulate(cm, sw, nav, ctrl, Model::dynamic, x0, v0);
}

struct BatchResult {
  Complex start{};
  std::optional<Trajectory> trajectory;
  std::string error;  // set when the start was rejected
};

/// One simulation per start, in parallel; per-start failures are recorded, not thrown.
inline std::vector<BatchResult> batch_simulate(const CompositeMap& cm, const SphereWorld& sw, const NavParams& nav,
                                               const ControlParams& ctrl, Model model,
                                               const std::vector<Complex>& starts, unsigned threads = 0) {
  std::vector<BatchResult> out(starts.size());
  auto run = [&](std::size_t i) {
    out[i].start = starts[i];
    try {
      out[i].trajectory = model == Model::kinematic ? simulate_kinematic(cm, sw, nav, ctrl, starts[i])
                                                    : simulate_dynamic(cm, sw, nav, ctrl, starts[i]);
    } catch (const Error& e) {
      out[i].error = e.what();
    }
  };
  unsigned n_threads = threads > 0 ? threads : std::max(1u, std::thread::hardware_concurrency());
  n_threads = static_cast<unsigned>(std::min<std::size_t>(n_threads, starts.size()));
  if (n_threads <= 1) {
    for (std::size_t i = 0; i < starts.size(); ++i) run(i);
    return out;
  }
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < n_threads; ++t)
    pool.emplace_back([&, t] {
      for (std::size_t i = t; i < starts.size(); i += n_threads) run(i);
    });
  for (auto& th : pool) th.join();
  return out;
}

/// Discrete Frechet distance between two position sequences.
inline double frechet_distance(const std::vector<Complex>& a, const std::vector<Complex>& b) {
  if (a.empty() || b.empty()) throw ContractError("frechet_distance: empty sequence");
  const std::size_t m = b.size();
  std::vector<double> prev(m), cur(m);
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double d = std::abs(a[i] - b[j]);
      double best;
      if (i == 0 && j == 0)
        best = 0.0;
      else if (i == 0)
        best = cur[j - 1];
      else if (j == 0)
        best = prev[0];
      else
        best = std::min({prev[j], prev[j - 1], cur[j - 1]});
      cur[j] = std::max(best, d);
    }
    std::swap(prev, cur);
  }
  return prev[m - 1];
}

inline std::vector<Complex> positions(const Trajectory& tr) {
  std::vector<Complex> p;
  p.reserve(tr.states.size());
  for (const auto& s : tr.states) p.push_back(s.position);
  return p;
}

inline void write_trajectory_csv(const std::string& path, const Trajectory& tr) {
  std::ofstream out(path);
  if (!out) throw FormatError("write_trajectory_csv: cannot open " + path);
  out << "t,x,y,vx,vy,clearance,lyapunov,control_norm\n";
  for (std::size_t i = 0; i < tr.states.size(); ++i) {
    const auto& s = tr.states[i];
    out << detail::fmt_double(s.time) << ',' << detail::fmt_double(s.position.real()) << ','
        << detail::fmt_double(s.position.imag()) << ',' << detail::fmt_double(s.velocity.x) << ','
        << detail::fmt_double(s.velocity.y) << ',' << detail::fmt_double(tr.clearance[i]) << ','
        << detail::fmt_double(tr.lyapunov[i]) << ',' << detail::fmt_double(tr.control_norm[i]) << '\n';
  }
  if (!out) throw FormatError("write_trajectory_csv: write failed for " + path);
}

/// Outcome record with the parameters echoed.
inline nlohmann::json trajectory_summary(const Trajectory& tr, const NavParams& nav, const ControlParams& ctrl) {
  nlohmann::json j;
  j["model"] = to_string(tr.model);
  j["outcome"] = to_string(tr.outcome);
  j["steps"] = tr.steps();
  j["min_clearance"] = tr.min_clearance();
  const auto& f = tr.final_state();
  j["final_position"] = {f.position.real(), f.position.imag()};
  j["final_error"] = std::abs(f.position - nav.goal_workspace);
  j["final_time"] = f.time;
  j["step_dt"] = tr.step_dt;
  j["halvings"] = tr.halvings;
  j["saddle_residual"] = tr.saddle_residual ? nlohmann::json(*tr.saddle_residual) : nlohmann::json(nullptr);
  if (!tr.message.empty()) j["message"] = tr.message;
  j["params"] = {{"k", nav.k},
                 {"goal", {nav.goal_workspace.real(), nav.goal_workspace.imag()}},
                 {"gain_K", ctrl.gain_K},
                 {"mass_m", ctrl.mass_m},
                 {"lambda", ctrl.lambda},
                 {"goal_tol", ctrl.goal_tol},
                 {"max_steps", ctrl.max_steps}};
  return j;
}

inline void write_trajectory_json(const std::string& path, const Trajectory& tr, const NavParams& nav,
                                  const ControlParams& ctrl) {
  auto j = trajectory_summary(tr, nav, ctrl);
  auto& states = j["states"] = nlohmann::json::array();
  for (std::size_t i = 0; i < tr.states.size(); ++i) {
    const auto& s = tr.states[i];
    states.push_back({s.time, s.position.real(), s.position.imag(), s.velocity.x, s.velocity.y, tr.clearance[i],
                      tr.lyapunov[i], tr.control_norm[i]});
  }
  j["state_columns"] = {"t", "x", "y", "vx", "vy", "clearance", "lyapunov", "control_norm"};
  std::ofstream out(path);
  if (!out) throw FormatError("write_trajectory_json: cannot open " + path);
  out << j.dump(1) << '\n';
}

}  // namespace conav
