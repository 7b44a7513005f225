// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include "oracles.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>

using namespace conav;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Built {
  WorkspaceFile file;
  CompositeMap cm;
  IterationReport report;
  SphereWorld sw;
  double seconds = 0.0;
};

Built build(const std::string& name, std::size_t n_nodes = 0) {
  const auto t0 = Clock::now();
  Built b;
  b.file = load_workspace(oracle::workspace(name), n_nodes);
  auto [cm, report] = run_koebe(b.file.workspace);
  b.cm = std::move(cm);
  b.report = std::move(report);
  b.sw = fit_circles(b.cm);
  b.seconds = seconds_since(t0);
  return b;
}

const Built& scenario1() {
  static const Built b = build("scenario1.json");
  return b;
}

int failures = 0;

void run(int id, const std::string& title, const std::function<bool(std::ostringstream&)>& body) {
  std::ostringstream detail;
  bool ok = false;
  try {
    ok = body(detail);
  } catch (const std::exception& e) {
    detail << "exception: " << e.what();
  }
  if (!ok) ++failures;
  std::cout << (ok ? "PASS" : "FAIL") << "  " << id << ". " << title << "  [" << detail.str() << "]" << std::endl;
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

bool monotone(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[i - 1] + kLyapunovSlack) return false;
  return true;
}

}  // namespace

int main() {
  run(1, "Mobius oracle for an off-center disk", [](std::ostringstream& d) {
    const auto t0 = Clock::now();
    const oracle::Mobius m{{0.3, 0.0}, 1.0, {0.0, 0.0}};
    const auto st = build_interior_map(sample_curve(CurveSpec::circle(m.a, m.r), 256), m.b);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double ev = 0.0, ed = 0.0;
    for (int i = 0; i < 100; ++i) {
      const Complex z = m.a + 0.99 * std::sqrt(u(rng)) * std::polar(1.0, kTwoPi * u(rng));
      const auto v = st.eval<true>(z);
      ev = std::max(ev, std::abs(v.value - m(z)));
      ed = std::max(ed, std::abs(v.derivative - m.derivative(z)));
    }
    const double t = seconds_since(t0);
    d << "value err " << sci(ev) << " <= 1e-8, derivative err " << sci(ed) << " <= 1e-7, " << t << " s <= 1 s";
    return ev <= 1e-8 && ed <= 1e-7 && t <= 1.0;
  });

  run(2, "identity and scaling oracles", [](std::ostringstream& d) {
    const auto id = build_interior_map(sample_curve(CurveSpec::circle(0.0, 1.0), 256), 0.0);
    double e_id = std::abs(id.c_const());
    for (Complex z : {Complex(0.3, 0.4), Complex(-0.7, 0.1), Complex(0.0, -0.95)})
      e_id = std::max(e_id, std::abs(evaluate_stage(id, z).value - z));
    const auto in2 = build_interior_map(sample_curve(CurveSpec::circle(0.0, 2.0), 256), 0.0);
    const double e_in = std::abs(stage_derivative(in2, 0.0) - 0.5);
    const auto ex2 = build_exterior_map(sample_curve(CurveSpec::circle(0.0, 2.0, Orientation::clockwise), 256), 0.0);
    // T'(infinity) = e^{c}
    const double e_ex = std::max(std::abs(std::exp(ex2.c_const()) - 0.5), std::abs(stage_derivative(ex2, 1e3) - 0.5));
    d << "identity " << sci(e_id) << ", interior T'(0) " << sci(e_in) << ", exterior T'(inf) " << sci(e_ex)
      << " (all <= 1e-10)";
    return e_id <= 1e-10 && e_in <= 1e-10 && e_ex <= 1e-10;
  });

  run(3, "ellipse exterior vs inverse Joukowski (N=512)", [](std::ostringstream& d) {
    const oracle::InverseJoukowski jk{2.0, 1.0};
    const auto st = build_exterior_map(sample_curve(CurveSpec::ellipse(0.0, 2.0, 1.0, 0.0, Orientation::clockwise), 512), 0.0);
    double e = 0.0;
    for (int k = 0; k < 20; ++k) {
      const Complex z = std::polar(2.2 + 0.15 * k, 0.7 + 0.45 * k);
      e = std::max(e, std::abs(evaluate_stage(st, z).value - jk(z)));
    }
    d << "max err " << sci(e) << " <= 1e-8";
    return e <= 1e-8;
  });

  run(4, "iteration convergence on a 3-obstacle workspace", [](std::ostringstream& d) {
    const auto b = build("koebe3.json");
    bool ratios = true;
    for (std::size_t i = 1; i < b.report.ratio_estimates.size(); ++i) ratios = ratios && b.report.ratio_estimates[i] < 1.0;
    double worst_fit = 0.0;
    for (std::size_t i = 0; i < b.sw.obstacles.size(); ++i)
      worst_fit = std::max(worst_fit, b.sw.fit_residuals[i] / b.sw.obstacles[i].radius);
    d << b.cm.n_iterations << " iterations <= 12, final delta " << sci(b.cm.final_delta)
      << ", post-burn-in ratios < 1: " << (ratios ? "yes" : "no") << ", fit residual/rho " << sci(worst_fit)
      << " <= 1e-8, " << b.seconds << " s <= 60 s";
    return b.report.converged && b.cm.n_iterations <= 12 && ratios && worst_fit <= 1e-8 && b.seconds <= 60.0;
  });

  run(5, "conformality at 500 free-space points", [](std::ostringstream& d) {
    const auto& b = scenario1();
    double worst = 0.0, min_det = 1e300;
    for (auto z : oracle::random_free_points(b.cm.source, 500, 1e-3, 5)) {
      const auto j = jacobian_2x2(b.cm, z);
      const double det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
      min_det = std::min(min_det, det);
      for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c)
          worst = std::max(worst, std::abs(j[0][r] * j[0][c] + j[1][r] * j[1][c] - (r == c ? det : 0.0)));
    }
    d << "max |J^T J - det I| " << sci(worst) << " <= 1e-10, min det " << sci(min_det) << " > 0";
    return worst <= 1e-10 && min_det > 0.0;
  });

  run(6, "gradient vs central differences (k = 2, 6)", [](std::ostringstream& d) {
    const auto& b = scenario1();
    double worst = 0.0;
    for (int k : {2, 6}) {
      const auto p = make_nav_params(b.cm, 0.0, k);
      for (auto q : oracle::random_sphere_points(b.sw, 200, 1e-3, 60 + k)) {
        const auto fd = oracle::fd_gradient([&](Complex z) { return oracle::phi_closed_form(b.sw, p.goal_image, k, z); }, q);
        const auto g = grad_phi_kr(b.sw, p, q);
        worst = std::max(worst, (g - fd).norm() / fd.norm());
      }
    }
    d << "max relative error " << sci(worst) << " <= 1e-6";
    return worst <= 1e-6;
  });

  run(7, "navigation-function properties on the sphere world (k=6)", [](std::ostringstream& d) {
    const auto& b = scenario1();
    const auto p = make_nav_params(b.cm, 0.0, 6);
    GridSpec spec{-1.0, 1.0, -1.0, 1.0, 200, 200};
    const auto grid = evaluate_grid(nullptr, b.sw, p, spec, GridSide::sphere_world);
    bool range = true;
    for (const auto& s : grid)
      if (s.phi) range = range && *s.phi >= 0.0 && *s.phi <= 1.0;
    double worst_boundary = 0.0;
    std::vector<Circle> circles = b.sw.obstacles;
    circles.push_back({b.sw.external_center, b.sw.external_radius});
    for (const auto& c : circles)
      for (int j = 0; j < 64; ++j)
        worst_boundary = std::max(
            worst_boundary, 1.0 - phi_kr(b.sw, p, c.center + c.radius * std::polar(1.0, kTwoPi * j / 64.0)));
    const auto best = grid_argmin(grid);
    const double cell = (spec.x_max - spec.x_min) / double(spec.nx - 1);
    const bool near_goal = best < grid.size() && std::abs(grid[best].x - p.goal_image.real()) <= cell &&
                           std::abs(grid[best].y - p.goal_image.imag()) <= cell;
    const auto minima = grid_local_minima(grid, spec);
    std::size_t others = 0;
    for (auto i : minima) others += i != best;
    d << "phi in [0,1]: " << (range ? "yes" : "no") << ", max 1-phi on circles " << sci(worst_boundary)
      << " <= 1e-10, argmin within one cell of q_d: " << (near_goal ? "yes" : "no") << ", other local minima "
      << others;
    return range && worst_boundary <= 1e-10 && near_goal && others == 0;
  });

  run(8, "kinematic simulation from the four scenario starts", [](std::ostringstream& d) {
    const auto& b = scenario1();
    const auto nav = make_nav_params(b.cm, 0.0, 6);
    bool ok = true;
    for (Complex x0 : {Complex(1.0, 0.6), Complex(-1.0, 0.6), Complex(1.0, -0.6), Complex(0.05, -1.0)}) {
      const auto t0 = Clock::now();
      const auto tr = simulate_kinematic(b.cm, b.sw, nav, {}, x0);
      const double t = seconds_since(t0);
      const double err = std::abs(tr.final_state().position - nav.goal_workspace);
      const bool run_ok = tr.outcome == Outcome::converged && err <= 1e-3 && tr.min_clearance() > 0.0 &&
                          monotone(tr.phi) && t <= 10.0;
      d << "(" << x0.real() << "," << x0.imag() << "): " << to_string(tr.outcome) << " err " << sci(err)
        << " clear " << sci(tr.min_clearance()) << " " << tr.steps() << " steps " << tr.halvings << " halvings "
        << t << " s; ";
      ok = ok && run_ok;
    }
    return ok;
  });

  run(9, "dynamic simulation and the lambda ordering", [](std::ostringstream& d) {
    const auto b = build("scenario2.json");
    const auto nav = make_nav_params(b.cm, 0.0, 6);
    const Complex x0(-1.0, 0.1);
    const auto kin = simulate_kinematic(b.cm, b.sw, nav, {}, x0);
    ControlParams c32, c5, c0;
    c32.lambda = 3.2;
    c5.lambda = 5.0;
    c0.lambda = 0.0;
    c0.max_steps = 4000;
    const auto d32 = simulate_dynamic(b.cm, b.sw, nav, c32, x0);
    const auto d5 = simulate_dynamic(b.cm, b.sw, nav, c5, x0);
    const auto d0 = simulate_dynamic(b.cm, b.sw, nav, c0, x0);
    const double f32 = frechet_distance(positions(d32), positions(kin));
    const double f5 = frechet_distance(positions(d5), positions(kin));
    double drift = 0.0;
    for (std::size_t i = 1; i < d0.states.size(); ++i)
      drift = std::max(drift, std::abs(d0.lyapunov[i] - d0.lyapunov[0]) / d0.states[i].time);
    d << "lambda=3.2 " << to_string(d32.outcome) << ", lambda=5 " << to_string(d5.outcome) << ", monotone V: "
      << (monotone(d32.lyapunov) && monotone(d5.lyapunov) ? "yes" : "no") << ", Frechet to kinematic " << sci(f5)
      << " (lambda=5) < " << sci(f32) << " (lambda=3.2), lambda=0 drift " << sci(drift) << "/s <= 1e-6 over t="
      << d0.final_state().time;
    return kin.outcome == Outcome::converged && d32.outcome == Outcome::converged &&
           d5.outcome == Outcome::converged && monotone(d32.lyapunov) && monotone(d5.lyapunov) && f5 < f32 &&
           drift <= 1e-6;
  });

  run(10, "100 random starts", [](std::ostringstream& d) {
    const auto& b = scenario1();
    const auto nav = make_nav_params(b.cm, 0.0, 6);
    const auto starts = oracle::random_free_points(b.cm.source, 100, 0.05, 2024);
    const auto res = batch_simulate(b.cm, b.sw, nav, {}, Model::kinematic, starts);
    int converged = 0;
    bool stalls_ok = true;
    for (const auto& r : res) {
      if (!r.trajectory) {
        stalls_ok = false;
        continue;
      }
      if (r.trajectory->outcome == Outcome::converged) {
        ++converged;
      } else {
        const auto& tr = *r.trajectory;
        const bool ok = tr.outcome == Outcome::saddle_stall && tr.saddle_residual && *tr.saddle_residual <= 1e-6;
        stalls_ok = stalls_ok && ok;
        d << "non-converged start (" << r.start.real() << "," << r.start.imag() << "): " << to_string(tr.outcome)
          << "; ";
      }
    }
    d << converged << "/100 converged (>= 99)";
    return converged >= 99 && stalls_ok;
  });

  run(11, "N=256 and N=512 composites agree", [](std::ostringstream& d) {
    const auto a = build("koebe3.json", 256);
    const auto b = build("koebe3.json", 512);
    double worst = 0.0;
    for (auto z : oracle::random_free_points(a.cm.source, 50, 0.02, 11))
      worst = std::max(worst, std::abs(evaluate_composite(a.cm, z) - evaluate_composite(b.cm, z)));
    d << "max difference " << sci(worst) << " <= 1e-8";
    return worst <= 1e-8;
  });

  run(12, "cache round trip and stale detection", [](std::ostringstream& d) {
    const auto& b = scenario1();
    const double tol = 1e-13;
    const auto hash = workspace_hash(b.file.document, b.file.n_nodes, tol);
    const auto path = (std::filesystem::temp_directory_path() / "conav_acceptance.cache").string();
    save_cache(path, b.cm, b.sw, b.report, hash, tol);
    const auto c = load_cache(path, hash);
    bool identical = true;
    for (auto z : oracle::random_free_points(b.cm.source, 100, 1e-3, 12)) {
      const auto x = evaluate_composite_full(b.cm, z), y = evaluate_composite_full(c.map, z);
      identical = identical && x.value == y.value && x.derivative == y.derivative;
    }
    int detected = 0, edits = 0;
    auto expect_stale = [&](Json doc, std::size_t n, double t) {
      ++edits;
      try {
        load_cache(path, workspace_hash(doc, n, t));
      } catch (const StaleCacheError&) {
        ++detected;
      }
    };
    auto doc = b.file.document;
    doc["anchor"][0] = doc["anchor"][0].get<double>() + 1e-9;
    expect_stale(doc, b.file.n_nodes, tol);
    doc = b.file.document;
    doc["internal"][0]["center"][1] = doc["internal"][0]["center"][1].get<double>() + 1e-9;
    expect_stale(doc, b.file.n_nodes, tol);
    doc = b.file.document;
    doc["internal"].erase(doc["internal"].size() - 1);
    expect_stale(doc, b.file.n_nodes, tol);
    expect_stale(b.file.document, 2 * b.file.n_nodes, tol);
    expect_stale(b.file.document, b.file.n_nodes, 1e-12);
    std::filesystem::remove(path);
    d << "bit-identical evaluations: " << (identical ? "yes" : "no") << ", stale edits detected " << detected << "/"
      << edits;
    return identical && detected == edits;
  });

  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
