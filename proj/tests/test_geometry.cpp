#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace conav;

TEST(Geometry, UnitCircleSamples) {
  const auto c = sample_curve(CurveSpec::circle({0, 0}, 1.0), 64);
  for (std::size_t j = 0; j < 64; ++j) {
    const Complex e = std::polar(1.0, kTwoPi * double(j) / 64.0);
    EXPECT_LT(std::abs(c.gamma()[j] - e), 1e-15);
    EXPECT_LT(std::abs(c.dgamma()[j] - Complex(0, 1) * e), 1e-15);
  }
  EXPECT_EQ(c.orientation(), Orientation::counterclockwise);
  EXPECT_NEAR(c.signed_area(), kPi, 1e-12);
}

TEST(Geometry, EllipseAnalyticDerivatives) {
  const auto c = sample_curve(CurveSpec::ellipse({0, 0}, 2.0, 1.0), 128);
  for (std::size_t j = 0; j < 128; ++j) {
    const double s = kTwoPi * double(j) / 128.0;
    EXPECT_LT(std::abs(c.gamma()[j] - Complex(2 * std::cos(s), std::sin(s))), 1e-14);
    EXPECT_LT(std::abs(c.dgamma()[j] - Complex(-2 * std::sin(s), std::cos(s))), 1e-14);
    EXPECT_LT(std::abs(c.ddgamma()[j] - Complex(-2 * std::cos(s), -std::sin(s))), 1e-14);
  }
}

TEST(Geometry, ClockwiseEllipse) {
  const auto c = sample_curve(CurveSpec::ellipse({0.5, 0}, 0.2, 0.1, 0.3, Orientation::clockwise), 64);
  EXPECT_EQ(c.orientation(), Orientation::clockwise);
  EXPECT_NEAR(c.signed_area(), -kPi * 0.02, 1e-12);
}

TEST(Geometry, PointListSpectralDerivatives) {
  std::vector<Complex> pts(64);
  const Complex i(0, 1);
  for (std::size_t j = 0; j < 64; ++j) {
    const double s = kTwoPi * double(j) / 64.0;
    pts[j] = std::exp(i * s) + 0.1 * std::exp(3.0 * i * s);
  }
  const auto c = sample_curve(CurveSpec::point_list(pts), 64);
  for (std::size_t j = 0; j < 64; ++j) {
    const double s = kTwoPi * double(j) / 64.0;
    const Complex d = i * std::exp(i * s) + 0.3 * i * std::exp(3.0 * i * s);
    EXPECT_LT(std::abs(c.dgamma()[j] - d), 1e-10);
  }
}

TEST(Geometry, PointListResampledToOtherNodeCount) {
  std::vector<Complex> pts(32);
  for (std::size_t j = 0; j < 32; ++j) pts[j] = 0.5 * std::polar(1.0, kTwoPi * double(j) / 32.0) + 0.2;
  const auto c = sample_curve(CurveSpec::point_list(pts), 128);
  for (std::size_t j = 0; j < 128; ++j)
    EXPECT_LT(std::abs(c[j] - (0.5 * std::polar(1.0, kTwoPi * double(j) / 128.0) + 0.2)), 1e-13);
}

// Property: trig polynomials of degree d sampled with N >= 4d nodes have exact derivatives, and the
// spectral derivatives of the samples agree with them.
TEST(GeometryProperty, TrigPolynomialSpectralConsistency) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    const int d = 2 + trial;
    std::vector<TrigTerm> terms{{1, Complex(1.0, 0.0)}};
    for (int n = -d; n <= d; ++n)
      if (n != 1 && n != 0) terms.push_back({n, 0.02 * Complex(u(rng), u(rng)) / double(std::abs(n))});
    const std::size_t n_nodes = 64;
    const auto c = sample_curve(CurveSpec::trig_polynomial({0, 0}, terms), n_nodes);
    const auto d1 = spectral::derivative(c.gamma(), 1);
    const auto d2 = spectral::derivative(c.gamma(), 2);
    for (std::size_t j = 0; j < n_nodes; ++j) {
      EXPECT_LT(std::abs(d1[j] - c.dgamma()[j]), 1e-10 * std::abs(c.dgamma()[j]) + 1e-13);
      EXPECT_LT(std::abs(d2[j] - c.ddgamma()[j]), 1e-10 * std::abs(c.ddgamma()[j]) + 1e-12);
    }
  }
}

TEST(GeometryProperty, ResamplingIdempotence) {
  for (const char* name : {"scenario1.json", "scenario2.json"}) {
    const auto wf = load_workspace(oracle::workspace(name));
    for (const auto& c : wf.workspace.internal) {
      const auto up = spectral::resample(c.gamma(), 2 * c.size());
      const auto back = spectral::resample(up, c.size());
      for (std::size_t j = 0; j < c.size(); ++j) EXPECT_LT(std::abs(back[j] - c[j]), 1e-12);
    }
  }
}

TEST(Geometry, RejectsBadNodeCounts) {
  EXPECT_THROW(sample_curve(CurveSpec::circle({0, 0}, 1.0), 8), ContractError);
  EXPECT_THROW(sample_curve(CurveSpec::circle({0, 0}, 1.0), 48), ContractError);
}

TEST(Geometry, DegenerateAndSelfIntersectingCurves) {
  EXPECT_THROW(sample_curve(CurveSpec::circle({0, 0}, 0.0), 32), DegenerateCurveError);
  // e^{is} + 0.9 e^{3is} has inner loops
  const auto looped = CurveSpec::trig_polynomial({0, 0}, {{1, Complex(1.0)}, {3, Complex(0.9)}});
  EXPECT_THROW(sample_curve(looped, 64), InvalidCurveError);
}

namespace {

Workspace unit_disk_with(std::vector<CurveSpec> internal, std::vector<Complex> centers, Complex anchor) {
  Workspace ws;
  ws.external = sample_curve(CurveSpec::circle({0, 0}, 1.0), 64);
  for (const auto& s : internal) ws.internal.push_back(sample_curve(s, 64));
  ws.obstacle_centers = std::move(centers);
  ws.interior_anchor = anchor;
  return ws;
}

}  // namespace

TEST(Geometry, ValidWorkspace) {
  const auto ws = unit_disk_with({CurveSpec::circle({0.5, 0}, 0.2, Orientation::clockwise)}, {{0.5, 0}}, {0, 0});
  EXPECT_TRUE(validate_workspace(ws).valid());
}

TEST(Geometry, OverlappingObstaclesReported) {
  const auto ws = unit_disk_with({CurveSpec::circle({0.2, 0}, 0.3, Orientation::clockwise),
                                  CurveSpec::circle({-0.2, 0}, 0.3, Orientation::clockwise)},
                                 {{0.3, 0}, {-0.3, 0}}, {0, 0.6});
  const auto report = validate_workspace(ws);
  ASSERT_TRUE(report.has(ViolationKind::disjointness));
  bool pair = false;
  for (const auto& v : report.violations)
    if (v.kind == ViolationKind::disjointness) pair = (v.curve_a == 0 && v.curve_b == 1);
  EXPECT_TRUE(pair);
}

TEST(Geometry, WrongOrientationReported) {
  const auto ws = unit_disk_with({CurveSpec::circle({0.5, 0}, 0.2, Orientation::counterclockwise)}, {{0.5, 0}}, {0, 0});
  EXPECT_TRUE(validate_workspace(ws).has(ViolationKind::orientation));
}

TEST(Geometry, CenterAndAnchorPlacementReported) {
  const auto bad_center =
      unit_disk_with({CurveSpec::circle({0.5, 0}, 0.2, Orientation::clockwise)}, {{0.0, 0.5}}, {0, 0});
  EXPECT_TRUE(validate_workspace(bad_center).has(ViolationKind::center_placement));
  const auto bad_anchor =
      unit_disk_with({CurveSpec::circle({0.5, 0}, 0.2, Orientation::clockwise)}, {{0.5, 0}}, {0.5, 0.05});
  EXPECT_TRUE(validate_workspace(bad_anchor).has(ViolationKind::anchor_placement));
  const auto bad_count = unit_disk_with({CurveSpec::circle({0.5, 0}, 0.2, Orientation::clockwise)}, {}, {0, 0});
  EXPECT_TRUE(validate_workspace(bad_count).has(ViolationKind::count_mismatch));
}

TEST(Geometry, ContainmentReported) {
  const auto ws = unit_disk_with({CurveSpec::circle({1.5, 0}, 0.2, Orientation::clockwise)}, {{1.5, 0}}, {0, 0});
  EXPECT_TRUE(validate_workspace(ws).has(ViolationKind::containment));
}

TEST(Geometry, PointInFreeSpace) {
  const auto ws = unit_disk_with({CurveSpec::circle({0.5, 0}, 0.2, Orientation::clockwise)}, {{0.5, 0}}, {0, 0});
  EXPECT_TRUE(point_in_free_space(ws, {0, 0}));
  EXPECT_FALSE(point_in_free_space(ws, {1.5, 0}));
  EXPECT_FALSE(point_in_free_space(ws, {0.5, 0}));
  EXPECT_NEAR(clearance(ws, {0, 0}), 0.3, 1e-3);
}

// Property: node midpoints nudged by 1e-3 of the diameter into the obstacle are blocked; nudged out, free.
TEST(GeometryProperty, WindingNumberNudges) {
  const auto wf = load_workspace(oracle::workspace("scenario1.json"));
  const auto& ws = wf.workspace;
  for (const auto& c : ws.internal) {
    const double eps = 1e-3 * c.diameter();
    for (std::size_t j = 0; j < c.size(); ++j) {
      const Complex a = c[j], b = c[(j + 1) % c.size()];
      const Complex mid = 0.5 * (a + b);
      // free space lies to the left of the (clockwise) obstacle curve
      const Complex left = Complex(0, 1) * (b - a) / std::abs(b - a);
      EXPECT_FALSE(point_in_free_space(ws, mid - eps * left)) << j;
      EXPECT_TRUE(point_in_free_space(ws, mid + eps * left)) << j;
    }
  }
}

TEST(Geometry, DemoWorkspacesValid) {
  for (const char* name : {"scenario1.json", "scenario2.json", "koebe3.json", "disk.json", "sphere_world.json"}) {
    const auto wf = load_workspace(oracle::workspace(name));
    const auto report = validate_workspace(wf.workspace);
    EXPECT_TRUE(report.valid()) << name << ": " << (report.valid() ? "" : report.violations[0].message);
  }
  const auto bad = load_workspace(oracle::workspace("overlapping.json"));
  EXPECT_TRUE(validate_workspace(bad.workspace).has(ViolationKind::disjointness));
}

TEST(WorkspaceIo, ParseErrors) {
  EXPECT_THROW(parse_workspace(Json::parse("[1,2]")), FormatError);
  EXPECT_THROW(parse_workspace(Json::parse(R"({"external": {"kind": "blob"}, "anchor": [0,0]})")), FormatError);
  EXPECT_THROW(parse_workspace(Json::parse(R"({"external": {"kind": "circle", "center": [0,0], "radius": 1}})")),
               FormatError);
  EXPECT_THROW(read_json_file(oracle::workspace("does_not_exist.json")), FormatError);
}

TEST(WorkspaceIo, HashChangesWithContentNodesAndTolerance) {
  const auto doc = read_json_file(oracle::workspace("sphere_world.json"));
  const auto h = workspace_hash(doc, 128, 1e-13);
  EXPECT_EQ(h, workspace_hash(doc, 128, 1e-13));
  EXPECT_NE(h, workspace_hash(doc, 256, 1e-13));
  EXPECT_NE(h, workspace_hash(doc, 128, 1e-12));
  auto edited = doc;
  edited["anchor"][1] = -0.29;
  EXPECT_NE(h, workspace_hash(edited, 128, 1e-13));
}
