#include <gtest/gtest.h>

#include "fixtures.hpp"

#include <cstdio>
#include <filesystem>

using namespace conav;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("conav_test_" + name)).string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Cache, RoundTripIsBitIdentical) {
  const auto& b = fixture::built("koebe3.json");
  const auto hash = workspace_hash(b.file.document, b.file.n_nodes, 1e-13);
  const auto path = temp_path("roundtrip.cache");
  save_cache(path, b.cm, b.sw, b.report, hash, 1e-13);
  const auto c = load_cache(path, hash);
  EXPECT_EQ(c.header.n_nodes, b.file.n_nodes);
  EXPECT_EQ(c.header.n_iterations, b.cm.n_iterations);
  EXPECT_EQ(c.header.final_delta, b.cm.final_delta);
  EXPECT_EQ(c.report.deltas, b.report.deltas);
  ASSERT_EQ(c.sphere_world.obstacles.size(), b.sw.obstacles.size());
  for (std::size_t i = 0; i < b.sw.obstacles.size(); ++i) {
    EXPECT_EQ(c.sphere_world.obstacles[i].center, b.sw.obstacles[i].center);
    EXPECT_EQ(c.sphere_world.obstacles[i].radius, b.sw.obstacles[i].radius);
  }
  for (auto z : oracle::random_free_points(b.cm.source, 30, 0.01, 3)) {
    const auto before = evaluate_composite_full(b.cm, z);
    const auto after = evaluate_composite_full(c.map, z);
    EXPECT_EQ(before.value, after.value);
    EXPECT_EQ(before.derivative, after.derivative);
  }
  // re-serializing the loaded map gives the same bytes
  EXPECT_EQ(serialize_cache(c.map, c.sphere_world, c.report, hash, 1e-13), slurp(path));
  std::remove(path.c_str());
}

TEST(Cache, AffineStageSurvivesRoundTrip) {
  CompositeMap cm;
  cm.source = load_workspace(oracle::workspace("disk.json")).workspace;
  cm.stages.push_back(MapStage::affine({0.1, 0.2}, 2.0));
  cm.image_curves.push_back(cm.source.external);
  cm.tracked_points = {{0.0, 0.0}};
  SphereWorld sw;
  IterationReport rep;
  const auto c = deserialize_cache(serialize_cache(cm, sw, rep, 7, 1e-13));
  ASSERT_EQ(c.map.stages.size(), 1u);
  EXPECT_EQ(c.map.stages[0].kind(), StageKind::affine);
  EXPECT_EQ(evaluate_composite(c.map, {0.3, -0.1}), evaluate_composite(cm, {0.3, -0.1}));
}

TEST(Cache, StaleDetection) {
  const auto& b = fixture::built("sphere_world.json");
  const auto hash = workspace_hash(b.file.document, b.file.n_nodes, 1e-13);
  const auto path = temp_path("stale.cache");
  save_cache(path, b.cm, b.sw, b.report, hash, 1e-13);

  auto edited = b.file.document;
  edited["internal"][0]["radius"] = 0.2000001;
  EXPECT_THROW(load_cache(path, workspace_hash(edited, b.file.n_nodes, 1e-13)), StaleCacheError);
  auto moved = b.file.document;
  moved["anchor"][0] = 0.01;
  EXPECT_THROW(load_cache(path, workspace_hash(moved, b.file.n_nodes, 1e-13)), StaleCacheError);
  EXPECT_THROW(load_cache(path, workspace_hash(b.file.document, 256, 1e-13)), StaleCacheError);
  EXPECT_THROW(load_cache(path, workspace_hash(b.file.document, b.file.n_nodes, 1e-12)), StaleCacheError);
  EXPECT_NO_THROW(load_cache(path, hash));
  std::remove(path.c_str());
}

TEST(Cache, CorruptionIsFormatError) {
  const auto& b = fixture::built("sphere_world.json");
  const auto bytes = serialize_cache(b.cm, b.sw, b.report, 1, 1e-13);
  EXPECT_NO_THROW(deserialize_cache(bytes));

  auto flipped = bytes;
  flipped[bytes.size() / 2] ^= 0x10;
  EXPECT_THROW(deserialize_cache(flipped), FormatError);
  EXPECT_THROW(deserialize_cache(bytes.substr(0, bytes.size() - 9)), FormatError);
  EXPECT_THROW(deserialize_cache(bytes.substr(0, 4)), FormatError);
  auto magic = bytes;
  magic[0] = 'X';
  EXPECT_THROW(deserialize_cache(magic), FormatError);
  EXPECT_THROW(load_cache(temp_path("does_not_exist.cache")), FormatError);
}

TEST(Cache, HashIsStableAndSensitive) {
  const auto doc = read_json_file(oracle::workspace("disk.json"));
  EXPECT_EQ(workspace_hash(doc, 128, 1e-13), workspace_hash(doc, 128, 1e-13));
  EXPECT_NE(workspace_hash(doc, 128, 1e-13), workspace_hash(doc, 64, 1e-13));
  const char data[] = "a";
  EXPECT_EQ(fnv1a(data, 1), 0xaf63dc4c8601ec8cULL);
}
