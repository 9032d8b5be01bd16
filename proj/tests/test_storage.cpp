#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "gamblet/storage.hpp"

using namespace gamblet;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("gamblet_storage_" + name);
  fs::remove_all(p);
  return p;
}

GambletSystem system_1d(int q) {
  auto hier = std::make_shared<const Hierarchy>(build_dyadic(1, q));
  return transform(assemble_fem(coeff_1d(), *hier), hier);
}

void expect_same(const Hierarchy& a, const Hierarchy& b) {
  EXPECT_EQ(a.dim, b.dim);
  EXPECT_EQ(a.sizes, b.sizes);
  ASSERT_EQ(a.aggregation.size(), b.aggregation.size());
  for (std::size_t i = 0; i < a.aggregation.size(); ++i) EXPECT_EQ(a.aggregation[i], b.aggregation[i]);
  ASSERT_EQ(a.details.size(), b.details.size());
  for (std::size_t i = 0; i < a.details.size(); ++i) EXPECT_EQ(a.details[i], b.details[i]);
  EXPECT_EQ(a.parents, b.parents);
  EXPECT_EQ(a.cell_volumes, b.cell_volumes);
  EXPECT_EQ(a.centers, b.centers);
  EXPECT_EQ(a.fine_points, b.fine_points);
  EXPECT_EQ(a.merged_levels, b.merged_levels);
  EXPECT_EQ(a.point_level_appended, b.point_level_appended);
}

std::string error_of(const fs::path& dir) {
  try {
    load_system(dir);
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(HierarchyJson, RoundTripIsExact) {
  expect_same(build_dyadic(2, 3), hierarchy_from_json(hierarchy_to_json(build_dyadic(2, 3))));
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Point2> pts(57);
  for (auto& p : pts) p = {u(rng), u(rng)};
  const Hierarchy h = build_from_points(pts, 3);
  const Hierarchy back = hierarchy_from_json(Json::parse(hierarchy_to_json(h).dump()));
  expect_same(h, back);
  EXPECT_EQ(hierarchy_hash(h), hierarchy_hash(back));
  EXPECT_NE(hierarchy_hash(h), hierarchy_hash(build_dyadic(2, 3)));
}

TEST(HierarchyJson, MalformedInputIsIoError) {
  Json j = hierarchy_to_json(build_dyadic(1, 3));
  j.erase("details");
  try {
    hierarchy_from_json(j);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Io);
  }
}

TEST(Fnv1a, ReferenceVectors) {
  EXPECT_EQ(fnv1a(""), 0xcbf29ce484222325ull);
  EXPECT_EQ(fnv1a("a"), 0xaf63dc4c8601ec8cull);
  EXPECT_EQ(fnv1a("foobar"), 0x85944171f73967e8ull);
  EXPECT_EQ(hex64(0xabcull), "0000000000000abc");
}

TEST(SystemStore, SaveLoadRoundTrip) {
  const GambletSystem sys = system_1d(5);
  const fs::path dir = scratch("roundtrip");
  save_system(sys, dir, "cafe");
  const GambletSystem back = load_system(dir);
  ASSERT_EQ(back.levels(), 5);
  for (int k = 1; k <= 5; ++k) {
    EXPECT_EQ(back.A(k).dense(), sys.A(k).dense());
    EXPECT_EQ(back.B(k).dense(), sys.B(k).dense());
  }
  for (int k = 2; k <= 5; ++k) {
    EXPECT_EQ(back.R(k), sys.R(k));
    EXPECT_EQ(back.N(k), sys.N(k));
  }
  const Vector y = Vector::LinSpaced(32, -1.0, 1.0);
  EXPECT_EQ(reconstruct(back, analyze(back, y)), reconstruct(sys, analyze(sys, y)));
  const Json m = read_manifest(dir);
  EXPECT_EQ(m.at("input_hash"), "cafe");
  EXPECT_EQ(m.at("sizes").get<std::vector<Index>>(), (std::vector<Index>{2, 4, 8, 16, 32}));
  EXPECT_EQ(m.at("detail_sizes").get<std::vector<Index>>(), (std::vector<Index>{2, 2, 4, 8, 16}));
  fs::remove_all(dir);
}

TEST(SystemStore, CorruptManifestNamesField) {
  const GambletSystem sys = system_1d(3);
  const fs::path dir = scratch("corrupt");
  save_system(sys, dir);
  Json m = read_manifest(dir);

  Json bad = m;
  bad["sizes"] = std::vector<Index>{2, 4, 9};
  write_text(dir / "manifest.json", bad.dump());
  EXPECT_NE(error_of(dir).find("'sizes'"), std::string::npos);

  bad = m;
  bad.erase("trunc");
  write_text(dir / "manifest.json", bad.dump());
  EXPECT_NE(error_of(dir).find("'trunc'"), std::string::npos);

  bad = m;
  bad["hierarchy_hash"] = "0000000000000000";
  write_text(dir / "manifest.json", bad.dump());
  EXPECT_NE(error_of(dir).find("'hierarchy_hash'"), std::string::npos);

  bad = m;
  bad["levels"] = "three";
  write_text(dir / "manifest.json", bad.dump());
  EXPECT_NE(error_of(dir).find("'levels'"), std::string::npos);

  write_text(dir / "manifest.json", "{ not json");
  EXPECT_NE(error_of(dir).find("manifest.json"), std::string::npos);
  fs::remove_all(dir);
}

TEST(SystemStore, MissingDirectoryIsIoError) {
  try {
    load_system(scratch("absent"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Io);
  }
}
