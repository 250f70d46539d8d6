#include <gtest/gtest.h>

#include "support.hpp"

using namespace magvox;

namespace {

std::size_t parse_error_line(const std::function<void()>& f) {
  try {
    f();
  } catch (const ParseError& e) {
    return e.line();
  }
  return 0;
}

}  // namespace

TEST(Ingest, SingleMagnetizationRow) {
  const auto r = parse_magnetization("id,mx,my,mz\n3,0,0,1\n");
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0], (MagRecord{3, 0, 0, 1, false}));
}

TEST(Ingest, NonNumericFieldReportsLine) {
  EXPECT_EQ(parse_error_line([] { parse_magnetization("id,mx,my,mz\n1,a,0,0\n"); }), 2u);
}

TEST(Ingest, WrongColumnCount) {
  EXPECT_EQ(parse_error_line([] { parse_magnetization("id,mx,my,mz\n1,0,0,1\n2,0,1\n"); }), 3u);
  EXPECT_EQ(parse_error_line([] { parse_geometry("id,l,w,h,x,y,z\n1,1,1,1,0,0,0,9\n"); }), 2u);
}

TEST(Ingest, NonPositiveId) {
  EXPECT_EQ(parse_error_line([] { parse_magnetization("id,mx,my,mz\n0,0,0,1\n"); }), 2u);
  EXPECT_EQ(parse_error_line([] { parse_magnetization("id,mx,my,mz\n-2,0,0,1\n"); }), 2u);
}

TEST(Ingest, EmptyInput) {
  try {
    parse_magnetization("");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Input);
  }
}

TEST(Ingest, HeaderOnlyGivesNoRecords) {
  EXPECT_TRUE(parse_magnetization("id,mx,my,mz\n").empty());
}

TEST(Ingest, ExtraColumnInHeaderRejected) {
  EXPECT_THROW(parse_magnetization("id,mx,my,mz,extra\n1,0,0,1,5\n"), ParseError);
}

TEST(Ingest, ScientificNotationAndWhitespace) {
  const auto g = parse_geometry("id,l,w,h,x,y,z\r\n 1 , 5e-2,0.05,0.05,0,0,-1.5E0\r\n");
  ASSERT_EQ(g.size(), 1u);
  EXPECT_EQ(g[0], (GeomRecord{1, 0.05, 0.05, 0.05, 0, 0, -1.5}));
}

TEST(Ingest, GeometryCube) {
  const auto g = parse_geometry("id,l,w,h,x,y,z\n1,0.05,0.05,0.05,0,0,0\n");
  ASSERT_EQ(g.size(), 1u);
  EXPECT_EQ(g[0], (GeomRecord{1, 0.05, 0.05, 0.05, 0, 0, 0}));
}

TEST(Ingest, NegativeHeightRejected) {
  try {
    parse_geometry("id,l,w,h,x,y,z\n1,0.05,0.05,-1,0,0,0\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_NE(std::string(e.what()).find("non-positive dimension"), std::string::npos);
  }
}

TEST(Ingest, ZeroVectorNeedsPassiveFlag) {
  EXPECT_THROW(parse_magnetization("id,mx,my,mz\n1,0,0,0\n"), ParseError);
  const auto r = parse_magnetization("id,mx,my,mz,passive\n1,0,0,0,1\n2,0,0,1,0\n");
  ASSERT_EQ(r.size(), 2u);
  EXPECT_TRUE(r[0].passive);
  EXPECT_FALSE(r[1].passive);
}

TEST(Ingest, WormFixtureHasFourPlusZRows) {
  // Independent read of the file: count data lines and check the last three
  // fields by plain string comparison.
  const auto text = testkit::slurp(testkit::data_dir() / "fixtures" / "worm.mag.csv");
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  int rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ++rows;
    EXPECT_EQ(line.substr(line.find(',')), ",0,0,1") << line;
  }
  EXPECT_EQ(rows, 4);
  const auto r = parse_magnetization(text);
  ASSERT_EQ(r.size(), 4u);
  for (const auto& m : r) EXPECT_EQ(Vec3(m.mx, m.my, m.mz), Vec3(0, 0, 1));
}

TEST(Ingest, EmitParseRoundTrip) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1e3, 1e3), pos(1e-6, 10);
  std::vector<MagRecord> mag;
  std::vector<GeomRecord> geom;
  for (VoxelId id = 1; id <= 200; ++id) {
    mag.push_back({id, u(rng), u(rng) * 1e-9, u(rng), false});
    geom.push_back({id, pos(rng), pos(rng), pos(rng), u(rng), u(rng), u(rng) * 1e-7});
  }
  EXPECT_EQ(parse_magnetization(emit_magnetization(mag)), mag);
  EXPECT_EQ(parse_geometry(emit_geometry(geom)), geom);
}
