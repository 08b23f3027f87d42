#include "irbfn/lut.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "gtest/gtest.h"
#include "irbfn/errors.hpp"
#include "support/oracles.hpp"
#include "support/temp_dir.hpp"

namespace irbfn {
namespace {

using testing::Gen;
using testing::TempDir;

// magic (8) + version (4) + three axes of min, step, count (24 each).
constexpr std::size_t kHeaderBytes = 84;
constexpr std::size_t kRecordBytes = 41;

const LookupTable& desk_table() {
  static const LookupTable table = generate(desk_scale_grid());
  return table;
}

LookupTable random_table(Gen& gen) {
  LookupTable t;
  for (GridAxis& axis : t.spec.axes) {
    axis = {gen.uniform(-5, 5), gen.uniform(0.05, 1.0),
            static_cast<std::uint64_t>(gen.integer(1, 6))};
  }
  t.records.resize(t.spec.size());
  for (LutRecord& rec : t.records) {
    rec.params = gen.params(1.0, 0.1, 12.0);
    rec.valid = gen.integer(0, 3) != 0;
  }
  return t;
}

TEST(GridSpecTest, CountsFromBounds) {
  const GridSpec s = GridSpec::from_bounds(1, 1.2, 0.1, 0, 0, 0.1, 0, 0, 0.1);
  EXPECT_EQ(s.axes[0].count, 3u);
  EXPECT_EQ(s.axes[1].count, 1u);
  EXPECT_EQ(s.size(), 3u);
}

TEST(GridSpecTest, FullScaleCounts) {
  const GridSpec s = full_scale_grid();
  EXPECT_EQ(s.axes[0].count, 91u);
  EXPECT_EQ(s.axes[1].count, 121u);
  EXPECT_EQ(s.axes[2].count, 32u);
}

TEST(GridSpecTest, DeskScaleCounts) {
  const GridSpec s = desk_scale_grid();
  EXPECT_EQ(s.axes[0].count, 9u);
  EXPECT_EQ(s.axes[1].count, 9u);
  EXPECT_EQ(s.axes[2].count, 7u);
  EXPECT_EQ(s.size(), 567u);
}

TEST(GridSpecTest, RejectsEmptyRangeAndBadStep) {
  EXPECT_THROW(GridSpec::from_bounds(6, 2, 0.5, -2, 2, 0.5, 0, 0, 0.1), ConfigError);
  EXPECT_THROW(GridSpec::from_bounds(2, 6, 0.0, -2, 2, 0.5, 0, 0, 0.1), ConfigError);
  EXPECT_THROW(GridSpec::from_bounds(2, 6, 0.5, -2, 2, -0.5, 0, 0, 0.1), ConfigError);
}

TEST(EnumerateGoalsTest, RowMajorThetaFastest) {
  const auto goals = enumerate_goals(GridSpec::from_bounds(1, 1.2, 0.1, 0, 0, 0.1, 0, 0, 0.1));
  ASSERT_EQ(goals.size(), 3u);
  EXPECT_NEAR(goals[0].x, 1.0, 1e-15);
  EXPECT_NEAR(goals[1].x, 1.1, 1e-15);
  EXPECT_NEAR(goals[2].x, 1.2, 1e-15);
  for (const GoalState& g : goals) {
    EXPECT_EQ(g.y, 0.0);
    EXPECT_EQ(g.theta, 0.0);
    EXPECT_EQ(g.kappa, 0.0);
  }

  const GridSpec s = GridSpec::from_bounds(0, 1, 1, 0, 1, 1, 0, 0.2, 0.1);
  const auto all = enumerate_goals(s);
  ASSERT_EQ(all.size(), 12u);
  EXPECT_EQ(all[1].theta, s.axes[2].value(1));
  EXPECT_EQ(all[3].y, 1.0);
  EXPECT_EQ(all[6].x, 1.0);
  for (std::uint64_t i = 0; i < all.size(); ++i) EXPECT_EQ(all[i], s.goal(i));
}

TEST(GenerateTest, SingleStraightGoal) {
  const LookupTable t = generate(GridSpec::from_bounds(5, 5, 1, 0, 0, 1, 0, 0, 1));
  ASSERT_EQ(t.records.size(), 1u);
  EXPECT_TRUE(t.records[0].valid);
  EXPECT_NEAR(t.records[0].params.s_f, 5.0, 1e-6);
}

TEST(GenerateTest, DeskScaleMostlyValid) {
  const LookupTable& t = desk_table();
  ASSERT_EQ(t.records.size(), 567u);
  EXPECT_GE(t.valid_count(), static_cast<std::size_t>(std::ceil(0.95 * 567)));
}

TEST(GenerateTest, ValidRecordsHitTheirGoals) {
  const LookupTable& t = desk_table();
  for (std::uint64_t i = 0; i < t.records.size(); ++i) {
    if (!t.records[i].valid) continue;
    const GoalState g = t.spec.goal(i);
    const Pose p = integrate_pose(t.records[i].params, kDefaultQuadratureIntervals);
    EXPECT_LE(std::abs(p.x - g.x), 1e-3) << "record " << i;
    EXPECT_LE(std::abs(p.y - g.y), 1e-3) << "record " << i;
    EXPECT_LE(std::abs(p.theta - g.theta), 1e-3) << "record " << i;

    SolveResult r;
    r.params = t.records[i].params;
    r.converged = objective(r.params, g) <= SolveOptions{}.tol_objective;
    EXPECT_TRUE(is_valid(r, g)) << "record " << i;
  }
}

TEST(GenerateTest, IndependentOfWorkerCount) {
  TempDir dir;
  save_table(desk_table(), dir / "one.bin");
  const auto reference = testing::read_bytes(dir / "one.bin");
  for (unsigned workers : {2u, 8u}) {
    const LookupTable many = generate(desk_scale_grid(), {}, workers);
    EXPECT_EQ(many, desk_table());
    save_table(many, dir / "many.bin");
    EXPECT_EQ(testing::read_bytes(dir / "many.bin"), reference) << workers << " workers";
  }
}

TEST(PersistenceTest, DeskTableRoundTrip) {
  TempDir dir;
  save_table(desk_table(), dir / "lut.bin");
  EXPECT_EQ(std::filesystem::file_size(dir / "lut.bin"), kHeaderBytes + 567 * kRecordBytes);
  EXPECT_EQ(load_table(dir / "lut.bin"), desk_table());
}

TEST(PersistenceTest, RandomTablesRoundTripBitwise) {
  TempDir dir;
  Gen gen(19);
  for (int trial = 0; trial < 10; ++trial) {
    const LookupTable t = random_table(gen);
    save_table(t, dir / "t.bin");
    const auto first = testing::read_bytes(dir / "t.bin");
    const LookupTable back = load_table(dir / "t.bin");
    EXPECT_EQ(back, t);
    save_table(back, dir / "t.bin");
    EXPECT_EQ(testing::read_bytes(dir / "t.bin"), first);
  }
}

TEST(PersistenceTest, CorruptedMagic) {
  TempDir dir;
  save_table(desk_table(), dir / "lut.bin");
  auto bytes = testing::read_bytes(dir / "lut.bin");
  bytes[3] = 'X';
  testing::write_bytes(dir / "lut.bin", bytes);
  try {
    load_table(dir / "lut.bin");
    FAIL() << "expected a format error";
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("magic"), std::string::npos) << e.what();
  }
}

TEST(PersistenceTest, UnknownVersion) {
  TempDir dir;
  save_table(desk_table(), dir / "lut.bin");
  auto bytes = testing::read_bytes(dir / "lut.bin");
  bytes[8] = 2;
  testing::write_bytes(dir / "lut.bin", bytes);
  EXPECT_THROW(load_table(dir / "lut.bin"), UnsupportedVersionError);
}

TEST(PersistenceTest, TruncatedMidRecordsReportsOffset) {
  TempDir dir;
  save_table(desk_table(), dir / "lut.bin");
  auto bytes = testing::read_bytes(dir / "lut.bin");
  bytes.resize(kHeaderBytes + 100 * kRecordBytes + 17);
  testing::write_bytes(dir / "lut.bin", bytes);
  try {
    load_table(dir / "lut.bin");
    FAIL() << "expected a format error";
  } catch (const FormatError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("truncated"), std::string::npos) << what;
    EXPECT_NE(what.find("byte offset " + std::to_string(kHeaderBytes)), std::string::npos) << what;
  }
}

TEST(PersistenceTest, TruncatedHeaderNamesField) {
  TempDir dir;
  save_table(desk_table(), dir / "lut.bin");
  auto bytes = testing::read_bytes(dir / "lut.bin");
  bytes.resize(10);
  testing::write_bytes(dir / "lut.bin", bytes);
  try {
    load_table(dir / "lut.bin");
    FAIL() << "expected a format error";
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("version"), std::string::npos) << e.what();
  }
}

TEST(PersistenceTest, BadValidityFlagAndTrailingBytes) {
  TempDir dir;
  save_table(desk_table(), dir / "lut.bin");
  const auto good = testing::read_bytes(dir / "lut.bin");

  auto bad_flag = good;
  bad_flag[kHeaderBytes + kRecordBytes - 1] = 7;
  testing::write_bytes(dir / "lut.bin", bad_flag);
  EXPECT_THROW(load_table(dir / "lut.bin"), FormatError);

  auto trailing = good;
  trailing.push_back('\0');
  testing::write_bytes(dir / "lut.bin", trailing);
  EXPECT_THROW(load_table(dir / "lut.bin"), FormatError);
}

TEST(NearestTest, ExactGridPointsReturnTheirRecords) {
  const LookupTable& t = desk_table();
  for (std::uint64_t i = 0; i < t.records.size(); ++i) {
    if (t.records[i].valid) {
      EXPECT_EQ(nearest(t, t.spec.goal(i)), t.records[i].params) << "record " << i;
    } else {
      EXPECT_THROW(nearest(t, t.spec.goal(i)), LookupMissError) << "record " << i;
    }
  }
}

TEST(NearestTest, SubHalfStepOffsetRoundsDown) {
  const LookupTable& t = desk_table();
  const auto& a = t.spec.axes;
  const std::uint64_t i = t.spec.index(3, 4, 2);
  ASSERT_TRUE(t.records[i].valid);
  const GoalState g{a[0].value(3) + 0.4 * a[0].step, a[1].value(4) + 0.4 * a[1].step,
                    a[2].value(2) + 0.4 * a[2].step, 0};
  EXPECT_EQ(nearest(t, g), t.records[i].params);
}

TEST(NearestTest, TieGoesToLowerIndex) {
  LookupTable t;
  t.spec = GridSpec::from_bounds(0, 1, 1, 0, 0, 1, 0, 0, 1);
  t.records = {{{0.1, 0, 0, 0, 1}, true}, {{0.2, 0, 0, 0, 1}, true}};
  EXPECT_EQ(nearest(t, {0.5, 0, 0, 0}).kappa0, 0.1);
  EXPECT_EQ(nearest(t, {0.5000001, 0, 0, 0}).kappa0, 0.2);
}

TEST(NearestTest, OutsideBoxIsDomainError) {
  const LookupTable& t = desk_table();
  EXPECT_THROW(nearest(t, {1.0, 0, 0, 0}), DomainError);
  EXPECT_THROW(nearest(t, {4.0, 2.5, 0, 0}), DomainError);
  EXPECT_THROW(nearest(t, {4.0, 0, -0.5, 0}), DomainError);
}

TEST(NearestTest, InvalidRecordIsLookupMiss) {
  LookupTable t;
  t.spec = GridSpec::from_bounds(0, 1, 1, 0, 0, 1, 0, 0, 1);
  t.records = {{{0.1, 0, 0, 0, 1}, true}, {{}, false}};
  EXPECT_THROW(nearest(t, {0.9, 0, 0, 0}), LookupMissError);
}

}  // namespace
}  // namespace irbfn
