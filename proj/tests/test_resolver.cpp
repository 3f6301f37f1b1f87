#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <optional>
#include <random>
#include <vector>

#include "occlusim/error.hpp"
#include "occlusim/resolver.hpp"
#include "oracle.hpp"

using namespace occlusim;

namespace {

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

struct RandomQuery {
  std::vector<Circle> trees;
  ResolutionQuery query;
};

// Desk about 1.6 x 0.8 m, 1-30 trees, origin 0.5-3 m from the desk center.
// Trees are scattered around the desk so most queries start occluded.
RandomQuery random_query(std::mt19937_64& rng) {
  RandomQuery r;
  const Vec2 desk_center{uniform(rng, -5, 5), uniform(rng, -5, 5)};
  const double dist = uniform(rng, 0.5, 3.0);
  const double bearing = uniform(rng, -kPi, kPi);
  r.query.origin = desk_center + unit_from_angle(bearing) * dist;
  r.query.desk = OrientedRect(desk_center, uniform(rng, 0.7, 0.9), uniform(rng, 0.35, 0.45),
                              uniform(rng, -kPi, kPi));
  const int n = std::uniform_int_distribution<int>(1, 30)(rng);
  for (int k = 0; k < n; ++k) {
    const double a = uniform(rng, -kPi, kPi);
    const double rad = uniform(rng, 0.0, dist + 1.5);
    r.trees.emplace_back(desk_center + unit_from_angle(a) * rad, uniform(rng, 0.05, 0.4));
  }
  r.query.obstacles = r.trees;
  return r;
}

void expect_same(const ResolutionOutcome& a, const ResolutionOutcome& b, int n) {
  EXPECT_EQ(a.status, b.status) << "query " << n;
  EXPECT_EQ(a.cost, b.cost) << "query " << n;
  EXPECT_EQ(a.rotation_delta, b.rotation_delta) << "query " << n;
  EXPECT_EQ(a.translation_delta, b.translation_delta) << "query " << n;
  EXPECT_EQ(a.resolved_desk, b.resolved_desk) << "query " << n;
}

}  // namespace

TEST(CandidateDesk, Identity) {
  const OrientedRect d({2, 0}, 0.8, 0.4, 0.3);
  EXPECT_EQ(candidate_desk(d, {0, 0}, 0.0, 0.0), d);
}

TEST(CandidateDesk, QuarterTurn) {
  const OrientedRect d({2, 0}, 0.8, 0.4, 0.0);
  const OrientedRect r = candidate_desk(d, {0, 0}, kPi / 2, 0.0);
  EXPECT_NEAR(r.center.x, 0.0, 1e-15);
  EXPECT_NEAR(r.center.y, 2.0, 1e-15);
  EXPECT_DOUBLE_EQ(r.yaw, kPi / 2);
}

TEST(CandidateDesk, TranslationTowardOrigin) {
  const OrientedRect d({2, 0}, 0.8, 0.4, 0.0);
  const OrientedRect r = candidate_desk(d, {0, 0}, 0.0, 0.5);
  EXPECT_EQ(r.center, (Vec2{1.5, 0.0}));
}

TEST(CandidateDesk, MatchesComplexArithmetic) {
  // Rotation about the origin is multiplication by e^{i theta}; the slide is
  // along -(rotated center - origin) normalized.
  std::mt19937_64 rng(21);
  for (int n = 0; n < 1000; ++n) {
    const Vec2 o{uniform(rng, -3, 3), uniform(rng, -3, 3)};
    const OrientedRect d({uniform(rng, -3, 3), uniform(rng, -3, 3)}, 0.8, 0.4, uniform(rng, -3, 3));
    const double th = uniform(rng, -kPi / 2, kPi / 2);
    const double tr = uniform(rng, 0.0, 1.0);
    using C = std::complex<long double>;
    const C oc(o.x, o.y);
    const C rotated = oc + (C(d.center.x, d.center.y) - oc) * std::polar(1.0L, static_cast<long double>(th));
    const C moved = rotated + (oc - rotated) / std::abs(oc - rotated) * static_cast<long double>(tr);
    const OrientedRect got = candidate_desk(d, o, th, tr);
    EXPECT_NEAR(got.center.x, static_cast<double>(moved.real()), 1e-12);
    EXPECT_NEAR(got.center.y, static_cast<double>(moved.imag()), 1e-12);
    EXPECT_EQ(got.yaw, d.yaw + th);
  }
}

TEST(CandidateDesk, DegenerateWhenCenterHitsOrigin) {
  try {
    candidate_desk(OrientedRect({0, 0}, 0.8, 0.4, 0.0), {0, 0}, 0.1, 0.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::degenerate_geometry);
  }
}

TEST(Cost, Examples) {
  const ResolutionConstraints c;
  EXPECT_EQ(resolution_cost(0.0, 0.0, c), 0.0);
  EXPECT_EQ(resolution_cost(kPi / 2, 0.0, c), 1.0);
  EXPECT_EQ(resolution_cost(kPi / 4, 0.5, c), 1.0);
}

TEST(Cost, ZeroTranslationBudgetIsRotationOnly) {
  ResolutionConstraints c;
  c.max_translation = 0.0;
  c.validate();
  EXPECT_EQ(c.translation_count(), 0);
  EXPECT_EQ(resolution_cost(kPi / 4, 0.0, c), 0.5);
}

TEST(Constraints, Validation) {
  ResolutionConstraints c;
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.rotation_count(), 90);
  EXPECT_EQ(c.translation_count(), 20);
  c.rotation_step = 0.0;
  EXPECT_THROW(c.validate(), Error);
  c = {};
  c.translation_step = 2.0;
  EXPECT_THROW(c.validate(), Error);
  c = {};
  c.max_rotation = -1.0;
  EXPECT_THROW(c.validate(), Error);
}

TEST(Schedule, SortedAndComplete) {
  const ResolutionConstraints c;
  const auto s = candidate_schedule(c);
  ASSERT_EQ(s.size(), 181u * 21u);
  EXPECT_EQ(s.front().rotation_index, 0);
  EXPECT_EQ(s.front().translation_index, 0);
  for (std::size_t k = 1; k < s.size(); ++k) {
    EXPECT_TRUE(expands_before(s[k - 1], s[k]));
    EXPECT_FALSE(expands_before(s[k], s[k - 1]));
  }
  // Mirrored rotations tie on cost; counterclockwise goes first.
  EXPECT_EQ(s[1].rotation_index, 1);
  EXPECT_EQ(s[2].rotation_index, -1);
}

TEST(Resolver, NoObstaclesIsAlreadyFree) {
  ResolutionQuery q;
  q.origin = {0, -1};
  q.desk = OrientedRect({0, 0}, 0.8, 0.4, kPi / 2);
  const auto o = find_occlusion_free(q);
  EXPECT_EQ(o.status, ResolutionStatus::already_free);
  EXPECT_EQ(o.rotation_delta, 0.0);
  EXPECT_EQ(o.translation_delta, 0.0);
  EXPECT_EQ(o.cost, 0.0);
  EXPECT_EQ(o.resolved_desk, q.desk);
}

TEST(Resolver, DegenerateOriginIsInvalidQuery) {
  ResolutionQuery q;
  q.origin = {0, 0};
  q.desk = OrientedRect({0, 0}, 0.8, 0.4, 0.0);
  try {
    find_occlusion_free(q);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::invalid_query);
  }
}

TEST(Resolver, SingleTreeMatchesEnumeration) {
  const std::vector<Circle> trees{Circle({0.3, 0.1}, 0.25)};
  ResolutionQuery q;
  q.origin = {0, -1};
  q.desk = OrientedRect({0, 0}, 0.8, 0.4, kPi / 2);
  q.obstacles = trees;
  const auto got = find_occlusion_free(q);
  const auto want = oracle::enumerate(q);
  ASSERT_EQ(want.status, ResolutionStatus::resolved);
  expect_same(got, want, 0);
  EXPECT_FALSE(is_occluded(got.resolved_desk, trees));
}

TEST(Resolver, EnclosingAnnulusIsUnresolved) {
  // Overlapping 2 m circles centered every 5 degrees on the ring through the
  // desk: every reachable desk pose stays inside their union.
  std::vector<Circle> ring;
  for (int k = 0; k < 72; ++k) ring.emplace_back(unit_from_angle(deg_to_rad(5.0 * k)) * 2.0, 2.0);
  ResolutionQuery q;
  q.origin = {0, 0};
  q.desk = OrientedRect({2, 0}, 0.8, 0.4, 0.0);
  q.obstacles = ring;
  EXPECT_EQ(oracle::enumerate(q).status, ResolutionStatus::unresolved);
  const auto o = find_occlusion_free(q);
  EXPECT_EQ(o.status, ResolutionStatus::unresolved);
  EXPECT_EQ(o.rotation_delta, 0.0);
  EXPECT_EQ(o.translation_delta, 0.0);
  EXPECT_EQ(o.resolved_desk, q.desk);
  EXPECT_EQ(find_occlusion_free_parallel(q), o);
  EXPECT_EQ(reference::find_occlusion_free_search(q), o);
}

TEST(Resolver, RandomQueriesMatchEnumeration) {
  std::mt19937_64 rng(2024);
  int resolved = 0, unresolved = 0;
  for (int n = 0; n < 1000; ++n) {
    const RandomQuery r = random_query(rng);
    const auto got = find_occlusion_free(r.query);
    expect_same(got, oracle::enumerate(r.query), n);
    if (got.status == ResolutionStatus::resolved) ++resolved;
    if (got.status == ResolutionStatus::unresolved) ++unresolved;
  }
  // The generator has to exercise the search, not just the trivial path.
  EXPECT_GT(resolved, 300);
}

TEST(Resolver, KernelsAgree) {
  std::mt19937_64 rng(77);
  for (int n = 0; n < 500; ++n) {
    RandomQuery r = random_query(rng);
    const int lock = n % 3;
    r.query.constraints.direction_lock = lock == 0 ? Turn::none : (lock == 1 ? Turn::ccw : Turn::cw);
    const auto serial = find_occlusion_free(r.query);
    EXPECT_EQ(find_occlusion_free_parallel(r.query), serial) << "query " << n;
    EXPECT_EQ(reference::find_occlusion_free_search(r.query), serial) << "query " << n;
  }
}

TEST(Resolver, SoundAndWithinBounds) {
  std::mt19937_64 rng(99);
  const ResolutionConstraints c;
  for (int n = 0; n < 1000; ++n) {
    const RandomQuery r = random_query(rng);
    const auto o = find_occlusion_free(r.query);
    EXPECT_LE(std::abs(o.rotation_delta), c.max_rotation);
    EXPECT_GE(o.translation_delta, 0.0);
    EXPECT_LE(o.translation_delta, c.max_translation);
    if (o.usable()) EXPECT_FALSE(is_occluded(o.resolved_desk, r.trees)) << "query " << n;
    if (o.status == ResolutionStatus::already_free) {
      EXPECT_EQ(o.cost, 0.0);
      EXPECT_EQ(o.rotation_delta, 0.0);
    }
  }
}

TEST(Resolver, DirectionLockRespected) {
  std::mt19937_64 rng(5);
  for (int n = 0; n < 500; ++n) {
    RandomQuery r = random_query(rng);
    r.query.constraints.direction_lock = Turn::ccw;
    const auto up = find_occlusion_free(r.query);
    EXPECT_GE(up.rotation_delta, 0.0);
    expect_same(up, oracle::enumerate(r.query), n);
    r.query.constraints.direction_lock = Turn::cw;
    const auto down = find_occlusion_free(r.query);
    EXPECT_LE(down.rotation_delta, 0.0);
    expect_same(down, oracle::enumerate(r.query), n);
  }
}

TEST(Resolver, AddingObstacleNeverLowersCost) {
  std::mt19937_64 rng(31);
  for (int n = 0; n < 500; ++n) {
    RandomQuery r = random_query(rng);
    const auto before = find_occlusion_free(r.query);
    if (!before.usable()) continue;
    r.trees.emplace_back(Vec2{uniform(rng, -8, 8), uniform(rng, -8, 8)}, uniform(rng, 0.05, 0.5));
    r.query.obstacles = r.trees;
    const auto after = find_occlusion_free(r.query);
    if (after.usable()) EXPECT_GE(after.cost, before.cost) << "query " << n;
  }
}

TEST(Resolver, Deterministic) {
  std::mt19937_64 rng(8);
  for (int n = 0; n < 200; ++n) {
    const RandomQuery r = random_query(rng);
    EXPECT_EQ(find_occlusion_free(r.query), find_occlusion_free(r.query));
  }
}

TEST(Resolver, RotationOnlyGrid) {
  std::mt19937_64 rng(4);
  for (int n = 0; n < 300; ++n) {
    RandomQuery r = random_query(rng);
    r.query.constraints.max_translation = 0.0;
    const auto o = find_occlusion_free(r.query);
    EXPECT_EQ(o.translation_delta, 0.0);
    expect_same(o, oracle::enumerate(r.query), n);
    EXPECT_EQ(reference::find_occlusion_free_search(r.query), o);
  }
}

TEST(Resolver, CoarseNonDividingSteps) {
  std::mt19937_64 rng(6);
  for (int n = 0; n < 300; ++n) {
    RandomQuery r = random_query(rng);
    r.query.constraints.rotation_step = deg_to_rad(7.0);
    r.query.constraints.translation_step = 0.3;
    const auto o = find_occlusion_free(r.query);
    expect_same(o, oracle::enumerate(r.query), n);
    EXPECT_EQ(find_occlusion_free_parallel(r.query), o);
    EXPECT_EQ(reference::find_occlusion_free_search(r.query), o);
  }
}
