#include <doctest.h>

#include <numeric>
#include <random>
#include <vector>

#include "tetra/embeddings.hpp"
#include "tetra/enumerate.hpp"
#include "tetra/sphere.hpp"

using namespace tetra;

namespace {

// reference z-count: filter the whole norm sphere by both inner products
std::int64_t brute_circle(Vec3 x, Vec3 y, std::int64_t norm_z, std::int64_t dxz, std::int64_t dyz) {
  std::int64_t total = 0;
  for (Vec3 z : sphere_points(norm_z))
    if (dot(x, z) == dxz && dot(y, z) == dyz) ++total;
  return total;
}

std::int64_t brute_count2(const GramMatrix& g) {
  std::int64_t total = 0;
  for (Vec3 x : sphere_points(g.at(0, 0)))
    for (Vec3 y : sphere_points(g.at(1, 1)))
      if (dot(x, y) == g.at(0, 1)) ++total;
  return total;
}

std::int64_t brute_count3(const GramMatrix& g) {
  std::int64_t total = 0;
  for (Vec3 x : sphere_points(g.at(0, 0))) {
    for (Vec3 y : sphere_points(g.at(1, 1))) {
      if (dot(x, y) != g.at(0, 1)) continue;
      for (Vec3 z : sphere_points(g.at(2, 2)))
        if (dot(x, z) == g.at(0, 2) && dot(y, z) == g.at(1, 2)) ++total;
    }
  }
  return total;
}

}  // namespace

TEST_CASE("circle point counts with frozen values") {
  Vec3 e1{1, 0, 0}, e2{0, 1, 0};
  CHECK(count_circle_points(e1, e2, 1, 0, 0) == 2);  // z = (0,0,±1)
  CHECK(count_circle_points(e1, e2, 2, 1, 1) == 1);  // z = (1,1,0)
  CHECK(count_circle_points(e1, e2, 2, 0, 0) == 0);
}

TEST_CASE("circle point counts match sphere filtering") {
  std::vector<std::pair<Vec3, Vec3>> frames;
  for (std::int64_t nx = 1; nx <= 6; ++nx)
    for (Vec3 x : sphere_points(nx))
      for (std::int64_t ny = 1; ny <= 6; ++ny)
        for (Vec3 y : sphere_points(ny))
          if (!(cross(x, y) == Vec3{0, 0, 0})) frames.emplace_back(x, y);

  std::mt19937_64 rng(42);
  std::size_t checked = 0;
  while (checked < 400) {
    auto [x, y] = frames[rng() % frames.size()];
    std::int64_t norm_z = static_cast<std::int64_t>(rng() % 14);
    std::int64_t dxz = static_cast<std::int64_t>(rng() % 9) - 4;
    std::int64_t dyz = static_cast<std::int64_t>(rng() % 9) - 4;
    CHECK(count_circle_points(x, y, norm_z, dxz, dyz) == brute_circle(x, y, norm_z, dxz, dyz));
    ++checked;
  }
}

TEST_CASE("pair embedding counts with frozen values") {
  SphereTable table = SphereTable::build(60);
  CHECK(count_embeddings2(GramMatrix::identity(2), table) == 24);
  CHECK(count_embeddings2(GramMatrix::sym2(1, 1, 1), table) == 6);
  CHECK(count_embeddings2(GramMatrix::diag2(1, 7), table) == 0);
}

TEST_CASE("triple embedding counts with frozen values") {
  SphereTable table = SphereTable::build(60);
  CHECK(count_embeddings3(GramMatrix::identity(3), table) == 48);
  CHECK(count_embeddings3(GramMatrix::sym3(1, 0, 0, 1, 0, 7), table) == 0);
}

TEST_CASE("embedding counts match sphere scans") {
  SphereTable table = SphereTable::build(60);
  EmbeddingCounter counter(table);

  // every positive semidefinite 2x2 gram over a small grid; the rest must be rejected
  for (std::int64_t a = 1; a <= 6; ++a)
    for (std::int64_t c = a; c <= 6; ++c)
      for (std::int64_t b = -3; b <= 3; ++b) {
        GramMatrix g = GramMatrix::sym2(a, b, c);
        if (g.positive_semidefinite())
          CHECK(counter.count2(g) == brute_count2(g));
        else
          CHECK_THROWS_AS((void)counter.count2(g), std::invalid_argument);
      }

  // 3x3 grams realized by enumerated classes (witness edge vectors)
  ClassTable classes = enumerate_classes(2, false);
  std::size_t done = 0;
  for (const auto& [key, entry] : classes.classes) {
    GramMatrix g = GramMatrix::sym3(key.v[0], key.v[1], key.v[2], key.v[3], key.v[4], key.v[5]);
    CHECK(counter.count3(g) == brute_count3(g));
    if (++done >= 60) break;
  }

  // degenerate targets fall back to filtering and stay exact
  std::array<Vec3, 3> flat{Vec3{1, 0, 0}, Vec3{0, 1, 0}, Vec3{1, 1, 0}};
  GramMatrix degenerate = gram(flat);
  CHECK(degenerate.det() == 0);
  CHECK(counter.count3(degenerate) == brute_count3(degenerate));

  // random positive semidefinite targets, fixed seed
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 25; ++trial) {
    std::array<Vec3, 3> vs;
    for (auto& v : vs)
      v = Vec3{static_cast<std::int64_t>(rng() % 7) - 3, static_cast<std::int64_t>(rng() % 7) - 3,
               static_cast<std::int64_t>(rng() % 7) - 3};
    GramMatrix g = gram(vs);
    if (g.at(0, 0) == 0 || g.at(1, 1) == 0 || g.at(2, 2) == 0) continue;
    CHECK(counter.count3(g) == brute_count3(g));
  }
}

TEST_CASE("triple partition identity at small radii") {
  SphereTable table = SphereTable::build(16);
  TripleConsistency unit = sphere_triple_consistency(1, 1, 1, table);
  CHECK(unit.ok);
  CHECK(unit.rhs_product == 216);
  TripleConsistency mixed = sphere_triple_consistency(1, 2, 3, table);
  CHECK(mixed.ok);
  CHECK(mixed.rhs_product == 576);
  for (std::int64_t r1 = 1; r1 <= 4; ++r1)
    for (std::int64_t r2 = r1; r2 <= 4; ++r2)
      for (std::int64_t r3 = r2; r3 <= 4; ++r3) CHECK(sphere_triple_consistency(r1, r2, r3, table).ok);
}

TEST_CASE("gcd bound survey is exact per class") {
  GcdBoundSurvey survey = verify_gcd_bound(2);
  CHECK(survey.q == 2);
  ClassTable classes = enumerate_classes(2, false);
  REQUIRE(survey.rows.size() == classes.classes.size());

  SphereTable table = SphereTable::build(3 * 2 * 2);
  EmbeddingCounter counter(table);
  Rational max12 = 0;
  std::size_t checked = 0;
  for (const auto& row : survey.rows) {
    const auto& k = row.key.v;
    CHECK(row.gcd12 == std::gcd(k[0], k[3]));
    if (checked < 40) {
      GramMatrix g = GramMatrix::sym3(k[0], k[1], k[2], k[3], k[4], k[5]);
      CHECK(row.n_lambda == counter.count3(g));
      ++checked;
    }
    max12 = std::max(max12, Rational(row.n_lambda, row.gcd12));
  }
  CHECK(survey.max_ratio12 == max12);

  std::string csv = survey.to_csv();
  CHECK(csv.rfind("l11,l12,l13,l22,l23,l33,n_lambda,gcd12,gcd_no3,ratio\n", 0) == 0);
  CHECK(csv == verify_gcd_bound(2).to_csv());
}
