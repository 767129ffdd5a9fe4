#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <vector>

#include "tetra/arith.hpp"
#include "tetra/lattice.hpp"

using namespace tetra;

namespace {

// Independent congruence data: the full sorted list of all 24 based edge Gram
// serializations. Two 4-point configurations are congruent exactly when these
// lists coincide; the canonical key must equal the least element.
std::vector<std::array<std::int64_t, 6>> gram_spectrum(const std::array<Vec3, 4>& pts) {
  std::vector<std::array<std::int64_t, 6>> out;
  int order[3];
  for (int base = 0; base < 4; ++base) {
    int rest[3], w = 0;
    for (int i = 0; i < 4; ++i)
      if (i != base) rest[w++] = i;
    int perm[3] = {0, 1, 2};
    std::sort(perm, perm + 3);
    do {
      for (int i = 0; i < 3; ++i) order[i] = rest[perm[i]];
      Vec3 e1 = pts[static_cast<std::size_t>(order[0])] - pts[static_cast<std::size_t>(base)];
      Vec3 e2 = pts[static_cast<std::size_t>(order[1])] - pts[static_cast<std::size_t>(base)];
      Vec3 e3 = pts[static_cast<std::size_t>(order[2])] - pts[static_cast<std::size_t>(base)];
      out.push_back({dot(e1, e1), dot(e1, e2), dot(e1, e3), dot(e2, e2), dot(e2, e3), dot(e3, e3)});
    } while (std::next_permutation(perm, perm + 3));
  }
  std::sort(out.begin(), out.end());
  return out;
}

Vec3 apply_signed_perm(Vec3 v, const int perm[3], const int sign[3]) {
  std::int64_t c[3] = {v.x, v.y, v.z};
  return Vec3{sign[0] * c[perm[0]], sign[1] * c[perm[1]], sign[2] * c[perm[2]]};
}

}  // namespace

TEST_CASE("prime and square primitives") {
  CHECK(is_prime(2));
  CHECK(is_prime(3));
  CHECK(is_prime(97));
  CHECK(is_prime(7919));
  CHECK_FALSE(is_prime(1));
  CHECK_FALSE(is_prime(0));
  CHECK_FALSE(is_prime(91));   // 7*13
  CHECK_FALSE(is_prime(561));  // Carmichael

  for (std::int64_t n = 0; n <= 3000; ++n) {
    std::int64_t r = isqrt(n);
    CHECK(r * r <= n);
    CHECK((r + 1) * (r + 1) > n);
  }

  i128 root = 0;
  CHECK(is_square(i128(144), &root));
  CHECK(root == 12);
  CHECK_FALSE(is_square(i128(145), &root));
  i128 big = i128(3486784401LL) * 3486784401LL;  // (3^20)^2
  CHECK(is_square(big, &root));
  CHECK(root == 3486784401LL);
  CHECK_FALSE(is_square(big + 1, &root));
  CHECK_FALSE(is_square(i128(-4), &root));
}

TEST_CASE("checked power and modular inverse") {
  CHECK(ipow_checked(2, 10) == 1024);
  CHECK(ipow_checked(10, 18) == i128(1000000000000000000LL));
  CHECK_THROWS_AS((void)ipow_checked(10, 40), std::overflow_error);

  std::mt19937_64 rng(7);
  for (std::int64_t m : {2LL, 3LL, 5LL, 97LL, 1009LL, 1LL << 31}) {
    for (int trial = 0; trial < 20; ++trial) {
      std::int64_t a = static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(m));
      if (std::gcd(a, m) != 1) continue;
      std::int64_t inv = mod_inverse(a, m);
      CHECK(inv >= 0);
      CHECK(inv < m);
      CHECK(static_cast<std::int64_t>((static_cast<i128>(a) * inv) % m) == 1);
    }
  }
}

TEST_CASE("string rendering") {
  CHECK(to_string_i128(0) == "0");
  CHECK(to_string_i128(-5) == "-5");
  CHECK(to_string_i128(i128(1) << 100) == "1267650600228229401496703205376");
  CHECK(rational_string(Rational(3, 2)) == "3/2");
  CHECK(rational_string(Rational(7)) == "7");
  CHECK(rational_string(Rational(-6, 4)) == "-3/2");
}

TEST_CASE("least squares fits") {
  std::vector<std::pair<double, double>> pts;
  for (double x : {1.0, 2.0, 3.0, 4.0}) pts.emplace_back(x, 2.5 * x - 1.0);
  LinearFit lf = fit_line(pts);
  CHECK(lf.slope == doctest::Approx(2.5).epsilon(1e-12));
  CHECK(lf.intercept == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(lf.points == 4);

  // exact power law recovers its exponent
  std::vector<std::pair<double, double>> pl;
  for (std::int64_t q : {2, 4, 8, 16, 32}) {
    double dq = static_cast<double>(q);
    pl.emplace_back(dq, std::pow(dq, 9.0));
  }
  LinearFit ll = fit_loglog(pl);
  CHECK(std::abs(ll.slope - 9.0) < 1e-9);
  CHECK(ll.max_abs_residual < 1e-9);
}

TEST_CASE("vector algebra") {
  Vec3 a{1, 2, 3}, b{-4, 5, 2};
  CHECK(dot(a, b) == -4 + 10 + 6);
  CHECK(norm2(a) == 14);
  CHECK(dot(a, cross(a, b)) == 0);
  CHECK(dot(b, cross(a, b)) == 0);
  CHECK(cross(a, b) + cross(b, a) == Vec3{0, 0, 0});
}

TEST_CASE("gram matrices and minors") {
  GramMatrix id3 = GramMatrix::identity(3);
  CHECK(id3.det() == 1);
  CHECK(id3.positive_definite());

  std::array<Vec3, 3> basis{Vec3{1, 0, 0}, Vec3{0, 1, 0}, Vec3{0, 0, 1}};
  CHECK(gram(basis) == id3);

  GramMatrix g = GramMatrix::sym2(2, 1, 2);
  CHECK(g.det() == 3);
  CHECK(g.positive_definite());
  int r0[] = {0}, c1[] = {1};
  CHECK(minor_det(g, r0, c1) == 1);
  int r01[] = {0, 1}, c01[] = {0, 1};
  CHECK(minor_det(g, r01, c01) == 3);
  CHECK(minor_det(g, std::span<const int>{}, std::span<const int>{}) == 1);

  int rows[] = {0, 1}, cols[] = {1, 2};
  CHECK(minor_det(id3, rows, cols) == 0);

  GramMatrix psd = GramMatrix::sym2(1, 1, 1);  // rank 1
  CHECK(psd.positive_semidefinite());
  CHECK_FALSE(psd.positive_definite());
  CHECK_FALSE(GramMatrix::sym2(1, 2, 1).positive_semidefinite());
  CHECK(is_nondegenerate(GramMatrix::sym3(1, 0, 0, 1, 0, 1)));
  CHECK_FALSE(is_nondegenerate(gram(std::array<Vec3, 3>{Vec3{1, 0, 0}, Vec3{0, 1, 0}, Vec3{1, 1, 0}})));
}

TEST_CASE("canonical key reproduces the least based gram") {
  std::array<Vec3, 4> pts{Vec3{0, 0, 0}, Vec3{1, 0, 0}, Vec3{0, 1, 0}, Vec3{1, 1, 1}};
  ClassKey key = canonical_key(pts);
  CHECK(key.v == std::array<std::int64_t, 6>{1, 0, 1, 1, 1, 3});
  CHECK(key.v == gram_spectrum(pts).front());

  std::mt19937_64 rng(20240816);
  for (int trial = 0; trial < 200; ++trial) {
    std::array<Vec3, 4> cfg;
    bool distinct = true;
    for (auto& v : cfg)
      v = Vec3{static_cast<std::int64_t>(rng() % 21) - 10, static_cast<std::int64_t>(rng() % 21) - 10,
               static_cast<std::int64_t>(rng() % 21) - 10};
    for (int i = 0; i < 4 && distinct; ++i)
      for (int j = i + 1; j < 4; ++j)
        if (cfg[static_cast<std::size_t>(i)] == cfg[static_cast<std::size_t>(j)]) distinct = false;
    if (!distinct) continue;
    CHECK(canonical_key(cfg).v == gram_spectrum(cfg).front());
  }
}

TEST_CASE("canonical key is an isometry and relabeling invariant") {
  std::mt19937_64 rng(99);
  const int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
  for (int trial = 0; trial < 300; ++trial) {
    std::array<Vec3, 4> cfg;
    bool distinct = true;
    for (auto& v : cfg)
      v = Vec3{static_cast<std::int64_t>(rng() % 13) - 6, static_cast<std::int64_t>(rng() % 13) - 6,
               static_cast<std::int64_t>(rng() % 13) - 6};
    for (int i = 0; i < 4 && distinct; ++i)
      for (int j = i + 1; j < 4; ++j)
        if (cfg[static_cast<std::size_t>(i)] == cfg[static_cast<std::size_t>(j)]) distinct = false;
    if (!distinct) continue;
    ClassKey key = canonical_key(cfg);

    const int* perm = perms[rng() % 6];
    int sign[3];
    for (int& s : sign) s = (rng() & 1) ? 1 : -1;
    Vec3 shift{static_cast<std::int64_t>(rng() % 9) - 4, static_cast<std::int64_t>(rng() % 9) - 4,
               static_cast<std::int64_t>(rng() % 9) - 4};

    std::array<Vec3, 4> moved;
    for (std::size_t i = 0; i < 4; ++i) moved[i] = apply_signed_perm(cfg[i], perm, sign) + shift;
    std::shuffle(moved.begin(), moved.end(), rng);
    CHECK(canonical_key(moved) == key);
  }
}

TEST_CASE("key equality separates congruence classes on the unit cube") {
  std::vector<Vec3> cube;
  for (std::int64_t x = 0; x <= 1; ++x)
    for (std::int64_t y = 0; y <= 1; ++y)
      for (std::int64_t z = 0; z <= 1; ++z) cube.push_back(Vec3{x, y, z});

  std::vector<std::array<Vec3, 4>> subsets;
  for (std::size_t i = 0; i < cube.size(); ++i)
    for (std::size_t j = i + 1; j < cube.size(); ++j)
      for (std::size_t k = j + 1; k < cube.size(); ++k)
        for (std::size_t l = k + 1; l < cube.size(); ++l)
          subsets.push_back({cube[i], cube[j], cube[k], cube[l]});
  REQUIRE(subsets.size() == 70);

  std::vector<ClassKey> keys;
  std::vector<std::vector<std::array<std::int64_t, 6>>> spectra;
  for (const auto& s : subsets) {
    keys.push_back(canonical_key(s));
    spectra.push_back(gram_spectrum(s));
  }
  for (std::size_t a = 0; a < subsets.size(); ++a)
    for (std::size_t b = a + 1; b < subsets.size(); ++b)
      CHECK((keys[a] == keys[b]) == (spectra[a] == spectra[b]));
}

TEST_CASE("extended naturals and valuations") {
  ExtendedNat two(2), five(5);
  CHECK(min(two, five) == two);
  CHECK(two + five == ExtendedNat(7));
  CHECK(two < ExtendedNat::infinity());
  CHECK(ExtendedNat::infinity() + two == ExtendedNat::infinity());
  CHECK_FALSE(ExtendedNat::infinity() < ExtendedNat::infinity());
  CHECK_THROWS_AS((void)ExtendedNat::infinity().value(), std::logic_error);

  CHECK(valuation(2, std::int64_t{12}) == ExtendedNat(2));
  CHECK(valuation(3, std::int64_t{5}) == ExtendedNat(0));
  CHECK(valuation(7, std::int64_t{0}) == ExtendedNat::infinity());
  CHECK(valuation(3, BigInt("205891132094649")) == ExtendedNat(30));  // 3^30
  CHECK(valuation(2, BigInt(-48)) == ExtendedNat(4));
}
