#include <doctest.h>

#include <array>
#include <map>
#include <random>
#include <vector>

#include "tetra/arith.hpp"
#include "tetra/density.hpp"
#include "tetra/embeddings.hpp"
#include "tetra/lattice.hpp"

using namespace tetra;

namespace {

std::int64_t pk_of(std::int64_t p, int k) {
  std::int64_t v = 1;
  for (int i = 0; i < k; ++i) v *= p;
  return v;
}

std::int64_t brute_bq(std::int64_t a, std::int64_t b, std::int64_t c, std::int64_t d,
                      std::int64_t e, std::int64_t f, std::int64_t p, int k) {
  std::int64_t m = pk_of(p, k), total = 0;
  for (std::int64_t s = 0; s < m; ++s) {
    for (std::int64_t t = 0; t < m; ++t) {
      i128 val = static_cast<i128>(a) * s * s + static_cast<i128>(b) * s * t +
                 static_cast<i128>(c) * t * t + static_cast<i128>(d) * s +
                 static_cast<i128>(e) * t + f;
      if (((val % m) + m) % m == 0) ++total;
    }
  }
  return total;
}

std::int64_t brute_sphere3(std::int64_t w, std::int64_t p, int k) {
  std::int64_t m = pk_of(p, k), total = 0;
  for (std::int64_t x = 0; x < m; ++x)
    for (std::int64_t y = 0; y < m; ++y)
      for (std::int64_t z = 0; z < m; ++z)
        if (((x * x + y * y + z * z - w) % m + m) % m == 0) ++total;
  return total;
}

std::int64_t brute_line_sphere(Vec3 x, std::int64_t b, std::int64_t c, std::int64_t p, int k) {
  std::int64_t m = pk_of(p, k), total = 0;
  for (std::int64_t u = 0; u < m; ++u)
    for (std::int64_t v = 0; v < m; ++v)
      for (std::int64_t w = 0; w < m; ++w) {
        std::int64_t dp = ((x.x * u + x.y * v + x.z * w - b) % m + m) % m;
        std::int64_t nq = ((u * u + v * v + w * w - c) % m + m) % m;
        if (dp == 0 && nq == 0) ++total;
      }
  return total;
}

// One scan over all 3x2 matrices mod p^k, grouped by the value of L^T gamma L.
// Serves as the oracle for every counting route at once.
using GramTuple = std::array<std::int64_t, 3>;  // (g11, g12, g22) reduced mod p^k

std::map<GramTuple, std::int64_t> brute_matrix_histogram(const GramMatrix& gamma, std::int64_t p,
                                                         int k) {
  std::int64_t m = pk_of(p, k);
  std::map<GramTuple, std::int64_t> hist;
  std::array<std::int64_t, 6> L{};  // columns (L[0],L[1],L[2]) and (L[3],L[4],L[5])
  while (true) {
    std::int64_t g11 = 0, g12 = 0, g22 = 0;
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        std::int64_t gij = gamma.at(i, j);
        g11 += gij * L[static_cast<std::size_t>(i)] % m * L[static_cast<std::size_t>(j)] % m;
        g12 += gij * L[static_cast<std::size_t>(i)] % m * L[static_cast<std::size_t>(j + 3)] % m;
        g22 += gij * L[static_cast<std::size_t>(i + 3)] % m * L[static_cast<std::size_t>(j + 3)] % m;
      }
    }
    auto red = [m](std::int64_t v) { return ((v % m) + m) % m; };
    ++hist[{red(g11), red(g12), red(g22)}];
    int pos = 0;
    while (pos < 6) {
      if (++L[static_cast<std::size_t>(pos)] < m) break;
      L[static_cast<std::size_t>(pos)] = 0;
      ++pos;
    }
    if (pos == 6) break;
  }
  return hist;
}

GramTuple reduce_target(const GramMatrix& lambda, std::int64_t p, int k) {
  std::int64_t m = pk_of(p, k);
  auto red = [m](std::int64_t v) { return ((v % m) + m) % m; };
  return {red(lambda.at(0, 0)), red(lambda.at(0, 1)), red(lambda.at(1, 1))};
}

}  // namespace

TEST_CASE("binary quadratic congruence counts match a double loop") {
  CHECK(detail::count_binary_quadratic(0, 0, 0, 0, 0, 0, 3, 2) == 81);
  CHECK(detail::count_binary_quadratic(0, 0, 0, 0, 0, 1, 3, 2) == 0);
  CHECK(detail::count_binary_quadratic(0, 0, 0, 0, 0, 3, 3, 1) == 9);

  std::mt19937_64 rng(123);
  struct Combo {
    std::int64_t p;
    int k;
  };
  for (Combo combo : {Combo{2, 1}, Combo{2, 2}, Combo{2, 3}, Combo{2, 4}, Combo{3, 1},
                      Combo{3, 2}, Combo{3, 3}, Combo{5, 1}, Combo{5, 2}}) {
    std::int64_t m = pk_of(combo.p, combo.k);
    for (int trial = 0; trial < 20; ++trial) {
      std::int64_t a = static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(m));
      std::int64_t b = static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(m));
      std::int64_t c = static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(m));
      std::int64_t d = static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(m));
      std::int64_t e = static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(m));
      std::int64_t f = static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(m));
      // bias toward singular shapes: sometimes scale leading terms by p
      if (trial % 3 == 0) {
        a = a / combo.p * combo.p;
        b = b / combo.p * combo.p;
        c = c / combo.p * combo.p;
      }
      if (trial % 5 == 0) d = 0, e = 0;
      CAPTURE(combo.p);
      CAPTURE(combo.k);
      CHECK(detail::count_binary_quadratic(a, b, c, d, e, f, combo.p, combo.k) ==
            brute_bq(a, b, c, d, e, f, combo.p, combo.k));
    }
    // perfect square shapes hit the singular-root recursion
    for (std::int64_t s0 = 0; s0 < std::min<std::int64_t>(m, 6); ++s0) {
      std::int64_t d = ((-2 * s0) % m + m) % m;
      std::int64_t f = (s0 * s0) % m;
      CHECK(detail::count_binary_quadratic(1, 0, 0, d, 0, f, combo.p, combo.k) ==
            brute_bq(1, 0, 0, d, 0, f, combo.p, combo.k));
    }
  }
}

TEST_CASE("binary quadratic counter honors its work budget") {
  CHECK_THROWS_AS((void)detail::count_binary_quadratic(1, 1, 1, 1, 1, 1, 3, 9, 3), budget_error);
}

TEST_CASE("sphere congruence counts match a triple loop") {
  struct Combo {
    std::int64_t p;
    int k;
  };
  for (Combo combo : {Combo{2, 1}, Combo{2, 2}, Combo{2, 3}, Combo{2, 4}, Combo{3, 1},
                      Combo{3, 2}, Combo{3, 3}, Combo{5, 1}, Combo{5, 2}, Combo{7, 1}}) {
    std::int64_t m = pk_of(combo.p, combo.k);
    for (std::int64_t w = 0; w < m; ++w) {
      CAPTURE(combo.p);
      CAPTURE(combo.k);
      CAPTURE(w);
      CHECK(detail::count_sphere3_mod(w, combo.p, combo.k) == brute_sphere3(w, combo.p, combo.k));
    }
  }
}

TEST_CASE("line and sphere intersection counts match a triple loop") {
  std::vector<Vec3> xs{{1, 0, 0}, {1, 1, 0}, {1, 2, 3}, {2, 2, 2}, {0, 0, 0}, {2, 4, 6}, {3, 3, 3}};
  struct Combo {
    std::int64_t p;
    int k;
  };
  for (Combo combo : {Combo{2, 1}, Combo{2, 2}, Combo{2, 3}, Combo{3, 1}, Combo{3, 2}}) {
    std::int64_t m = pk_of(combo.p, combo.k);
    for (Vec3 x : xs) {
      for (std::int64_t b = 0; b < m; ++b) {
        for (std::int64_t c = 0; c < m; ++c) {
          CAPTURE(combo.p);
          CAPTURE(combo.k);
          CAPTURE(b);
          CAPTURE(c);
          CHECK(detail::count_line_sphere(x, b, c, combo.p, combo.k) ==
                brute_line_sphere(x, b, c, combo.p, combo.k));
        }
      }
    }
  }
}

TEST_CASE("matrix solution counts match the histogram oracle") {
  std::vector<GramMatrix> targets{GramMatrix::identity(2), GramMatrix::diag2(1, 2),
                                  GramMatrix::sym2(2, 1, 2), GramMatrix::diag2(2, 2),
                                  GramMatrix::sym2(1, 1, 1), GramMatrix::sym2(0, 0, 0)};
  GramMatrix id3 = GramMatrix::identity(3);

  struct Combo {
    std::int64_t p;
    int k;
  };
  for (Combo combo : {Combo{2, 1}, Combo{2, 2}, Combo{2, 3}, Combo{3, 1}, Combo{3, 2}}) {
    auto hist = brute_matrix_histogram(id3, combo.p, combo.k);
    BigInt total = 0;
    for (const auto& [tuple, cnt] : hist) total += cnt;
    BigInt expect_total = 1;
    for (int i = 0; i < 6 * combo.k; ++i) expect_total *= combo.p;
    CHECK(total == expect_total);

    for (const auto& lam : targets) {
      auto it = hist.find(reduce_target(lam, combo.p, combo.k));
      BigInt expect = it == hist.end() ? 0 : it->second;
      CAPTURE(combo.p);
      CAPTURE(combo.k);
      CHECK(count_solutions_mod(id3, lam, combo.p, combo.k, CountMode::Direct) == expect);
      CHECK(count_solutions_mod(id3, lam, combo.p, combo.k, CountMode::Lifted) == expect);
      CHECK(count_solutions_mod(id3, lam, combo.p, combo.k, CountMode::Fast) == expect);
      CHECK(count_solutions_mod(id3, lam, combo.p, combo.k, CountMode::Auto) == expect);
    }
  }

  // non-identity quadratic form: direct and lifted still agree with the scan
  GramMatrix gamma = GramMatrix::sym3(1, 0, 0, 1, 0, 2);
  for (Combo combo : {Combo{2, 2}, Combo{3, 1}}) {
    auto hist = brute_matrix_histogram(gamma, combo.p, combo.k);
    for (const auto& lam : targets) {
      auto it = hist.find(reduce_target(lam, combo.p, combo.k));
      BigInt expect = it == hist.end() ? 0 : it->second;
      CHECK(count_solutions_mod(gamma, lam, combo.p, combo.k, CountMode::Direct) == expect);
      CHECK(count_solutions_mod(gamma, lam, combo.p, combo.k, CountMode::Lifted) == expect);
    }
  }
}

TEST_CASE("lifted and fast routes agree past the direct range") {
  GramMatrix id3 = GramMatrix::identity(3);
  std::vector<GramMatrix> targets{GramMatrix::diag2(2, 2), GramMatrix::diag2(2, 6),
                                  GramMatrix::sym2(2, 1, 2)};
  for (const auto& lam : targets) {
    for (int k : {4, 5}) {
      CHECK(count_solutions_mod(id3, lam, 2, k, CountMode::Lifted) ==
            count_solutions_mod(id3, lam, 2, k, CountMode::Fast));
    }
    CHECK(count_solutions_mod(id3, lam, 3, 3, CountMode::Lifted) ==
          count_solutions_mod(id3, lam, 3, 3, CountMode::Fast));
  }
}

TEST_CASE("solution counting validates its inputs") {
  GramMatrix id3 = GramMatrix::identity(3);
  GramMatrix id2 = GramMatrix::identity(2);
  CHECK_THROWS_AS((void)count_solutions_mod(id2, id2, 2, 1), std::invalid_argument);
  CHECK_THROWS_AS((void)count_solutions_mod(id3, id3, 2, 1), std::invalid_argument);
  CHECK_THROWS_AS((void)count_solutions_mod(id3, id2, 4, 1), std::invalid_argument);
  CHECK_THROWS_AS((void)count_solutions_mod(id3, id2, 2, -1), std::invalid_argument);
  CHECK_THROWS_AS(
      (void)count_solutions_mod(GramMatrix::sym3(1, 1, 0, 2, 0, 1), id2, 2, 2, CountMode::Fast),
      std::invalid_argument);
  CHECK(count_solutions_mod(id3, id2, 2, 0) == 1);
}

TEST_CASE("local density stabilizes per the valuation rule") {
  GramMatrix id3 = GramMatrix::identity(3);

  DensityEstimate easy = local_density(id3, GramMatrix::identity(2), 3, 6);
  CHECK(easy.stabilized);
  CHECK(easy.p == 3);
  BigInt n1 = count_solutions_mod(id3, GramMatrix::identity(2), 3, 1);
  CHECK(easy.value == Rational(n1, BigInt(27)));

  GramMatrix lam = GramMatrix::diag2(2, 2);
  DensityEstimate est = local_density(id3, lam, 2, 12);
  CHECK(est.stabilized);
  CHECK(est.k >= 7);  // 2*o_2(2*det) + 1 with det = 4
  BigInt at_k = count_solutions_mod(id3, lam, 2, est.k);
  BigInt at_prev = count_solutions_mod(id3, lam, 2, est.k - 1);
  BigInt mk = 1, mp = 1;
  for (int i = 0; i < 3 * est.k; ++i) mk *= 2;
  for (int i = 0; i < 3 * (est.k - 1); ++i) mp *= 2;
  CHECK(est.value == Rational(at_k, mk));
  CHECK(est.value == Rational(at_prev, mp));
}

TEST_CASE("local density degrades to a partial answer under a tiny budget") {
  DensityBudget tiny;
  tiny.fast_max_ops = 50;
  tiny.direct_max_ops = 1;
  tiny.lifted_max_solutions = 1;
  DensityEstimate est = local_density(GramMatrix::identity(3), GramMatrix::diag2(2, 2), 2, 10, tiny);
  CHECK_FALSE(est.stabilized);
}

TEST_CASE("scaling exponents on frozen cases") {
  GramMatrix lam = GramMatrix::diag2(3, 3);
  std::vector<std::int64_t> l01{0, 1}, l20{2, 0}, l00{0, 0};
  CHECK(beta_exponents(lam, 3, l01) == std::vector<std::int64_t>{1});
  CHECK(beta_exponents(lam, 3, l20) == std::vector<std::int64_t>{-1});
  CHECK(beta_exponents(lam, 3, l00) == std::vector<std::int64_t>{0});
  CHECK(beta_exponents(GramMatrix::identity(2), 5, l00) == std::vector<std::int64_t>{0});
}

TEST_CASE("closed form bound for dividing primes") {
  CHECK(density_bound_div(GramMatrix::diag2(3, 3), 3) == Rational(28, 3));
  CHECK(density_bound_div(GramMatrix::diag2(2, 2), 2) == Rational(15, 2));
  CHECK(density_bound_div(GramMatrix::diag2(5, 5), 5) == Rational(66, 5));
  CHECK(density_bound_div_nonneg(GramMatrix::diag2(3, 3), 3) == Rational(9));
  CHECK(density_bound_div_nonneg(GramMatrix::diag2(2, 2), 2) == Rational(7));

  CHECK_THROWS_AS((void)density_bound_div(GramMatrix::identity(2), 3), std::invalid_argument);
  CHECK_THROWS_AS((void)density_bound_div(GramMatrix::sym2(1, 1, 1), 3), std::invalid_argument);
}

TEST_CASE("non-dividing scan covers exactly the coprime pairs") {
  std::vector<GramMatrix> corpus{GramMatrix::identity(2), GramMatrix::diag2(1, 2),
                                 GramMatrix::sym2(2, 1, 2)};
  NondivCheck check = density_bound_nondiv_check(corpus, 7);
  // dets 1, 2, 3: eligible primes {3,5,7}, {3,5,7}, {5,7}
  CHECK(check.pairs == 8);
  REQUIRE(check.rows.size() == 8);
  Rational max_scaled = check.rows.front().scaled;
  for (const auto& row : check.rows) {
    BigInt n1 = count_solutions_mod(GramMatrix::identity(3), row.lambda, row.p, 1);
    CHECK(row.nu == Rational(n1, BigInt(row.p) * row.p * row.p));
    CHECK(row.scaled == (row.nu - 1) * row.p * row.p);
    max_scaled = std::max(max_scaled, row.scaled);
  }
  CHECK(check.max_scaled == max_scaled);
}

TEST_CASE("density product report") {
  SiegelReport unit = siegel_product_bound(GramMatrix::identity(2));
  CHECK(unit.product == 1);
  CHECK(unit.factors.empty());
  CHECK_FALSE(unit.partial);
  CHECK(unit.n_prime == 24);
  CHECK(unit.gcd12 == 1);

  SiegelReport rep = siegel_product_bound(GramMatrix::diag2(1, 4));
  CHECK_FALSE(rep.partial);
  REQUIRE(rep.factors.size() == 1);
  CHECK(rep.factors.front().p == 2);
  CHECK(rep.product == rep.factors.front().value);
  CHECK(rep.gcd12 == 1);
  CHECK(rep.n_prime == 24);  // x = ±e_i, y = ±2e_j with j != i
}

TEST_CASE("random corpus is deterministic and definite") {
  auto a = random_gram_corpus(2, 10, 555, 6);
  auto b = random_gram_corpus(2, 20, 555, 6);
  REQUIRE(a.size() == 10);
  REQUIRE(b.size() == 20);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
  for (const auto& g : b) {
    CHECK(g.dim() == 2);
    CHECK(g.positive_definite());
  }
  auto c = random_gram_corpus(3, 5, 9, 4);
  for (const auto& g : c) {
    CHECK(g.dim() == 3);
    CHECK(g.positive_definite());
  }
}
