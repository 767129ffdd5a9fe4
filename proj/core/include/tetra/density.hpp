#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tetra/arith.hpp"
#include "tetra/lattice.hpp"

namespace tetra {

// Counting solutions L in M_{3x2}(Z/p^k) of L^T gamma L = Lambda (mod p^k).
// Three interchangeable routes:
//  - Direct: full scan of all p^{6k} matrices (the oracle; budget-capped).
//  - Lifted: level-by-level Hensel lifting with explicit solution storage;
//    the lift candidates of a solution are enumerated by solving the linear
//    lift system mod p (same set as scanning all p^6 offsets, without the
//    scan). Works for any symmetric gamma.
//  - Fast: gamma = I only. Solutions are grouped by the first column's orbit
//    (norm class and content for odd p, signed-permutation folding for p=2)
//    and each group is counted through an exact binary-quadratic congruence
//    counter. Reaches the exponents the stabilization rule needs where the
//    stored-solution routes would exhaust memory.
enum class CountMode { Auto, Direct, Lifted, Fast };

struct DensityBudget {
  // Direct scans allowed while p^{6k} stays at or below this.
  std::uint64_t direct_max_ops = std::uint64_t{1} << 24;
  // Lifted mode keeps at most this many explicit solutions per level.
  std::uint64_t lifted_max_solutions = std::uint64_t{1} << 22;
  // Fast mode refuses k beyond this for p = 2 (memory of the digit tree).
  int fast_max_level_p2 = 13;
  // Work cap for the recursive congruence counters.
  std::uint64_t fast_max_ops = std::uint64_t{1} << 28;
};

BigInt count_solutions_mod(const GramMatrix& gamma, const GramMatrix& lambda, std::int64_t p,
                           int k, CountMode mode = CountMode::Auto,
                           const DensityBudget& budget = {});

struct DensityEstimate {
  std::int64_t p = 0;
  int k = 0;               // level the value was taken at
  Rational value = 0;      // count / p^{3k}
  bool stabilized = false;
};

// Normalized solution counts over k = 1..k_max; accepts once two consecutive
// levels agree exactly and k >= 2*o_p(2*det(lambda)) + 1. A budget overrun
// returns the last computed level with stabilized = false.
DensityEstimate local_density(const GramMatrix& gamma, const GramMatrix& lambda, std::int64_t p,
                              int k_max, const DensityBudget& budget = {});

// Exponents beta_2..beta_n for a scaling tuple l (one entry per column):
//   beta_i = min over j in [0, i-1] of
//            ((i-1-j)*l_i + min_{|A|=j} o_p(minor rows {1..j}, cols A) - l_1 - ... - l_j)
// The j = 0 term is (i-1)*l_i; selections whose minors are all zero (infinite
// valuation) drop out of the minimum. Values may be negative.
std::vector<std::int64_t> beta_exponents(const GramMatrix& lambda, std::int64_t p,
                                         std::span<const std::int64_t> l);

// Sum of p^(beta_2+...+beta_n) over all tuples l >= 0 with sum <= o_p(det),
// exact rational. Requires p | det(lambda), det nonzero.
Rational density_bound_div(const GramMatrix& lambda, std::int64_t p);

// Same sum with tuples containing any negative beta_i dropped (sensitivity
// companion, reported alongside the full bound).
Rational density_bound_div_nonneg(const GramMatrix& lambda, std::int64_t p);

struct NondivRow {
  GramMatrix lambda = GramMatrix::identity(2);
  std::int64_t p = 0;
  Rational nu = 0;
  Rational scaled = 0;  // (nu - 1) * p^2
};

struct NondivCheck {
  Rational max_scaled = 0;
  std::size_t pairs = 0;
  std::vector<NondivRow> rows;
};

// Evaluates (nu_p - 1)*p^2 over every (lambda, prime p <= max_p) pair with
// p not dividing 2*det(lambda).
NondivCheck density_bound_nondiv_check(std::span<const GramMatrix> corpus, std::int64_t max_p,
                                       const DensityBudget& budget = {});

struct SiegelReport {
  Rational product = 1;  // prod over p | det of nu_p
  bool partial = false;  // some factor failed to stabilize within budget
  std::vector<DensityEstimate> factors;
  std::int64_t n_prime = 0;  // embedding count of lambda into Z^3
  std::int64_t gcd12 = 0;
};

// Finite product of local densities over primes dividing det(lambda), with
// the embedding count and gcd(l11, l22) reported for comparison.
SiegelReport siegel_product_bound(const GramMatrix& lambda, const DensityBudget& budget = {});

// Deterministic corpus of positive-semidefinite Gram matrices built from
// seeded random integer vectors (positive definite unless degenerate pairs
// are kept).
std::vector<GramMatrix> random_gram_corpus(int dim, std::size_t count, std::uint64_t seed,
                                           std::int64_t coord_bound,
                                           bool require_definite = true);

namespace detail {

// #{(s,t) in (Z/p^k)^2 : a s^2 + b s t + c t^2 + d s + e t + f = 0 (mod p^k)}
BigInt count_binary_quadratic(std::int64_t a, std::int64_t b, std::int64_t c, std::int64_t d,
                              std::int64_t e, std::int64_t f, std::int64_t p, int k,
                              std::uint64_t max_ops = std::uint64_t{1} << 28);

// #{x in (Z/p^k)^3 : |x|^2 = w (mod p^k)}
BigInt count_sphere3_mod(std::int64_t w, std::int64_t p, int k);

// #{y in (Z/p^k)^3 : <x,y> = b, |y|^2 = c (mod p^k)}
BigInt count_line_sphere(Vec3 x, std::int64_t b, std::int64_t c, std::int64_t p, int k,
                         std::uint64_t max_ops = std::uint64_t{1} << 28);

}  // namespace detail

}  // namespace tetra
