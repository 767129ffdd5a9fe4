#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "tetra/arith.hpp"
#include "tetra/enumerate.hpp"
#include "tetra/lattice.hpp"
#include "tetra/sphere.hpp"

namespace tetra {

// z in Z^3 with <x,z> = dot_xz, <y,z> = dot_yz, |z|^2 = norm_z, for linearly
// independent x, y. The two linear constraints are eliminated through an
// invertible 2x2 coordinate minor; the remaining one-parameter family meets
// the norm condition in the integer roots of one quadratic.
std::int64_t count_circle_points(Vec3 x, Vec3 y, std::int64_t norm_z, std::int64_t dot_xz,
                                 std::int64_t dot_yz);

// Caches sphere point lists per norm; all counts below are exact.
class EmbeddingCounter {
 public:
  explicit EmbeddingCounter(const SphereTable& table) : table_(table) {}

  // Ordered pairs (x, y) with |x|^2 = g11, <x,y> = g12, |y|^2 = g22.
  std::int64_t count2(const GramMatrix& g);

  // Ordered triples (x, y, z) realizing a 3x3 Gram matrix. Degenerate g are
  // legal input (x, y may be parallel; the z-count falls back to filtering
  // the norm sphere).
  std::int64_t count3(const GramMatrix& g);

  const std::vector<Vec3>& points(std::int64_t norm);

 private:
  const SphereTable& table_;
  std::unordered_map<std::int64_t, std::vector<Vec3>> cache_;
};

std::int64_t count_embeddings2(const GramMatrix& g, const SphereTable& table);
std::int64_t count_embeddings3(const GramMatrix& g, const SphereTable& table);

struct GcdBoundRow {
  ClassKey key;
  std::int64_t n_lambda = 0;
  std::int64_t gcd12 = 0;     // gcd(l11, l22)
  std::int64_t gcd_no3 = 0;   // gcd over entries with both indices != 3
};

struct GcdBoundSurvey {
  std::int64_t q = 0;
  std::vector<GcdBoundRow> rows;          // one per non-degenerate class
  Rational max_ratio12 = 0;               // max N / gcd(l11, l22)
  Rational max_ratio_no3 = 0;             // max N / gcd_no3
  ClassKey argmax12{}, argmax_no3{};
  // CSV "l11,l12,l13,l22,l23,l33,n_lambda,gcd12,gcd_no3,ratio" sorted by key;
  // ratio is the exact fraction n_lambda/gcd12.
  std::string to_csv() const;
};

// Enumerates non-degenerate classes at scale q and computes embedding counts
// and gcd ratios for each.
GcdBoundSurvey verify_gcd_bound(std::int64_t q, int threads = 1,
                                const EnumerateBudget& budget = {});

struct TripleConsistency {
  std::int64_t r1 = 0, r2 = 0, r3 = 0;
  BigInt lhs_sum = 0;          // sum over distinct Gram matrices of count3
  BigInt rhs_product = 0;      // M_{r1} * M_{r2} * M_{r3}
  std::uint64_t distinct_gram = 0;
  std::uint64_t degenerate_gram = 0;
  bool ok = false;
};

// Partition check: grouping all (x,y,z) on the three spheres by Gram matrix
// and recounting each group through count3 must reproduce M1*M2*M3.
TripleConsistency sphere_triple_consistency(std::int64_t r1, std::int64_t r2, std::int64_t r3,
                                            const SphereTable& table);

}  // namespace tetra
