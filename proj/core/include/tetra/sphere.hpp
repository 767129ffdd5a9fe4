#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <vector>

#include "tetra/arith.hpp"
#include "tetra/lattice.hpp"

namespace tetra {

// counts[n] = number of (a,b,c) in Z^3 with a^2+b^2+c^2 = n, for 0 <= n <= limit.
class SphereTable {
 public:
  // Triple loop over |a|,|b|,|c| <= sqrt(N). memory_budget bounds the table
  // itself (8 bytes per entry); throws budget_error beyond it.
  static SphereTable build(std::int64_t limit, int threads = 1,
                           std::uint64_t memory_budget_bytes = std::uint64_t{1} << 31);

  // Reads "<cache_dir>/r3_<limit>.csv" if present and well-formed, else builds
  // and writes it atomically. No cache_dir means plain build.
  static SphereTable load_or_build(std::int64_t limit,
                                   const std::optional<std::filesystem::path>& cache_dir,
                                   int threads = 1);

  std::int64_t limit() const { return limit_; }
  std::int64_t count(std::int64_t n) const;

  // CSV with header "n,m_r", one row per n in [0, limit].
  std::string to_csv() const;
  static std::optional<SphereTable> from_csv(const std::string& text);

 private:
  SphereTable() = default;
  std::int64_t limit_ = -1;
  std::vector<std::int64_t> counts_;
};

// All lattice points of squared norm exactly n (n >= 0).
std::vector<Vec3> sphere_points(std::int64_t n);

// Popular radii: r in [1, q^2] with den*M_r >= num*q (exact integer compare;
// default threshold q/2). r = 0 stays excluded.
struct RadiusSet {
  std::int64_t q = 0;
  std::int64_t threshold_num = 1;
  std::int64_t threshold_den = 2;
  std::vector<std::int64_t> members;  // ascending
};

RadiusSet popular_radii(std::int64_t q, const SphereTable& table,
                        std::int64_t threshold_num = 1, std::int64_t threshold_den = 2);

// dist[d] = number of ordered pairs (r1, r2) in A^2 with gcd(r1, r2) = d.
using GcdDistribution = std::map<std::int64_t, std::int64_t>;

// Inversion over multiples: count pairs with d | gcd via multiples of d in A,
// then peel multiples from the bottom of the divisor lattice.
GcdDistribution gcd_pair_distribution(const RadiusSet& radii);

// Quadratic-time reference: literal gcd of every ordered pair.
GcdDistribution gcd_pair_distribution_naive(const RadiusSet& radii);

// |A| * sum over d of dist[d]/d, exact.
Rational inverse_gcd_sum(const RadiusSet& radii, const GcdDistribution& dist);

struct GcdBoundCheck {
  bool ok = true;
  std::int64_t violating_d = 0;    // first d with |A|*dist[d]*d^2 > q^6, if any
  std::int64_t median_gcd = 0;     // lower median over ordered pairs
  Rational fraction_le_10 = 0;     // fraction of ordered pairs with gcd <= 10
};

// Checks |A|*dist[d] <= q^6/d^2 for every d (exact integer comparison).
GcdBoundCheck gcd_tuple_bound_check(std::int64_t q, const RadiusSet& radii,
                                    const GcdDistribution& dist);

// W[d] = sum of M_{r1}*M_{r2} over ordered pairs in A^2 with gcd = d; same
// inversion as the unweighted distribution with multiplicity weights M_r.
std::map<std::int64_t, BigInt> weighted_gcd_distribution(const RadiusSet& radii,
                                                         const SphereTable& table);

}  // namespace tetra
