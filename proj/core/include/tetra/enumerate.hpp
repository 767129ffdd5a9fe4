#pragma once

#include <cstdint>
#include <unordered_map>
#include <utility>
#include <vector>

#include "tetra/arith.hpp"
#include "tetra/lattice.hpp"

namespace tetra {

struct ClassEntry {
  std::uint64_t multiplicity = 0;
  std::array<Vec3, 4> witness{};  // first configuration seen with this key
};

struct ClassTable {
  std::int64_t q = 0;
  bool include_degenerate = false;
  std::unordered_map<ClassKey, ClassEntry, ClassKeyHash> classes;

  BigInt total_multiplicity() const;
  // CSV "l11,l12,l13,l22,l23,l33,multiplicity", rows sorted by key.
  std::string to_csv() const;
};

struct EnumerateBudget {
  std::int64_t max_q_bruteforce = 6;
  std::int64_t max_q_sharded = 8;
};

// Reference path: plain nested loops over all 4-subsets of [0,q]^3, public
// canonical_key, ordered map semantics. Kept deliberately simple.
ClassTable enumerate_classes_bruteforce(std::int64_t q, bool include_degenerate = false,
                                        const EnumerateBudget& budget = {});

// Fast path: work partitioned by the least vertex (lexicographic point order)
// into `shards` disjoint shards, optionally run on `threads` workers, merged
// in shard order. Table contents are independent of shards and threads.
ClassTable enumerate_classes(std::int64_t q, bool include_degenerate = false, int shards = 1,
                             int threads = 1, const EnumerateBudget& budget = {});

struct ExponentReport {
  LinearFit fit;                    // log(count) against log(q)
  std::vector<double> ratios_q9;    // count / q^9 per input point
};

// Fits the growth exponent of exact class counts; needs >= 3 sweep points.
ExponentReport exponent_report(std::span<const std::pair<std::int64_t, BigInt>> counts);

}  // namespace tetra
