#include "tetra/enumerate.hpp"

#include <algorithm>
#include <atomic>
#include <map>
#include <sstream>
#include <thread>

namespace tetra {

BigInt ClassTable::total_multiplicity() const {
  BigInt total = 0;
  for (const auto& [key, entry] : classes) total += entry.multiplicity;
  return total;
}

std::string ClassTable::to_csv() const {
  std::vector<std::pair<ClassKey, std::uint64_t>> rows;
  rows.reserve(classes.size());
  for (const auto& [key, entry] : classes) rows.emplace_back(key, entry.multiplicity);
  std::sort(rows.begin(), rows.end());
  std::ostringstream out;
  out << "l11,l12,l13,l22,l23,l33,multiplicity\n";
  for (const auto& [key, mult] : rows) {
    for (std::int64_t v : key.v) out << v << ",";
    out << mult << "\n";
  }
  return out.str();
}

namespace {

std::vector<Vec3> cube_points(std::int64_t q) {
  std::vector<Vec3> pts;
  pts.reserve(static_cast<std::size_t>((q + 1) * (q + 1) * (q + 1)));
  for (std::int64_t x = 0; x <= q; ++x)
    for (std::int64_t y = 0; y <= q; ++y)
      for (std::int64_t z = 0; z <= q; ++z) pts.push_back({x, y, z});
  return pts;
}

// Degeneracy test via the parallelepiped volume of the edges at points[0];
// zero iff the four points are coplanar.
bool nondegenerate4(const std::array<Vec3, 4>& p) {
  const Vec3 a = p[1] - p[0], b = p[2] - p[0], c = p[3] - p[0];
  return dot(a, cross(b, c)) != 0;
}

// Inner kernel of the fast path: canonical key without the public API's
// validation, coordinates already known to be small.
ClassKey key_of4(const Vec3* pts) {
  ClassKey best;
  bool have = false;
  for (int base = 0; base < 4; ++base) {
    Vec3 edge[3];
    int idx = 0;
    for (int o = 0; o < 4; ++o) {
      if (o != base) edge[idx++] = pts[o] - pts[base];
    }
    const std::int64_t n0 = norm2(edge[0]), n1 = norm2(edge[1]), n2 = norm2(edge[2]);
    const std::int64_t d01 = dot(edge[0], edge[1]);
    const std::int64_t d02 = dot(edge[0], edge[2]);
    const std::int64_t d12 = dot(edge[1], edge[2]);
    const ClassKey cands[6] = {
        {{n0, d01, d02, n1, d12, n2}}, {{n0, d02, d01, n2, d12, n1}},
        {{n1, d01, d12, n0, d02, n2}}, {{n1, d12, d01, n2, d02, n0}},
        {{n2, d02, d12, n0, d01, n1}}, {{n2, d12, d02, n1, d01, n0}},
    };
    for (const ClassKey& cand : cands) {
      if (!have || cand < best) {
        best = cand;
        have = true;
      }
    }
  }
  return best;
}

using ShardMap = std::unordered_map<ClassKey, ClassEntry, ClassKeyHash>;

void enumerate_shard(const std::vector<Vec3>& pts, bool include_degenerate, int shards,
                     int shard, ShardMap& out) {
  const std::size_t n = pts.size();
  std::array<Vec3, 4> quad;
  for (std::size_t i = static_cast<std::size_t>(shard); i < n; i += static_cast<std::size_t>(shards)) {
    quad[0] = pts[i];
    for (std::size_t j = i + 1; j < n; ++j) {
      quad[1] = pts[j];
      for (std::size_t k = j + 1; k < n; ++k) {
        quad[2] = pts[k];
        for (std::size_t l = k + 1; l < n; ++l) {
          quad[3] = pts[l];
          if (!include_degenerate && !nondegenerate4(quad)) continue;
          auto [it, inserted] = out.try_emplace(key_of4(quad.data()));
          if (inserted) it->second.witness = quad;
          ++it->second.multiplicity;
        }
      }
    }
  }
}

}  // namespace

ClassTable enumerate_classes_bruteforce(std::int64_t q, bool include_degenerate,
                                        const EnumerateBudget& budget) {
  if (q < 0) throw std::invalid_argument("enumerate_classes_bruteforce: negative q");
  if (q > budget.max_q_bruteforce) {
    throw budget_error("enumerate_classes_bruteforce: q=" + std::to_string(q) +
                       " exceeds budget q<=" + std::to_string(budget.max_q_bruteforce));
  }
  ClassTable table;
  table.q = q;
  table.include_degenerate = include_degenerate;
  std::map<ClassKey, ClassEntry> ordered;

  std::vector<Vec3> pts = cube_points(q);
  const std::size_t n = pts.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      for (std::size_t k = j + 1; k < n; ++k)
        for (std::size_t l = k + 1; l < n; ++l) {
          const std::array<Vec3, 4> quad{pts[i], pts[j], pts[k], pts[l]};
          if (!include_degenerate) {
            const auto g = gram(std::array<Vec3, 3>{quad[1] - quad[0], quad[2] - quad[0],
                                                    quad[3] - quad[0]});
            if (!is_nondegenerate(g)) continue;
          }
          auto [it, inserted] = ordered.try_emplace(canonical_key(quad));
          if (inserted) it->second.witness = quad;
          ++it->second.multiplicity;
        }
  for (auto& [key, entry] : ordered) table.classes.emplace(key, entry);
  return table;
}

ClassTable enumerate_classes(std::int64_t q, bool include_degenerate, int shards, int threads,
                             const EnumerateBudget& budget) {
  if (q < 0) throw std::invalid_argument("enumerate_classes: negative q");
  if (shards < 1) throw std::invalid_argument("enumerate_classes: shards must be >= 1");
  if (q > budget.max_q_sharded) {
    throw budget_error("enumerate_classes: q=" + std::to_string(q) +
                       " exceeds budget q<=" + std::to_string(budget.max_q_sharded));
  }
  ClassTable table;
  table.q = q;
  table.include_degenerate = include_degenerate;
  if (q == 0) return table;  // fewer than 4 points, no subsets

  const std::vector<Vec3> pts = cube_points(q);
  std::vector<ShardMap> parts(static_cast<std::size_t>(shards));

  threads = std::max(1, threads);
  if (threads == 1) {
    for (int s = 0; s < shards; ++s) {
      enumerate_shard(pts, include_degenerate, shards, s, parts[static_cast<std::size_t>(s)]);
    }
  } else {
    std::vector<std::thread> workers;
    std::atomic<int> next{0};
    for (int w = 0; w < std::min(threads, shards); ++w) {
      workers.emplace_back([&] {
        for (int s = next.fetch_add(1); s < shards; s = next.fetch_add(1)) {
          enumerate_shard(pts, include_degenerate, shards, s, parts[static_cast<std::size_t>(s)]);
        }
      });
    }
    for (auto& th : workers) th.join();
  }

  // Merge in shard order; multiplicities add, the first shard owning a key
  // keeps its witness.
  for (auto& part : parts) {
    for (auto& [key, entry] : part) {
      auto [it, inserted] = table.classes.try_emplace(key, entry);
      if (!inserted) it->second.multiplicity += entry.multiplicity;
    }
  }
  return table;
}

ExponentReport exponent_report(std::span<const std::pair<std::int64_t, BigInt>> counts) {
  if (counts.size() < 3) throw std::invalid_argument("exponent_report: need >= 3 sweep points");
  std::vector<std::pair<double, double>> pts;
  ExponentReport report;
  pts.reserve(counts.size());
  for (const auto& [q, count] : counts) {
    if (q <= 0 || count <= 0) throw std::invalid_argument("exponent_report: nonpositive point");
    const double dq = static_cast<double>(q);
    const double dc = count.convert_to<double>();
    pts.emplace_back(dq, dc);
    double q9 = 1;
    for (int i = 0; i < 9; ++i) q9 *= dq;
    report.ratios_q9.push_back(dc / q9);
  }
  report.fit = fit_loglog(pts);
  return report;
}

}  // namespace tetra
