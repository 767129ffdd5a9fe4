#include "tetra/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "tetra/density.hpp"
#include "tetra/embeddings.hpp"
#include "tetra/enumerate.hpp"
#include "tetra/sphere.hpp"

namespace tetra {

std::string LowerBoundReport::to_csv() const {
  std::ostringstream os;
  os << "q,a_count,s_num,s_den,proxy_num,proxy_den\n";
  for (const auto& row : rows) {
    os << row.q << ',' << row.a_count << ',' << numerator(row.s_value).str() << ','
       << denominator(row.s_value).str() << ',' << numerator(row.proxy).str() << ','
       << denominator(row.proxy).str() << '\n';
  }
  return os.str();
}

LowerBoundReport lower_bound_report(std::span<const int64> qs,
                                    const std::optional<std::filesystem::path>& cache_dir,
                                    int threads, int64 threshold_num, int64 threshold_den) {
  if (qs.empty()) throw std::invalid_argument("at least one q required");
  for (int64 q : qs)
    if (q < 1) throw std::invalid_argument("q must be positive");
  if (threshold_den < 1 || threshold_num < 0) throw std::invalid_argument("bad threshold");

  int64 qmax = *std::max_element(qs.begin(), qs.end());
  SphereTable table = SphereTable::load_or_build(qmax * qmax, cache_dir, threads);

  LowerBoundReport rep;
  rep.threshold_num = threshold_num;
  rep.threshold_den = threshold_den;
  for (int64 q : qs) {
    RadiusSet radii = popular_radii(q, table, threshold_num, threshold_den);
    GcdDistribution dist = gcd_pair_distribution(radii);
    Rational s = inverse_gcd_sum(radii, dist);

    std::map<int64, BigInt> weighted = weighted_gcd_distribution(radii, table);
    BigInt msum = 0;
    for (int64 r : radii.members) msum += table.count(r);
    Rational wsum = 0;
    for (const auto& [d, w] : weighted) wsum += Rational(w, BigInt(d));
    Rational proxy = Rational(msum) * wsum;

    rep.rows.push_back(
        LowerBoundRow{q, radii.members.size(), std::move(s), std::move(proxy)});
  }

  std::vector<std::pair<double, double>> pa, ps, pp;
  for (const auto& row : rep.rows) {
    if (row.a_count == 0 || row.s_value == 0 || row.proxy == 0) continue;
    double dq = static_cast<double>(row.q);
    pa.emplace_back(dq, static_cast<double>(row.a_count));
    ps.emplace_back(dq, row.s_value.convert_to<double>());
    pp.emplace_back(dq, row.proxy.convert_to<double>());
  }
  if (pa.size() >= 3) {
    rep.fit_a = fit_loglog(pa);
    rep.fit_s = fit_loglog(ps);
    rep.fit_proxy = fit_loglog(pp);
    rep.has_fits = true;
  }
  return rep;
}

namespace {

BigInt choose4(BigInt n) { return n * (n - 1) * (n - 2) * (n - 3) / 24; }

ClassKey default_key(const std::array<Vec3, 4>& pts) { return canonical_key(pts); }

struct SuiteRunner {
  std::vector<SuiteResult> results;

  template <typename F>
  void run(const std::string& name, F&& body) {
    SuiteResult res;
    res.name = name;
    try {
      std::string detail = body();  // empty string means pass
      res.passed = detail.empty();
      res.detail = detail;
    } catch (const std::exception& ex) {
      res.passed = false;
      res.detail = std::string("exception: ") + ex.what();
    }
    results.push_back(std::move(res));
  }
};

std::string check_enumeration_oracle(int q_small) {
  for (int64 q = 1; q <= q_small; ++q) {
    ClassTable ref = enumerate_classes_bruteforce(q, false);
    for (int shards : {1, 3}) {
      ClassTable fast = enumerate_classes(q, false, shards);
      if (fast.classes.size() != ref.classes.size())
        return "q=" + std::to_string(q) + " shards=" + std::to_string(shards) +
               ": class counts differ";
      for (const auto& [key, entry] : ref.classes) {
        auto it = fast.classes.find(key);
        if (it == fast.classes.end() || it->second.multiplicity != entry.multiplicity)
          return "q=" + std::to_string(q) + " shards=" + std::to_string(shards) +
                 ": multiplicity mismatch";
      }
    }
  }
  return {};
}

std::string check_subset_totals(int q_small) {
  for (int64 q = 1; q <= q_small; ++q) {
    ClassTable all = enumerate_classes(q, true);
    BigInt expect = choose4(BigInt((q + 1) * (q + 1) * (q + 1)));
    if (all.total_multiplicity() != expect)
      return "q=" + std::to_string(q) + ": total multiplicity differs from subset count";
  }
  return {};
}

std::string check_separation(const KeyFn& key_fn) {
  std::vector<Vec3> pts;
  for (int64 x = 0; x <= 2; ++x)
    for (int64 y = 0; y <= 2; ++y)
      for (int64 z = 0; z <= 2; ++z) pts.push_back(Vec3{x, y, z});

  struct Geometry {
    std::array<int64, 6> dists;
    int64 absdet;
  };
  auto geometry_of = [](const std::array<Vec3, 4>& s) {
    Geometry g{};
    int idx = 0;
    for (int a = 0; a < 4; ++a)
      for (int b = a + 1; b < 4; ++b) g.dists[static_cast<std::size_t>(idx++)] = norm2(s[static_cast<std::size_t>(a)] - s[static_cast<std::size_t>(b)]);
    std::sort(g.dists.begin(), g.dists.end());
    Vec3 e1 = s[1] - s[0], e2 = s[2] - s[0], e3 = s[3] - s[0];
    g.absdet = std::abs(dot(e1, cross(e2, e3)));
    return g;
  };

  // a few fixed isometries: signed coordinate permutations plus a translation
  auto apply = [](const Vec3& v, int which) {
    switch (which) {
      case 0: return Vec3{v.y, v.z, v.x};
      case 1: return Vec3{-v.x, v.z, v.y};
      case 2: return Vec3{v.z, -v.y, v.x};
      case 3: return Vec3{-v.y, -v.x, -v.z};
      default: return Vec3{v.x + 5, v.y - 7, v.z + 11};
    }
  };

  std::map<ClassKey, Geometry> seen;
  int subset_index = 0;
  int n = static_cast<int>(pts.size());
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int k = j + 1; k < n; ++k)
        for (int l = k + 1; l < n; ++l) {
          std::array<Vec3, 4> s{pts[static_cast<std::size_t>(i)], pts[static_cast<std::size_t>(j)],
                                pts[static_cast<std::size_t>(k)], pts[static_cast<std::size_t>(l)]};
          ClassKey key = key_fn(s);
          Geometry geo = geometry_of(s);
          auto [it, inserted] = seen.emplace(key, geo);
          if (!inserted) {
            if (it->second.dists != geo.dists || it->second.absdet != geo.absdet)
              return "one key covers two incongruent configurations (subset #" +
                     std::to_string(subset_index) + ")";
          }
          if (subset_index % 97 == 0) {
            std::array<Vec3, 4> rev{s[3], s[2], s[1], s[0]};
            if (key_fn(rev) != key)
              return "key depends on the point order (subset #" + std::to_string(subset_index) +
                     ")";
            for (int which = 0; which < 5; ++which) {
              std::array<Vec3, 4> t{apply(s[0], which), apply(s[1], which), apply(s[2], which),
                                    apply(s[3], which)};
              if (key_fn(t) != key)
                return "key not invariant under isometry #" + std::to_string(which) +
                       " (subset #" + std::to_string(subset_index) + ")";
            }
          }
          ++subset_index;
        }
  return {};
}

std::string check_sphere_table() {
  const int64 limit = 600;
  SphereTable table = SphereTable::build(limit);
  if (table.count(0) != 1 || table.count(1) != 6 || table.count(2) != 12 ||
      table.count(3) != 8 || table.count(4) != 6)
    return "small sphere counts are off";

  BigInt ball = 0;
  for (int64 nn = 0; nn <= limit; ++nn) ball += table.count(nn);
  BigInt brute = 0;
  int64 c = isqrt(limit);
  for (int64 a = -c; a <= c; ++a)
    for (int64 b = -c; b <= c; ++b)
      for (int64 d = -c; d <= c; ++d)
        if (a * a + b * b + d * d <= limit) ++brute;
  if (ball != brute) return "ball sum differs from direct point count";

  for (int64 nn = 1; nn <= limit; ++nn) {
    int64 m = nn;
    while (m % 4 == 0) m /= 4;
    bool blocked = m % 8 == 7;
    if (blocked != (table.count(nn) == 0))
      return "three-square vanishing pattern broken at n=" + std::to_string(nn);
  }
  return {};
}

std::string check_mobius_gcd() {
  SphereTable table = SphereTable::build(16 * 16);
  for (int64 q : {4, 8, 16}) {
    RadiusSet radii = popular_radii(q, table);
    GcdDistribution fast = gcd_pair_distribution(radii);
    GcdDistribution naive = gcd_pair_distribution_naive(radii);
    if (fast != naive) return "q=" + std::to_string(q) + ": sieved gcd distribution differs";
    std::uint64_t total = 0;
    for (const auto& [d, cnt] : fast) total += static_cast<std::uint64_t>(cnt);
    if (total != radii.members.size() * radii.members.size())
      return "q=" + std::to_string(q) + ": pair counts do not sum to |A|^2";
  }
  return {};
}

std::string check_partition_identity() {
  SphereTable table = SphereTable::build(75);
  for (int64 r1 = 1; r1 <= 5; ++r1)
    for (int64 r2 = r1; r2 <= 5; ++r2)
      for (int64 r3 = r2; r3 <= 5; ++r3) {
        TripleConsistency rep = sphere_triple_consistency(r1, r2, r3, table);
        if (!rep.ok)
          return "triple (" + std::to_string(r1) + "," + std::to_string(r2) + "," +
                 std::to_string(r3) + "): embedding sum misses the product";
      }
  return {};
}

std::string check_density_routes() {
  GramMatrix id3 = GramMatrix::identity(3);
  std::vector<GramMatrix> lams{GramMatrix::identity(2), GramMatrix::diag2(1, 2),
                               GramMatrix::sym2(2, 1, 2), GramMatrix::diag2(2, 2)};
  for (int64 p : {2, 3}) {
    for (int k = 1; k <= 2; ++k) {
      for (const auto& lam : lams) {
        BigInt direct = count_solutions_mod(id3, lam, p, k, CountMode::Direct);
        BigInt lifted = count_solutions_mod(id3, lam, p, k, CountMode::Lifted);
        BigInt fast = count_solutions_mod(id3, lam, p, k, CountMode::Fast);
        if (direct != lifted || direct != fast)
          return "p=" + std::to_string(p) + " k=" + std::to_string(k) +
                 ": counting routes disagree";
      }
    }
  }
  return {};
}

std::string check_witness_keys(int q_small) {
  int64 q = std::min<int64>(q_small, 2);
  ClassTable t = enumerate_classes(q, false);
  for (const auto& [key, entry] : t.classes) {
    if (canonical_key(entry.witness) != key) return "stored witness does not reproduce its key";
  }
  return {};
}

}  // namespace

std::vector<SuiteResult> verify_all(int q_small, const KeyFn& key_fn_in) {
  if (q_small < 1 || q_small > 3)
    throw std::invalid_argument("verification scale must be between 1 and 3");
  KeyFn key_fn = key_fn_in ? key_fn_in : KeyFn(default_key);

  SuiteRunner runner;
  runner.run("enumeration-oracle", [&] { return check_enumeration_oracle(q_small); });
  runner.run("subset-totals", [&] { return check_subset_totals(q_small); });
  runner.run("separation", [&] { return check_separation(key_fn); });
  runner.run("sphere-table", [&] { return check_sphere_table(); });
  runner.run("mobius-gcd", [&] { return check_mobius_gcd(); });
  runner.run("partition-identity", [&] { return check_partition_identity(); });
  runner.run("density-routes", [&] { return check_density_routes(); });
  runner.run("witness-keys", [&] { return check_witness_keys(q_small); });
  return runner.results;
}

bool all_passed(const std::vector<SuiteResult>& results) {
  for (const auto& r : results)
    if (!r.passed) return false;
  return !results.empty();
}

}  // namespace tetra
