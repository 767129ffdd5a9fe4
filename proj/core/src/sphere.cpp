#include "tetra/sphere.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>
#include <sstream>
#include <thread>

#include "tetra/io.hpp"

namespace tetra {

SphereTable SphereTable::build(std::int64_t limit, int threads,
                               std::uint64_t memory_budget_bytes) {
  if (limit < 0) throw std::invalid_argument("SphereTable::build: negative limit");
  const std::uint64_t bytes = (static_cast<std::uint64_t>(limit) + 1) * sizeof(std::int64_t);
  if (bytes > memory_budget_bytes) {
    throw budget_error("SphereTable::build: table of " + std::to_string(bytes) +
                       " bytes exceeds budget");
  }
  SphereTable t;
  t.limit_ = limit;
  t.counts_.assign(static_cast<std::size_t>(limit) + 1, 0);
  const std::int64_t s = isqrt(limit);

  auto accumulate_range = [&](std::int64_t a_begin, std::int64_t a_end,
                              std::vector<std::int64_t>& out) {
    for (std::int64_t a = a_begin; a < a_end; ++a) {
      const std::int64_t wa = a == 0 ? 1 : 2;
      const std::int64_t a2 = a * a;
      for (std::int64_t b = 0; b * b <= limit - a2; ++b) {
        const std::int64_t wab = wa * (b == 0 ? 1 : 2);
        const std::int64_t ab2 = a2 + b * b;
        for (std::int64_t c = 0; c * c <= limit - ab2; ++c) {
          out[static_cast<std::size_t>(ab2 + c * c)] += wab * (c == 0 ? 1 : 2);
        }
      }
    }
  };

  threads = std::max(1, threads);
  if (threads == 1 || s < 64) {
    accumulate_range(0, s + 1, t.counts_);
  } else {
    std::vector<std::vector<std::int64_t>> parts(
        static_cast<std::size_t>(threads),
        std::vector<std::int64_t>(static_cast<std::size_t>(limit) + 1, 0));
    std::vector<std::thread> workers;
    const std::int64_t chunk = (s + threads) / threads;
    for (int w = 0; w < threads; ++w) {
      const std::int64_t lo = std::min<std::int64_t>(s + 1, w * chunk);
      const std::int64_t hi = std::min<std::int64_t>(s + 1, lo + chunk);
      workers.emplace_back(accumulate_range, lo, hi, std::ref(parts[static_cast<std::size_t>(w)]));
    }
    for (auto& th : workers) th.join();
    // Addition of per-worker tables in fixed order: the merged values do not
    // depend on the worker count.
    for (const auto& part : parts) {
      for (std::size_t i = 0; i < t.counts_.size(); ++i) t.counts_[i] += part[i];
    }
  }
  return t;
}

SphereTable SphereTable::load_or_build(std::int64_t limit,
                                       const std::optional<std::filesystem::path>& cache_dir,
                                       int threads) {
  if (!cache_dir) return build(limit, threads);
  const auto path = *cache_dir / ("r3_" + std::to_string(limit) + ".csv");
  if (std::filesystem::exists(path)) {
    if (auto t = from_csv(read_file(path)); t && t->limit() == limit) return std::move(*t);
  }
  SphereTable t = build(limit, threads);
  atomic_write_file(path, t.to_csv());
  return t;
}

std::int64_t SphereTable::count(std::int64_t n) const {
  if (n < 0 || n > limit_) throw std::out_of_range("SphereTable::count: n outside table");
  return counts_[static_cast<std::size_t>(n)];
}

std::string SphereTable::to_csv() const {
  std::ostringstream out;
  out << "n,m_r\n";
  for (std::int64_t n = 0; n <= limit_; ++n) {
    out << n << "," << counts_[static_cast<std::size_t>(n)] << "\n";
  }
  return out.str();
}

std::optional<SphereTable> SphereTable::from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "n,m_r") return std::nullopt;
  SphereTable t;
  std::int64_t expect = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) return std::nullopt;
    std::int64_t n = 0, m = 0;
    auto r1 = std::from_chars(line.data(), line.data() + comma, n);
    auto r2 = std::from_chars(line.data() + comma + 1, line.data() + line.size(), m);
    if (r1.ec != std::errc{} || r2.ec != std::errc{} || n != expect) return std::nullopt;
    t.counts_.push_back(m);
    ++expect;
  }
  if (t.counts_.empty()) return std::nullopt;
  t.limit_ = expect - 1;
  return t;
}

std::vector<Vec3> sphere_points(std::int64_t n) {
  if (n < 0) throw std::invalid_argument("sphere_points: negative norm");
  std::vector<Vec3> pts;
  if (n == 0) {
    pts.push_back({0, 0, 0});
    return pts;
  }
  const std::int64_t s = isqrt(n);
  for (std::int64_t a = -s; a <= s; ++a) {
    const std::int64_t ra = n - a * a;
    const std::int64_t sb = isqrt(ra);
    for (std::int64_t b = -sb; b <= sb; ++b) {
      const std::int64_t rc = ra - b * b;
      const std::int64_t c = isqrt(rc);
      if (c * c != rc) continue;
      pts.push_back({a, b, c});
      if (c != 0) pts.push_back({a, b, -c});
    }
  }
  return pts;
}

RadiusSet popular_radii(std::int64_t q, const SphereTable& table,
                        std::int64_t threshold_num, std::int64_t threshold_den) {
  if (q <= 0) throw std::invalid_argument("popular_radii: q must be positive");
  if (threshold_num < 0 || threshold_den <= 0) {
    throw std::invalid_argument("popular_radii: threshold must be a nonnegative rational");
  }
  if (table.limit() < q * q) throw std::invalid_argument("popular_radii: table smaller than q^2");
  RadiusSet set;
  set.q = q;
  set.threshold_num = threshold_num;
  set.threshold_den = threshold_den;
  for (std::int64_t r = 1; r <= q * q; ++r) {
    if (i128{threshold_den} * table.count(r) >= i128{threshold_num} * q) set.members.push_back(r);
  }
  return set;
}

GcdDistribution gcd_pair_distribution(const RadiusSet& radii) {
  GcdDistribution dist;
  if (radii.members.empty()) return dist;
  const std::int64_t mx = radii.members.back();
  // multiples[d] = |{r in A : d divides r}|
  std::vector<std::int64_t> multiples(static_cast<std::size_t>(mx) + 1, 0);
  for (std::int64_t r : radii.members) {
    if (r <= 0) throw std::invalid_argument("gcd_pair_distribution: radii must be positive");
    for (std::int64_t d = 1; d * d <= r; ++d) {
      if (r % d) continue;
      ++multiples[static_cast<std::size_t>(d)];
      if (d != r / d) ++multiples[static_cast<std::size_t>(r / d)];
    }
  }
  // exact[d] = multiples[d]^2 - sum over proper multiples e of exact[e]
  std::vector<std::int64_t> exact(static_cast<std::size_t>(mx) + 1, 0);
  for (std::int64_t d = mx; d >= 1; --d) {
    if (multiples[static_cast<std::size_t>(d)] == 0) continue;
    std::int64_t v = multiples[static_cast<std::size_t>(d)] * multiples[static_cast<std::size_t>(d)];
    for (std::int64_t e = 2 * d; e <= mx; e += d) v -= exact[static_cast<std::size_t>(e)];
    exact[static_cast<std::size_t>(d)] = v;
    if (v != 0) dist[d] = v;
  }
  return dist;
}

GcdDistribution gcd_pair_distribution_naive(const RadiusSet& radii) {
  GcdDistribution dist;
  for (std::int64_t a : radii.members) {
    for (std::int64_t b : radii.members) ++dist[std::gcd(a, b)];
  }
  return dist;
}

Rational inverse_gcd_sum(const RadiusSet& radii, const GcdDistribution& dist) {
  Rational sum = 0;
  for (const auto& [d, count] : dist) sum += Rational(count, d);
  return Rational(static_cast<std::int64_t>(radii.members.size())) * sum;
}

GcdBoundCheck gcd_tuple_bound_check(std::int64_t q, const RadiusSet& radii,
                                    const GcdDistribution& dist) {
  if (q <= 0) throw std::invalid_argument("gcd_tuple_bound_check: q must be positive");
  GcdBoundCheck result;
  const BigInt q6 = BigInt(q) * q * q * q * q * q;
  const BigInt setsize = static_cast<std::int64_t>(radii.members.size());
  BigInt total_pairs = 0;
  for (const auto& [d, count] : dist) total_pairs += count;
  BigInt running = 0;
  BigInt le10 = 0;
  bool median_found = false;
  for (const auto& [d, count] : dist) {
    if (setsize * count * d * d > q6) {
      result.ok = false;
      if (result.violating_d == 0) result.violating_d = d;
    }
    running += count;
    if (!median_found && 2 * running >= total_pairs) {
      result.median_gcd = d;
      median_found = true;
    }
    if (d <= 10) le10 += count;
  }
  if (total_pairs > 0) result.fraction_le_10 = Rational(le10) / Rational(total_pairs);
  return result;
}

std::map<std::int64_t, BigInt> weighted_gcd_distribution(const RadiusSet& radii,
                                                         const SphereTable& table) {
  std::map<std::int64_t, BigInt> dist;
  if (radii.members.empty()) return dist;
  const std::int64_t mx = radii.members.back();
  std::vector<BigInt> wmult(static_cast<std::size_t>(mx) + 1, BigInt(0));
  for (std::int64_t r : radii.members) {
    const std::int64_t w = table.count(r);
    for (std::int64_t d = 1; d * d <= r; ++d) {
      if (r % d) continue;
      wmult[static_cast<std::size_t>(d)] += w;
      if (d != r / d) wmult[static_cast<std::size_t>(r / d)] += w;
    }
  }
  std::vector<BigInt> exact(static_cast<std::size_t>(mx) + 1, BigInt(0));
  for (std::int64_t d = mx; d >= 1; --d) {
    BigInt v = wmult[static_cast<std::size_t>(d)] * wmult[static_cast<std::size_t>(d)];
    for (std::int64_t e = 2 * d; e <= mx; e += d) v -= exact[static_cast<std::size_t>(e)];
    exact[static_cast<std::size_t>(d)] = v;
    if (v != 0) dist[d] = v;
  }
  return dist;
}

}  // namespace tetra
