#include "tetra/embeddings.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace tetra {

namespace {

// Placement of the eliminated coordinate pair: D is the 2x2 minor of (x, y)
// on coordinates (i, j); l is the free coordinate.
struct Pivot {
  int i, j, l;
  std::int64_t d;
};

Pivot find_pivot(Vec3 x, Vec3 y) {
  const std::int64_t xs[3] = {x.x, x.y, x.z};
  const std::int64_t ys[3] = {y.x, y.y, y.z};
  static constexpr int pairs[3][3] = {{0, 1, 2}, {0, 2, 1}, {1, 2, 0}};
  for (const auto& p : pairs) {
    const std::int64_t d = xs[p[0]] * ys[p[1]] - xs[p[1]] * ys[p[0]];
    if (d != 0) return {p[0], p[1], p[2], d};
  }
  throw std::invalid_argument("count_circle_points: x and y must be linearly independent");
}

}  // namespace

std::int64_t count_circle_points(Vec3 x, Vec3 y, std::int64_t norm_z, std::int64_t dot_xz,
                                 std::int64_t dot_yz) {
  if (norm_z < 0) return 0;
  const Pivot pv = find_pivot(x, y);
  const std::int64_t xs[3] = {x.x, x.y, x.z};
  const std::int64_t ys[3] = {y.x, y.y, y.z};
  const std::int64_t xi = xs[pv.i], xj = xs[pv.j], xl = xs[pv.l];
  const std::int64_t yi = ys[pv.i], yj = ys[pv.j], yl = ys[pv.l];
  const i128 d = pv.d;

  // Solving the two linear constraints for (z_i, z_j) with z_l = t free:
  //   z_i = (a1 + b1*t)/d,  z_j = (a2 + b2*t)/d.
  const i128 a1 = i128{dot_xz} * yj - i128{xj} * dot_yz;
  const i128 b1 = i128{xj} * yl - i128{xl} * yj;
  const i128 a2 = i128{xi} * dot_yz - i128{yi} * dot_xz;
  const i128 b2 = i128{yi} * xl - i128{xi} * yl;

  // |z|^2 = norm_z becomes (a1+b1 t)^2 + (a2+b2 t)^2 + (d t)^2 = norm_z d^2.
  const i128 qa = b1 * b1 + b2 * b2 + d * d;
  const i128 qb = 2 * (a1 * b1 + a2 * b2);
  const i128 qc = a1 * a1 + a2 * a2 - i128{norm_z} * d * d;

  auto big = [](i128 v) { return BigInt(to_string_i128(v)); };
  const BigInt disc = big(qb) * big(qb) - 4 * big(qa) * big(qc);
  if (disc < 0) return 0;
  const BigInt root = sqrt(disc);
  if (root * root != disc) return 0;

  std::int64_t count = 0;
  for (int sign : {1, -1}) {
    if (sign < 0 && root == 0) break;
    const BigInt numer = -big(qb) + sign * root;
    const BigInt denom = 2 * big(qa);
    if (numer % denom != 0) continue;
    const BigInt tb = numer / denom;
    const i128 t = static_cast<std::int64_t>(tb);  // |t| <= sqrt(norm_z)
    if ((a1 + b1 * t) % d != 0) continue;
    if ((a2 + b2 * t) % d != 0) continue;
    ++count;
  }
  return count;
}

const std::vector<Vec3>& EmbeddingCounter::points(std::int64_t norm) {
  if (norm < 0) throw std::invalid_argument("EmbeddingCounter: negative norm");
  if (norm > table_.limit()) {
    throw std::invalid_argument("EmbeddingCounter: norm " + std::to_string(norm) +
                                " exceeds table limit " + std::to_string(table_.limit()));
  }
  auto it = cache_.find(norm);
  if (it == cache_.end()) it = cache_.emplace(norm, sphere_points(norm)).first;
  return it->second;
}

std::int64_t EmbeddingCounter::count2(const GramMatrix& g) {
  if (g.dim() != 2) throw std::invalid_argument("count2: expects a 2x2 Gram matrix");
  if (!g.positive_semidefinite()) throw std::invalid_argument("count2: not positive semidefinite");
  const std::int64_t g11 = g.at(0, 0), g12 = g.at(0, 1), g22 = g.at(1, 1);
  const auto& xs = points(g11);
  const auto& ys = points(g22);
  std::int64_t count = 0;
  for (Vec3 x : xs) {
    for (Vec3 y : ys) {
      if (dot(x, y) == g12) ++count;
    }
  }
  return count;
}

std::int64_t EmbeddingCounter::count3(const GramMatrix& g) {
  if (g.dim() != 3) throw std::invalid_argument("count3: expects a 3x3 Gram matrix");
  if (!g.positive_semidefinite()) throw std::invalid_argument("count3: not positive semidefinite");
  const std::int64_t g11 = g.at(0, 0), g12 = g.at(0, 1), g13 = g.at(0, 2);
  const std::int64_t g22 = g.at(1, 1), g23 = g.at(1, 2), g33 = g.at(2, 2);
  const auto& xs = points(g11);
  const auto& ys = points(g22);
  std::int64_t count = 0;
  for (Vec3 x : xs) {
    for (Vec3 y : ys) {
      if (dot(x, y) != g12) continue;
      if (cross(x, y) != Vec3{0, 0, 0}) {
        count += count_circle_points(x, y, g33, g13, g23);
      } else {
        // Parallel pair: the two linear conditions no longer pin a line, so
        // filter the norm sphere directly.
        for (Vec3 z : points(g33)) {
          if (dot(x, z) == g13 && dot(y, z) == g23) ++count;
        }
      }
    }
  }
  return count;
}

std::int64_t count_embeddings2(const GramMatrix& g, const SphereTable& table) {
  EmbeddingCounter counter(table);
  return counter.count2(g);
}

std::int64_t count_embeddings3(const GramMatrix& g, const SphereTable& table) {
  EmbeddingCounter counter(table);
  return counter.count3(g);
}

std::string GcdBoundSurvey::to_csv() const {
  std::vector<GcdBoundRow> sorted = rows;
  std::sort(sorted.begin(), sorted.end(),
            [](const GcdBoundRow& a, const GcdBoundRow& b) { return a.key < b.key; });
  std::ostringstream out;
  out << "l11,l12,l13,l22,l23,l33,n_lambda,gcd12,gcd_no3,ratio\n";
  for (const auto& row : sorted) {
    for (std::int64_t v : row.key.v) out << v << ",";
    out << row.n_lambda << "," << row.gcd12 << "," << row.gcd_no3 << ","
        << rational_string(Rational(row.n_lambda, row.gcd12)) << "\n";
  }
  return out.str();
}

GcdBoundSurvey verify_gcd_bound(std::int64_t q, int threads, const EnumerateBudget& budget) {
  if (q <= 0) throw std::invalid_argument("verify_gcd_bound: q must be positive");
  GcdBoundSurvey survey;
  survey.q = q;
  const ClassTable table =
      enumerate_classes(q, /*include_degenerate=*/false, /*shards=*/std::max(1, threads), threads,
                        budget);
  const SphereTable spheres = SphereTable::build(3 * q * q);
  EmbeddingCounter counter(spheres);
  survey.rows.reserve(table.classes.size());
  for (const auto& [key, entry] : table.classes) {
    GcdBoundRow row;
    row.key = key;
    const GramMatrix lambda =
        GramMatrix::sym3(key.v[0], key.v[1], key.v[2], key.v[3], key.v[4], key.v[5]);
    row.n_lambda = counter.count3(lambda);
    row.gcd12 = std::gcd(key.v[0], key.v[3]);
    row.gcd_no3 = std::gcd(row.gcd12, std::abs(key.v[1]));
    survey.rows.push_back(row);
    const Rational r12(row.n_lambda, row.gcd12);
    if (r12 > survey.max_ratio12) {
      survey.max_ratio12 = r12;
      survey.argmax12 = key;
    }
    const Rational rno3(row.n_lambda, row.gcd_no3);
    if (rno3 > survey.max_ratio_no3) {
      survey.max_ratio_no3 = rno3;
      survey.argmax_no3 = key;
    }
  }
  return survey;
}

TripleConsistency sphere_triple_consistency(std::int64_t r1, std::int64_t r2, std::int64_t r3,
                                            const SphereTable& table) {
  TripleConsistency result;
  result.r1 = r1;
  result.r2 = r2;
  result.r3 = r3;
  EmbeddingCounter counter(table);
  const auto& xs = counter.points(r1);
  const auto& ys = counter.points(r2);
  const auto& zs = counter.points(r3);
  result.rhs_product = BigInt(table.count(r1)) * table.count(r2) * table.count(r3);

  struct TripleDots {
    std::int64_t d12, d13, d23;
    bool operator==(const TripleDots&) const = default;
  };
  struct DotsHash {
    std::size_t operator()(const TripleDots& t) const noexcept {
      std::size_t h = std::hash<std::int64_t>{}(t.d12);
      h = h * 1099511628211ull ^ std::hash<std::int64_t>{}(t.d13);
      h = h * 1099511628211ull ^ std::hash<std::int64_t>{}(t.d23);
      return h;
    }
  };
  std::unordered_map<TripleDots, std::uint64_t, DotsHash> groups;
  for (Vec3 x : xs) {
    for (Vec3 y : ys) {
      const std::int64_t d12 = dot(x, y);
      for (Vec3 z : zs) {
        ++groups[TripleDots{d12, dot(x, z), dot(y, z)}];
      }
    }
  }
  result.distinct_gram = groups.size();
  for (const auto& [dots, direct_count] : groups) {
    const GramMatrix g = GramMatrix::sym3(r1, dots.d12, dots.d13, r2, dots.d23, r3);
    if (g.det() == 0) ++result.degenerate_gram;
    result.lhs_sum += counter.count3(g);
    (void)direct_count;
  }
  result.ok = result.lhs_sum == result.rhs_product;
  return result;
}

}  // namespace tetra
