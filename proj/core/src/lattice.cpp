#include "tetra/lattice.hpp"

#include <algorithm>
#include <ostream>

namespace tetra {

std::ostream& operator<<(std::ostream& os, Vec3 v) {
  return os << "(" << v.x << "," << v.y << "," << v.z << ")";
}

GramMatrix::GramMatrix(int dim, std::span<const std::int64_t> upper) : dim_(dim) {
  if (dim != 2 && dim != 3) throw std::invalid_argument("GramMatrix: dim must be 2 or 3");
  const std::size_t need = dim == 2 ? 3 : 6;
  if (upper.size() != need) throw std::invalid_argument("GramMatrix: wrong upper-triangle size");
  std::size_t idx = 0;
  for (int i = 0; i < dim; ++i) {
    for (int j = i; j < dim; ++j) {
      e_[static_cast<std::size_t>(i * 3 + j)] = upper[idx];
      e_[static_cast<std::size_t>(j * 3 + i)] = upper[idx];
      ++idx;
    }
  }
}

GramMatrix GramMatrix::diag2(std::int64_t a, std::int64_t b) { return sym2(a, 0, b); }

GramMatrix GramMatrix::sym2(std::int64_t a11, std::int64_t a12, std::int64_t a22) {
  const std::int64_t u[3] = {a11, a12, a22};
  return GramMatrix(2, u);
}

GramMatrix GramMatrix::sym3(std::int64_t a11, std::int64_t a12, std::int64_t a13,
                            std::int64_t a22, std::int64_t a23, std::int64_t a33) {
  const std::int64_t u[6] = {a11, a12, a13, a22, a23, a33};
  return GramMatrix(3, u);
}

GramMatrix GramMatrix::identity(int dim) {
  if (dim == 2) return diag2(1, 1);
  return sym3(1, 0, 0, 1, 0, 1);
}

std::int64_t GramMatrix::at(int i, int j) const {
  if (i < 0 || j < 0 || i >= dim_ || j >= dim_) throw std::out_of_range("GramMatrix::at");
  return e_[static_cast<std::size_t>(i * 3 + j)];
}

namespace {

// Entries bounded by 3*kCoordBound^2 keep every cofactor-expansion partial
// sum within i128 (6*M^3 < 2^127 for M <= 2^41).
constexpr std::int64_t kDetI128EntryBound = std::int64_t{1} << 41;

i128 det3_i128(const GramMatrix& g) {
  i128 a = g.at(0, 0), b = g.at(0, 1), c = g.at(0, 2);
  i128 d = g.at(1, 1), e = g.at(1, 2), f = g.at(2, 2);
  return a * (d * f - e * e) - b * (b * f - e * c) + c * (b * e - d * c);
}

BigInt det_big(const GramMatrix& g) {
  if (g.dim() == 2) {
    BigInt a = g.at(0, 0), b = g.at(0, 1), d = g.at(1, 1);
    return a * d - b * b;
  }
  BigInt a = g.at(0, 0), b = g.at(0, 1), c = g.at(0, 2);
  BigInt d = g.at(1, 1), e = g.at(1, 2), f = g.at(2, 2);
  return a * (d * f - e * e) - b * (b * f - e * c) + c * (b * e - d * c);
}

}  // namespace

BigInt GramMatrix::det() const {
  if (dim_ == 2) {
    i128 a = at(0, 0), b = at(0, 1), d = at(1, 1);
    return BigInt(to_string_i128(a * d - b * b));
  }
  std::int64_t mx = 0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) mx = std::max(mx, std::abs(at(i, j)));
  if (mx < kDetI128EntryBound) return BigInt(to_string_i128(det3_i128(*this)));
  return det_big(*this);
}

bool GramMatrix::positive_semidefinite() const {
  for (int i = 0; i < dim_; ++i) {
    if (at(i, i) < 0) return false;
  }
  if (dim_ == 2) return det() >= 0;
  for (int i = 0; i < 3; ++i) {
    for (int j = i + 1; j < 3; ++j) {
      i128 m = i128{at(i, i)} * at(j, j) - i128{at(i, j)} * at(i, j);
      if (m < 0) return false;
    }
  }
  return det() >= 0;
}

bool GramMatrix::positive_definite() const {
  if (at(0, 0) <= 0) return false;
  i128 m01 = i128{at(0, 0)} * at(1, 1) - i128{at(0, 1)} * at(0, 1);
  if (dim_ == 2) return m01 > 0;
  return m01 > 0 && det() > 0;
}

std::ostream& operator<<(std::ostream& os, const GramMatrix& g) {
  os << "[";
  for (int i = 0; i < g.dim(); ++i) {
    if (i) os << "; ";
    for (int j = 0; j < g.dim(); ++j) {
      if (j) os << " ";
      os << g.at(i, j);
    }
  }
  return os << "]";
}

namespace {

void check_coords(Vec3 v) {
  if (std::abs(v.x) > kCoordBound || std::abs(v.y) > kCoordBound || std::abs(v.z) > kCoordBound) {
    throw std::invalid_argument("coordinate exceeds supported bound 2^20");
  }
}

}  // namespace

GramMatrix gram(std::span<const Vec3> vectors) {
  if (vectors.size() != 2 && vectors.size() != 3) {
    throw std::invalid_argument("gram: need 2 or 3 vectors");
  }
  for (Vec3 v : vectors) check_coords(v);
  const int n = static_cast<int>(vectors.size());
  std::array<std::int64_t, 6> upper{};
  std::size_t idx = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) upper[idx++] = dot(vectors[static_cast<std::size_t>(i)],
                                                   vectors[static_cast<std::size_t>(j)]);
  return GramMatrix(n, std::span<const std::int64_t>(upper.data(), idx));
}

bool is_nondegenerate(const GramMatrix& g) {
  if (g.dim() != 3) throw std::invalid_argument("is_nondegenerate: expects a 3x3 Gram matrix");
  return g.det() != 0;
}

BigInt minor_det(const GramMatrix& g, std::span<const int> rows, std::span<const int> cols) {
  if (rows.size() != cols.size()) throw std::invalid_argument("minor_det: size mismatch");
  if (rows.size() > static_cast<std::size_t>(g.dim())) {
    throw std::invalid_argument("minor_det: selection larger than matrix");
  }
  auto validate = [&](std::span<const int> idx) {
    for (std::size_t i = 0; i < idx.size(); ++i) {
      if (idx[i] < 0 || idx[i] >= g.dim()) throw std::invalid_argument("minor_det: index range");
      if (i > 0 && idx[i] <= idx[i - 1]) {
        throw std::invalid_argument("minor_det: indices must be strictly increasing");
      }
    }
  };
  validate(rows);
  validate(cols);
  const std::size_t n = rows.size();
  if (n == 0) return 1;
  if (n == 1) return g.at(rows[0], cols[0]);
  if (n == 2) {
    BigInt a = g.at(rows[0], cols[0]), b = g.at(rows[0], cols[1]);
    BigInt c = g.at(rows[1], cols[0]), d = g.at(rows[1], cols[1]);
    return a * d - b * c;
  }
  return g.det();  // n == 3 selects everything
}

std::ostream& operator<<(std::ostream& os, const ClassKey& k) {
  os << "(";
  for (std::size_t i = 0; i < k.v.size(); ++i) {
    if (i) os << ",";
    os << k.v[i];
  }
  return os << ")";
}

ClassKey canonical_key(const std::array<Vec3, 4>& points) {
  for (Vec3 p : points) check_coords(p);
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j)
      if (points[static_cast<std::size_t>(i)] == points[static_cast<std::size_t>(j)]) {
        throw std::invalid_argument("canonical_key: points must be pairwise distinct");
      }

  ClassKey best;
  bool have = false;
  for (int base = 0; base < 4; ++base) {
    Vec3 edge[3];
    int idx = 0;
    for (int o = 0; o < 4; ++o) {
      if (o != base) edge[idx++] = points[static_cast<std::size_t>(o)] - points[static_cast<std::size_t>(base)];
    }
    std::int64_t n[3], d01, d02, d12;
    for (int i = 0; i < 3; ++i) n[i] = norm2(edge[i]);
    d01 = dot(edge[0], edge[1]);
    d02 = dot(edge[0], edge[2]);
    d12 = dot(edge[1], edge[2]);
    static constexpr int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                                        {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
    auto pairdot = [&](int a, int b) {
      if (a > b) std::swap(a, b);
      return a == 0 ? (b == 1 ? d01 : d02) : d12;
    };
    for (const auto& p : perms) {
      ClassKey cand{{n[p[0]], pairdot(p[0], p[1]), pairdot(p[0], p[2]),
                     n[p[1]], pairdot(p[1], p[2]), n[p[2]]}};
      if (!have || cand < best) {
        best = cand;
        have = true;
      }
    }
  }
  return best;
}

std::ostream& operator<<(std::ostream& os, ExtendedNat v) {
  if (v.is_infinite()) return os << "inf";
  return os << v.value();
}

ExtendedNat valuation(std::int64_t p, const BigInt& k) {
  if (!is_prime(p)) throw std::invalid_argument("valuation: p must be prime");
  if (k == 0) return ExtendedNat::infinity();
  BigInt n = abs(k);
  std::uint64_t e = 0;
  while (n % p == 0) {
    n /= p;
    ++e;
  }
  return ExtendedNat(e);
}

ExtendedNat valuation(std::int64_t p, std::int64_t k) { return valuation(p, BigInt(k)); }

}  // namespace tetra
