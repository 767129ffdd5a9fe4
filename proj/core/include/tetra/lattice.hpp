#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>

#include "tetra/arith.hpp"

namespace tetra {

// Coordinates are bounded so that all Gram entries (|dot| <= 3*2^40) and
// 3x3 Gram determinants stay inside exact integer ranges used downstream.
inline constexpr std::int64_t kCoordBound = std::int64_t{1} << 20;

struct Vec3 {
  std::int64_t x = 0, y = 0, z = 0;
  friend constexpr Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend constexpr Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend constexpr bool operator==(Vec3 a, Vec3 b) = default;
  friend constexpr auto operator<=>(Vec3 a, Vec3 b) = default;
};

constexpr std::int64_t dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
constexpr std::int64_t norm2(Vec3 a) { return dot(a, a); }
constexpr Vec3 cross(Vec3 a, Vec3 b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

std::ostream& operator<<(std::ostream& os, Vec3 v);

// Symmetric integer matrix of inner products, dimension 2 or 3.
class GramMatrix {
 public:
  GramMatrix(int dim, std::span<const std::int64_t> upper);  // row-major upper triangle
  static GramMatrix diag2(std::int64_t a, std::int64_t b);
  static GramMatrix sym2(std::int64_t a11, std::int64_t a12, std::int64_t a22);
  static GramMatrix sym3(std::int64_t a11, std::int64_t a12, std::int64_t a13,
                         std::int64_t a22, std::int64_t a23, std::int64_t a33);
  static GramMatrix identity(int dim);

  int dim() const { return dim_; }
  std::int64_t at(int i, int j) const;

  BigInt det() const;
  bool positive_semidefinite() const;
  bool positive_definite() const;

  friend bool operator==(const GramMatrix&, const GramMatrix&) = default;

 private:
  GramMatrix() = default;
  int dim_ = 0;
  std::array<std::int64_t, 9> e_{};  // dense, symmetric
};

std::ostream& operator<<(std::ostream& os, const GramMatrix& g);

// Gram matrix of 2 or 3 vectors (pairwise inner products). Coordinates must
// satisfy |c| <= kCoordBound.
GramMatrix gram(std::span<const Vec3> vectors);

// det != 0 for a 3x3 Gram matrix; rejects other dimensions.
bool is_nondegenerate(const GramMatrix& g);

// Determinant of the square submatrix with the given 0-based row/column index
// sets (equal sizes 1..dim, strictly increasing). An empty selection has
// determinant 1.
BigInt minor_det(const GramMatrix& g, std::span<const int> rows, std::span<const int> cols);

// Congruence-class key of a 4-point configuration: the lexicographically
// least serialized edge Gram matrix (g11,g12,g13,g22,g23,g33) over all 24
// choices of base vertex and ordering of the remaining three.
struct ClassKey {
  std::array<std::int64_t, 6> v{};
  friend bool operator==(const ClassKey&, const ClassKey&) = default;
  friend auto operator<=>(const ClassKey&, const ClassKey&) = default;
};

std::ostream& operator<<(std::ostream& os, const ClassKey& k);

struct ClassKeyHash {
  std::size_t operator()(const ClassKey& k) const noexcept {
    std::size_t h = 0xcbf29ce484222325ull;
    for (std::int64_t x : k.v) {
      h ^= std::hash<std::int64_t>{}(x) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    }
    return h;
  }
};

// Points must be pairwise distinct with coordinates within kCoordBound.
ClassKey canonical_key(const std::array<Vec3, 4>& points);

// Natural number extended with +infinity; used for p-adic valuations where
// o_p(0) = infinity.
class ExtendedNat {
 public:
  constexpr ExtendedNat(std::uint64_t v) : value_(v), infinite_(false) {}  // NOLINT: implicit
  static constexpr ExtendedNat infinity() { return ExtendedNat(inf_tag{}); }

  constexpr bool is_infinite() const { return infinite_; }
  constexpr std::uint64_t value() const {
    if (infinite_) throw std::logic_error("ExtendedNat: value() of infinity");
    return value_;
  }

  friend constexpr bool operator==(ExtendedNat a, ExtendedNat b) {
    if (a.infinite_ || b.infinite_) return a.infinite_ && b.infinite_;
    return a.value_ == b.value_;
  }
  friend constexpr bool operator<(ExtendedNat a, ExtendedNat b) {
    if (a.infinite_) return false;
    if (b.infinite_) return true;
    return a.value_ < b.value_;
  }
  friend constexpr bool operator<=(ExtendedNat a, ExtendedNat b) { return a < b || a == b; }
  friend constexpr ExtendedNat operator+(ExtendedNat a, ExtendedNat b) {
    if (a.infinite_ || b.infinite_) return infinity();
    return ExtendedNat(a.value_ + b.value_);
  }
  friend constexpr ExtendedNat min(ExtendedNat a, ExtendedNat b) { return a < b ? a : b; }

 private:
  struct inf_tag {};
  explicit constexpr ExtendedNat(inf_tag) : value_(0), infinite_(true) {}
  std::uint64_t value_;
  bool infinite_;
};

std::ostream& operator<<(std::ostream& os, ExtendedNat v);

// o_p(k): exponent of the prime p in k; o_p(0) = infinity. p must be prime.
ExtendedNat valuation(std::int64_t p, const BigInt& k);
ExtendedNat valuation(std::int64_t p, std::int64_t k);

}  // namespace tetra
