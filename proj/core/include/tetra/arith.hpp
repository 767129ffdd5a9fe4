#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace tetra {

using int64 = std::int64_t;
using uint64 = std::uint64_t;
using i128 = __int128;
using u128 = unsigned __int128;
using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

// Thrown when a computation would exceed its configured work or memory budget.
// The caller decides whether that is fatal or degrades to a partial result.
class budget_error : public std::runtime_error {
 public:
  explicit budget_error(const std::string& what) : std::runtime_error(what) {}
};

// Deterministic trial division; intended for p up to ~1e12, plenty here.
bool is_prime(std::int64_t n);

// floor(sqrt(n)) computed exactly; n >= 0.
std::int64_t isqrt(std::int64_t n);

// Exact square test; if n is a perfect square stores the root.
bool is_square(i128 n, i128* root);

// a^e as i128; throws std::overflow_error if it does not fit.
i128 ipow_checked(std::int64_t a, int e);

// Inverse of a modulo m (gcd(a, m) = 1 required), result in [0, m).
std::int64_t mod_inverse(std::int64_t a, std::int64_t m);

std::string to_string_i128(i128 v);

// "num/den" in lowest terms; integers render without the "/1".
std::string rational_string(const Rational& r);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double max_abs_residual = 0.0;
  std::size_t points = 0;
};

// Least squares y = slope*x + intercept on the given points; needs >= 3 points.
LinearFit fit_line(std::span<const std::pair<double, double>> pts);

// Fit of log(y) against log(x); all x, y must be positive.
LinearFit fit_loglog(std::span<const std::pair<double, double>> pts);

}  // namespace tetra
