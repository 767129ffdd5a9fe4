#include "tetra/arith.hpp"

#include <cmath>
#include <numeric>

namespace tetra {

bool is_prime(std::int64_t n) {
  if (n < 2) return false;
  for (std::int64_t d : {2, 3, 5, 7}) {
    if (n % d == 0) return n == d;
  }
  // 30-wheel trial division.
  static constexpr int wheel[] = {1, 7, 11, 13, 17, 19, 23, 29};
  for (std::int64_t base = 0;; base += 30) {
    for (int off : wheel) {
      std::int64_t d = base + off;
      if (d < 7) continue;
      if (d * d > n) return true;
      if (n % d == 0) return false;
    }
  }
}

std::int64_t isqrt(std::int64_t n) {
  if (n < 0) throw std::invalid_argument("isqrt: negative argument");
  auto r = static_cast<std::int64_t>(std::sqrt(static_cast<double>(n)));
  while (r > 0 && r * r > n) --r;
  while ((r + 1) * (r + 1) <= n) ++r;
  return r;
}

bool is_square(i128 n, i128* root) {
  if (n < 0) return false;
  // Initial estimate via double sqrt, then exact correction.
  auto guess = static_cast<i128>(std::sqrt(static_cast<double>(n)));
  for (i128 r = guess > 2 ? guess - 2 : 0;; ++r) {
    i128 sq = r * r;
    if (sq == n) {
      if (root) *root = r;
      return true;
    }
    if (sq > n) return false;
  }
}

i128 ipow_checked(std::int64_t a, int e) {
  if (e < 0) throw std::invalid_argument("ipow_checked: negative exponent");
  i128 result = 1;
  constexpr i128 kMax = ~u128{0} >> 1;
  for (int i = 0; i < e; ++i) {
    if (a != 0 && (result > kMax / (a < 0 ? -a : a))) {
      throw std::overflow_error("ipow_checked: result exceeds 128 bits");
    }
    result *= a;
  }
  return result;
}

std::int64_t mod_inverse(std::int64_t a, std::int64_t m) {
  if (m <= 0) throw std::invalid_argument("mod_inverse: modulus must be positive");
  a %= m;
  if (a < 0) a += m;
  std::int64_t r0 = m, r1 = a, s0 = 0, s1 = 1;
  while (r1 != 0) {
    std::int64_t quot = r0 / r1;
    r0 -= quot * r1;
    std::swap(r0, r1);
    s0 -= quot * s1;
    std::swap(s0, s1);
  }
  if (r0 != 1) throw std::invalid_argument("mod_inverse: argument not invertible");
  s0 %= m;
  if (s0 < 0) s0 += m;
  return s0;
}

std::string to_string_i128(i128 v) {
  if (v == 0) return "0";
  bool neg = v < 0;
  u128 u = neg ? static_cast<u128>(-(v + 1)) + 1 : static_cast<u128>(v);
  std::string digits;
  while (u > 0) {
    digits.push_back(static_cast<char>('0' + static_cast<int>(u % 10)));
    u /= 10;
  }
  if (neg) digits.push_back('-');
  return {digits.rbegin(), digits.rend()};
}

std::string rational_string(const Rational& r) {
  std::string s = numerator(r).str();
  if (denominator(r) != 1) {
    s += "/";
    s += denominator(r).str();
  }
  return s;
}

LinearFit fit_line(std::span<const std::pair<double, double>> pts) {
  if (pts.size() < 3) throw std::invalid_argument("fit_line: need at least 3 points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (auto [x, y] : pts) {
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  double n = static_cast<double>(pts.size());
  double denom = n * sxx - sx * sx;
  if (denom == 0.0) throw std::invalid_argument("fit_line: degenerate abscissae");
  LinearFit fit;
  fit.slope = (n * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / n;
  fit.points = pts.size();
  for (auto [x, y] : pts) {
    double r = y - (fit.slope * x + fit.intercept);
    fit.max_abs_residual = std::max(fit.max_abs_residual, std::abs(r));
  }
  return fit;
}

LinearFit fit_loglog(std::span<const std::pair<double, double>> pts) {
  std::vector<std::pair<double, double>> logs;
  logs.reserve(pts.size());
  for (auto [x, y] : pts) {
    if (x <= 0 || y <= 0) throw std::invalid_argument("fit_loglog: nonpositive point");
    logs.emplace_back(std::log(x), std::log(y));
  }
  return fit_line(logs);
}

}  // namespace tetra
