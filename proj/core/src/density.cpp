#include "tetra/density.hpp"

#include "tetra/embeddings.hpp"
#include "tetra/sphere.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <stdexcept>
#include <unordered_map>
#include <utility>
#include <vector>

namespace tetra {

namespace {

BigInt big_from_i128(i128 v) {
  bool neg = v < 0;
  unsigned __int128 u = neg ? static_cast<unsigned __int128>(-(v + 1)) + 1
                            : static_cast<unsigned __int128>(v);
  BigInt r = static_cast<std::uint64_t>(u >> 64);
  r <<= 64;
  r += static_cast<std::uint64_t>(u);
  return neg ? BigInt(-r) : r;
}

int64 reduce_mod(i128 v, int64 m) {
  i128 r = v % m;
  if (r < 0) r += m;
  return static_cast<int64>(r);
}

// operands in [0, m), m <= 2^62
int64 mulmod(int64 a, int64 b, int64 m) { return static_cast<int64>((static_cast<i128>(a) * b) % m); }

int64 addmod(int64 a, int64 b, int64 m) {
  int64 s = a + b;
  return s >= m ? s - m : s;
}

int64 submod(int64 a, int64 b, int64 m) {
  int64 s = a - b;
  return s < 0 ? s + m : s;
}

// true iff p^e <= limit, without overflow
bool pow_fits(int64 p, int e, std::uint64_t limit) {
  std::uint64_t v = 1;
  for (int i = 0; i < e; ++i) {
    if (v > limit / static_cast<std::uint64_t>(p)) return false;
    v *= static_cast<std::uint64_t>(p);
  }
  return v <= limit;
}

struct CoeffKey {
  std::array<int64, 7> v;
  bool operator==(const CoeffKey&) const = default;
};

struct CoeffKeyHash {
  std::size_t operator()(const CoeffKey& k) const {
    std::size_t h = 1469598103934665603ull;
    for (int64 x : k.v) {
      h ^= static_cast<std::size_t>(x);
      h *= 1099511628211ull;
    }
    return h;
  }
};

// Shared scratch for the exact congruence counters at one prime: power
// table, square roots mod p, memo tables, and a work counter so runaway
// recursions surface as budget_error instead of hangs.
struct DensityCtx {
  int64 p;
  std::uint64_t ops = 0;
  std::uint64_t max_ops;
  std::vector<int64> pw{1};
  std::vector<std::vector<int>> sqrt_tab;  // odd p: sqrt_tab[d] = roots of t^2 = d
  std::unordered_map<CoeffKey, i128, CoeffKeyHash> bq_memo;
  std::map<std::pair<int64, int>, i128> sphere_memo;
  std::map<int, std::vector<int64>> sq_counts2;  // p = 2: V[t] = #{s : s^2 = t mod 2^k}
  std::map<int, std::vector<int64>> sq_conv2;    // p = 2: V convolved with itself
  static constexpr std::size_t kMemoCap = std::size_t{1} << 21;

  DensityCtx(int64 prime, std::uint64_t budget_ops) : p(prime), max_ops(budget_ops) {
    if (p != 2) {
      sqrt_tab.assign(static_cast<std::size_t>(p), {});
      for (int r = 0; r < p; ++r) sqrt_tab[static_cast<std::size_t>(mulmod(r, r, p))].push_back(r);
    }
  }

  void charge(std::uint64_t c) {
    ops += c;
    if (ops > max_ops) throw budget_error("congruence counting exceeded its work budget");
  }

  void ensure_pow(int k) {
    while (static_cast<int>(pw.size()) <= k) {
      int64 last = pw.back();
      if (last > (int64{1} << 62) / p) throw budget_error("modulus p^k exceeds the 64-bit range");
      pw.push_back(last * p);
    }
  }

  // #{(s,t) mod p^k : a s^2 + b s t + c t^2 + d s + e t + f = 0 mod p^k}.
  // Coefficients must arrive reduced into [0, p^k).
  i128 bq(int64 a, int64 b, int64 c, int64 d, int64 e, int64 f, int k) {
    if (k == 0) return 1;
    charge(static_cast<std::uint64_t>(p) + 4);
    int64 pk = pw[static_cast<std::size_t>(k)];
    CoeffKey key{{a, b, c, d, e, f, k}};
    if (auto it = bq_memo.find(key); it != bq_memo.end()) return it->second;

    i128 total = 0;
    if (a % p == 0 && b % p == 0 && c % p == 0 && d % p == 0 && e % p == 0 && f % p == 0) {
      // the whole form is p * (form/p); condition drops one level, the two
      // discarded top digits are free
      total = static_cast<i128>(p) * p * bq(a / p, b / p, c / p, d / p, e / p, f / p, k - 1);
      memo_put(key, total);
      return total;
    }

    auto handle_root = [&](int64 s0, int64 t0) {
      if (k == 1) {
        total += 1;  // p^{k-1} and the singular recursion both degenerate to 1
        return;
      }
      int64 g1p = reduce_mod(static_cast<i128>(2) * a * s0 + static_cast<i128>(b) * t0 + d, p);
      int64 g2p = reduce_mod(static_cast<i128>(b) * s0 + static_cast<i128>(2) * c * t0 + e, p);
      if (g1p != 0 || g2p != 0) {
        total += static_cast<i128>(pw[static_cast<std::size_t>(k - 1)]);
        return;
      }
      // singular root: substitute (s0 + p u, t0 + p v), divide once by p
      int64 pk1 = pw[static_cast<std::size_t>(k - 1)];
      i128 val = static_cast<i128>(a) * s0 * s0 + static_cast<i128>(b) * s0 * t0 +
                 static_cast<i128>(c) * t0 * t0 + static_cast<i128>(d) * s0 +
                 static_cast<i128>(e) * t0 + f;
      int64 f0 = reduce_mod(val, pk);
      int64 g1 = reduce_mod(static_cast<i128>(2) * a * s0 + static_cast<i128>(b) * t0 + d, pk);
      int64 g2 = reduce_mod(static_cast<i128>(b) * s0 + static_cast<i128>(2) * c * t0 + e, pk);
      total += bq(reduce_mod(static_cast<i128>(p) * a, pk1), reduce_mod(static_cast<i128>(p) * b, pk1),
                  reduce_mod(static_cast<i128>(p) * c, pk1), g1 % pk1, g2 % pk1, (f0 / p) % pk1,
                  k - 1);
    };

    if (p == 2) {
      for (int64 s = 0; s < 2; ++s)
        for (int64 t = 0; t < 2; ++t) {
          int64 v = ((a & 1) * s + (b & 1) * s * t + (c & 1) * t + (d & 1) * s + (e & 1) * t +
                     (f & 1)) &
                    1;
          if (v == 0) handle_root(s, t);
        }
    } else {
      int64 c2 = c % p;
      for (int64 s = 0; s < p; ++s) {
        int64 c1 = reduce_mod(static_cast<i128>(b) * s + e, p);
        int64 c0 = reduce_mod((static_cast<i128>(a) * s + d) * s + f, p);
        if (c2 == 0) {
          if (c1 != 0) {
            handle_root(s, reduce_mod(-static_cast<i128>(c0) * mod_inverse(c1, p), p));
          } else if (c0 == 0) {
            for (int64 t = 0; t < p; ++t) handle_root(s, t);
          }
        } else {
          int64 disc = reduce_mod(static_cast<i128>(c1) * c1 - static_cast<i128>(4) * c2 * c0, p);
          int64 inv2c2 = mod_inverse(mulmod(2 % p, c2, p), p);
          for (int r : sqrt_tab[static_cast<std::size_t>(disc)])
            handle_root(s, mulmod(submod(static_cast<int64>(r), c1 % p, p), inv2c2, p));
        }
      }
    }
    memo_put(key, total);
    return total;
  }

  void memo_put(const CoeffKey& key, i128 value) {
    if (bq_memo.size() < kMemoCap) bq_memo.emplace(key, value);
  }

  // #{x mod p^k : x1^2 + x2^2 + x3^2 = w mod p^k}; requires p^k <= 2^41 so the
  // count itself fits 128 bits.
  i128 sphere3(int64 w, int k) {
    if (k == 0) return 1;
    ensure_pow(k);
    int64 pk = pw[static_cast<std::size_t>(k)];
    if (pk > (int64{1} << 41)) throw budget_error("sphere solution count would overflow");
    w = reduce_mod(w, pk);
    auto key = std::make_pair(w, k);
    if (auto it = sphere_memo.find(key); it != sphere_memo.end()) return it->second;

    i128 total = 0;
    if (p == 2) {
      const auto& conv = square_conv(k);
      const auto& v = square_counts(k);
      charge(std::uint64_t{1} << k);
      int64 mask = pk - 1;
      for (int64 t = 0; t < pk; ++t)
        total += static_cast<i128>(conv[static_cast<std::size_t>(t)]) *
                 v[static_cast<std::size_t>((w - t) & mask)];
    } else if (k == 1) {
      charge(static_cast<std::uint64_t>(p) * static_cast<std::uint64_t>(p));
      for (int64 x1 = 0; x1 < p; ++x1)
        for (int64 x2 = 0; x2 < p; ++x2) {
          int64 r = reduce_mod(w - x1 * x1 - x2 * x2, p);
          total += static_cast<i128>(sqrt_tab[static_cast<std::size_t>(r)].size());
        }
    } else {
      // roots mod p with nonzero gradient lift freely (p^2 per level); the
      // singular root x = 0 scales out two powers of p
      i128 regular = sphere3(w % p, 1) - (w % p == 0 ? 1 : 0);
      i128 fiber = 1;
      for (int i = 0; i < 2 * (k - 1); ++i) fiber *= p;
      total = regular * fiber;
      if (w % (p * p) == 0)
        total += static_cast<i128>(p) * p * p * sphere3(w / (p * p), k - 2);
    }
    sphere_memo.emplace(key, total);
    return total;
  }

  const std::vector<int64>& square_counts(int k) {
    auto it = sq_counts2.find(k);
    if (it != sq_counts2.end()) return it->second;
    int64 pk = int64{1} << k;
    charge(static_cast<std::uint64_t>(pk));
    std::vector<int64> v(static_cast<std::size_t>(pk), 0);
    int64 mask = pk - 1;
    for (int64 s = 0; s < pk; ++s) v[static_cast<std::size_t>((s * s) & mask)]++;
    return sq_counts2.emplace(k, std::move(v)).first->second;
  }

  const std::vector<int64>& square_conv(int k) {
    auto it = sq_conv2.find(k);
    if (it != sq_conv2.end()) return it->second;
    const auto& v = square_counts(k);
    int64 pk = int64{1} << k;
    charge(std::uint64_t{1} << (2 * k));
    std::vector<int64> conv(static_cast<std::size_t>(pk), 0);
    int64 mask = pk - 1;
    for (int64 t1 = 0; t1 < pk; ++t1) {
      int64 c1 = v[static_cast<std::size_t>(t1)];
      if (c1 == 0) continue;
      for (int64 t2 = 0; t2 < pk; ++t2)
        conv[static_cast<std::size_t>((t1 + t2) & mask)] += c1 * v[static_cast<std::size_t>(t2)];
    }
    return sq_conv2.emplace(k, std::move(conv)).first->second;
  }

  // primitive solutions of |x|^2 = w mod p^j
  i128 prim_sphere3(int64 w, int j) {
    i128 all = sphere3(w, j);
    if (j == 1) return all - (reduce_mod(w, p) == 0 ? 1 : 0);
    int64 p2 = p * p;
    if (reduce_mod(w, pw[static_cast<std::size_t>(j)]) % p2 == 0)
      all -= static_cast<i128>(p) * p * p *
             sphere3(reduce_mod(w, pw[static_cast<std::size_t>(j)]) / p2, j - 2);
    return all;
  }

  // #{y mod p^k : <x,y> = b, |y|^2 = c mod p^k}; the linear condition is
  // solved for the coordinate where x has unit content, leaving one binary
  // quadratic per residue layer.
  i128 line_sphere(std::array<int64, 3> x, int64 b, int64 c, int k) {
    if (k == 0) return 1;
    ensure_pow(k);
    int64 pk = pw[static_cast<std::size_t>(k)];
    if (pk > (int64{1} << 41)) throw budget_error("fiber count would overflow");
    for (auto& xi : x) xi = reduce_mod(xi, pk);
    b = reduce_mod(b, pk);
    c = reduce_mod(c, pk);

    int e = k;
    for (int64 xi : x) {
      if (xi == 0) continue;
      int v = 0;
      int64 t = xi;
      while (t % p == 0) {
        t /= p;
        ++v;
      }
      e = std::min(e, v);
    }
    if (e >= k) return b == 0 ? sphere3(c, k) : 0;

    int j = k - e;
    int64 pe = pw[static_cast<std::size_t>(e)];
    int64 pj = pw[static_cast<std::size_t>(j)];
    if (b % pe != 0) return 0;
    int64 bp = b / pe;

    std::array<int64, 3> xt{x[0] / pe, x[1] / pe, x[2] / pe};
    int ui = xt[0] % p != 0 ? 0 : xt[1] % p != 0 ? 1 : 2;
    int ju = (ui + 1) % 3, jv = (ui + 2) % 3;
    int64 alpha = mod_inverse(xt[static_cast<std::size_t>(ui)] % pk, pk);
    int64 hu = submod(0, mulmod(alpha, xt[static_cast<std::size_t>(ju)] % pk, pk), pk);
    int64 hv = submod(0, mulmod(alpha, xt[static_cast<std::size_t>(jv)] % pk, pk), pk);
    int64 h0 = mulmod(alpha, bp % pk, pk);

    int64 qa = addmod(mulmod(hu, hu, pk), 1 % pk, pk);
    int64 qb = mulmod(addmod(hu, hu, pk), hv, pk);
    int64 qc = addmod(mulmod(hv, hv, pk), 1 % pk, pk);

    i128 total = 0;
    for (int64 t = 0; t < pe; ++t) {
      charge(2);
      int64 g = addmod(h0, mulmod(pj % pk, t, pk), pk);
      int64 qd = mulmod(addmod(g, g, pk), hu, pk);
      int64 qe = mulmod(addmod(g, g, pk), hv, pk);
      int64 qf = submod(mulmod(g, g, pk), c, pk);
      total += bq(qa, qb, qc, qd, qe, qf, k);
    }
    return total;
  }

  // primitive x mod p^j with |x|^2 = w, odd p; caller guarantees existence
  std::array<int64, 3> find_primitive_rep(int64 w, int j) {
    charge(static_cast<std::uint64_t>(p) * static_cast<std::uint64_t>(p));
    int64 w0 = reduce_mod(w, p);
    std::array<int64, 3> x{};
    bool found = false;
    for (int64 x1 = 0; x1 < p && !found; ++x1)
      for (int64 x2 = 0; x2 < p && !found; ++x2) {
        int64 r = reduce_mod(w0 - x1 * x1 - x2 * x2, p);
        for (int x3 : sqrt_tab[static_cast<std::size_t>(r)]) {
          if (x1 != 0 || x2 != 0 || x3 != 0) {
            x = {x1, x2, x3};
            found = true;
            break;
          }
        }
      }
    if (!found) throw std::runtime_error("primitive sphere representative not found");
    int ui = x[0] % p != 0 ? 0 : x[1] % p != 0 ? 1 : 2;
    for (int t = 1; t < j; ++t) {
      int64 pt = pw[static_cast<std::size_t>(t)];
      int64 pt1 = pw[static_cast<std::size_t>(t + 1)];
      i128 n = static_cast<i128>(x[0]) * x[0] + static_cast<i128>(x[1]) * x[1] +
               static_cast<i128>(x[2]) * x[2];
      int64 diff = reduce_mod(static_cast<i128>(reduce_mod(w, pt1)) - n, pt1);
      int64 inv2x = mod_inverse(reduce_mod(2 * x[static_cast<std::size_t>(ui)], p), p);
      int64 delta = mulmod((diff / pt) % p, inv2x, p);
      x[static_cast<std::size_t>(ui)] += delta * pt;
    }
    return x;
  }
};

// gamma = I, odd p: group the first column by content e and norm class w of
// its primitive part; the class weight is a primitive sphere count and the
// per-class fiber is a line_sphere value at any representative.
BigInt count_gram_fast_odd(DensityCtx& ctx, int64 a, int64 b, int64 c, int k) {
  ctx.ensure_pow(k);
  int64 pk = ctx.pw[static_cast<std::size_t>(k)];
  if (pk > (int64{1} << 41)) throw budget_error("stratified count would overflow");
  a = reduce_mod(a, pk);
  b = reduce_mod(b, pk);
  c = reduce_mod(c, pk);

  BigInt total = 0;
  if (a == 0) total += b == 0 ? big_from_i128(ctx.sphere3(c, k)) : BigInt(0);

  for (int e = 0; e < k; ++e) {
    int j = k - e;
    int64 pe = ctx.pw[static_cast<std::size_t>(e)];
    std::vector<int64> ws;
    if (2 * e >= k) {
      if (a != 0) continue;
      int64 pj = ctx.pw[static_cast<std::size_t>(j)];
      ws.reserve(static_cast<std::size_t>(pj));
      for (int64 m = 0; m < pj; ++m) ws.push_back(m);
    } else {
      int64 p2e = ctx.pw[static_cast<std::size_t>(2 * e)];
      if (a % p2e != 0) continue;
      int64 base = a / p2e;
      int64 step = ctx.pw[static_cast<std::size_t>(k - 2 * e)];
      ws.reserve(static_cast<std::size_t>(pe));
      for (int64 m = 0; m < pe; ++m) ws.push_back(base + m * step);
    }
    for (int64 w : ws) {
      i128 weight = ctx.prim_sphere3(w, j);
      if (weight == 0) continue;
      auto rep = ctx.find_primitive_rep(w, j);
      std::array<int64, 3> xs{rep[0] * pe, rep[1] * pe, rep[2] * pe};
      i128 fiber = ctx.line_sphere(xs, b, c, k);
      total += big_from_i128(weight) * big_from_i128(fiber);
    }
  }
  return total;
}

// gamma = I, p = 2: enumerate the first-column solutions digit by digit,
// fold them under signed coordinate permutations (the fiber count is
// invariant), and evaluate one fiber per orbit class.
BigInt count_gram_fast_fold2(DensityCtx& ctx, int64 a, int64 b, int64 c, int k,
                             const DensityBudget& budget) {
  if (k > budget.fast_max_level_p2)
    throw budget_error("digit-tree level beyond the p = 2 budget");
  ctx.ensure_pow(k);
  int64 pk = int64{1} << k;
  a = reduce_mod(a, pk);
  b = reduce_mod(b, pk);
  c = reduce_mod(c, pk);

  constexpr std::size_t kMaxTreeNodes = std::size_t{3} << 23;
  std::vector<std::array<std::int32_t, 3>> cur;
  for (std::int32_t x1 = 0; x1 < 2; ++x1)
    for (std::int32_t x2 = 0; x2 < 2; ++x2)
      for (std::int32_t x3 = 0; x3 < 2; ++x3)
        if (((x1 + x2 + x3) - a) % 2 == 0) cur.push_back({x1, x2, x3});

  std::vector<std::array<std::int32_t, 3>> next;
  for (int t = 1; t < k; ++t) {
    int64 mod_next = int64{1} << (t + 1);
    std::int32_t bit = std::int32_t{1} << t;
    ctx.charge(8 * cur.size() + 1);
    next.clear();
    next.reserve(cur.size() * 4);
    for (const auto& xc : cur) {
      for (int d = 0; d < 8; ++d) {
        std::array<std::int32_t, 3> y{xc[0] + ((d & 1) ? bit : 0), xc[1] + ((d & 2) ? bit : 0),
                                      xc[2] + ((d & 4) ? bit : 0)};
        int64 norm = static_cast<int64>(y[0]) * y[0] + static_cast<int64>(y[1]) * y[1] +
                     static_cast<int64>(y[2]) * y[2];
        if (((norm - a) & (mod_next - 1)) == 0) next.push_back(y);
      }
      if (next.size() > kMaxTreeNodes) throw budget_error("digit tree exceeded its node budget");
    }
    cur.swap(next);
  }

  std::unordered_map<std::uint64_t, std::int64_t> classes;
  for (const auto& xc : cur) {
    std::array<int64, 3> f;
    for (int i = 0; i < 3; ++i) {
      int64 v = xc[static_cast<std::size_t>(i)];
      f[static_cast<std::size_t>(i)] = v == 0 ? 0 : std::min(v, pk - v);
    }
    std::sort(f.begin(), f.end());
    std::uint64_t key = static_cast<std::uint64_t>(f[0]) |
                        (static_cast<std::uint64_t>(f[1]) << 14) |
                        (static_cast<std::uint64_t>(f[2]) << 28);
    classes[key]++;
  }

  BigInt total = 0;
  for (const auto& [key, cnt] : classes) {
    std::array<int64, 3> f{static_cast<int64>(key & 0x3fff),
                           static_cast<int64>((key >> 14) & 0x3fff),
                           static_cast<int64>((key >> 28) & 0x3fff)};
    i128 fiber = ctx.line_sphere(f, b, c, k);
    total += BigInt(cnt) * big_from_i128(fiber);
  }
  return total;
}

void reduce_sym2(const GramMatrix& m, int64 pk, int64 out[2][2]) {
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) out[i][j] = reduce_mod(m.at(i, j), pk);
}

BigInt count_direct(const GramMatrix& gamma, const GramMatrix& lambda, int64 p, int k,
                    const DensityBudget& budget) {
  if (!pow_fits(p, 6 * k, budget.direct_max_ops))
    throw budget_error("direct scan larger than the configured budget");
  int64 pk = 1;
  for (int i = 0; i < k; ++i) pk *= p;
  int64 g[3][3];
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) g[i][j] = reduce_mod(gamma.at(i, j), pk);
  int64 lam[2][2];
  reduce_sym2(lambda, pk, lam);

  std::array<int64, 6> L{};  // L[s*2 + c], rows s of the 3x2 matrix
  std::uint64_t count = 0;
  while (true) {
    int64 P[3][2];
    for (int s = 0; s < 3; ++s)
      for (int cidx = 0; cidx < 2; ++cidx) {
        i128 acc = 0;
        for (int t = 0; t < 3; ++t)
          acc += static_cast<i128>(g[s][t]) * L[static_cast<std::size_t>(t * 2 + cidx)];
        P[s][cidx] = reduce_mod(acc, pk);
      }
    bool ok = true;
    for (int i = 0; i < 2 && ok; ++i)
      for (int j = i; j < 2 && ok; ++j) {
        i128 acc = 0;
        for (int s = 0; s < 3; ++s)
          acc += static_cast<i128>(L[static_cast<std::size_t>(s * 2 + i)]) * P[s][j];
        if (reduce_mod(acc, pk) != lam[i][j]) ok = false;
      }
    if (ok) ++count;

    int pos = 0;
    while (pos < 6) {
      if (++L[static_cast<std::size_t>(pos)] < pk) break;
      L[static_cast<std::size_t>(pos)] = 0;
      ++pos;
    }
    if (pos == 6) break;
  }
  return BigInt(count);
}

struct LinSolveModP {
  bool consistent = false;
  std::vector<int64> particular;          // size = cols
  std::vector<std::vector<int64>> kernel; // basis vectors, size = cols each
};

LinSolveModP solve_mod_p(std::vector<std::vector<int64>> aug, int cols, int64 p) {
  int rows = static_cast<int>(aug.size());
  std::vector<int> pivot_col(static_cast<std::size_t>(rows), -1);
  int r = 0;
  for (int c = 0; c < cols && r < rows; ++c) {
    int pr = -1;
    for (int i = r; i < rows; ++i)
      if (aug[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)] % p != 0) {
        pr = i;
        break;
      }
    if (pr < 0) continue;
    std::swap(aug[static_cast<std::size_t>(r)], aug[static_cast<std::size_t>(pr)]);
    int64 inv = mod_inverse(reduce_mod(aug[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)], p), p);
    for (int j = c; j <= cols; ++j)
      aug[static_cast<std::size_t>(r)][static_cast<std::size_t>(j)] =
          mulmod(reduce_mod(aug[static_cast<std::size_t>(r)][static_cast<std::size_t>(j)], p), inv, p);
    for (int i = 0; i < rows; ++i) {
      if (i == r) continue;
      int64 factor = reduce_mod(aug[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)], p);
      if (factor == 0) continue;
      for (int j = c; j <= cols; ++j)
        aug[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = submod(
            reduce_mod(aug[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)], p),
            mulmod(factor, aug[static_cast<std::size_t>(r)][static_cast<std::size_t>(j)], p), p);
    }
    pivot_col[static_cast<std::size_t>(r)] = c;
    ++r;
  }
  LinSolveModP out;
  for (int i = r; i < rows; ++i)
    if (reduce_mod(aug[static_cast<std::size_t>(i)][static_cast<std::size_t>(cols)], p) != 0)
      return out;  // inconsistent
  out.consistent = true;
  out.particular.assign(static_cast<std::size_t>(cols), 0);
  std::vector<bool> is_pivot(static_cast<std::size_t>(cols), false);
  for (int i = 0; i < r; ++i) {
    out.particular[static_cast<std::size_t>(pivot_col[static_cast<std::size_t>(i)])] =
        reduce_mod(aug[static_cast<std::size_t>(i)][static_cast<std::size_t>(cols)], p);
    is_pivot[static_cast<std::size_t>(pivot_col[static_cast<std::size_t>(i)])] = true;
  }
  for (int c = 0; c < cols; ++c) {
    if (is_pivot[static_cast<std::size_t>(c)]) continue;
    std::vector<int64> vec(static_cast<std::size_t>(cols), 0);
    vec[static_cast<std::size_t>(c)] = 1;
    for (int i = 0; i < r; ++i)
      vec[static_cast<std::size_t>(pivot_col[static_cast<std::size_t>(i)])] = submod(
          0, reduce_mod(aug[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)], p), p);
    out.kernel.push_back(std::move(vec));
  }
  return out;
}

BigInt count_lifted(const GramMatrix& gamma, const GramMatrix& lambda, int64 p, int k,
                    const DensityBudget& budget) {
  if (!pow_fits(p, 6, budget.direct_max_ops))
    throw budget_error("base level of the lift is larger than the scan budget");

  std::vector<std::array<int64, 6>> cur;
  {
    int64 g[3][3];
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) g[i][j] = reduce_mod(gamma.at(i, j), p);
    int64 lam[2][2];
    reduce_sym2(lambda, p, lam);
    std::array<int64, 6> L{};
    while (true) {
      bool ok = true;
      for (int i = 0; i < 2 && ok; ++i)
        for (int j = i; j < 2 && ok; ++j) {
          i128 acc = 0;
          for (int s = 0; s < 3; ++s)
            for (int t = 0; t < 3; ++t)
              acc += static_cast<i128>(L[static_cast<std::size_t>(s * 2 + i)]) * g[s][t] *
                     L[static_cast<std::size_t>(t * 2 + j)];
          if (reduce_mod(acc, p) != lam[i][j]) ok = false;
        }
      if (ok) cur.push_back(L);
      int pos = 0;
      while (pos < 6) {
        if (++L[static_cast<std::size_t>(pos)] < p) break;
        L[static_cast<std::size_t>(pos)] = 0;
        ++pos;
      }
      if (pos == 6) break;
    }
  }

  int64 pj = p;
  for (int lev = 1; lev < k; ++lev) {
    int64 pj1 = pj * p;
    std::vector<std::array<int64, 6>> next;
    int64 lam[2][2];
    reduce_sym2(lambda, pj1, lam);
    int64 g1[3][3];
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) g1[i][j] = reduce_mod(gamma.at(i, j), pj1);

    for (const auto& L : cur) {
      // residual of the level-j solution, one more digit
      int64 P[3][2];
      for (int s = 0; s < 3; ++s)
        for (int cidx = 0; cidx < 2; ++cidx) {
          i128 acc = 0;
          for (int t = 0; t < 3; ++t)
            acc += static_cast<i128>(g1[s][t]) * L[static_cast<std::size_t>(t * 2 + cidx)];
          P[s][cidx] = reduce_mod(acc, pj1);
        }
      std::vector<std::vector<int64>> aug(3, std::vector<int64>(7, 0));
      int eq = 0;
      bool liftable = true;
      for (int i = 0; i < 2; ++i)
        for (int j = i; j < 2; ++j) {
          i128 acc = 0;
          for (int s = 0; s < 3; ++s)
            acc += static_cast<i128>(L[static_cast<std::size_t>(s * 2 + i)]) * P[s][j];
          int64 resid = submod(lam[i][j], reduce_mod(acc, pj1), pj1);
          if (resid % pj != 0) {
            liftable = false;
            break;
          }
          for (int s = 0; s < 3; ++s) {
            int64 psi = reduce_mod(P[s][i], p);
            int64 psj = reduce_mod(P[s][j], p);
            aug[static_cast<std::size_t>(eq)][static_cast<std::size_t>(s * 2 + j)] = addmod(
                aug[static_cast<std::size_t>(eq)][static_cast<std::size_t>(s * 2 + j)], psi, p);
            aug[static_cast<std::size_t>(eq)][static_cast<std::size_t>(s * 2 + i)] = addmod(
                aug[static_cast<std::size_t>(eq)][static_cast<std::size_t>(s * 2 + i)], psj, p);
          }
          aug[static_cast<std::size_t>(eq)][6] = (resid / pj) % p;
          ++eq;
        }
      if (!liftable) continue;
      auto sol = solve_mod_p(std::move(aug), 6, p);
      if (!sol.consistent) continue;

      std::size_t nfree = sol.kernel.size();
      std::vector<int64> assign(nfree, 0);
      while (true) {
        std::array<int64, 6> M{};
        for (int c = 0; c < 6; ++c) M[static_cast<std::size_t>(c)] = sol.particular[static_cast<std::size_t>(c)];
        for (std::size_t f = 0; f < nfree; ++f)
          if (assign[f] != 0)
            for (int c = 0; c < 6; ++c)
              M[static_cast<std::size_t>(c)] =
                  addmod(M[static_cast<std::size_t>(c)],
                         mulmod(assign[f], sol.kernel[f][static_cast<std::size_t>(c)], p), p);
        std::array<int64, 6> Lp{};
        for (int c = 0; c < 6; ++c)
          Lp[static_cast<std::size_t>(c)] =
              L[static_cast<std::size_t>(c)] + pj * M[static_cast<std::size_t>(c)];
        next.push_back(Lp);
        if (next.size() > budget.lifted_max_solutions)
          throw budget_error("stored solution set exceeded the lift budget");

        std::size_t pos = 0;
        while (pos < nfree) {
          if (++assign[pos] < p) break;
          assign[pos] = 0;
          ++pos;
        }
        if (pos == nfree) break;
      }
    }
    cur.swap(next);
    pj = pj1;
  }
  return BigInt(cur.size());
}

int64 checked_pk(int64 p, int k) {
  int64 pk = 1;
  for (int i = 0; i < k; ++i) {
    if (pk > (int64{1} << 62) / p) throw budget_error("modulus p^k exceeds the 64-bit range");
    pk *= p;
  }
  return pk;
}

}  // namespace

BigInt count_solutions_mod(const GramMatrix& gamma, const GramMatrix& lambda, int64 p, int k,
                           CountMode mode, const DensityBudget& budget) {
  if (gamma.dim() != 3 || lambda.dim() != 2)
    throw std::invalid_argument("counting expects a 3x3 form and a 2x2 target");
  if (p < 2 || !is_prime(p)) throw std::invalid_argument("modulus base must be prime");
  if (k < 0) throw std::invalid_argument("negative level");
  if (k == 0) return 1;
  checked_pk(p, k);

  bool ident = gamma == GramMatrix::identity(3);
  if (mode == CountMode::Auto)
    mode = ident ? CountMode::Fast
                 : (pow_fits(p, 6 * k, budget.direct_max_ops) ? CountMode::Direct
                                                              : CountMode::Lifted);
  switch (mode) {
    case CountMode::Direct:
      return count_direct(gamma, lambda, p, k, budget);
    case CountMode::Lifted:
      return count_lifted(gamma, lambda, p, k, budget);
    case CountMode::Fast: {
      if (!ident) throw std::invalid_argument("fast mode requires the identity form");
      DensityCtx ctx(p, budget.fast_max_ops);
      ctx.ensure_pow(k);
      int64 a = lambda.at(0, 0), b = lambda.at(0, 1), c = lambda.at(1, 1);
      return p == 2 ? count_gram_fast_fold2(ctx, a, b, c, k, budget)
                    : count_gram_fast_odd(ctx, a, b, c, k);
    }
    case CountMode::Auto:
      break;
  }
  throw std::logic_error("unreachable count mode");
}

DensityEstimate local_density(const GramMatrix& gamma, const GramMatrix& lambda, int64 p,
                              int k_max, const DensityBudget& budget) {
  if (lambda.dim() != 2) throw std::invalid_argument("density target must be 2x2");
  BigInt det = lambda.det();
  if (det <= 0) throw std::invalid_argument("density target must be positive definite");
  if (k_max < 1) throw std::invalid_argument("k_max must be at least 1");
  int64 stable_from = 2 * static_cast<int64>(valuation(p, BigInt(2) * det).value()) + 1;

  DensityEstimate est{p, 0, Rational(0), false};
  bool have_prev = false;
  Rational prev;
  for (int k = 1; k <= k_max; ++k) {
    BigInt n;
    try {
      n = count_solutions_mod(gamma, lambda, p, k, CountMode::Auto, budget);
    } catch (const budget_error&) {
      return est;  // last completed level, not stabilized
    }
    BigInt denom = boost::multiprecision::pow(BigInt(p), static_cast<unsigned>(3 * k));
    Rational val(n, denom);
    est = DensityEstimate{p, k, val, false};
    if (have_prev && val == prev && k >= stable_from) {
      est.stabilized = true;
      return est;
    }
    prev = val;
    have_prev = true;
  }
  return est;
}

std::vector<int64> beta_exponents(const GramMatrix& lambda, int64 p,
                                  std::span<const int64> l) {
  int n = lambda.dim();
  if (static_cast<int>(l.size()) != n) throw std::invalid_argument("one scale per column required");
  for (int64 li : l)
    if (li < 0) throw std::invalid_argument("scales must be nonnegative");
  if (p < 2 || !is_prime(p)) throw std::invalid_argument("p must be prime");

  std::vector<int64> prefix(static_cast<std::size_t>(n) + 1, 0);
  for (int i = 0; i < n; ++i) prefix[static_cast<std::size_t>(i + 1)] = prefix[static_cast<std::size_t>(i)] + l[static_cast<std::size_t>(i)];

  std::vector<int64> betas;
  for (int i = 2; i <= n; ++i) {
    int64 li = l[static_cast<std::size_t>(i - 1)];
    int64 best = (i - 1) * li;  // j = 0 term
    for (int j = 1; j <= i - 1; ++j) {
      std::vector<int> rows(static_cast<std::size_t>(j));
      for (int r = 0; r < j; ++r) rows[static_cast<std::size_t>(r)] = r;
      ExtendedNat minval = ExtendedNat::infinity();
      for (int mask = 0; mask < (1 << n); ++mask) {
        if (__builtin_popcount(static_cast<unsigned>(mask)) != j) continue;
        std::vector<int> cols;
        for (int cidx = 0; cidx < n; ++cidx)
          if (mask & (1 << cidx)) cols.push_back(cidx);
        BigInt mu = minor_det(lambda, rows, cols);
        minval = std::min(minval, valuation(p, mu));
      }
      if (minval == ExtendedNat::infinity()) continue;
      int64 term = static_cast<int64>(i - 1 - j) * li + static_cast<int64>(minval.value()) -
                   prefix[static_cast<std::size_t>(j)];
      best = std::min(best, term);
    }
    betas.push_back(best);
  }
  return betas;
}

namespace {

Rational pow_rational(int64 p, int64 e) {
  BigInt num = 1;
  for (int64 i = 0; i < (e < 0 ? -e : e); ++i) num *= p;
  return e >= 0 ? Rational(num) : Rational(BigInt(1), num);
}

Rational bound_div_impl(const GramMatrix& lambda, int64 p, bool drop_negative) {
  BigInt det = lambda.det();
  if (det == 0) throw std::invalid_argument("degenerate target rejected");
  ExtendedNat o = valuation(p, det);
  if (o.value() < 1) throw std::invalid_argument("p must divide the determinant");
  int64 omax = static_cast<int64>(o.value());
  int n = lambda.dim();

  Rational sum = 0;
  std::vector<int64> l(static_cast<std::size_t>(n), 0);
  while (true) {
    int64 total = 0;
    for (int64 li : l) total += li;
    if (total <= omax) {
      auto betas = beta_exponents(lambda, p, l);
      bool keep = true;
      if (drop_negative)
        for (int64 bval : betas)
          if (bval < 0) keep = false;
      if (keep) {
        int64 expo = 0;
        for (int64 bval : betas) expo += bval;
        sum += pow_rational(p, expo);
      }
    }
    int pos = 0;
    while (pos < n) {
      if (++l[static_cast<std::size_t>(pos)] <= omax) break;
      l[static_cast<std::size_t>(pos)] = 0;
      ++pos;
    }
    if (pos == n) break;
  }
  return sum;
}

}  // namespace

Rational density_bound_div(const GramMatrix& lambda, int64 p) {
  return bound_div_impl(lambda, p, false);
}

Rational density_bound_div_nonneg(const GramMatrix& lambda, int64 p) {
  return bound_div_impl(lambda, p, true);
}

NondivCheck density_bound_nondiv_check(std::span<const GramMatrix> corpus, int64 max_p,
                                       const DensityBudget& budget) {
  NondivCheck out;
  GramMatrix id3 = GramMatrix::identity(3);
  bool first = true;
  for (const auto& lambda : corpus) {
    BigInt det2 = BigInt(2) * lambda.det();
    for (int64 p = 2; p <= max_p; ++p) {
      if (!is_prime(p)) continue;
      if (det2 % p == 0) continue;
      DensityEstimate est = local_density(id3, lambda, p, 3, budget);
      NondivRow row{lambda, p, est.value, (est.value - 1) * p * p};
      if (first || row.scaled > out.max_scaled) out.max_scaled = row.scaled;
      first = false;
      out.rows.push_back(std::move(row));
      ++out.pairs;
    }
  }
  return out;
}

SiegelReport siegel_product_bound(const GramMatrix& lambda, const DensityBudget& budget) {
  if (lambda.dim() != 2) throw std::invalid_argument("expects a 2x2 target");
  BigInt det = lambda.det();
  if (det <= 0) throw std::invalid_argument("target must be positive definite");
  if (det > BigInt(std::numeric_limits<int64>::max()))
    throw std::invalid_argument("determinant too large to factor");
  int64 d = static_cast<int64>(det);

  SiegelReport out;
  GramMatrix id3 = GramMatrix::identity(3);
  int64 rem = d;
  for (int64 p = 2; p * p <= rem; ++p) {
    if (rem % p != 0) continue;
    while (rem % p == 0) rem /= p;
    int64 o = static_cast<int64>(valuation(p, BigInt(2) * det).value());
    DensityEstimate est = local_density(id3, lambda, p, static_cast<int>(2 * o + 3), budget);
    out.partial = out.partial || !est.stabilized;
    out.product *= est.value;
    out.factors.push_back(est);
  }
  if (rem > 1) {
    int64 o = static_cast<int64>(valuation(rem, BigInt(2) * det).value());
    DensityEstimate est = local_density(id3, lambda, rem, static_cast<int>(2 * o + 3), budget);
    out.partial = out.partial || !est.stabilized;
    out.product *= est.value;
    out.factors.push_back(est);
  }

  out.gcd12 = std::gcd(lambda.at(0, 0), lambda.at(1, 1));
  SphereTable table = SphereTable::build(std::max(lambda.at(0, 0), lambda.at(1, 1)));
  out.n_prime = count_embeddings2(lambda, table);
  return out;
}

std::vector<GramMatrix> random_gram_corpus(int dim, std::size_t count, std::uint64_t seed,
                                           int64 coord_bound, bool require_definite) {
  if (dim != 2 && dim != 3) throw std::invalid_argument("dimension must be 2 or 3");
  if (coord_bound < 1) throw std::invalid_argument("coordinate bound must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int64> dist(-coord_bound, coord_bound);
  std::vector<GramMatrix> out;
  out.reserve(count);
  std::size_t guard = 0;
  while (out.size() < count) {
    if (++guard > 1000 * (count + 1))
      throw std::runtime_error("corpus generation failed to find definite matrices");
    std::vector<Vec3> vs;
    for (int i = 0; i < dim; ++i) vs.push_back(Vec3{dist(rng), dist(rng), dist(rng)});
    GramMatrix g = gram(vs);
    if (require_definite && !g.positive_definite()) continue;
    out.push_back(g);
  }
  return out;
}

namespace detail {

BigInt count_binary_quadratic(int64 a, int64 b, int64 c, int64 d, int64 e, int64 f, int64 p,
                              int k, std::uint64_t max_ops) {
  if (p < 2 || !is_prime(p)) throw std::invalid_argument("p must be prime");
  if (k < 0) throw std::invalid_argument("negative level");
  if (k == 0) return 1;
  DensityCtx ctx(p, max_ops);
  ctx.ensure_pow(k);
  int64 pk = ctx.pw[static_cast<std::size_t>(k)];
  return big_from_i128(ctx.bq(reduce_mod(a, pk), reduce_mod(b, pk), reduce_mod(c, pk),
                              reduce_mod(d, pk), reduce_mod(e, pk), reduce_mod(f, pk), k));
}

BigInt count_sphere3_mod(int64 w, int64 p, int k) {
  if (p < 2 || !is_prime(p)) throw std::invalid_argument("p must be prime");
  if (k < 0) throw std::invalid_argument("negative level");
  DensityCtx ctx(p, std::uint64_t{1} << 30);
  return big_from_i128(ctx.sphere3(w, k));
}

BigInt count_line_sphere(Vec3 x, int64 b, int64 c, int64 p, int k, std::uint64_t max_ops) {
  if (p < 2 || !is_prime(p)) throw std::invalid_argument("p must be prime");
  if (k < 0) throw std::invalid_argument("negative level");
  DensityCtx ctx(p, max_ops);
  ctx.ensure_pow(k);
  return big_from_i128(ctx.line_sphere({x.x, x.y, x.z}, b, c, k));
}

}  // namespace detail

}  // namespace tetra
