#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tetra/arith.hpp"
#include "tetra/lattice.hpp"

namespace tetra {

struct LowerBoundRow {
  int64 q = 0;
  std::uint64_t a_count = 0;  // popular radii at scale q
  Rational s_value = 0;       // |A| * sum dist[d]/d
  Rational proxy = 0;         // sum over A^3 of M1*M2*M3 / gcd(r1,r2)
};

struct LowerBoundReport {
  std::vector<LowerBoundRow> rows;
  int64 threshold_num = 1;
  int64 threshold_den = 2;
  bool has_fits = false;  // requires >= 3 usable rows
  LinearFit fit_a;        // log a_count vs log q
  LinearFit fit_s;        // log s_value vs log q
  LinearFit fit_proxy;    // log proxy vs log q
  std::string to_csv() const;  // q,a_count,s_num,s_den,proxy_num,proxy_den
};

// Sweeps the full radius pipeline at each q: sphere table to q^2, popular
// radius set, exact gcd pair distribution, the inverse-gcd sum, and the
// weighted sum over radius triples with the pair gcd in the denominator.
// One table at max(q)^2 is shared across the sweep.
LowerBoundReport lower_bound_report(std::span<const int64> qs,
                                    const std::optional<std::filesystem::path>& cache_dir = {},
                                    int threads = 1, int64 threshold_num = 1,
                                    int64 threshold_den = 2);

struct SuiteResult {
  std::string name;
  bool passed = false;
  std::string detail;  // empty on pass, failure description otherwise
};

using KeyFn = std::function<ClassKey(const std::array<Vec3, 4>&)>;

// Runs every cross-route agreement and invariant suite at small scale and
// names each result. A replacement key function can be injected so the
// separation suite's sensitivity is itself testable.
std::vector<SuiteResult> verify_all(int q_small, const KeyFn& key_fn = {});

bool all_passed(const std::vector<SuiteResult>& results);

}  // namespace tetra
