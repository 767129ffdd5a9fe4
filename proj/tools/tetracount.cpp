// Command line front end. Every subcommand prints exact numbers (integers or
// num/den fractions as strings); floating point appears only in fitted
// exponents. Wall clock time lives in its own "seconds" field so the rest of
// a report is byte-identical across reruns.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tetra/density.hpp"
#include "tetra/embeddings.hpp"
#include "tetra/enumerate.hpp"
#include "tetra/io.hpp"
#include "tetra/lattice.hpp"
#include "tetra/pipeline.hpp"
#include "tetra/sphere.hpp"
#include "tetra/version.hpp"

namespace {

using nlohmann::ordered_json;
using namespace tetra;

struct GlobalOpts {
  std::string cache_dir_flag;
  int threads = 1;
  std::string out;
  std::uint64_t seed = 12345;
};

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

void deliver(const GlobalOpts& g, const std::string& text) {
  if (g.out.empty()) {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
  } else {
    atomic_write_file(g.out, text);
  }
}

void deliver_json(const GlobalOpts& g, ordered_json j) {
  deliver(g, j.dump(2) + "\n");
}

ordered_json report_head(const std::string& command) {
  ordered_json j;
  j["version"] = kVersion;
  j["command"] = command;
  return j;
}

std::string rat(const Rational& r) { return rational_string(r); }

std::vector<std::int64_t> parse_int_list(const std::string& s, const char* what) {
  std::vector<std::int64_t> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      out.push_back(std::stoll(item));
    } catch (const std::exception&) {
      throw CLI::ValidationError(std::string(what) + ": not an integer: " + item);
    }
  }
  if (out.empty()) throw CLI::ValidationError(std::string(what) + ": empty list");
  return out;
}

GramMatrix parse_gram(const std::string& s) {
  std::vector<std::int64_t> v = parse_int_list(s, "--gram");
  if (v.size() == 3) return GramMatrix::sym2(v[0], v[1], v[2]);
  if (v.size() == 6) return GramMatrix::sym3(v[0], v[1], v[2], v[3], v[4], v[5]);
  throw CLI::ValidationError("--gram takes 3 values (2x2: l11,l12,l22) or 6 (3x3 upper row-major)");
}

void parse_threshold(const std::string& s, std::int64_t& num, std::int64_t& den) {
  auto slash = s.find('/');
  try {
    if (slash == std::string::npos) {
      num = std::stoll(s);
      den = 1;
    } else {
      num = std::stoll(s.substr(0, slash));
      den = std::stoll(s.substr(slash + 1));
    }
  } catch (const std::exception&) {
    throw CLI::ValidationError("--threshold: expected NUM or NUM/DEN");
  }
  if (den < 1 || num < 0) throw CLI::ValidationError("--threshold: needs num >= 0, den >= 1");
}

std::vector<GramMatrix> load_corpus_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CLI::ValidationError("--corpus: cannot open " + path);
  std::vector<GramMatrix> out;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (first) {
      first = false;
      if (line.rfind("l11", 0) == 0) continue;  // header row
    }
    std::vector<std::int64_t> v = parse_int_list(line, "--corpus row");
    if (v.size() != 3) throw CLI::ValidationError("--corpus: rows must be l11,l12,l22");
    out.push_back(GramMatrix::sym2(v[0], v[1], v[2]));
  }
  if (out.empty()) throw CLI::ValidationError("--corpus: no rows in " + path);
  return out;
}

int run_count_classes(const GlobalOpts& g, std::int64_t q, bool degenerate, int shards) {
  Stopwatch sw;
  ClassTable table = enumerate_classes(q, degenerate, shards, g.threads);
  std::string csv = table.to_csv();

  BigInt points = BigInt(q + 1) * (q + 1) * (q + 1);
  BigInt subsets = points * (points - 1) * (points - 2) * (points - 3) / 24;

  ordered_json j = report_head("count-classes");
  j["q"] = q;
  j["include_degenerate"] = degenerate;
  j["shards"] = shards;
  j["classes"] = table.classes.size();
  j["subsets"] = subsets.str();
  j["total_multiplicity"] = table.total_multiplicity().str();
  j["seconds"] = sw.seconds();

  if (g.out.empty()) {
    std::cout << csv;
    std::cerr << j.dump(2) << '\n';
  } else {
    atomic_write_file(g.out, csv);
    std::cout << j.dump(2) << '\n';
  }
  return 0;
}

int run_r3_table(const GlobalOpts& g, std::int64_t limit) {
  Stopwatch sw;
  auto cache = resolve_cache_dir(g.cache_dir_flag);
  SphereTable table = SphereTable::load_or_build(limit, cache, g.threads);
  std::string csv = table.to_csv();
  if (g.out.empty()) {
    std::cout << csv;
  } else {
    atomic_write_file(g.out, csv);
    ordered_json j = report_head("r3-table");
    j["limit"] = limit;
    j["rows"] = limit + 1;
    j["seconds"] = sw.seconds();
    std::cout << j.dump(2) << '\n';
  }
  return 0;
}

int run_popular_radii(const GlobalOpts& g, std::int64_t q, const std::string& threshold) {
  std::int64_t num = 1, den = 2;
  parse_threshold(threshold, num, den);
  Stopwatch sw;
  auto cache = resolve_cache_dir(g.cache_dir_flag);
  SphereTable table = SphereTable::load_or_build(q * q, cache, g.threads);
  RadiusSet radii = popular_radii(q, table, num, den);

  ordered_json j = report_head("popular-radii");
  j["q"] = q;
  j["threshold"] = std::to_string(num) + "/" + std::to_string(den);
  j["count"] = radii.members.size();
  j["members"] = radii.members;
  j["seconds"] = sw.seconds();
  deliver_json(g, std::move(j));
  return 0;
}

int run_gcd_stats(const GlobalOpts& g, std::int64_t q, const std::string& threshold) {
  std::int64_t num = 1, den = 2;
  parse_threshold(threshold, num, den);
  Stopwatch sw;
  auto cache = resolve_cache_dir(g.cache_dir_flag);
  SphereTable table = SphereTable::load_or_build(q * q, cache, g.threads);
  RadiusSet radii = popular_radii(q, table, num, den);
  GcdDistribution dist = gcd_pair_distribution(radii);
  Rational s = inverse_gcd_sum(radii, dist);
  GcdBoundCheck check = gcd_tuple_bound_check(q, radii, dist);

  ordered_json j = report_head("gcd-stats");
  j["q"] = q;
  j["threshold"] = std::to_string(num) + "/" + std::to_string(den);
  j["a_count"] = radii.members.size();
  ordered_json d = ordered_json::object();
  for (const auto& [dd, cnt] : dist) d[std::to_string(dd)] = cnt;
  j["pair_gcd_distribution"] = std::move(d);
  j["s_value"] = rat(s);
  j["tuple_bound_ok"] = check.ok;
  if (!check.ok) j["violating_d"] = check.violating_d;
  j["median_gcd"] = check.median_gcd;
  j["fraction_gcd_le_10"] = rat(check.fraction_le_10);
  j["seconds"] = sw.seconds();
  deliver_json(g, std::move(j));
  return 0;
}

int run_count_embeddings(const GlobalOpts& g, const std::string& gram_str) {
  GramMatrix gm = parse_gram(gram_str);
  Stopwatch sw;
  std::int64_t max_diag = 0;
  for (int i = 0; i < gm.dim(); ++i) max_diag = std::max(max_diag, gm.at(i, i));
  auto cache = resolve_cache_dir(g.cache_dir_flag);
  SphereTable table = SphereTable::load_or_build(max_diag, cache, g.threads);
  std::int64_t count = gm.dim() == 2 ? count_embeddings2(gm, table) : count_embeddings3(gm, table);

  ordered_json j = report_head("count-embeddings");
  ordered_json entries = ordered_json::array();
  for (int i = 0; i < gm.dim(); ++i)
    for (int k = i; k < gm.dim(); ++k) entries.push_back(gm.at(i, k));
  j["gram"] = std::move(entries);
  j["dim"] = gm.dim();
  j["count"] = count;
  j["seconds"] = sw.seconds();
  deliver_json(g, std::move(j));
  return 0;
}

int run_verify_gcd_bound(const GlobalOpts& g, std::int64_t q) {
  Stopwatch sw;
  GcdBoundSurvey survey = verify_gcd_bound(q, g.threads);
  std::string csv = survey.to_csv();

  ordered_json j = report_head("verify-gcd-bound");
  j["q"] = q;
  j["classes"] = survey.rows.size();
  j["max_ratio12"] = rat(survey.max_ratio12);
  j["max_ratio_no3"] = rat(survey.max_ratio_no3);
  j["seconds"] = sw.seconds();

  if (g.out.empty()) {
    std::cout << csv;
    std::cerr << j.dump(2) << '\n';
  } else {
    atomic_write_file(g.out, csv);
    std::cout << j.dump(2) << '\n';
  }
  return 0;
}

int run_local_density(const GlobalOpts& g, const std::string& gram_str, std::int64_t p,
                      int kmax) {
  GramMatrix gm = parse_gram(gram_str);
  if (gm.dim() != 2)
    throw CLI::ValidationError("local-density expects a 2x2 target: --gram l11,l12,l22");
  Stopwatch sw;
  DensityEstimate est = local_density(GramMatrix::identity(3), gm, p, kmax);

  ordered_json j = report_head("local-density");
  ordered_json entries = ordered_json::array();
  for (int i = 0; i < 2; ++i)
    for (int k = i; k < 2; ++k) entries.push_back(gm.at(i, k));
  j["gram"] = std::move(entries);
  j["p"] = est.p;
  j["k"] = est.k;
  j["numerator"] = numerator(est.value).str();
  j["denominator"] = denominator(est.value).str();
  j["stabilized"] = est.stabilized;
  j["seconds"] = sw.seconds();
  deliver_json(g, std::move(j));
  return 0;
}

int run_density_bounds(const GlobalOpts& g, const std::string& corpus_path, std::size_t random_n,
                       std::int64_t max_p, std::int64_t coord_bound) {
  Stopwatch sw;
  std::vector<GramMatrix> corpus;
  if (!corpus_path.empty()) corpus = load_corpus_csv(corpus_path);
  if (random_n > 0) {
    auto extra = random_gram_corpus(2, random_n, g.seed, coord_bound);
    corpus.insert(corpus.end(), extra.begin(), extra.end());
  }
  if (corpus.empty())
    throw CLI::ValidationError("density-bounds needs --corpus and/or --random N");

  ordered_json j = report_head("density-bounds");
  j["corpus_size"] = corpus.size();
  j["seed"] = g.seed;
  j["max_p"] = max_p;

  NondivCheck nondiv = density_bound_nondiv_check(corpus, max_p);
  ordered_json nd;
  nd["pairs"] = nondiv.pairs;
  nd["max_scaled"] = rat(nondiv.max_scaled);
  j["nondividing"] = std::move(nd);

  // dividing primes: nu_p against the closed-form bound, constant logged per p
  ordered_json dividing = ordered_json::array();
  for (std::int64_t p : {2, 3, 5}) {
    Rational worst = 0;
    std::size_t used = 0;
    bool partial = false;
    for (const auto& lam : corpus) {
      BigInt det = lam.det();
      if (det == 0) continue;
      ExtendedNat op = valuation(p, det);
      if (op.value() == 0 || op.value() > 4) continue;
      Rational bound = density_bound_div(lam, p);
      int kmax = 2 * static_cast<int>(valuation(p, BigInt(2) * det).value()) + 3;
      DensityEstimate est = local_density(GramMatrix::identity(3), lam, p, kmax);
      if (!est.stabilized) {
        partial = true;
        continue;
      }
      ++used;
      if (bound > 0) worst = std::max(worst, Rational(est.value / bound));
    }
    ordered_json row;
    row["p"] = p;
    row["lambdas"] = used;
    row["c_prime"] = rat(worst);
    row["partial"] = partial;
    dividing.push_back(std::move(row));
  }
  j["dividing"] = std::move(dividing);

  // embedding count against the finite density product
  Rational worst_sig = 0;
  std::size_t sig_used = 0, sig_partial = 0;
  for (const auto& lam : corpus) {
    if (lam.det() == 0) continue;
    SiegelReport rep = siegel_product_bound(lam);
    if (rep.partial) {
      ++sig_partial;
      continue;
    }
    if (rep.product > 0 && rep.n_prime > 0) {
      ++sig_used;
      worst_sig = std::max(worst_sig, Rational(Rational(rep.n_prime) / rep.product));
    }
  }
  ordered_json sig;
  sig["lambdas"] = sig_used;
  sig["partial"] = sig_partial;
  sig["c_double_prime"] = rat(worst_sig);
  j["embedding_vs_product"] = std::move(sig);

  j["seconds"] = sw.seconds();
  deliver_json(g, std::move(j));
  return 0;
}

int run_lower_bound_report(const GlobalOpts& g, const std::string& qs_str,
                           const std::string& threshold) {
  std::int64_t num = 1, den = 2;
  parse_threshold(threshold, num, den);
  std::vector<std::int64_t> qs = parse_int_list(qs_str, "--qs");
  Stopwatch sw;
  auto cache = resolve_cache_dir(g.cache_dir_flag);
  LowerBoundReport rep = lower_bound_report(qs, cache, g.threads, num, den);

  ordered_json j = report_head("lower-bound-report");
  j["qs"] = qs;
  j["threshold"] = std::to_string(num) + "/" + std::to_string(den);
  ordered_json rows = ordered_json::array();
  for (const auto& row : rep.rows) {
    ordered_json r;
    r["q"] = row.q;
    r["a_count"] = row.a_count;
    r["s_value"] = rat(row.s_value);
    r["proxy"] = rat(row.proxy);
    rows.push_back(std::move(r));
  }
  j["rows"] = std::move(rows);
  if (rep.has_fits) {
    ordered_json fits;
    fits["a_count_exponent"] = rep.fit_a.slope;
    fits["s_value_exponent"] = rep.fit_s.slope;
    fits["proxy_exponent"] = rep.fit_proxy.slope;
    j["fits"] = std::move(fits);
  }
  j["seconds"] = sw.seconds();

  if (g.out.empty()) {
    deliver_json(g, std::move(j));
  } else {
    atomic_write_file(g.out, rep.to_csv());
    std::cout << j.dump(2) << '\n';
  }
  return 0;
}

int run_verify_all(const GlobalOpts& g, int q) {
  (void)g;
  std::vector<SuiteResult> results = verify_all(q);
  int failures = 0;
  for (const auto& r : results) {
    std::cout << (r.passed ? "PASS " : "FAIL ") << r.name;
    if (!r.passed) {
      std::cout << ": " << r.detail;
      ++failures;
    }
    std::cout << '\n';
  }
  if (failures > 0) std::cout << failures << " suite(s) failed\n";
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact congruence-class and lattice-sphere counting toolkit"};
  app.require_subcommand(1);

  GlobalOpts g;
  app.add_option("--cache-dir", g.cache_dir_flag,
                 "Cache directory for sphere tables (env TETRACOUNT_CACHE_DIR)");
  app.add_option("--threads", g.threads, "Worker threads")->check(CLI::Range(1, 256));
  app.add_option("--out", g.out, "Write the primary output to this file");
  app.add_option("--seed", g.seed, "Seed for randomized corpora");

  std::int64_t q = 2;
  bool degenerate = false;
  int shards = 1;
  auto* cc = app.add_subcommand("count-classes", "Enumerate 4-point congruence classes in [0,q]^3");
  cc->add_option("--q", q, "Box size")->required();
  cc->add_flag("--include-degenerate", degenerate, "Keep coplanar 4-point configurations");
  cc->add_option("--shards", shards, "Shard count for the enumeration")->check(CLI::Range(1, 4096));

  std::int64_t limit = 100;
  auto* rt = app.add_subcommand("r3-table", "Table of lattice point counts on spheres");
  rt->add_option("--limit", limit, "Largest squared radius")->required();

  std::int64_t pr_q = 8;
  std::string threshold = "1/2";
  auto* pr = app.add_subcommand("popular-radii", "Radii r <= q^2 whose sphere count meets the threshold");
  pr->add_option("--q", pr_q, "Scale")->required();
  pr->add_option("--threshold", threshold, "Popularity threshold as a fraction of q (default 1/2)");

  std::int64_t gs_q = 8;
  auto* gs = app.add_subcommand("gcd-stats", "Pair gcd distribution over the popular radius set");
  gs->add_option("--q", gs_q, "Scale")->required();
  gs->add_option("--threshold", threshold, "Popularity threshold (default 1/2)");

  std::string gram_str;
  auto* ce = app.add_subcommand("count-embeddings", "Ordered tuples of lattice vectors with a given Gram matrix");
  ce->add_option("--gram", gram_str, "3 values l11,l12,l22 or 6 values l11,l12,l13,l22,l23,l33")->required();

  std::int64_t vg_q = 3;
  auto* vg = app.add_subcommand("verify-gcd-bound", "Embedding count vs diagonal gcd over all classes at scale q");
  vg->add_option("--q", vg_q, "Box size")->required();

  std::string ld_gram;
  std::int64_t ld_p = 2;
  int ld_kmax = 8;
  auto* ld = app.add_subcommand("local-density", "Normalized solution counts of L^T L = Lambda mod p^k");
  ld->add_option("--gram", ld_gram, "Target 2x2 Gram: l11,l12,l22")->required();
  ld->add_option("--p", ld_p, "Prime")->required();
  ld->add_option("--kmax", ld_kmax, "Highest level to try")->check(CLI::Range(1, 64));

  std::string corpus_path;
  std::size_t random_n = 0;
  std::int64_t max_p = 13;
  std::int64_t coord_bound = 12;
  auto* db = app.add_subcommand("density-bounds", "Local density bounds over a corpus of 2x2 Gram matrices");
  db->add_option("--corpus", corpus_path, "CSV of rows l11,l12,l22");
  db->add_option("--random", random_n, "Append this many seeded random Gram matrices");
  db->add_option("--max-p", max_p, "Largest prime for the non-dividing scan");
  db->add_option("--coord-bound", coord_bound, "Coordinate range for random vectors");

  std::string qs_str = "8,16,32,64,128";
  auto* lb = app.add_subcommand("lower-bound-report", "Radius pipeline sweep with growth exponent fits");
  lb->add_option("--qs", qs_str, "Comma separated scales");
  lb->add_option("--threshold", threshold, "Popularity threshold (default 1/2)");

  int va_q = 2;
  auto* va = app.add_subcommand("verify-all", "Cross-route agreement and invariant suites");
  va->add_option("--q", va_q, "Scale of the enumeration suites")->check(CLI::Range(1, 3));

  for (CLI::App* sc : app.get_subcommands([](CLI::App*) { return true; })) sc->fallthrough();

  CLI11_PARSE(app, argc, argv);

  try {
    if (cc->parsed()) return run_count_classes(g, q, degenerate, shards);
    if (rt->parsed()) return run_r3_table(g, limit);
    if (pr->parsed()) return run_popular_radii(g, pr_q, threshold);
    if (gs->parsed()) return run_gcd_stats(g, gs_q, threshold);
    if (ce->parsed()) return run_count_embeddings(g, gram_str);
    if (vg->parsed()) return run_verify_gcd_bound(g, vg_q);
    if (ld->parsed()) return run_local_density(g, ld_gram, ld_p, ld_kmax);
    if (db->parsed()) return run_density_bounds(g, corpus_path, random_n, max_p, coord_bound);
    if (lb->parsed()) return run_lower_bound_report(g, qs_str, threshold);
    if (va->parsed()) return run_verify_all(g, va_q);
  } catch (const CLI::ValidationError& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return 2;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return 3;
  }
  return 0;
}
