#include "primeforms/experiments.hpp"

#include "primeforms/arith.hpp"
#include "primeforms/counting.hpp"
#include "primeforms/errors.hpp"
#include "primeforms/parallel.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <sstream>

namespace primeforms {

namespace {

int64_t odd_part(int64_t n) {
  while (n != 0 && n % 2 == 0) n /= 2;
  return n < 0 ? -n : n;
}

// Local conditions that only see |a_i|: lambda_2 even, and no odd prime
// dividing three of the entries.
bool magnitudes_solvable(int64_t m1, int64_t m2, int64_t m3, int64_t m4) {
  const int even = (m1 % 2 == 0) + (m2 % 2 == 0) + (m3 % 2 == 0) + (m4 % 2 == 0);
  if (even % 2 == 1) return false;
  const int64_t g12 = std::gcd(m1, m2);
  const int64_t g34 = std::gcd(m3, m4);
  return odd_part(std::gcd(g12, m3)) == 1 && odd_part(std::gcd(g12, m4)) == 1 &&
         odd_part(std::gcd(m1, g34)) == 1 && odd_part(std::gcd(m2, g34)) == 1;
}

int distinct_permutations(const std::array<int64_t, 4>& sorted) {
  int w = 24;
  int run = 1;
  for (int t = 1; t <= 4; ++t) {
    if (t < 4 && sorted[t] == sorted[t - 1]) {
      ++run;
    } else {
      for (int f = 2; f <= run; ++f) w /= f;
      run = 1;
    }
  }
  return w;
}

struct LCounts {
  uint64_t all = 0;
  uint64_t loc = 0;
};

// Sum over magnitude multisets m1 >= m2 >= m3 >= m4 >= 1 in the ball; each
// carries its distinct orderings times 16 sign patterns, 14 of them mixed.
LCounts count_L(double A) {
  if (A > kMaxDensityA)
    throw budget_error("enumerate_L: A exceeds the cap " + std::to_string(static_cast<int>(kMaxDensityA)));
  LCounts out;
  if (A < 2) return out;
  const long double A2 = static_cast<long double>(A) * A;
  auto fits = [&](int64_t s) { return static_cast<long double>(s) <= A2; };
  const auto amax = static_cast<int64_t>(std::floor(A));
  for (int64_t m1 = 1; m1 <= amax; ++m1) {
    if (!fits(m1 * m1 + 3)) break;
    for (int64_t m2 = 1; m2 <= m1 && fits(m1 * m1 + m2 * m2 + 2); ++m2) {
      const int64_t g2 = std::gcd(m1, m2);
      for (int64_t m3 = 1; m3 <= m2 && fits(m1 * m1 + m2 * m2 + m3 * m3 + 1); ++m3) {
        const int64_t g3 = std::gcd(g2, m3);
        const int64_t s3 = m1 * m1 + m2 * m2 + m3 * m3;
        for (int64_t m4 = 1; m4 <= m3 && fits(s3 + m4 * m4); ++m4) {
          if (std::gcd(g3, m4) != 1) continue;
          const auto perms = static_cast<uint64_t>(distinct_permutations({m1, m2, m3, m4}));
          out.all += 16 * perms;
          if (magnitudes_solvable(m1, m2, m3, m4)) out.loc += 14 * perms;
        }
      }
    }
  }
  return out;
}

std::string fmt12(double v) {
  std::ostringstream os;
  os << std::setprecision(12) << v;
  return os.str();
}

}  // namespace

bool locally_solvable_fast(const CoeffTuple& a) {
  const bool pos = std::any_of(a.begin(), a.end(), [](int64_t x) { return x > 0; });
  const bool neg = std::any_of(a.begin(), a.end(), [](int64_t x) { return x < 0; });
  if (!(pos && neg)) return false;
  auto m = [&](int i) { return a[static_cast<std::size_t>(i)] < 0 ? -a[static_cast<std::size_t>(i)] : a[static_cast<std::size_t>(i)]; };
  return magnitudes_solvable(m(0), m(1), m(2), m(3));
}

uint64_t enumerate_L(double A) { return count_L(A).all; }

uint64_t enumerate_L_loc(double A) { return count_L(A).loc; }

void for_each_L(double A, const std::function<void(const CoeffTuple&)>& visit) {
  if (A > 60) throw budget_error("for_each_L: A must be <= 60 for explicit iteration");
  if (A < 2) return;
  const auto h = static_cast<int64_t>(std::floor(A));
  const long double A2 = static_cast<long double>(A) * A;
  for (int64_t a1 = -h; a1 <= h; ++a1)
    for (int64_t a2 = -h; a2 <= h; ++a2)
      for (int64_t a3 = -h; a3 <= h; ++a3)
        for (int64_t a4 = -h; a4 <= h; ++a4) {
          const CoeffTuple a{a1, a2, a3, a4};
          if (static_cast<long double>(a1 * a1 + a2 * a2 + a3 * a3 + a4 * a4) > A2) continue;
          if (is_coeff_tuple(a)) visit(a);
        }
}

void for_each_L_loc(double A, const std::function<void(const CoeffTuple&)>& visit) {
  for_each_L(A, [&](const CoeffTuple& a) {
    if (locally_solvable_fast(a)) visit(a);
  });
}

uint64_t coprime_count(double X, int64_t q) {
  require(X >= 1, "coprime_count: X must be >= 1");
  require(q >= 1, "coprime_count: q must be >= 1");
  const auto n = static_cast<int64_t>(std::floor(X));
  std::vector<int64_t> ps;
  for (auto [p, e] : factorize(q)) ps.push_back(p);
  // inclusion-exclusion over squarefree divisors of q
  int64_t total = 0;
  const std::size_t subsets = std::size_t{1} << ps.size();
  for (std::size_t s = 0; s < subsets; ++s) {
    int64_t d = 1;
    int sign = 1;
    for (std::size_t i = 0; i < ps.size(); ++i)
      if (s >> i & 1U) {
        d *= ps[i];
        sign = -sign;
        if (d > n) break;
      }
    if (d <= n) total += sign * (n / d);
  }
  return static_cast<uint64_t>(total);
}

uint64_t odd_pair_divisibility_count(double X, int64_t q) {
  require(X >= 1, "odd_pair_divisibility_count: X must be >= 1");
  require(q >= 1, "odd_pair_divisibility_count: q must be >= 1");
  if (q % 2 == 0) return 0;
  const auto n = static_cast<int64_t>(std::floor(X));
  uint64_t total = 0;
  // q | nm iff q / gcd(q, n) | m
  for (int64_t a = 1; a <= n; a += 2) {
    const int64_t r = q / std::gcd(q, a);
    total += static_cast<uint64_t>((n / r + 1) / 2);  // odd multiples of the odd r
  }
  return total;
}

double odd_pair_main_term(double X, int64_t q) {
  require(q >= 1, "odd_pair_main_term: q must be >= 1");
  if (q % 2 == 0) return 0.0;
  int64_t s = 0;
  for (int64_t d = 1; d <= q; ++d)
    if (q % d == 0) s += d * euler_phi(q / d);
  return X * X / (4.0 * static_cast<double>(q) * static_cast<double>(q)) * static_cast<double>(s);
}

uint64_t enumerate_L_prime(double A) {
  require(A >= 1, "enumerate_L_prime: A must be >= 1");
  if (A > 20000) throw budget_error("enumerate_L_prime: A exceeds the cap 20000");
  const auto n = static_cast<int64_t>(std::floor(A));
  // odd a3, a4 <= n coprime to a1 a2 are the a <= n coprime to 2 rad(a1 a2)
  uint64_t total = 0;
  for (int64_t a1 = 1; a1 <= n; a1 += 2) {
    const int64_t r1 = radical(a1);
    for (int64_t a2 = 1; a2 <= n; a2 += 2) {
      const int64_t r2 = radical(a2);
      const int64_t q = 2 * r1 * (r2 / std::gcd(r1, r2));
      const uint64_t c = coprime_count(static_cast<double>(n), q);
      total += c * c;
    }
  }
  return total;
}

SeriesConstant lprime_series_constant(int64_t truncation) {
  require(truncation >= 1, "lprime_series_constant: truncation must be >= 1");
  require(truncation <= 1000000, "lprime_series_constant: truncation exceeds the cap 10^6");
  struct Term {
    int64_t n;
    double coeff;  // mu(n) / n^2
    double f;      // sum_{l | n} phi(l) / l = prod_{p | n} (2 - 1/p)
  };
  std::vector<Term> terms;
  for (int64_t n = 1; n <= truncation; n += 2) {
    const int mu = moebius(n);
    if (mu == 0) continue;
    double f = 1;
    for (auto [p, e] : factorize(n)) f *= 2.0 - 1.0 / static_cast<double>(p);
    terms.push_back({n, mu / (static_cast<double>(n) * static_cast<double>(n)), f});
  }
  std::vector<double> fs(static_cast<std::size_t>(truncation) + 1, 0.0);
  for (const auto& t : terms) fs[static_cast<std::size_t>(t.n)] = t.f;
  CompensatedSum s;
  for (const auto& d : terms) {
    CompensatedSum row;
    for (const auto& k : terms) {
      const int64_t g = std::gcd(d.n, k.n);
      // f is multiplicative on squarefree arguments: f(lcm) = f(d) f(k) / f(g)
      row.add(d.coeff * k.coeff * static_cast<double>(g) * d.f * k.f / fs[static_cast<std::size_t>(g)]);
    }
    s.add(row);
  }
  SeriesConstant out;
  out.truncation = truncation;
  out.series = s.value();
  out.constant = out.series / 16.0;
  out.tail_bound = (1.0 + std::log(static_cast<double>(truncation))) / static_cast<double>(truncation);
  return out;
}

std::string DensityReport::csv_header() {
  return "A,count_L,count_L_loc,count_L_prime,ratio_loc,lprime_over_A4,C_truncated";
}

std::string DensityReport::csv_row() const {
  std::ostringstream os;
  os << fmt12(A) << ',' << count_L << ',' << count_L_loc << ',' << count_L_prime << ',' << ratio_loc.str() << ','
     << fmt12(Lprime_over_A4) << ',' << fmt12(C_truncated);
  return os.str();
}

std::string DensityReport::to_json() const {
  nlohmann::json j;
  j["A"] = A;
  j["count_L"] = count_L;
  j["count_L_loc"] = count_L_loc;
  j["count_L_prime"] = count_L_prime;
  j["ratio_loc"] = ratio_loc.str();
  j["ratio_loc_value"] = ratio_loc.to_double();
  j["lprime_over_A4"] = Lprime_over_A4;
  j["C_truncated"] = C_truncated;
  return j.dump();
}

DensityReport density_report(double A, int64_t series_truncation) {
  require(A >= 2, "density_report: A must be >= 2");
  DensityReport r;
  r.A = A;
  const auto counts = count_L(A);
  r.count_L = counts.all;
  r.count_L_loc = counts.loc;
  r.count_L_prime = enumerate_L_prime(A);
  r.ratio_loc = Rational(static_cast<int64_t>(r.count_L_loc), static_cast<int64_t>(r.count_L));
  r.Lprime_over_A4 = static_cast<double>(r.count_L_prime) / std::pow(A, 4);
  r.C_truncated = lprime_series_constant(series_truncation).constant;
  return r;
}

std::string RhoEntry::to_json() const {
  nlohmann::json j;
  j["a"] = a;
  j["weight"] = weight;
  j["solvable"] = true;
  j["m_or_inf"] = record.m ? nlohmann::json(*record.m) : nlohmann::json("inf");
  j["bound_holds"] = bound_holds;
  j["witness"] = record.witness ? nlohmann::json(*record.witness) : nlohmann::json(nullptr);
  j["B_explored"] = record.B_explored;
  return j.dump();
}

double RhoReport::fraction() const {
  return denominator == 0 ? 0.0 : static_cast<double>(numerator) / static_cast<double>(denominator);
}

std::string RhoReport::csv_header() { return "A,fraction,undecided,runtime_ms"; }

std::string RhoReport::csv_row() const {
  std::ostringstream os;
  os << fmt12(A) << ',' << fmt12(fraction()) << ',' << undecided << ',' << fmt12(runtime_ms);
  return os.str();
}

RhoReport rho_of_A(double A, const RhoOptions& options) {
  require(A >= 16, "rho_of_A: A must be >= 16");
  if (A > kMaxDensityA)
    throw budget_error("rho_of_A: A exceeds the cap " + std::to_string(static_cast<int>(kMaxDensityA)));
  const auto start = std::chrono::steady_clock::now();
  const auto leads = orbit_leads(A);
  auto policy = options.b_policy ? options.b_policy : [](const CoeffTuple& a) { return bound_threshold(a); };

  struct Partial {
    uint64_t numerator = 0;
    uint64_t denominator = 0;
    uint64_t undecided = 0;
    std::vector<RhoEntry> ledger;
  };
  std::vector<Partial> parts(leads.size());
  parallel_chunks(leads.size(), options.threads, [&](std::size_t c) {
    Partial p;
    std::unique_ptr<PrimeSolver> solver;
    int64_t limit = 0;
    for (const auto& [a, weight] : orbits_with_lead(A, leads[c])) {
      if (!locally_solvable_fast(a)) continue;
      const auto w = static_cast<uint64_t>(weight);
      p.denominator += w;
      RhoEntry e;
      e.a = a;
      e.weight = weight;
      e.record.a = a;
      const int64_t threshold = bound_threshold(a);
      if (threshold > 0) {
        // largest m passing the predicate
        const int64_t m_star = bound_predicate(a, threshold) ? threshold : threshold - 1;
        const int64_t b = policy(a);
        if (b >= 2) {
          if (b > limit) {
            limit = std::max(b, 2 * limit);
            solver = std::make_unique<PrimeSolver>(limit);
          }
          e.record = solver->solve(a, b);
        }
        if (e.record.found()) {
          e.bound_holds = bound_predicate(a, *e.record.m);
        } else if (b < m_star) {
          p.undecided += w;
        }
      }
      if (e.bound_holds) p.numerator += w;
      if (options.keep_ledger) p.ledger.push_back(std::move(e));
    }
    parts[c] = std::move(p);
  });

  RhoReport r;
  r.A = A;
  for (auto& p : parts) {
    r.numerator += p.numerator;
    r.denominator += p.denominator;
    r.undecided += p.undecided;
    for (auto& e : p.ledger) r.ledger.push_back(std::move(e));
  }
  r.runtime_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return r;
}

void write_jsonl(std::ostream& os, const std::vector<RhoEntry>& entries) {
  for (const auto& e : entries) os << e.to_json() << '\n';
}

}  // namespace primeforms
