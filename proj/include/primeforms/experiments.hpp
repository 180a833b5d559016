#pragma once

// Desk-scale experiments: how many primitive forms are locally solvable, the
// odd-coefficient family L'(A) and its series constant, and the empirical
// proportion rho(A) of locally solvable forms with a small prime solution.

#include "primeforms/local.hpp"
#include "primeforms/rational.hpp"
#include "primeforms/solver.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace primeforms {

inline constexpr double kMaxDensityA = 300;

/// Fast local solvability test (same answer as is_locally_solvable, no witness).
bool locally_solvable_fast(const CoeffTuple& a);

/// #L(A): primitive tuples with non-zero entries and ||a|| <= A.
uint64_t enumerate_L(double A);
/// #L^loc(A).
uint64_t enumerate_L_loc(double A);

/// Visits every a in L(A) (or L^loc(A)); for small A only.
void for_each_L(double A, const std::function<void(const CoeffTuple&)>& visit);
void for_each_L_loc(double A, const std::function<void(const CoeffTuple&)>& visit);

/// #{a in N^4 : max a_i <= A, all a_i odd, (a1 a2, a3) = (a1 a2, a4) = 1}.
/// Note the sup-norm box here, against the Euclidean ball of L(A).
uint64_t enumerate_L_prime(double A);

/// #{n <= X : gcd(n, q) = 1}.
uint64_t coprime_count(double X, int64_t q);

/// #{(n, m) : n, m <= X odd, q | nm}; 0 for even q.
uint64_t odd_pair_divisibility_count(double X, int64_t q);

/// Main term X^2/(4 q^2) sum_{d | q} d phi(q/d) for odd q, 0 for even q.
double odd_pair_main_term(double X, int64_t q);

struct SeriesConstant {
  int64_t truncation = 0;
  /// sum over odd squarefree d, k <= truncation of
  /// mu(d) mu(k) (d,k) / (d^2 k^2) * sum_{l | lcm(d,k)} phi(l)/l
  double series = 0;
  double constant = 0;    ///< series / 16, the leading coefficient of #L'(A) / A^4
  double tail_bound = 0;  ///< (1 + log T) / T, the shape of the truncation error
};

SeriesConstant lprime_series_constant(int64_t truncation);

struct DensityReport {
  double A = 0;
  uint64_t count_L = 0;
  uint64_t count_L_loc = 0;
  uint64_t count_L_prime = 0;
  Rational ratio_loc;
  double Lprime_over_A4 = 0;
  double C_truncated = 0;

  static std::string csv_header();
  [[nodiscard]] std::string csv_row() const;
  [[nodiscard]] std::string to_json() const;
};

DensityReport density_report(double A, int64_t series_truncation = 10000);

/// Solver bound for one a under the default policy: the threshold of bound_threshold.
struct RhoEntry {
  CoeffTuple a{};
  int weight = 0;  ///< number of tuples in L^loc(A) this representative stands for
  SolutionRecord record;
  bool bound_holds = false;

  [[nodiscard]] std::string to_json() const;
};

struct RhoReport {
  double A = 0;
  uint64_t numerator = 0;    ///< weighted count of a with m(a)^3 <= |a| (log|a|)^4 loglog|a|
  uint64_t denominator = 0;  ///< #L^loc(A)
  uint64_t undecided = 0;    ///< solver stopped at B_max with the predicate still open
  double runtime_ms = 0;
  std::vector<RhoEntry> ledger;  ///< per orbit representative, when requested

  [[nodiscard]] double fraction() const;
  static std::string csv_header();
  [[nodiscard]] std::string csv_row() const;
};

struct RhoOptions {
  unsigned threads = 1;
  bool keep_ledger = false;
  /// B_max for a given a; default bound_threshold(a).
  std::function<int64_t(const CoeffTuple&)> b_policy;
};

/// Iterates orbit representatives of L^loc(A) under permutations and a -> -a;
/// m(a), |a| and local solvability are all invariant under that group.
RhoReport rho_of_A(double A, const RhoOptions& options = {});

/// One JSON object per line.
void write_jsonl(std::ostream& os, const std::vector<RhoEntry>& entries);

}  // namespace primeforms
