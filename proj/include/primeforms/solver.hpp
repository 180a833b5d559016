#pragma once

// The minimal prime solution m(a): the least M such that some tuple of
// primes with largest entry M solves a1 p1 + a2 p2 + a3 p3 + a4 p4 = 0.

#include "primeforms/counting.hpp"
#include "primeforms/local.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace primeforms {

struct SolutionRecord {
  CoeffTuple a{};
  std::optional<int64_t> m;           ///< empty: no solution with entries <= B_explored
  std::optional<PrimeTuple> witness;  ///< lexicographically smallest solution with max entry m
  int64_t B_explored = 0;

  [[nodiscard]] bool found() const { return m.has_value(); }
  /// {"a": [...], "m": 5 | "inf", "witness": [...] | null, "B_explored": n}
  [[nodiscard]] std::string to_json() const;
};

/// Hash-join entries allowed per solve (both sides together).
inline constexpr uint64_t kSolverEntryCap = uint64_t{1} << 28U;

/// Staged search over the primes q <= B_max in increasing order. At stage q
/// the new pairs (those containing q) on either side of
/// a1 p1 + a2 p2 = -(a3 p3 + a4 p4) are inserted into the two hash tables and
/// probed against the other side, which yields exactly the solutions whose
/// largest entry is q.
SolutionRecord min_prime_solution(const CoeffTuple& a, int64_t B_max);

/// The same search with a cached prime table and reusable join buffers, for
/// many solves in a row. Not thread-safe; use one per worker.
class PrimeSolver {
public:
  explicit PrimeSolver(int64_t prime_limit);
  ~PrimeSolver();
  PrimeSolver(const PrimeSolver&) = delete;
  PrimeSolver& operator=(const PrimeSolver&) = delete;

  /// B_max must not exceed the prime limit.
  SolutionRecord solve(const CoeffTuple& a, int64_t B_max);

private:
  struct Buffers;
  std::vector<int64_t> primes_;
  int64_t limit_;
  std::unique_ptr<Buffers> buffers_;
};

/// |a| = max |a_i|.
int64_t sup_norm(const CoeffTuple& a);

/// m^3 <= |a| (log |a|)^4 log log |a|, natural logs. Always false for |a| <= 15.
bool bound_predicate(const CoeffTuple& a, int64_t m);

/// ceil((|a| (log |a|)^4 log log |a|)^(1/3)) for |a| >= 16, else 0.
int64_t bound_threshold(const CoeffTuple& a);

}  // namespace primeforms
