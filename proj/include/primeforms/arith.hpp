#pragma once

// Exact elementary arithmetic shared by every other module: the prime sieve,
// the classical multiplicative functions and Ramanujan sums. No floating
// point anywhere in here.

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace primeforms {

/// Primes up to a fixed limit with O(1) membership for n <= limit.
/// Immutable once built; safe to share between threads.
class PrimeTable {
public:
  PrimeTable() = default;

  [[nodiscard]] int64_t limit() const { return limit_; }
  [[nodiscard]] std::span<const int64_t> primes() const { return primes_; }
  [[nodiscard]] std::size_t count() const { return primes_.size(); }

  /// Primality of n; n must lie in [0, limit].
  [[nodiscard]] bool is_prime(int64_t n) const;

  /// Primes p <= bound (bound may exceed the limit only if it does not
  /// require unseen primes, i.e. bound <= limit).
  [[nodiscard]] std::span<const int64_t> primes_up_to(int64_t bound) const;

private:
  friend PrimeTable sieve_primes(int64_t limit);

  int64_t limit_ = -1;
  std::vector<int64_t> primes_;
  std::vector<bool> composite_;  // composite_[n] for n <= limit; 0 and 1 marked
};

/// Sieve of Eratosthenes over a flat bit array. limit < 2 gives an empty table.
PrimeTable sieve_primes(int64_t limit);

/// Prime factorisation by trial division, primes ascending. n >= 1.
std::vector<std::pair<int64_t, int>> factorize(int64_t n);

int64_t euler_phi(int64_t n);
int moebius(int64_t n);
int p_adic_valuation(int64_t p, int64_t n);
int64_t radical(int64_t n);

/// Number of distinct prime divisors.
int omega(int64_t n);

/// c_q(r): sum of e(ar/q) over reduced residues a mod q. Evaluated from the
/// prime-power closed form and multiplicativity in q.
int64_t ramanujan_sum(int64_t q, int64_t r);

/// c_{p^l}(r) from the three-case prime-power formula.
int64_t ramanujan_sum_prime_power(int64_t p, int l, int64_t r);

/// Checked integer power; raises budget_error on 64-bit overflow.
int64_t ipow(int64_t base, int exp);

/// Checked product; raises budget_error on 64-bit overflow.
int64_t checked_mul(int64_t a, int64_t b);

/// Non-negative residue of v modulo m (m >= 1).
inline int64_t mod_floor(int64_t v, int64_t m) {
  int64_t r = v % m;
  return r < 0 ? r + m : r;
}

}  // namespace primeforms
