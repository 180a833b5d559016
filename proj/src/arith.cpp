#include "primeforms/arith.hpp"

#include "primeforms/errors.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace primeforms {

PrimeTable sieve_primes(int64_t limit) {
  require(limit >= 0, "sieve_primes: limit must be >= 0");
  PrimeTable table;
  table.limit_ = limit;
  if (limit < 2) {
    table.composite_.assign(static_cast<std::size_t>(limit + 1), true);
    return table;
  }
  auto& composite = table.composite_;
  composite.assign(static_cast<std::size_t>(limit + 1), false);
  composite[0] = composite[1] = true;
  for (int64_t i = 2; i * i <= limit; ++i) {
    if (composite[static_cast<std::size_t>(i)]) continue;
    for (int64_t j = i * i; j <= limit; j += i) composite[static_cast<std::size_t>(j)] = true;
  }
  for (int64_t i = 2; i <= limit; ++i)
    if (!composite[static_cast<std::size_t>(i)]) table.primes_.push_back(i);
  return table;
}

bool PrimeTable::is_prime(int64_t n) const {
  require(n >= 0 && n <= limit_, "PrimeTable::is_prime: n outside sieved range");
  return !composite_[static_cast<std::size_t>(n)];
}

std::span<const int64_t> PrimeTable::primes_up_to(int64_t bound) const {
  require(bound <= limit_, "PrimeTable::primes_up_to: bound exceeds sieve limit");
  auto end = std::upper_bound(primes_.begin(), primes_.end(), bound);
  return {primes_.data(), static_cast<std::size_t>(end - primes_.begin())};
}

std::vector<std::pair<int64_t, int>> factorize(int64_t n) {
  require(n >= 1, "factorize: n must be >= 1");
  std::vector<std::pair<int64_t, int>> out;
  auto strip = [&](int64_t p) {
    int e = 0;
    while (n % p == 0) {
      n /= p;
      ++e;
    }
    if (e > 0) out.emplace_back(p, e);
  };
  strip(2);
  strip(3);
  for (int64_t p = 5; p <= n / p; p += 6) {
    strip(p);
    strip(p + 2);
  }
  if (n > 1) out.emplace_back(n, 1);
  return out;
}

int64_t euler_phi(int64_t n) {
  require(n >= 1, "euler_phi: n must be >= 1");
  int64_t result = n;
  for (auto [p, e] : factorize(n)) result = result / p * (p - 1);
  return result;
}

int moebius(int64_t n) {
  require(n >= 1, "moebius: n must be >= 1");
  int sign = 1;
  for (auto [p, e] : factorize(n)) {
    if (e > 1) return 0;
    sign = -sign;
  }
  return sign;
}

int p_adic_valuation(int64_t p, int64_t n) {
  require(p >= 2, "p_adic_valuation: p must be prime");
  require(n != 0, "p_adic_valuation: n must be non-zero");
  int e = 0;
  while (n % p == 0) {
    n /= p;
    ++e;
  }
  return e;
}

int64_t radical(int64_t n) {
  require(n >= 1, "radical: n must be >= 1");
  int64_t r = 1;
  for (auto [p, e] : factorize(n)) r *= p;
  return r;
}

int omega(int64_t n) {
  require(n >= 1, "omega: n must be >= 1");
  return static_cast<int>(factorize(n).size());
}

int64_t checked_mul(int64_t a, int64_t b) {
  int64_t out = 0;
  if (__builtin_mul_overflow(a, b, &out))
    throw budget_error("integer overflow in " + std::to_string(a) + " * " + std::to_string(b));
  return out;
}

int64_t ipow(int64_t base, int exp) {
  require(exp >= 0, "ipow: negative exponent");
  int64_t result = 1;
  for (int i = 0; i < exp; ++i) result = checked_mul(result, base);
  return result;
}

int64_t ramanujan_sum_prime_power(int64_t p, int l, int64_t r) {
  require(l >= 1, "ramanujan_sum_prime_power: l must be >= 1");
  const int64_t below = ipow(p, l - 1);
  const int64_t full = below * p;
  if (r % below != 0) return 0;
  if (r % full != 0) return -below;
  return full - below;
}

int64_t ramanujan_sum(int64_t q, int64_t r) {
  require(q >= 1, "ramanujan_sum: q must be >= 1");
  int64_t value = 1;
  for (auto [p, e] : factorize(q)) value *= ramanujan_sum_prime_power(p, e, r);
  return value;
}

}  // namespace primeforms
