#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "primeforms/arith.hpp"
#include "primeforms/errors.hpp"
#include "primeforms/random.hpp"
#include "primeforms/rational.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

using namespace primeforms;

namespace {

bool trial_division_prime(int64_t n) {
  if (n < 2) return false;
  for (int64_t d = 2; d * d <= n; ++d)
    if (n % d == 0) return false;
  return true;
}

// Sum of e(ar/q) over reduced residues, evaluated in long double and rounded.
int64_t ramanujan_oracle(int64_t q, int64_t r) {
  long double re = 0;
  for (int64_t a = 1; a <= q; ++a) {
    if (std::gcd(a, q) != 1) continue;
    int64_t k = ((a * r) % q + q) % q;
    re += std::cos(2.0L * std::numbers::pi_v<long double> * static_cast<long double>(k) / static_cast<long double>(q));
  }
  return static_cast<int64_t>(std::llround(re));
}

int64_t phi_oracle(int64_t n) {
  int64_t c = 0;
  for (int64_t k = 1; k <= n; ++k) c += std::gcd(k, n) == 1;
  return c;
}

}  // namespace

TEST_CASE("sieve") {
  auto t10 = sieve_primes(10);
  CHECK(std::vector<int64_t>(t10.primes().begin(), t10.primes().end()) == std::vector<int64_t>{2, 3, 5, 7});
  CHECK(sieve_primes(1).count() == 0);
  CHECK(sieve_primes(0).count() == 0);
  CHECK_THROWS_AS(sieve_primes(-1), precondition_error);
  CHECK(sieve_primes(100).count() == 25);

  auto t = sieve_primes(5000);
  int64_t previous = 0;
  for (int64_t p : t.primes()) {
    CHECK(p > previous);
    previous = p;
  }
  for (int64_t n = 0; n <= 5000; ++n) CHECK(t.is_prime(n) == trial_division_prime(n));
  CHECK(t.primes_up_to(20).size() == 8);
  CHECK_THROWS_AS((void)t.is_prime(5001), precondition_error);
}

TEST_CASE("euler phi and moebius") {
  CHECK(euler_phi(1) == 1);
  CHECK(euler_phi(9) == 6);
  CHECK(euler_phi(72) == 24);
  CHECK(euler_phi(72) == phi_oracle(72));
  CHECK_THROWS_AS(euler_phi(0), precondition_error);
  for (int64_t n = 1; n <= 300; ++n) CHECK(euler_phi(n) == phi_oracle(n));

  CHECK(moebius(1) == 1);
  CHECK(moebius(12) == 0);
  CHECK(moebius(30) == -1);
  CHECK_THROWS_AS(moebius(0), precondition_error);

  for (int64_t n = 1; n <= 10000; ++n) {
    int64_t s = 0;
    for (int64_t d = 1; d * d <= n; ++d) {
      if (n % d != 0) continue;
      s += euler_phi(d);
      if (d * d != n) s += euler_phi(n / d);
    }
    CHECK(s == n);
  }
}

TEST_CASE("multiplicativity on random coprime pairs") {
  CounterRng rng(2024);
  int tested = 0;
  while (tested < 2000) {
    auto m = static_cast<int64_t>(rng.next_u64() % 1000000) + 1;
    auto n = static_cast<int64_t>(rng.next_u64() % 1000000) + 1;
    if (std::gcd(m, n) != 1) continue;
    ++tested;
    CHECK(euler_phi(m * n) == euler_phi(m) * euler_phi(n));
    CHECK(moebius(m * n) == moebius(m) * moebius(n));
  }
}

TEST_CASE("valuation radical omega") {
  CHECK(p_adic_valuation(3, 18) == 2);
  CHECK(p_adic_valuation(2, 7) == 0);
  CHECK(p_adic_valuation(5, 250) == 3);
  CHECK(p_adic_valuation(2, -8) == 3);
  CHECK_THROWS_AS(p_adic_valuation(3, 0), precondition_error);
  CHECK(radical(12) == 6);
  CHECK(radical(72) == 6);
  CHECK(radical(1) == 1);
  CHECK(omega(1) == 0);
  CHECK(omega(30) == 3);
}

TEST_CASE("ramanujan sums") {
  CHECK(ramanujan_sum(9, 3) == -3);
  CHECK(ramanujan_sum(3, 6) == 2);
  CHECK(ramanujan_sum(4, 1) == 0);
  CHECK(ramanujan_sum(12, 2) == 2);
  CHECK(ramanujan_sum(12, 2) == ramanujan_oracle(12, 2));
  CHECK_THROWS_AS(ramanujan_sum(0, 1), precondition_error);
  for (int64_t q = 1; q <= 200; ++q)
    for (int64_t r = -200; r <= 200; ++r) REQUIRE(ramanujan_sum(q, r) == ramanujan_oracle(q, r));
  for (int64_t q = 1; q <= 1000; ++q) CHECK(ramanujan_sum(q, 0) == euler_phi(q));
}

TEST_CASE("checked integer helpers") {
  CHECK(ipow(3, 4) == 81);
  CHECK_THROWS_AS(ipow(10, 19), budget_error);
  CHECK_THROWS_AS(checked_mul(INT64_MAX, 2), budget_error);
  CHECK(mod_floor(-7, 3) == 2);
}

TEST_CASE("rational") {
  Rational a(6, -4);
  CHECK(a.num() == -3);
  CHECK(a.den() == 2);
  CHECK((Rational(9, 8) * Rational(2)).str() == "9/4");
  CHECK(Rational(2).str() == "2/1");
  CHECK(Rational::parse("15/16") == Rational(15, 16));
  CHECK(Rational::parse("-3") == Rational(-3));
  CHECK(Rational(1, 3) < Rational(1, 2));
  CHECK(pow(Rational(-1, 2), 3) == Rational(-1, 8));
  CHECK_THROWS_AS(Rational(1, 0), precondition_error);
  CHECK_THROWS_AS(Rational(INT64_MAX, 1) * Rational(3, 1), budget_error);
}
