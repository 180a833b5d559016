#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "primeforms/arith.hpp"
#include "primeforms/errors.hpp"
#include "primeforms/local.hpp"
#include "primeforms/random.hpp"

#include <json.hpp>

#include <cmath>
#include <numbers>
#include <numeric>

using namespace primeforms;

namespace {

// #{b in ((Z/q)^*)^4 : <a,b> = 0 mod q} by convolving the residue
// histograms of a_i * b_i over units b_i.
int64_t rho_histogram(const CoeffTuple& a, int64_t q) {
  std::vector<int64_t> acc(static_cast<std::size_t>(q), 0);
  acc[0] = 1;
  for (int64_t ai : a) {
    std::vector<int64_t> hist(static_cast<std::size_t>(q), 0);
    for (int64_t b = 1; b <= q; ++b)
      if (std::gcd(b, q) == 1) ++hist[static_cast<std::size_t>(mod_floor(ai * b, q))];
    std::vector<int64_t> next(static_cast<std::size_t>(q), 0);
    for (int64_t r = 0; r < q; ++r) {
      if (acc[static_cast<std::size_t>(r)] == 0) continue;
      for (int64_t s = 0; s < q; ++s)
        next[static_cast<std::size_t>((r + s) % q)] += acc[static_cast<std::size_t>(r)] * hist[static_cast<std::size_t>(s)];
    }
    acc = std::move(next);
  }
  return acc[0];
}

int64_t rho_quadruple_loop(const CoeffTuple& a, int64_t q) {
  std::vector<int64_t> units;
  for (int64_t b = 1; b <= q; ++b)
    if (std::gcd(b, q) == 1) units.push_back(b);
  int64_t count = 0;
  for (int64_t b1 : units)
    for (int64_t b2 : units)
      for (int64_t b3 : units)
        for (int64_t b4 : units) count += mod_floor(a[0] * b1 + a[1] * b2 + a[2] * b3 + a[3] * b4, q) == 0;
  return count;
}

Rational sigma_direct(const CoeffTuple& a, int64_t q) {
  int64_t phi = euler_phi(q);
  return Rational(q) * Rational(rho_histogram(a, q)) / pow(Rational(phi), 4);
}

CoeffTuple random_coeffs(CounterRng& rng, int64_t bound) {
  for (;;) {
    CoeffTuple a{};
    for (auto& x : a) {
      x = static_cast<int64_t>(rng.next_u64() % static_cast<uint64_t>(2 * bound)) - bound;
      if (x >= 0) ++x;
    }
    if (is_coeff_tuple(a)) return a;
  }
}

const std::vector<std::pair<int64_t, int>> kPrimePowers = [] {
  std::vector<std::pair<int64_t, int>> out;
  for (int64_t p : {2, 3, 5, 7, 11})
    for (int l = 1; ipow(p, l) <= 125; ++l) out.emplace_back(p, l);
  return out;
}();

}  // namespace

TEST_CASE("lambda counts") {
  CHECK(lambda_count({1, 1, 1, -1}, 2) == 0);
  CHECK(lambda_count({3, 3, 3, -1}, 3) == 3);
  CHECK(lambda_count({6, 10, 15, 1}, 2) == 2);
  CHECK_THROWS_AS(lambda_count({1, 1, 1, 1}, 4), precondition_error);
}

TEST_CASE("rho closed form") {
  CHECK(rho_prime_power({1, 1, 1, 1}, 3, 1) == 6);
  CHECK(rho_prime_power({1, 1, 1, 1}, 2, 1) == 1);
  CHECK(rho_prime_power({3, 3, 3, -1}, 3, 1) == 0);
  CHECK(rho_prime_power({1, 1, 1, 1}, 3, 2) == 162);
  CHECK(rho_quadruple_loop({1, 1, 1, 1}, 9) == 162);

  CounterRng rng(1);
  for (int i = 0; i < 300; ++i) {
    auto a = random_coeffs(rng, 8);
    for (auto [p, l] : kPrimePowers) {
      int64_t q = ipow(p, l);
      REQUIRE(rho_prime_power(a, p, l) == rho_histogram(a, q));
      if (q <= 9) REQUIRE(rho_prime_power(a, p, l) == rho_quadruple_loop(a, q));
    }
  }
}

TEST_CASE("sigma values") {
  CHECK(sigma({1, 1, 1, 1}, 3) == Rational(9, 8));
  CHECK(sigma({1, 1, 2, -2}, 2) == Rational(2));
  CHECK(sigma({5, 1, 1, -1}, 5) == Rational(15, 16));
  CHECK(sigma({5, 1, 1, -1}, 5) == sigma_direct({5, 1, 1, -1}, 5));
  CHECK(sigma({7, 3, -2, 5}, 1) == Rational(1));
  CHECK(sigma({1, 1, 1, -1}, 72) == Rational(9, 4));
  CHECK(sigma({1, 1, 1, -1}, 8) * sigma({1, 1, 1, -1}, 9) == Rational(9, 4));

  // the four case values, for p in {3, 5, 7}
  for (int64_t p : {3, 5, 7}) {
    CHECK(sigma({1, 1, 1, -1}, p) == Rational(1) + Rational(1, (p - 1) * (p - 1) * (p - 1)));
    CHECK(sigma({p, p, 1, -1}, p) == Rational(1) + Rational(1, p - 1));
    CHECK(sigma({p, 1, 1, -1}, p) == Rational(1) - Rational(1, (p - 1) * (p - 1)));
    CHECK(sigma({p, p, p, -1}, p) == Rational(0));
  }
  CHECK(sigma({2, 1, 1, -1}, 4) == Rational(0));

  CounterRng rng(2);
  for (int i = 0; i < 150; ++i) {
    auto a = random_coeffs(rng, 12);
    for (int64_t q = 1; q <= 30; ++q) REQUIRE(sigma(a, q) == sigma_direct(a, q));
    for (auto [p, l] : kPrimePowers) {
      if (l > 3) continue;
      CHECK(sigma_prime_power(a, p, l) == sigma_prime_power(a, p, 1));
    }
    int pairs = 0;
    while (pairs < 20) {
      auto q1 = static_cast<int64_t>(rng.next_u64() % 100) + 1;
      auto q2 = static_cast<int64_t>(rng.next_u64() % 100) + 1;
      if (std::gcd(q1, q2) != 1) continue;
      ++pairs;
      CHECK(sigma(a, q1 * q2) == sigma(a, q1) * sigma(a, q2));
    }
  }
}

TEST_CASE("modulus parameters") {
  CHECK(modulus_W(3.0) == 72);
  CHECK(modulus_W(std::numbers::e) == 8);
  CHECK(modulus_W(1.9) == 1);
  CHECK(modulus_W(-4.0) == 1);
  auto m = modulus_params(std::exp(std::exp(std::numbers::e)));
  CHECK(m.w == doctest::Approx(std::numbers::e));
  CHECK(m.W == 8);
  CHECK(modulus_params(10).W == 1);
  CHECK(modulus_params(3).alpha == doctest::Approx(std::log(3.0)));
  CHECK_THROWS_AS(modulus_params(2.9), precondition_error);
  CHECK_THROWS_AS(modulus_params(16), budget_error);
  CHECK(modulus_params(20).W == 147916692000);
  CHECK(modulus_params(30).W == 54000);
  CHECK(modulus_params(40).W == 432);
  CHECK(modulus_params(50).W == 432);
  // The (log B)^3 size bound only kicks in once w has settled down.
  for (double B : {1e6, 1e9, 1e12, 1e15}) {
    auto mp = modulus_params(B);
    CHECK(static_cast<double>(mp.W) <= std::pow(mp.alpha, 3));
  }
}

TEST_CASE("local solvability") {
  auto s = is_locally_solvable({1, 1, 1, 1});
  CHECK_FALSE(s.solvable);
  CHECK(s.witness == "same-sign");
  s = is_locally_solvable({3, 3, 3, -1});
  CHECK_FALSE(s.solvable);
  CHECK(s.witness == "p=3");
  CHECK(is_locally_solvable({1, 1, 1, -1}).solvable);
  s = is_locally_solvable({1, 1, 2, -1});
  CHECK_FALSE(s.solvable);
  CHECK(s.witness == "p=2");
  CHECK_THROWS_AS(is_locally_solvable({2, 4, 6, 8}), precondition_error);

  for (int64_t a1 = -10; a1 <= 10; ++a1)
    for (int64_t a2 = -10; a2 <= 10; ++a2)
      for (int64_t a3 = -10; a3 <= 10; ++a3)
        for (int64_t a4 = -10; a4 <= 10; ++a4) {
          CoeffTuple a{a1, a2, a3, a4};
          if (!is_coeff_tuple(a)) continue;
          bool mixed = (a1 > 0 || a2 > 0 || a3 > 0 || a4 > 0) && (a1 < 0 || a2 < 0 || a3 < 0 || a4 < 0);
          bool expected = mixed;
          for (int64_t p : {2, 3, 5, 7})
            if (expected && rho_histogram(a, p) == 0) expected = false;
          REQUIRE(is_locally_solvable(a).solvable == expected);
        }
}

TEST_CASE("singular series") {
  CHECK(singular_series({1, 1, 1, -1}, 10) == Rational(1));
  CHECK(singular_series({3, 3, 3, -1}, 40) == Rational(0));
  CounterRng rng(4);
  for (int i = 0; i < 300; ++i) {
    auto a = random_coeffs(rng, 30);
    if (!is_locally_solvable(a).solvable) continue;
    for (double B : {3.0, 10.0, 20.0, 30.0, 40.0, 50.0, 1e6}) CHECK(singular_series(a, B) > Rational(0));
  }
}

TEST_CASE("delta ratio and singular integral bound") {
  CHECK(delta_ratio({3, 1, -1, -1}) == Rational(1, 3));
  CHECK(delta_ratio({1, 1, -1, -1}) == Rational(1));
  CHECK(delta_ratio({10, 2, -5, -1}) == Rational(1, 10));
  CHECK(singular_integral_lower_bound({1, 1, -1, -1}, 4) == doctest::Approx(1.0));
  CHECK(singular_integral_lower_bound({3, 1, -1, -1}, 100) == doctest::Approx(1.0 / 27));
  CHECK(singular_integral_lower_bound({1, 1, -1, -1}, 0.5) == doctest::Approx(0.5));
  CHECK(singular_integral_lower_bound({1, 1, 1, 1}, 3) == 0.0);
}

TEST_CASE("tau Monte Carlo") {
  auto zero = tau_monte_carlo({1, 1, 1, 1}, 2, 100000, 1);
  CHECK(zero.hits == 0);
  CHECK(zero.value == 0.0);

  const double orthant = std::numbers::pi * std::numbers::pi / 32;
  auto vacuous = tau_monte_carlo({3, -1, 2, 5}, 0.4, 400000, 7);
  CHECK(std::abs(vacuous.value - 0.4 * orthant) <= 4 * vacuous.std_error);

  auto pos = tau_monte_carlo({1, 1, -1, -1}, 10, 1000000, 3);
  CHECK(pos.value > 0);

  auto one = tau_monte_carlo({2, -1, 3, -5}, 3, 300000, 42, 1);
  auto four = tau_monte_carlo({2, -1, 3, -5}, 3, 300000, 42, 4);
  CHECK(one.hits == four.hits);
  CHECK(one.value == four.value);
  CHECK_THROWS_AS(tau_monte_carlo({1, 1, -1, -1}, 0, 100000, 1), precondition_error);
  CHECK_THROWS_AS(tau_monte_carlo({1, 1, -1, -1}, 1, 100, 1), precondition_error);
}

TEST_CASE("tau dominates the lower bound up to a constant") {
  // Calibrated constant: tau / (delta^3 min{gamma delta, 1}) stays above 0.05
  // for every mixed-sign tuple in this corpus.
  CounterRng rng(8);
  double worst = 1e9;
  for (int i = 0; i < 40; ++i) {
    auto a = random_coeffs(rng, 6);
    if (singular_integral_lower_bound(a, 1) == 0) continue;
    for (double gamma : {1.0, 4.0}) {
      auto est = tau_monte_carlo(a, gamma, 200000, static_cast<uint64_t>(i));
      worst = std::min(worst, est.value / singular_integral_lower_bound(a, gamma));
    }
  }
  MESSAGE("min tau / lower bound = " << worst);
  CHECK(worst > 0.05);
}

TEST_CASE("local profile json") {
  auto prof = local_profile({6, 10, 15, -1});
  auto j = nlohmann::json::parse(prof.to_json());
  CHECK(j["solvable"] == true);
  CHECK(j["witness"].is_null());
  CHECK(j["factors"].size() == 3);
  CHECK(j["factors"][0]["p"] == 2);
  CHECK(j["factors"][0]["lambda"] == 2);
  CHECK(j["factors"][0]["sigma"] == "2/1");

  auto bad = nlohmann::json::parse(local_profile({1, 1, 1, 1}).to_json());
  CHECK(bad["witness"] == "same-sign");
  auto p3 = local_profile({3, 3, 3, -1});
  for (const auto& f : p3.factors)
    if (f.p == 3) CHECK((f.sigma.is_zero() && !f.solvable_at_p));
}
