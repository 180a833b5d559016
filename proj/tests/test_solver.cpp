#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "primeforms/errors.hpp"
#include "primeforms/local.hpp"
#include "primeforms/random.hpp"
#include "primeforms/solver.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>

using namespace primeforms;

namespace {

// All prime 4-tuples with entries <= B ordered by (max entry, lexicographic).
std::vector<PrimeTuple> ordered_tuples(int64_t B) {
  std::vector<int64_t> ps;
  for (int64_t n = 2; n <= B; ++n) {
    bool prime = true;
    for (int64_t d = 2; d * d <= n; ++d) prime = prime && n % d != 0;
    if (prime) ps.push_back(n);
  }
  std::vector<PrimeTuple> out;
  for (int64_t p1 : ps)
    for (int64_t p2 : ps)
      for (int64_t p3 : ps)
        for (int64_t p4 : ps) out.push_back({p1, p2, p3, p4});
  std::stable_sort(out.begin(), out.end(), [](const PrimeTuple& x, const PrimeTuple& y) {
    const int64_t mx = *std::max_element(x.begin(), x.end());
    const int64_t my = *std::max_element(y.begin(), y.end());
    return mx != my ? mx < my : x < y;
  });
  return out;
}

std::optional<PrimeTuple> first_solution(const CoeffTuple& a, const std::vector<PrimeTuple>& tuples) {
  for (const auto& x : tuples)
    if (a[0] * x[0] + a[1] * x[1] + a[2] * x[2] + a[3] * x[3] == 0) return x;
  return std::nullopt;
}

int64_t max_of(const PrimeTuple& x) { return *std::max_element(x.begin(), x.end()); }

}  // namespace

TEST_CASE("solver fixtures") {
  auto r = min_prime_solution({1, 1, -1, -1}, 100);
  REQUIRE(r.found());
  CHECK(*r.m == 2);
  CHECK(*r.witness == PrimeTuple{2, 2, 2, 2});

  r = min_prime_solution({3, 1, -1, -1}, 100);
  REQUIRE(r.found());
  CHECK(*r.m == 5);
  CHECK(*r.witness == PrimeTuple{2, 2, 3, 5});
  CHECK(r.B_explored == 5);

  for (int64_t bmax : {2, 50, 100000}) {
    auto none = min_prime_solution({1, 1, 1, 1}, bmax);
    CHECK_FALSE(none.found());
    CHECK(none.B_explored == bmax);
  }
  CHECK_FALSE(min_prime_solution({3, 1, -1, -1}, 4).found());
  CHECK_THROWS_AS(min_prime_solution({2, 2, -2, -2}, 10), precondition_error);
  CHECK_THROWS_AS(min_prime_solution({1, 1, -1, -1}, 1), precondition_error);
}

TEST_CASE("solver json") {
  auto j = nlohmann::json::parse(min_prime_solution({3, 1, -1, -1}, 100).to_json());
  CHECK(j["m"] == 5);
  CHECK(j["witness"] == nlohmann::json::array({2, 2, 3, 5}));
  CHECK(j["a"] == nlohmann::json::array({3, 1, -1, -1}));
  auto k = nlohmann::json::parse(min_prime_solution({1, 1, 1, 1}, 30).to_json());
  CHECK(k["m"] == "inf");
  CHECK(k["witness"].is_null());
  CHECK(k["B_explored"] == 30);
}

TEST_CASE("staged search equals exhaustive search") {
  const auto tuples = ordered_tuples(50);
  // (1,2,-2,-3) and the full box |a| <= 4 against the ordered scan
  std::vector<CoeffTuple> corpus{{1, 2, -2, -3}};
  for (int64_t a1 = -4; a1 <= 4; ++a1)
    for (int64_t a2 = -4; a2 <= 4; ++a2)
      for (int64_t a3 = -4; a3 <= 4; ++a3)
        for (int64_t a4 = -4; a4 <= 4; ++a4)
          if (is_coeff_tuple({a1, a2, a3, a4})) corpus.push_back({a1, a2, a3, a4});
  uint64_t mismatches = 0;
  for (const auto& a : corpus) {
    auto want = first_solution(a, tuples);
    auto got = min_prime_solution(a, 50);
    if (want.has_value() != got.found()) {
      ++mismatches;
      continue;
    }
    if (!want) continue;
    mismatches += *got.m != max_of(*want) || *got.witness != *want;
  }
  CHECK(mismatches == 0);
}

TEST_CASE("solver symmetries") {
  CounterRng rng(21);
  for (int t = 0; t < 200; ++t) {
    CoeffTuple a{};
    do {
      for (auto& v : a) v = static_cast<int64_t>(rng.next_u64() % 25) - 12;
    } while (!is_coeff_tuple(a));
    auto base = min_prime_solution(a, 200);
    auto neg = min_prime_solution({-a[0], -a[1], -a[2], -a[3]}, 200);
    CHECK(base.m == neg.m);
    CHECK(base.witness == neg.witness);
    CoeffTuple p = a;
    std::array<int, 4> idx{0, 1, 2, 3};
    do {
      for (int i = 0; i < 4; ++i) p[static_cast<std::size_t>(i)] = a[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])];
      auto r = min_prime_solution(p, 200);
      CHECK(r.m == base.m);
      if (r.found()) {
        const auto& x = *r.witness;
        CHECK(p[0] * x[0] + p[1] * x[1] + p[2] * x[2] + p[3] * x[3] == 0);
        // the permuted base witness is a solution of p with the same maximum
        PrimeTuple y{};
        for (int i = 0; i < 4; ++i) y[static_cast<std::size_t>(i)] = (*base.witness)[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])];
        CHECK(x <= y);
      }
    } while (std::next_permutation(idx.begin(), idx.end()));
  }
}

TEST_CASE("local obstructions and prime solutions") {
  // Obstructions live in unit residues. A prime solution can still exist,
  // but only if it uses the obstructing prime itself as an entry.
  auto r = min_prime_solution({3, 3, -3, 1}, 100);
  REQUIRE(r.found());
  CHECK(std::find(r.witness->begin(), r.witness->end(), 3) != r.witness->end());
  auto s = min_prime_solution({2, 1, 1, -1}, 100);
  REQUIRE(s.found());
  CHECK(std::find(s.witness->begin(), s.witness->end(), 2) != s.witness->end());

  uint64_t obstructed = 0;
  for (int64_t a1 = -9; a1 <= 9; ++a1)
    for (int64_t a2 = -9; a2 <= 9; ++a2)
      for (int64_t a3 = -9; a3 <= 9; ++a3)
        for (int64_t a4 = -9; a4 <= 9; ++a4) {
          const CoeffTuple a{a1, a2, a3, a4};
          if (!is_coeff_tuple(a)) continue;
          auto sol = is_locally_solvable(a);
          if (sol.solvable || sol.prime == 0) continue;
          ++obstructed;
          auto rec = min_prime_solution(a, 60);
          if (!rec.found()) continue;
          const auto& x = *rec.witness;
          CHECK(std::find(x.begin(), x.end(), sol.prime) != x.end());
        }
  CHECK(obstructed > 1000);
}

TEST_CASE("bound predicate") {
  CHECK(bound_predicate({1000000, 1, -1, -1}, 100));
  CHECK_FALSE(bound_predicate({16, 1, -1, -1}, 16));
  CHECK_FALSE(bound_predicate({15, 1, -1, -1}, 1));
  CHECK(bound_predicate({16, 1, -1, -1}, 9));
  CHECK_FALSE(bound_predicate({16, 1, -1, -1}, 10));
  const CoeffTuple a{128, -3, 5, 7};
  bool was_true = true;
  for (int64_t m = 1; m <= 100; ++m) {
    const bool b = bound_predicate(a, m);
    CHECK((was_true || !b));
    was_true = b;
  }
  CHECK_THROWS_AS(bound_predicate(a, 0), precondition_error);
}

TEST_CASE("bound threshold") {
  CHECK(bound_threshold({15, 1, 1, -1}) == 0);
  for (int64_t h = 16; h <= 2000; h += 7) {
    const CoeffTuple a{h, 1, -1, 1};
    const int64_t t = bound_threshold(a);
    const long double l = std::log(static_cast<long double>(h));
    const long double rhs = h * l * l * l * l * std::log(l);
    CHECK(static_cast<long double>(t) * t * t >= rhs);
    CHECK(static_cast<long double>(t - 1) * (t - 1) * (t - 1) < rhs);
    CHECK(bound_predicate(a, t - 1));
  }
}

TEST_CASE("large coefficients against exhaustive search") {
  const auto tuples = ordered_tuples(60);
  const std::vector<int64_t> ps{2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59};
  CounterRng rng(11);
  auto coeff = [&] { return static_cast<int64_t>(rng.next_u64() % 2000001) - 1000000; };
  uint64_t mismatches = 0;
  uint64_t solvable = 0;
  for (int t = 0; t < 60; ++t) {
    CoeffTuple a{coeff(), coeff(), coeff(), 0};
    if (t % 2 == 0) {
      // plant a solution: pick x, then nudge a3 until x4 divides the partial sum
      PrimeTuple x{};
      for (auto& p : x) p = ps[rng.next_u64() % ps.size()];
      if (x[2] == x[3]) continue;
      while ((a[0] * x[0] + a[1] * x[1] + a[2] * x[2]) % x[3] != 0) ++a[2];
      a[3] = -(a[0] * x[0] + a[1] * x[1] + a[2] * x[2]) / x[3];
    } else {
      a[3] = coeff();
    }
    if (!is_coeff_tuple(a)) continue;
    auto want = first_solution(a, tuples);
    auto got = min_prime_solution(a, 60);
    solvable += want.has_value();
    if (want.has_value() != got.found()) {
      ++mismatches;
      continue;
    }
    if (want) mismatches += *got.m != max_of(*want) || *got.witness != *want;
  }
  CHECK(mismatches == 0);
  CHECK(solvable > 10);
}

TEST_CASE("solver reuse across coefficient sizes") {
  PrimeSolver solver(500);
  const std::vector<CoeffTuple> corpus{{3, 1, -1, -1}, {400000, 700001, -300000, -900001}, {1, 2, -2, -3},
                                       {1, 1, 1, 1},   {5, 7, -11, -13},                     {3, 1, -1, -1}};
  for (int round = 0; round < 2; ++round)
    for (const auto& a : corpus) {
      for (int64_t B : {10, 100, 500}) {
        auto fresh = min_prime_solution(a, B);
        auto reused = solver.solve(a, B);
        CHECK(fresh.m == reused.m);
        CHECK(fresh.witness == reused.witness);
        CHECK(fresh.B_explored == reused.B_explored);
      }
    }
  CHECK_THROWS_AS(solver.solve({3, 1, -1, -1}, 501), precondition_error);
}
