#include "primeforms/solver.hpp"

#include "primeforms/arith.hpp"
#include "primeforms/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace primeforms {

namespace {

uint64_t pack(int64_t p, int64_t q) { return (static_cast<uint64_t>(p) << 32U) | static_cast<uint64_t>(q); }
int64_t first(uint64_t v) { return static_cast<int64_t>(v >> 32U); }
int64_t second(uint64_t v) { return static_cast<int64_t>(v & 0xffffffffULL); }

// Keys in [-reach, reach] over a flat array of list heads.
struct FlatIndex {
  std::vector<int32_t> head;
  std::vector<int32_t> next;
  std::vector<uint64_t> items;
  std::vector<int64_t> touched;
  int64_t reach = 0;

  void reset(int64_t r) {
    for (int64_t k : touched) head[static_cast<std::size_t>(k)] = -1;
    touched.clear();
    next.clear();
    items.clear();
    reach = r;
    if (static_cast<int64_t>(head.size()) < 2 * r + 1) head.assign(static_cast<std::size_t>(2 * r + 1), -1);
  }
  void insert(int64_t key, uint64_t v) {
    if (key < -reach || key > reach) return;  // can never match the other side
    const auto k = static_cast<std::size_t>(key + reach);
    if (head[k] < 0) touched.push_back(static_cast<int64_t>(k));
    items.push_back(v);
    next.push_back(head[k]);
    head[k] = static_cast<int32_t>(items.size() - 1);
  }
  template <class F>
  void for_each(int64_t key, F&& f) const {
    if (key < -reach || key > reach) return;
    for (int32_t i = head[static_cast<std::size_t>(key + reach)]; i >= 0; i = next[static_cast<std::size_t>(i)])
      f(items[static_cast<std::size_t>(i)]);
  }
};

struct HashIndex {
  std::unordered_map<int64_t, std::vector<uint64_t>> map;
  void reset(int64_t) { map.clear(); }
  void insert(int64_t key, uint64_t v) { map[key].push_back(v); }
  template <class F>
  void for_each(int64_t key, F&& f) const {
    auto it = map.find(key);
    if (it == map.end()) return;
    for (uint64_t v : it->second) f(v);
  }
};

constexpr int64_t kFlatReach = int64_t{1} << 23U;

template <class Index>
void staged_search(const CoeffTuple& a, std::span<const int64_t> primes, int64_t B_max, Index& left, Index& right,
                   std::vector<uint64_t>& fresh, SolutionRecord& out) {
  uint64_t entries = 0;
  std::size_t count = 0;
  for (int64_t q : primes) {
    if (q > B_max) break;
    ++count;
    // pairs with largest entry q
    fresh.clear();
    for (std::size_t i = 0; i < count; ++i) {
      const int64_t p = primes[i];
      fresh.push_back(pack(q, p));
      if (p != q) fresh.push_back(pack(p, q));
    }
    entries += 2 * fresh.size();
    if (entries > kSolverEntryCap)
      throw budget_error("min_prime_solution: join table exceeds " + std::to_string(kSolverEntryCap) +
                         " entries at q = " + std::to_string(q));
    for (uint64_t v : fresh) {
      left.insert(a[0] * first(v) + a[1] * second(v), v);
      right.insert(-(a[2] * first(v) + a[3] * second(v)), v);
    }
    std::optional<PrimeTuple> best;
    auto offer = [&](uint64_t l, uint64_t r) {
      const PrimeTuple x{first(l), second(l), first(r), second(r)};
      if (!best || x < *best) best = x;
    };
    for (uint64_t v : fresh) {
      right.for_each(a[0] * first(v) + a[1] * second(v), [&](uint64_t r) { offer(v, r); });
      left.for_each(-(a[2] * first(v) + a[3] * second(v)), [&](uint64_t l) { offer(l, v); });
    }
    if (best) {
      out.m = q;
      out.witness = best;
      out.B_explored = q;
      return;
    }
  }
}

}  // namespace

std::string SolutionRecord::to_json() const {
  nlohmann::json j;
  j["a"] = a;
  j["m"] = m ? nlohmann::json(*m) : nlohmann::json("inf");
  j["witness"] = witness ? nlohmann::json(*witness) : nlohmann::json(nullptr);
  j["B_explored"] = B_explored;
  return j.dump();
}

struct PrimeSolver::Buffers {
  FlatIndex flat_left, flat_right;
  HashIndex hash_left, hash_right;
  std::vector<uint64_t> fresh;
};

PrimeSolver::PrimeSolver(int64_t prime_limit) : limit_(prime_limit), buffers_(std::make_unique<Buffers>()) {
  require(prime_limit >= 2, "PrimeSolver: prime limit must be >= 2");
  require(prime_limit < (int64_t{1} << 31), "PrimeSolver: prime limit must fit in 31 bits");
  auto table = sieve_primes(prime_limit);
  primes_.assign(table.primes().begin(), table.primes().end());
}

PrimeSolver::~PrimeSolver() = default;

SolutionRecord PrimeSolver::solve(const CoeffTuple& a, int64_t B_max) {
  require_coeff_tuple(a, "min_prime_solution");
  require(B_max >= 2, "min_prime_solution: B_max must be >= 2");
  require(B_max <= limit_, "min_prime_solution: B_max exceeds the prime table");
  SolutionRecord out;
  out.a = a;
  out.B_explored = B_max;
  // positive primes cannot solve a form whose coefficients share one sign
  const bool mixed = std::any_of(a.begin(), a.end(), [](int64_t x) { return x > 0; }) &&
                     std::any_of(a.begin(), a.end(), [](int64_t x) { return x < 0; });
  if (!mixed) return out;

  const auto abs64 = [](int64_t x) { return x < 0 ? -x : x; };
  const int64_t reach = std::min(abs64(a[0]) + abs64(a[1]), abs64(a[2]) + abs64(a[3])) * B_max;
  auto& b = *buffers_;
  if (reach <= kFlatReach) {
    b.flat_left.reset(reach);
    b.flat_right.reset(reach);
    staged_search(a, primes_, B_max, b.flat_left, b.flat_right, b.fresh, out);
  } else {
    b.hash_left.reset(reach);
    b.hash_right.reset(reach);
    staged_search(a, primes_, B_max, b.hash_left, b.hash_right, b.fresh, out);
    b.hash_left.reset(0);
    b.hash_right.reset(0);
  }
  return out;
}

SolutionRecord min_prime_solution(const CoeffTuple& a, int64_t B_max) {
  require(B_max >= 2, "min_prime_solution: B_max must be >= 2");
  require_coeff_tuple(a, "min_prime_solution");
  // same-sign forms need no table
  const bool mixed = std::any_of(a.begin(), a.end(), [](int64_t x) { return x > 0; }) &&
                     std::any_of(a.begin(), a.end(), [](int64_t x) { return x < 0; });
  if (!mixed) {
    SolutionRecord out;
    out.a = a;
    out.B_explored = B_max;
    return out;
  }
  PrimeSolver solver(B_max);
  return solver.solve(a, B_max);
}

int64_t sup_norm(const CoeffTuple& a) {
  int64_t m = 0;
  for (int64_t x : a) m = std::max(m, x < 0 ? -x : x);
  return m;
}

namespace {

long double bound_rhs(int64_t h) {
  const long double l = std::log(static_cast<long double>(h));
  return static_cast<long double>(h) * l * l * l * l * std::log(l);
}

}  // namespace

bool bound_predicate(const CoeffTuple& a, int64_t m) {
  require(m >= 1, "bound_predicate: m must be >= 1");
  const int64_t h = sup_norm(a);
  if (h <= 15) return false;
  const long double m3 = static_cast<long double>(m) * static_cast<long double>(m) * static_cast<long double>(m);
  return m3 <= bound_rhs(h);
}

int64_t bound_threshold(const CoeffTuple& a) {
  const int64_t h = sup_norm(a);
  if (h <= 15) return 0;
  const long double rhs = bound_rhs(h);
  auto cube = [](int64_t t) { return static_cast<long double>(t) * t * t; };
  auto t = static_cast<int64_t>(std::ceil(std::cbrt(static_cast<double>(rhs))));
  // smallest t with t^3 >= rhs, whatever the rounding of cbrt
  while (t > 1 && cube(t - 1) >= rhs) --t;
  while (cube(t) < rhs) ++t;
  return t;
}

}  // namespace primeforms
