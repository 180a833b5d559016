#include "primeforms/local.hpp"

#include "primeforms/arith.hpp"
#include "primeforms/errors.hpp"
#include "primeforms/parallel.hpp"
#include "primeforms/random.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace primeforms {

namespace {

bool is_small_prime(int64_t p) {
  if (p < 2) return false;
  auto f = factorize(p);
  return f.size() == 1 && f.front().second == 1;
}

int64_t abs64(int64_t v) { return v < 0 ? -v : v; }

}  // namespace

bool is_coeff_tuple(const CoeffTuple& a) {
  int64_t g = 0;
  for (int64_t x : a) {
    if (x == 0) return false;
    g = std::gcd(g, x);
  }
  return g == 1;
}

void require_coeff_tuple(const CoeffTuple& a, const char* where) {
  require(is_coeff_tuple(a), std::string(where) + ": coefficients must be non-zero with gcd 1");
}

int lambda_count(const CoeffTuple& a, int64_t p) {
  require(is_small_prime(p), "lambda_count: p must be prime");
  int count = 0;
  for (int64_t x : a) count += x % p == 0;
  return count;
}

int64_t rho_prime_power(const CoeffTuple& a, int64_t p, int l) {
  require(l >= 1, "rho_prime_power: l must be >= 1");
  const int lambda = lambda_count(a, p);
  const __int128 below = ipow(p, l - 1);
  const __int128 phi = below * (p - 1);
  __int128 phi_pow = 1;
  for (int i = 0; i < lambda; ++i) phi_pow *= phi;
  __int128 neg_pow = 1;
  for (int i = 0; i < 4 - lambda; ++i) neg_pow *= -below;
  const __int128 total = phi * phi * phi * phi + static_cast<__int128>(p - 1) * phi_pow * neg_pow;
  const __int128 q = below * p;
  if (total % q != 0) throw std::logic_error("rho_prime_power: closed form not integral");
  const __int128 v = total / q;
  if (v > INT64_MAX) throw budget_error("rho_prime_power: value exceeds 64 bits");
  return static_cast<int64_t>(v);
}

Rational sigma_prime_power(const CoeffTuple& a, int64_t p, int l) {
  require(l >= 1, "sigma_prime_power: l must be >= 1");
  const int lambda = lambda_count(a, p);
  // -p^(l-1) / phi(p^l) = -1 / (p - 1)
  return Rational(1) + Rational(p - 1) * pow(Rational(-1, p - 1), static_cast<unsigned>(4 - lambda));
}

Rational sigma(const CoeffTuple& a, int64_t modulus) {
  require(modulus >= 1, "sigma: Q must be >= 1");
  Rational out(1);
  for (auto [p, e] : factorize(modulus)) {
    out *= sigma_prime_power(a, p, e);
    if (out.is_zero()) break;
  }
  return out;
}

int64_t modulus_W(double w) {
  if (!(w >= 2)) return 1;
  if (w > 1000) throw budget_error("modulus_W: W exceeds 64 bits (w = " + std::to_string(w) + ")");
  auto table = sieve_primes(static_cast<int64_t>(std::floor(w)));
  int64_t W = 1;
  for (int64_t p : table.primes()) {
    // smallest e with p^e >= w, i.e. ceil(log w / log p)
    int e = 0;
    long double pe = 1;
    while (pe < static_cast<long double>(w)) {
      pe *= static_cast<long double>(p);
      ++e;
    }
    W = checked_mul(W, ipow(p, e + 1));
  }
  return W;
}

Modulus modulus_params(double B) {
  require(B >= 3, "modulus_params: B must be >= 3");
  Modulus m;
  m.B = B;
  m.alpha = std::log(B);
  const double ll = std::log(m.alpha);
  const double lll = std::log(ll);
  if (lll == 0) throw budget_error("modulus_params: w is unbounded at B = e^e");
  m.w = ll / lll;
  m.W = modulus_W(m.w);
  return m;
}

Solvability is_locally_solvable(const CoeffTuple& a) {
  require_coeff_tuple(a, "is_locally_solvable");
  Solvability out;
  bool any_pos = std::any_of(a.begin(), a.end(), [](int64_t x) { return x > 0; });
  bool any_neg = std::any_of(a.begin(), a.end(), [](int64_t x) { return x < 0; });
  if (!(any_pos && any_neg)) {
    out.solvable = false;
    out.witness = "same-sign";
    return out;
  }
  if (lambda_count(a, 2) % 2 == 1) {
    out.solvable = false;
    out.witness = "p=2";
    out.prime = 2;
    return out;
  }
  std::set<int64_t> odd;
  for (int64_t x : a)
    for (auto [p, e] : factorize(abs64(x)))
      if (p != 2) odd.insert(p);
  for (int64_t p : odd) {
    if (lambda_count(a, p) >= 3) {
      out.solvable = false;
      out.witness = "p=" + std::to_string(p);
      out.prime = p;
      return out;
    }
  }
  return out;
}

Rational singular_series(const CoeffTuple& a, double B) { return sigma(a, modulus_params(B).W); }

Rational delta_ratio(const CoeffTuple& a) {
  require(std::none_of(a.begin(), a.end(), [](int64_t x) { return x == 0; }), "delta_ratio: entries must be non-zero");
  int64_t lo = INT64_MAX;
  int64_t hi = 0;
  for (int64_t x : a) {
    lo = std::min(lo, abs64(x));
    hi = std::max(hi, abs64(x));
  }
  return {lo, hi};
}

McEstimate tau_monte_carlo(const CoeffTuple& a, double gamma, uint64_t samples, uint64_t seed, unsigned threads) {
  require(gamma > 0, "tau_monte_carlo: gamma must be > 0");
  require(samples >= 10000, "tau_monte_carlo: need at least 10^4 samples");
  constexpr uint64_t chunk = 1U << 16U;
  const std::size_t chunks = (samples + chunk - 1) / chunk;
  double a2 = 0;
  for (int64_t x : a) a2 += static_cast<double>(x) * static_cast<double>(x);
  const double g4 = 4.0 * gamma * gamma;
  std::vector<uint64_t> hits(chunks, 0);
  parallel_chunks(chunks, threads, [&](std::size_t c) {
    const uint64_t begin = c * chunk;
    const uint64_t end = std::min<uint64_t>(samples, begin + chunk);
    CounterRng rng(seed, begin * 4);
    uint64_t h = 0;
    for (uint64_t s = begin; s < end; ++s) {
      double u[4];
      double u2 = 0;
      double au = 0;
      for (int i = 0; i < 4; ++i) {
        u[i] = rng.next_unit();
        u2 += u[i] * u[i];
        au += u[i] * static_cast<double>(a[static_cast<std::size_t>(i)]);
      }
      if (u2 > 1.0) continue;
      if (g4 * au * au <= u2 * a2) ++h;
    }
    hits[c] = h;
  });
  McEstimate out;
  out.samples = samples;
  out.seed = seed;
  for (uint64_t h : hits) out.hits += h;
  const double p = static_cast<double>(out.hits) / static_cast<double>(samples);
  out.value = gamma * p;
  out.std_error = gamma * std::sqrt(p * (1 - p) / static_cast<double>(samples));
  return out;
}

double singular_integral_lower_bound(const CoeffTuple& a, double gamma) {
  require(gamma > 0, "singular_integral_lower_bound: gamma must be > 0");
  bool any_pos = std::any_of(a.begin(), a.end(), [](int64_t x) { return x > 0; });
  bool any_neg = std::any_of(a.begin(), a.end(), [](int64_t x) { return x < 0; });
  if (!(any_pos && any_neg)) return 0.0;
  const double delta = delta_ratio(a).to_double();
  return delta * delta * delta * std::min(gamma * delta, 1.0);
}

LocalProfile local_profile(const CoeffTuple& a) {
  LocalProfile out;
  out.a = a;
  out.solvability = is_locally_solvable(a);
  std::set<int64_t> primes{2};
  for (int64_t x : a)
    for (auto [p, e] : factorize(abs64(x))) primes.insert(p);
  for (int64_t p : primes) {
    LocalFactor f;
    f.p = p;
    f.lambda = lambda_count(a, p);
    f.sigma = sigma_prime_power(a, p, 1);
    f.solvable_at_p = !f.sigma.is_zero();
    out.factors.push_back(f);
  }
  return out;
}

std::string LocalProfile::to_json() const {
  nlohmann::json j;
  j["a"] = a;
  j["solvable"] = solvability.solvable;
  j["witness"] = solvability.solvable ? nlohmann::json(nullptr) : nlohmann::json(solvability.witness);
  j["factors"] = nlohmann::json::array();
  for (const auto& f : factors)
    j["factors"].push_back({{"p", f.p}, {"lambda", f.lambda}, {"sigma", f.sigma.str()}, {"solvable_at_p", f.solvable_at_p}});
  return j.dump();
}

std::string format_coeffs(const CoeffTuple& a) {
  return std::to_string(a[0]) + "," + std::to_string(a[1]) + "," + std::to_string(a[2]) + "," + std::to_string(a[3]);
}

}  // namespace primeforms
