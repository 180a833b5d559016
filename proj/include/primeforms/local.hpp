#pragma once

// Local data of the form a1 x1 + a2 x2 + a3 x3 + a4 x4: unit-solution counts
// rho_a(p^l), local densities sigma(a, Q), local solvability, the modulus
// parameters alpha, w, W attached to a height B, and the archimedean factor
// tau(a, gamma).

#include "primeforms/rational.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace primeforms {

using CoeffTuple = std::array<int64_t, 4>;

/// Non-zero entries with overall gcd 1.
bool is_coeff_tuple(const CoeffTuple& a);
void require_coeff_tuple(const CoeffTuple& a, const char* where);

/// Number of i with p | a_i.
int lambda_count(const CoeffTuple& a, int64_t p);

/// rho_a(p^l) = #{b in ((Z/p^l)^*)^4 : <a,b> = 0 mod p^l}, from the closed form.
int64_t rho_prime_power(const CoeffTuple& a, int64_t p, int l);

/// sigma(a, p^l) = 1 + (p-1)(-p^(l-1)/phi(p^l))^(4-lambda).
Rational sigma_prime_power(const CoeffTuple& a, int64_t p, int l);

/// sigma(a, Q) as the product of its prime-power factors; sigma(a, 1) = 1.
Rational sigma(const CoeffTuple& a, int64_t modulus);

struct Modulus {
  double B = 0;
  double alpha = 0;  ///< log B
  double w = 0;      ///< log log B / log log log B
  int64_t W = 1;     ///< prod_{p <= w} p^(ceil(log w / log p) + 1)
};

/// W for a given w; w < 2 gives the empty product 1.
int64_t modulus_W(double w);

/// Natural logs throughout. Below B = e^e the triple log is negative, so
/// w < 0 and W = 1. Just above e^e, w blows up and W overflows 64 bits,
/// which raises budget_error.
Modulus modulus_params(double B);

struct Solvability {
  bool solvable = true;
  /// "" when solvable, "same-sign", or "p=<prime>" for the first obstruction.
  std::string witness;
  int64_t prime = 0;  ///< offending prime, 0 for the sign condition
};

/// Mixed signs, lambda_2 even, lambda_p <= 2 for every odd p.
Solvability is_locally_solvable(const CoeffTuple& a);

/// sigma(a, W) with W from modulus_params(B).
Rational singular_series(const CoeffTuple& a, double B);

/// min |a_i| / max |a_i|.
Rational delta_ratio(const CoeffTuple& a);

struct McEstimate {
  double value = 0;
  double std_error = 0;
  uint64_t samples = 0;
  uint64_t hits = 0;
  uint64_t seed = 0;
};

/// tau(a, gamma) = gamma * vol{u in B_4(1) cap R^4_+ : a in C_u^(gamma)},
/// estimated by rejection sampling from [0,1]^4. Deterministic in
/// (seed, samples) for any thread count.
McEstimate tau_monte_carlo(const CoeffTuple& a, double gamma, uint64_t samples, uint64_t seed,
                           unsigned threads = 1);

/// delta^3 * min{gamma * delta, 1}; 0 for same-sign a.
double singular_integral_lower_bound(const CoeffTuple& a, double gamma);

struct LocalFactor {
  int64_t p = 0;
  int lambda = 0;
  Rational sigma;
  bool solvable_at_p = true;
};

struct LocalProfile {
  CoeffTuple a{};
  Solvability solvability;
  std::vector<LocalFactor> factors;  ///< p = 2 and every odd p dividing a1 a2 a3 a4

  /// {a, solvable, witness, factors: [{p, sigma: "num/den", lambda}]}
  [[nodiscard]] std::string to_json() const;
};

LocalProfile local_profile(const CoeffTuple& a);

std::string format_coeffs(const CoeffTuple& a);

}  // namespace primeforms
