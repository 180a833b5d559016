#pragma once

// Counting functions over prime tuples: N_a(B), the local model
// N_a^loc(B), pair statistics over Omega(B) (E, F, l), the volume functionals
// I and J, and the second-moment decomposition of the variance V(A, B).
//
// P(B) is the set of 4-tuples of primes <= B. All integer counts are exact;
// they are scaled by powers of log B only at the end.

#include "primeforms/lattice.hpp"
#include "primeforms/local.hpp"
#include "primeforms/random.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace primeforms {

using PrimeTuple = std::array<int64_t, 4>;

/// The coordinate primes of P(B) together with the height B.
struct PrimeGrid {
  double B = 0;
  std::vector<int64_t> coords;

  static PrimeGrid make(double B);
  [[nodiscard]] std::size_t tuple_count() const;
};

/// alpha and W used by the local model; normally modulus_params(B).
struct LocalModel {
  double alpha = 0;
  int64_t W = 1;
  static LocalModel for_height(double B);
};

struct NaResult {
  uint64_t count = 0;  ///< #{x in P(B) : <a,x> = 0}
  double value = 0;    ///< (log B)^4 * count
};

/// Exact solution count by a meet-in-the-middle join of (p1, p2) against
/// (p3, p4) on a1 p1 + a2 p2 = -(a3 p3 + a4 p4).
NaResult N_a(const CoeffTuple& a, double B);

/// Calls visit(x) for every x in P(B) with <a,x> = 0 mod M (M = 0: exactly 0),
/// grouped through a residue join. Works for any integer a.
void for_each_join_solution(const CoeffTuple& a, const PrimeGrid& grid, int64_t modulus,
                            const std::function<void(const PrimeTuple&)>& visit);

/// (log B)^4 (alpha W / ||a||) sum_{x in P(B), a in Lambda_x^(W) cap C_x^(alpha)} 1/||x||.
double N_a_loc(const CoeffTuple& a, double B);
double N_a_loc(const CoeffTuple& a, double B, const LocalModel& model);

/// Delta(x, y) = ||x|| ||y|| / det(Zx + Zy).
double delta_pair(std::span<const int64_t> x, std::span<const int64_t> y);

/// min{1, Delta^2 / alpha^2} + [G(x,y) does not divide W / rad(W)].
double calE_pair(std::span<const int64_t> x, std::span<const int64_t> y, double B);
double calE_pair(std::span<const int64_t> x, std::span<const int64_t> y, const LocalModel& model);

struct PairSums {
  double B = 0;
  double E = 0;                  ///< (log B)^8 sum 1/d_2(x,y)
  double F = 0;                  ///< (log B)^8 sum calE/d_2(x,y)
  uint64_t pairs = 0;            ///< #Omega(B)
  uint64_t dependent_pairs = 0;  ///< pairs in Omega(B) with x, y parallel; excluded from E and F
};

/// E(B) and F(B) in one pass. Ordered pairs x != y; the x side is reduced to
/// sorted tuples weighted by their number of distinct permutations.
PairSums pair_sums(double B, unsigned threads = 1, bool with_F = true);
double E_of_B(double B, unsigned threads = 1);
double F_of_B(double B, unsigned threads = 1);

/// #{(x, y) prime tuples : x, y independent, ||x|| <= X, ||y|| <= Y, d_2(x,y) <= Delta}.
uint64_t l_count(double X, double Y, double Delta, unsigned threads = 1);

using RealVec4 = std::array<double, 4>;

enum class VolumeMode { Formula, MonteCarlo };

struct VolumeResult {
  double value = 0;
  double std_error = 0;  ///< 0 in formula mode
  double band = 0;       ///< relative error band of the leading term
};

/// I(w,z) = vol{t in (Rw)^perp : |<z,t>| <= ||t|| <= 1}; leading term
/// (4/3) pi ||w|| / sqrt(delta_{w,z}).
VolumeResult vol_I(const RealVec4& w, const RealVec4& z, VolumeMode mode, uint64_t samples = 1000000,
                   uint64_t seed = 1, unsigned threads = 1);

/// J(w,z) = vol{t : |<w,t>|, |<z,t>| <= ||t|| <= 1}; leading term 2 pi / sqrt(delta_{w,z}).
VolumeResult vol_J(const RealVec4& w, const RealVec4& z, VolumeMode mode, uint64_t samples = 1000000,
                   uint64_t seed = 1, unsigned threads = 1);

/// Seeded integer pairs (entries in [-40, 40]) with delta_{w,z} >= 100 (||w|| + ||z||)^2,
/// where both volume bands are at most 1/100.
std::vector<std::pair<RealVec4, RealVec4>> separated_volume_pairs(std::size_t count, uint64_t seed);

/// One representative a of every orbit of {a in Z^4 : a_i != 0, gcd = 1,
/// ||a|| <= A} under coordinate permutations and a -> -a, with the orbit size
/// as weight. Representatives satisfy a1 >= a2 >= a3 >= a4 and
/// a >= (-a4, -a3, -a2, -a1) lexicographically, so a1 > 0.
struct CoeffOrbit {
  CoeffTuple a{};
  int weight = 0;
};

/// Leading entries a1 that occur, descending. Each lead is one work chunk.
std::vector<int64_t> orbit_leads(double A);
std::vector<CoeffOrbit> orbits_with_lead(double A, int64_t lead);
/// All chunks at once; for small A.
std::vector<std::vector<CoeffOrbit>> coefficient_orbits(double A);

struct MomentReport {
  double A = 0;
  double B = 0;
  double alpha = 0;
  int64_t W = 1;
  uint64_t coefficient_count = 0;  ///< #{primitive a, ||a|| <= A}
  uint64_t orbit_count = 0;
  double V = 0;
  double D = 0;
  double D_mix = 0;
  double D_loc = 0;
  double K = 0;
  double sum_N = 0;
  double sum_N_loc = 0;
  /// sum_a (c_a^2 - c_a) with c_a the exact solution count; D = (log B)^8 times this
  uint64_t D_pair_count = 0;
  std::optional<double> E_B;
  std::optional<double> F_B;

  [[nodiscard]] double normalized() const;
  /// |V - (D - 2 D_mix + D_loc + K)| / max(|V|, |D|, |D_mix|, |D_loc|, |K|)
  [[nodiscard]] double identity_residual() const;

  static std::string csv_header();
  [[nodiscard]] std::string csv_row() const;
  [[nodiscard]] std::string to_json() const;
};

struct MomentOptions {
  unsigned threads = 1;
  bool with_pair_sums = false;
  std::optional<LocalModel> model;  ///< overrides modulus_params(B)
};

inline constexpr double kMaxMomentA = 150;
inline constexpr std::size_t kMaxPairPrimes = 64;

/// Direct summation over primitive a with ||a|| <= A.
MomentReport moment_decomposition(double A, double B, const MomentOptions& options = {});

/// D, D^mix and D^loc evaluated from the other side: for each (x, y) in
/// Omega(B), lattice-point sums over a in Lambda_x cap Lambda_y (and the
/// congruence/cone variants). Slow; meant for cross-checking at small A, B.
struct PairRepresentation {
  uint64_t D_pair_count = 0;
  double D = 0;
  double D_mix = 0;
  double D_loc = 0;
};
PairRepresentation moment_pair_representation(double A, double B, const std::optional<LocalModel>& model = {});

}  // namespace primeforms
