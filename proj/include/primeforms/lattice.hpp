#pragma once

// Integral lattices in Z^N (N <= 8): kernel and congruence lattices, exact
// determinants, the minors gcd G(c_1, ..., c_k), successive minima, and exact
// point enumeration in balls intersected with cones.
//
// Every basis is kept in Hermite normal form, which doubles as the canonical
// form for lattice equality. Determinants are carried as exact squared
// integers (det^2 = det(Gram)); det() is only a convenience view.

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace primeforms {

using IntVec = std::vector<int64_t>;

inline constexpr int kMaxAmbientDim = 8;
inline constexpr uint64_t kEnumerationBudget = 100'000'000;

int64_t dot(std::span<const int64_t> a, std::span<const int64_t> b);
int64_t norm2(std::span<const int64_t> a);

/// Exact determinant of a small square integer matrix (fraction-free
/// elimination, 128-bit intermediates).
int64_t integer_determinant(const std::vector<IntVec>& rows);

/// Rank over Q of a list of integer vectors.
int rank_of(const std::vector<IntVec>& vectors);

class IntLattice {
public:
  /// Lattice generated by arbitrary integer vectors (dependent ones allowed).
  static IntLattice from_generators(int ambient_dim, std::vector<IntVec> generators);

  /// Lattice with the given basis; the vectors must be independent.
  static IntLattice from_basis(int ambient_dim, std::vector<IntVec> basis);

  [[nodiscard]] int ambient_dim() const { return ambient_dim_; }
  [[nodiscard]] int rank() const { return static_cast<int>(basis_.size()); }
  /// Basis vectors (the columns of the N x R basis matrix), in HNF.
  [[nodiscard]] const std::vector<IntVec>& basis() const { return basis_; }
  [[nodiscard]] const std::vector<IntVec>& gram() const { return gram_; }
  [[nodiscard]] int64_t det_squared() const { return det_squared_; }
  [[nodiscard]] double det() const;

  [[nodiscard]] bool contains(std::span<const int64_t> v) const;
  /// Saturated in Z^N, i.e. Span_R(L) cap Z^N = L.
  [[nodiscard]] bool is_primitive() const;

  /// {ambient_dim, rank, basis (column-major), det_squared}
  [[nodiscard]] std::string to_json() const;

  friend bool operator==(const IntLattice& a, const IntLattice& b) {
    return a.ambient_dim_ == b.ambient_dim_ && a.basis_ == b.basis_;
  }

private:
  IntLattice() = default;
  void finish();

  int ambient_dim_ = 0;
  std::vector<IntVec> basis_;
  std::vector<IntVec> gram_;
  int64_t det_squared_ = 0;
};

/// Row-style Hermite normal form of the lattice spanned by `rows`; zero rows
/// are dropped, so the result is a basis.
std::vector<IntVec> hermite_normal_form(std::vector<IntVec> rows, int columns);

/// Integer kernel {y in Z^N : <c_i, y> = 0 for all i} of the given rows.
std::vector<IntVec> integer_kernel(const std::vector<IntVec>& rows, int columns);

/// Lambda_c = {y in Z^N : <c, y> = 0}.
IntLattice kernel_lattice(std::span<const int64_t> c);

/// Lambda_{c_1} cap ... cap Lambda_{c_k}; the c_i must be independent, k <= N-1.
IntLattice kernel_lattice_multi(const std::vector<IntVec>& cs);

/// {y in Z^N : <r_i, y> = 0 mod m_i for all i}; m_i = 0 means exact equality.
IntLattice lattice_from_congruences(const std::vector<IntVec>& rows, const std::vector<int64_t>& moduli);

/// Lambda_c^(Q) = {y in Z^N : <c, y> = 0 mod Q}.
IntLattice congruence_lattice(std::span<const int64_t> c, int64_t modulus);

enum class IntersectionMode {
  BothModQ,     ///< Lambda_c^(Q) cap Lambda_d^(Q), rank N
  ExactAndModQ  ///< Lambda_c cap Lambda_d^(Q), rank N-1
};

/// Intersections of kernel/congruence lattices for primitive independent c, d.
IntLattice congruence_intersection(std::span<const int64_t> c, std::span<const int64_t> d, int64_t modulus,
                                   IntersectionMode mode);

/// Closed-form det^2 that congruence_intersection must reproduce:
/// (Q^2/gcd(G,Q))^2 or ||c||^2 (Q/gcd(G,Q))^2.
int64_t congruence_intersection_det_squared_formula(std::span<const int64_t> c, std::span<const int64_t> d,
                                                    int64_t modulus, IntersectionMode mode);

/// gcd of the k x k minors of the N x k matrix with columns c_1..c_k.
int64_t minors_gcd(const std::vector<IntVec>& cs);

/// d_2(x, y) = det(Zx + Zy) / G(x, y), kept as an exact squared integer.
struct MinDeterminant {
  int64_t gram_det = 0;   ///< ||x||^2 ||y||^2 - <x,y>^2
  int64_t minors_gcd = 0; ///< G(x, y)
  [[nodiscard]] int64_t squared() const { return gram_det / (minors_gcd * minors_gcd); }
  [[nodiscard]] double value() const;
};

MinDeterminant d2(std::span<const int64_t> x, std::span<const int64_t> y);

/// Exact squared successive minima lambda_1^2 <= ... <= lambda_R^2.
std::vector<int64_t> successive_minima(const IntLattice& lattice, uint64_t budget = kEnumerationBudget);

/// The region B_N(T) cap C_{v_1}^(gamma) cap ... cap C_{v_I}^(gamma).
struct ConeSpec {
  std::vector<IntVec> vectors;
  double gamma = 1.0;
};

struct RegionQuery {
  double radius = 1.0;
  bool strict = false;        ///< ||y|| < T instead of ||y|| <= T
  ConeSpec cones;             ///< empty vector list: no cone constraint
  bool primitive_only = false;
  bool exclude_zero = true;
  uint64_t budget = kEnumerationBudget;
};

/// True when y lies in C_v^(gamma): 4 gamma^2 <v,y>^2 <= ||v||^2 ||y||^2.
bool in_cone(std::span<const int64_t> v, std::span<const int64_t> y, double gamma);

/// Calls visit(y, ||y||^2) for every lattice point in the region.
void for_each_point_in_region(const IntLattice& lattice, const RegionQuery& query,
                              const std::function<void(std::span<const int64_t>, int64_t)>& visit);

struct RegionCount {
  uint64_t count = 0;
  std::vector<IntVec> points;  ///< filled only when requested
};

RegionCount points_in_region(const IntLattice& lattice, const RegionQuery& query, bool collect_points = false);

/// Volume of the unit ball in R^n.
double unit_ball_volume(int n);

}  // namespace primeforms
