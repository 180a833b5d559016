#include "primeforms/lattice.hpp"

#include "primeforms/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace primeforms {

namespace {

using i128 = __int128;

int64_t narrow(i128 v) {
  if (v > INT64_MAX || v < INT64_MIN) throw budget_error("lattice: integer entry exceeds 64 bits");
  return static_cast<int64_t>(v);
}

i128 abs128(i128 v) { return v < 0 ? -v : v; }

i128 gcd128(i128 a, i128 b) {
  a = abs128(a);
  b = abs128(b);
  while (b != 0) {
    i128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

int64_t floor_div(int64_t a, int64_t b) {
  int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

// row_i -= q * row_r over all columns
void sub_multiple(IntVec& target, const IntVec& source, int64_t q) {
  if (q == 0) return;
  for (std::size_t j = 0; j < target.size(); ++j)
    target[j] = narrow(static_cast<i128>(target[j]) - static_cast<i128>(q) * source[j]);
}

void negate(IntVec& v) {
  for (auto& x : v) x = -x;
}

bool is_zero(std::span<const int64_t> v) {
  return std::all_of(v.begin(), v.end(), [](int64_t x) { return x == 0; });
}

// Echelon form of the first `lead` columns by unimodular row operations
// applied to whole rows. Returns the number of pivot rows; the rows after
// them are zero on the leading block.
std::size_t echelonize(std::vector<IntVec>& rows, int lead, bool reduce_above) {
  std::size_t r = 0;
  for (int col = 0; col < lead && r < rows.size(); ++col) {
    bool have_pivot = false;
    for (;;) {
      std::size_t best = rows.size();
      for (std::size_t i = r; i < rows.size(); ++i) {
        if (rows[i][col] == 0) continue;
        if (best == rows.size() || std::abs(rows[i][col]) < std::abs(rows[best][col])) best = i;
      }
      if (best == rows.size()) break;
      have_pivot = true;
      std::swap(rows[r], rows[best]);
      bool cleared = true;
      for (std::size_t i = r + 1; i < rows.size(); ++i) {
        if (rows[i][col] == 0) continue;
        sub_multiple(rows[i], rows[r], floor_div(rows[i][col], rows[r][col]));
        if (rows[i][col] != 0) cleared = false;
      }
      if (cleared) break;
    }
    if (!have_pivot) continue;
    if (rows[r][col] < 0) negate(rows[r]);
    if (reduce_above)
      for (std::size_t i = 0; i < r; ++i) sub_multiple(rows[i], rows[r], floor_div(rows[i][col], rows[r][col]));
    ++r;
  }
  return r;
}

void check_dim(std::size_t n) {
  require(n >= 1 && n <= static_cast<std::size_t>(kMaxAmbientDim), "lattice: ambient dimension must be in [1, 8]");
}

void check_vectors(const std::vector<IntVec>& vs, std::size_t n) {
  for (const auto& v : vs) require(v.size() == n, "lattice: vector length differs from ambient dimension");
}

int64_t vector_gcd(std::span<const int64_t> v) {
  int64_t g = 0;
  for (int64_t x : v) g = std::gcd(g, x);
  return g;
}

// Kernel of the rows of M (k x (n + s)) projected to the first n coordinates.
std::vector<IntVec> projected_kernel(const std::vector<IntVec>& m, int n) {
  int total = static_cast<int>(m.front().size());
  auto kernel = integer_kernel(m, total);
  for (auto& v : kernel) v.resize(static_cast<std::size_t>(n));
  return kernel;
}

// LLL-reduced copy of a basis (floating Gram-Schmidt, exact integer updates).
// Only used to shape enumeration; the lattice itself is unchanged.
std::vector<IntVec> lll_reduce(std::vector<IntVec> b) {
  const std::size_t r = b.size();
  if (r <= 1) return b;
  const long double delta = 0.99L;
  std::vector<std::vector<long double>> mu(r, std::vector<long double>(r, 0));
  std::vector<long double> bstar_norm(r, 0);
  auto gram_schmidt = [&] {
    std::vector<std::vector<long double>> bstar(r);
    for (std::size_t i = 0; i < r; ++i) {
      bstar[i].assign(b[i].begin(), b[i].end());
      for (std::size_t j = 0; j < i; ++j) {
        long double s = 0;
        for (std::size_t t = 0; t < b[i].size(); ++t) s += static_cast<long double>(b[i][t]) * bstar[j][t];
        mu[i][j] = s / bstar_norm[j];
        for (std::size_t t = 0; t < b[i].size(); ++t) bstar[i][t] -= mu[i][j] * bstar[j][t];
      }
      long double s = 0;
      for (long double x : bstar[i]) s += x * x;
      bstar_norm[i] = s;
    }
  };
  gram_schmidt();
  std::size_t k = 1;
  int guard = 0;
  while (k < r) {
    if (++guard > 100000) break;
    for (std::size_t j = k; j-- > 0;) {
      long double q = std::round(mu[k][j]);
      if (q != 0) {
        sub_multiple(b[k], b[j], static_cast<int64_t>(q));
        gram_schmidt();
      }
    }
    if (bstar_norm[k] >= (delta - mu[k][k - 1] * mu[k][k - 1]) * bstar_norm[k - 1]) {
      ++k;
    } else {
      std::swap(b[k], b[k - 1]);
      gram_schmidt();
      k = std::max<std::size_t>(k - 1, 1);
    }
  }
  return b;
}

struct Enumerator {
  std::vector<IntVec> basis;
  std::vector<std::vector<long double>> q;  // q[i][i] diagonal, q[i][j] (j > i) coefficients
  long double bound = 0;                     // squared radius with slack
  uint64_t budget = kEnumerationBudget;
  uint64_t nodes = 0;
  std::size_t n = 0;
  std::size_t r = 0;

  Enumerator(const IntLattice& lattice, long double radius2, uint64_t node_budget)
      : basis(lll_reduce(lattice.basis())), budget(node_budget) {
    n = static_cast<std::size_t>(lattice.ambient_dim());
    r = basis.size();
    q.assign(r, std::vector<long double>(r, 0));
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < r; ++j) {
        long double s = 0;
        for (std::size_t t = 0; t < n; ++t) s += static_cast<long double>(basis[i][t]) * basis[j][t];
        q[i][j] = s;
      }
    for (std::size_t i = 0; i < r; ++i) {
      for (std::size_t j = i + 1; j < r; ++j) {
        q[j][i] = q[i][j];
        q[i][j] /= q[i][i];
      }
      for (std::size_t k = i + 1; k < r; ++k)
        for (std::size_t l = k; l < r; ++l) q[k][l] -= q[k][i] * q[i][l];
    }
    bound = radius2 * (1.0L + 1e-12L) + 1e-9L;
  }

  template <class Leaf>
  void run(Leaf&& leaf) {
    if (r == 0) return;
    std::vector<int64_t> x(r, 0);
    std::vector<long double> partial(r + 1, 0);
    IntVec y(n, 0);
    descend(static_cast<int>(r) - 1, x, partial, y, leaf);
  }

  template <class Leaf>
  void descend(int i, std::vector<int64_t>& x, std::vector<long double>& partial, IntVec& y, Leaf& leaf) {
    auto ui = static_cast<std::size_t>(i);
    long double center = 0;
    for (std::size_t j = ui + 1; j < r; ++j) center -= q[ui][j] * static_cast<long double>(x[j]);
    long double room = bound - partial[ui + 1];
    if (room < 0) return;
    long double half = std::sqrt(room / q[ui][ui]);
    auto lo = static_cast<int64_t>(std::ceil(center - half));
    auto hi = static_cast<int64_t>(std::floor(center + half));
    for (int64_t v = lo; v <= hi; ++v) {
      if (++nodes > budget) throw budget_error("lattice enumeration exceeded the node budget");
      long double d = static_cast<long double>(v) - center;
      partial[ui] = partial[ui + 1] + q[ui][ui] * d * d;
      if (partial[ui] > bound) continue;
      x[ui] = v;
      for (std::size_t t = 0; t < n; ++t) y[t] = narrow(static_cast<i128>(y[t]) + static_cast<i128>(v) * basis[ui][t]);
      if (i == 0)
        leaf(static_cast<std::span<const int64_t>>(y));
      else
        descend(i - 1, x, partial, y, leaf);
      for (std::size_t t = 0; t < n; ++t) y[t] -= v * basis[ui][t];
    }
    x[ui] = 0;
  }
};

}  // namespace

int64_t dot(std::span<const int64_t> a, std::span<const int64_t> b) {
  i128 s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<i128>(a[i]) * b[i];
  return narrow(s);
}

int64_t norm2(std::span<const int64_t> a) { return dot(a, a); }

int64_t integer_determinant(const std::vector<IntVec>& rows) {
  const std::size_t n = rows.size();
  if (n == 0) return 1;
  std::vector<std::vector<i128>> m(n, std::vector<i128>(n));
  for (std::size_t i = 0; i < n; ++i) {
    require(rows[i].size() == n, "integer_determinant: matrix must be square");
    for (std::size_t j = 0; j < n; ++j) m[i][j] = rows[i][j];
  }
  int sign = 1;
  i128 prev = 1;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (m[k][k] == 0) {
      std::size_t s = k + 1;
      while (s < n && m[s][k] == 0) ++s;
      if (s == n) return 0;
      std::swap(m[k], m[s]);
      sign = -sign;
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      for (std::size_t j = k + 1; j < n; ++j) {
        i128 a = m[i][j] * m[k][k];
        i128 b = m[i][k] * m[k][j];
        m[i][j] = (a - b) / prev;
      }
      m[i][k] = 0;
    }
    prev = m[k][k];
  }
  return narrow(sign * m[n - 1][n - 1]);
}

int rank_of(const std::vector<IntVec>& vectors) {
  if (vectors.empty()) return 0;
  std::vector<std::vector<i128>> m;
  m.reserve(vectors.size());
  for (const auto& v : vectors) m.emplace_back(v.begin(), v.end());
  const std::size_t cols = m.front().size();
  std::size_t r = 0;
  for (std::size_t col = 0; col < cols && r < m.size(); ++col) {
    std::size_t piv = r;
    while (piv < m.size() && m[piv][col] == 0) ++piv;
    if (piv == m.size()) continue;
    std::swap(m[r], m[piv]);
    for (std::size_t i = r + 1; i < m.size(); ++i) {
      if (m[i][col] == 0) continue;
      i128 a = m[r][col];
      i128 b = m[i][col];
      i128 g = 0;
      for (std::size_t j = 0; j < cols; ++j) {
        m[i][j] = m[i][j] * a - m[r][j] * b;
        g = gcd128(g, m[i][j]);
      }
      if (g > 1)
        for (auto& e : m[i]) e /= g;
    }
    ++r;
  }
  return static_cast<int>(r);
}

std::vector<IntVec> hermite_normal_form(std::vector<IntVec> rows, int columns) {
  check_vectors(rows, static_cast<std::size_t>(columns));
  std::size_t r = echelonize(rows, columns, true);
  rows.resize(r);
  return rows;
}

std::vector<IntVec> integer_kernel(const std::vector<IntVec>& rows, int columns) {
  check_vectors(rows, static_cast<std::size_t>(columns));
  const auto k = rows.size();
  const auto n = static_cast<std::size_t>(columns);
  // Row j of the augmented matrix is (column j of M | e_j).
  std::vector<IntVec> aug(n, IntVec(k + n, 0));
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < k; ++i) aug[j][i] = rows[i][j];
    aug[j][k + j] = 1;
  }
  std::size_t r = echelonize(aug, static_cast<int>(k), false);
  std::vector<IntVec> kernel;
  for (std::size_t j = r; j < n; ++j) kernel.emplace_back(aug[j].begin() + static_cast<std::ptrdiff_t>(k), aug[j].end());
  return hermite_normal_form(std::move(kernel), columns);
}

IntLattice IntLattice::from_generators(int ambient_dim, std::vector<IntVec> generators) {
  check_dim(static_cast<std::size_t>(ambient_dim));
  IntLattice lattice;
  lattice.ambient_dim_ = ambient_dim;
  lattice.basis_ = hermite_normal_form(std::move(generators), ambient_dim);
  lattice.finish();
  return lattice;
}

IntLattice IntLattice::from_basis(int ambient_dim, std::vector<IntVec> basis) {
  check_dim(static_cast<std::size_t>(ambient_dim));
  check_vectors(basis, static_cast<std::size_t>(ambient_dim));
  require(rank_of(basis) == static_cast<int>(basis.size()), "IntLattice: basis vectors are linearly dependent");
  return from_generators(ambient_dim, std::move(basis));
}

void IntLattice::finish() {
  const std::size_t r = basis_.size();
  gram_.assign(r, IntVec(r, 0));
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = i; j < r; ++j) gram_[i][j] = gram_[j][i] = dot(basis_[i], basis_[j]);
  det_squared_ = integer_determinant(gram_);
}

double IntLattice::det() const { return std::sqrt(static_cast<double>(det_squared_)); }

bool IntLattice::contains(std::span<const int64_t> v) const {
  require(v.size() == static_cast<std::size_t>(ambient_dim_), "IntLattice::contains: dimension mismatch");
  IntVec residual(v.begin(), v.end());
  for (const auto& row : basis_) {
    auto pivot = std::find_if(row.begin(), row.end(), [](int64_t x) { return x != 0; });
    auto col = static_cast<std::size_t>(pivot - row.begin());
    for (std::size_t t = 0; t < col; ++t)
      if (residual[t] != 0) return false;
    if (residual[col] % *pivot != 0) return false;
    sub_multiple(residual, row, residual[col] / *pivot);
  }
  return is_zero(residual);
}

bool IntLattice::is_primitive() const {
  if (basis_.empty()) return true;
  return minors_gcd(basis_) == 1;
}

std::string IntLattice::to_json() const {
  nlohmann::json j;
  j["ambient_dim"] = ambient_dim_;
  j["rank"] = rank();
  j["basis"] = basis_;
  j["det_squared"] = det_squared_;
  return j.dump();
}

IntLattice kernel_lattice(std::span<const int64_t> c) {
  check_dim(c.size());
  require(!is_zero(c), "kernel_lattice: c must be non-zero");
  auto n = static_cast<int>(c.size());
  return IntLattice::from_basis(n, integer_kernel({IntVec(c.begin(), c.end())}, n));
}

IntLattice kernel_lattice_multi(const std::vector<IntVec>& cs) {
  require(!cs.empty(), "kernel_lattice_multi: need at least one vector");
  const auto n = cs.front().size();
  check_dim(n);
  check_vectors(cs, n);
  require(cs.size() <= n - 1, "kernel_lattice_multi: need k <= N-1");
  require(rank_of(cs) == static_cast<int>(cs.size()), "kernel_lattice_multi: vectors are linearly dependent");
  return IntLattice::from_basis(static_cast<int>(n), integer_kernel(cs, static_cast<int>(n)));
}

IntLattice lattice_from_congruences(const std::vector<IntVec>& rows, const std::vector<int64_t>& moduli) {
  require(!rows.empty() && rows.size() == moduli.size(), "lattice_from_congruences: need one modulus per row");
  const auto n = rows.front().size();
  check_dim(n);
  check_vectors(rows, n);
  std::vector<IntVec> m;
  std::size_t extra = 0;
  for (auto q : moduli) {
    require(q >= 0, "lattice_from_congruences: moduli must be >= 0");
    extra += q > 0;
  }
  std::size_t slot = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    IntVec row(rows[i].begin(), rows[i].end());
    row.resize(n + extra, 0);
    if (moduli[i] > 0) row[n + slot++] = moduli[i];
    m.push_back(std::move(row));
  }
  return IntLattice::from_generators(static_cast<int>(n), projected_kernel(m, static_cast<int>(n)));
}

IntLattice congruence_lattice(std::span<const int64_t> c, int64_t modulus) {
  check_dim(c.size());
  require(modulus >= 1, "congruence_lattice: Q must be >= 1");
  return lattice_from_congruences({IntVec(c.begin(), c.end())}, {modulus});
}

namespace {

void check_pair(std::span<const int64_t> c, std::span<const int64_t> d) {
  check_dim(c.size());
  require(c.size() == d.size(), "congruence_intersection: dimension mismatch");
  require(vector_gcd(c) == 1 && vector_gcd(d) == 1, "congruence_intersection: c and d must be primitive");
  require(rank_of({IntVec(c.begin(), c.end()), IntVec(d.begin(), d.end())}) == 2,
          "congruence_intersection: c and d must be independent");
}

}  // namespace

IntLattice congruence_intersection(std::span<const int64_t> c, std::span<const int64_t> d, int64_t modulus,
                                   IntersectionMode mode) {
  check_pair(c, d);
  require(modulus >= 1, "congruence_intersection: Q must be >= 1");
  const int64_t first = mode == IntersectionMode::BothModQ ? modulus : 0;
  return lattice_from_congruences({IntVec(c.begin(), c.end()), IntVec(d.begin(), d.end())}, {first, modulus});
}

int64_t congruence_intersection_det_squared_formula(std::span<const int64_t> c, std::span<const int64_t> d,
                                                    int64_t modulus, IntersectionMode mode) {
  check_pair(c, d);
  int64_t g = std::gcd(minors_gcd({IntVec(c.begin(), c.end()), IntVec(d.begin(), d.end())}), modulus);
  if (mode == IntersectionMode::BothModQ) {
    i128 det = static_cast<i128>(modulus) * modulus / g;
    return narrow(det * det);
  }
  i128 q = modulus / g;
  return narrow(static_cast<i128>(norm2(c)) * q * q);
}

int64_t minors_gcd(const std::vector<IntVec>& cs) {
  require(!cs.empty(), "minors_gcd: need at least one vector");
  const auto n = cs.front().size();
  const auto k = cs.size();
  check_vectors(cs, n);
  require(k <= n, "minors_gcd: more vectors than coordinates");
  std::vector<std::size_t> pick(k);
  std::iota(pick.begin(), pick.end(), 0);
  int64_t g = 0;
  for (;;) {
    std::vector<IntVec> minor(k, IntVec(k));
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j) minor[i][j] = cs[j][pick[i]];
    g = std::gcd(g, integer_determinant(minor));
    std::size_t i = k;
    while (i > 0 && pick[i - 1] == n - k + i - 1) --i;
    if (i == 0) break;
    ++pick[i - 1];
    for (std::size_t j = i; j < k; ++j) pick[j] = pick[j - 1] + 1;
  }
  require(g != 0, "minors_gcd: vectors are linearly dependent");
  return g;
}

double MinDeterminant::value() const { return std::sqrt(static_cast<double>(squared())); }

MinDeterminant d2(std::span<const int64_t> x, std::span<const int64_t> y) {
  require(x.size() == y.size(), "d2: dimension mismatch");
  MinDeterminant out;
  i128 xy = dot(x, y);
  out.gram_det = narrow(static_cast<i128>(norm2(x)) * norm2(y) - xy * xy);
  require(out.gram_det != 0, "d2: x and y are linearly dependent");
  out.minors_gcd = minors_gcd({IntVec(x.begin(), x.end()), IntVec(y.begin(), y.end())});
  return out;
}

std::vector<int64_t> successive_minima(const IntLattice& lattice, uint64_t budget) {
  const int r = lattice.rank();
  require(r >= 1, "successive_minima: rank must be >= 1");
  int64_t radius2 = INT64_MAX;
  for (const auto& v : lll_reduce(lattice.basis())) radius2 = std::min(radius2, norm2(v));
  for (;;) {
    std::vector<std::pair<int64_t, IntVec>> found;
    Enumerator en(lattice, static_cast<long double>(radius2), budget);
    en.run([&](std::span<const int64_t> y) {
      auto first = std::find_if(y.begin(), y.end(), [](int64_t v) { return v != 0; });
      if (first == y.end() || *first < 0) return;
      int64_t n2 = norm2(y);
      if (n2 <= radius2) found.emplace_back(n2, IntVec(y.begin(), y.end()));
    });
    std::sort(found.begin(), found.end());
    std::vector<IntVec> chosen;
    std::vector<int64_t> minima;
    for (auto& [n2, v] : found) {
      chosen.push_back(v);
      if (rank_of(chosen) == static_cast<int>(chosen.size())) {
        minima.push_back(n2);
        if (static_cast<int>(minima.size()) == r) return minima;
      } else {
        chosen.pop_back();
      }
    }
    if (radius2 > INT64_MAX / 4) throw budget_error("successive_minima: radius overflow");
    radius2 *= 4;
  }
}

bool in_cone(std::span<const int64_t> v, std::span<const int64_t> y, double gamma) {
  long double vy = static_cast<long double>(dot(v, y));
  long double g = gamma;
  return 4.0L * g * g * vy * vy <= static_cast<long double>(norm2(v)) * static_cast<long double>(norm2(y));
}

void for_each_point_in_region(const IntLattice& lattice, const RegionQuery& query,
                              const std::function<void(std::span<const int64_t>, int64_t)>& visit) {
  require(query.radius > 0, "points_in_region: T must be > 0");
  require(query.cones.gamma > 0, "points_in_region: gamma must be > 0");
  for (const auto& v : query.cones.vectors) {
    require(v.size() == static_cast<std::size_t>(lattice.ambient_dim()), "points_in_region: cone dimension mismatch");
    require(!is_zero(v), "points_in_region: cone vectors must be non-zero");
  }
  const long double t2 = static_cast<long double>(query.radius) * query.radius;
  auto accept = [&](std::span<const int64_t> y) {
    int64_t n2 = norm2(y);
    if (n2 == 0) {
      if (!query.exclude_zero) visit(y, 0);
      return;
    }
    auto n2l = static_cast<long double>(n2);
    if (query.strict ? !(n2l < t2) : !(n2l <= t2)) return;
    if (query.primitive_only && vector_gcd(y) != 1) return;
    for (const auto& v : query.cones.vectors)
      if (!in_cone(v, y, query.cones.gamma)) return;
    visit(y, n2);
  };
  if (lattice.rank() == 0) {
    IntVec zero(static_cast<std::size_t>(lattice.ambient_dim()), 0);
    accept(zero);
    return;
  }
  Enumerator en(lattice, t2, query.budget);
  en.run(accept);
}

RegionCount points_in_region(const IntLattice& lattice, const RegionQuery& query, bool collect_points) {
  RegionCount out;
  for_each_point_in_region(lattice, query, [&](std::span<const int64_t> y, int64_t) {
    ++out.count;
    if (collect_points) out.points.emplace_back(y.begin(), y.end());
  });
  return out;
}

double unit_ball_volume(int n) {
  return std::pow(std::numbers::pi, n / 2.0) / std::tgamma(n / 2.0 + 1.0);
}

}  // namespace primeforms
