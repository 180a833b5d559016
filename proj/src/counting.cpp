#include "primeforms/counting.hpp"

#include "primeforms/arith.hpp"
#include "primeforms/errors.hpp"
#include "primeforms/parallel.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <sstream>

namespace primeforms {

namespace {

int64_t abs64(int64_t v) { return v < 0 ? -v : v; }

double norm_of(const PrimeTuple& x) {
  double s = 0;
  for (int64_t v : x) s += static_cast<double>(v) * static_cast<double>(v);
  return std::sqrt(s);
}

int64_t norm2_of(const CoeffTuple& a) {
  int64_t s = 0;
  for (int64_t v : a) s += v * v;
  return s;
}

// Reusable bucket storage for the two-against-two join. Heads are reset only
// where they were touched, so one workspace serves many joins.
struct JoinWorkspace {
  std::vector<int32_t> head;
  std::vector<int32_t> next;
  std::vector<int64_t> touched;
};

// Visits every x in coords^4 with a1 x1 + a2 x2 + a3 x3 + a4 x4 = 0 (modulus 0)
// or = 0 mod modulus.
template <class Visit>
void join(const CoeffTuple& a, std::span<const int64_t> coords, int64_t modulus, JoinWorkspace& ws, Visit&& visit) {
  const auto n = static_cast<int64_t>(coords.size());
  if (n == 0) return;
  const int64_t pmax = coords.back();
  const int64_t left_span = (abs64(a[0]) + abs64(a[1])) * pmax;
  const int64_t right_span = (abs64(a[2]) + abs64(a[3])) * pmax;
  // A congruence modulo something larger than every possible |<a,x>| is an equality.
  const bool exact = modulus == 0 || modulus > left_span + right_span;
  const int64_t size = exact ? 2 * left_span + 1 : modulus;
  if (size > (int64_t{1} << 31)) throw budget_error("join: key range " + std::to_string(size) + " too large");
  if (static_cast<int64_t>(ws.head.size()) < size) ws.head.assign(static_cast<std::size_t>(size), -1);
  ws.next.resize(static_cast<std::size_t>(n * n));
  ws.touched.clear();

  auto key_of = [&](int64_t v) -> int64_t { return exact ? v + left_span : mod_floor(v, modulus); };

  for (int64_t i = 0; i < n; ++i)
    for (int64_t j = 0; j < n; ++j) {
      const int64_t k = key_of(a[0] * coords[i] + a[1] * coords[j]);
      const auto id = static_cast<int32_t>(i * n + j);
      auto& h = ws.head[static_cast<std::size_t>(k)];
      if (h < 0) ws.touched.push_back(k);
      ws.next[static_cast<std::size_t>(id)] = h;
      h = id;
    }

  for (int64_t k3 = 0; k3 < n; ++k3)
    for (int64_t k4 = 0; k4 < n; ++k4) {
      const int64_t r = -(a[2] * coords[k3] + a[3] * coords[k4]);
      if (exact && (r < -left_span || r > left_span)) continue;
      for (int32_t id = ws.head[static_cast<std::size_t>(key_of(r))]; id >= 0; id = ws.next[static_cast<std::size_t>(id)]) {
        const PrimeTuple x{coords[id / n], coords[id % n], coords[k3], coords[k4]};
        visit(x);
      }
    }

  for (int64_t k : ws.touched) ws.head[static_cast<std::size_t>(k)] = -1;
}

int64_t minors_gcd4(const PrimeTuple& x, const PrimeTuple& y) {
  int64_t g = 0;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) g = std::gcd(g, x[i] * y[j] - x[j] * y[i]);
  return g;
}

int64_t dot4(const PrimeTuple& x, const PrimeTuple& y) {
  return x[0] * y[0] + x[1] * y[1] + x[2] * y[2] + x[3] * y[3];
}

// Sorted tuples over coords with the number of distinct orderings of each.
struct SortedTuple {
  PrimeTuple x{};
  int weight = 0;
};

std::vector<SortedTuple> sorted_tuples(std::span<const int64_t> coords) {
  std::vector<SortedTuple> out;
  const std::size_t n = coords.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j)
      for (std::size_t k = j; k < n; ++k)
        for (std::size_t l = k; l < n; ++l) {
          PrimeTuple x{coords[i], coords[j], coords[k], coords[l]};
          // 4! / product of multiplicity factorials
          int w = 24;
          int run = 1;
          for (int t = 1; t <= 4; ++t) {
            if (t < 4 && x[t] == x[t - 1]) {
              ++run;
            } else {
              for (int f = 2; f <= run; ++f) w /= f;
              run = 1;
            }
          }
          out.push_back({x, w});
        }
  return out;
}

std::vector<PrimeTuple> all_tuples(std::span<const int64_t> coords) {
  std::vector<PrimeTuple> out;
  out.reserve(coords.size() * coords.size() * coords.size() * coords.size());
  for (int64_t p1 : coords)
    for (int64_t p2 : coords)
      for (int64_t p3 : coords)
        for (int64_t p4 : coords) out.push_back({p1, p2, p3, p4});
  return out;
}

void require_pair_budget(const PrimeGrid& grid, const char* where) {
  if (grid.coords.size() > kMaxPairPrimes)
    throw budget_error(std::string(where) + ": pi(B) = " + std::to_string(grid.coords.size()) + " exceeds the cap " +
                       std::to_string(kMaxPairPrimes));
}

std::string fmt12(double v) {
  std::ostringstream os;
  os << std::setprecision(12) << v;
  return os.str();
}

}  // namespace

PrimeGrid PrimeGrid::make(double B) {
  require(B >= 2, "PrimeGrid: B must be >= 2");
  require(B <= 1e7, "PrimeGrid: B too large");
  PrimeGrid g;
  g.B = B;
  auto table = sieve_primes(static_cast<int64_t>(std::floor(B)));
  g.coords.assign(table.primes().begin(), table.primes().end());
  return g;
}

std::size_t PrimeGrid::tuple_count() const {
  const std::size_t n = coords.size();
  return n * n * n * n;
}

LocalModel LocalModel::for_height(double B) {
  auto m = modulus_params(B);
  return {m.alpha, m.W};
}

void for_each_join_solution(const CoeffTuple& a, const PrimeGrid& grid, int64_t modulus,
                            const std::function<void(const PrimeTuple&)>& visit) {
  require(modulus >= 0, "for_each_join_solution: modulus must be >= 0");
  JoinWorkspace ws;
  join(a, grid.coords, modulus, ws, visit);
}

NaResult N_a(const CoeffTuple& a, double B) {
  require(B >= 2, "N_a: B must be >= 2");
  auto grid = PrimeGrid::make(B);
  JoinWorkspace ws;
  NaResult out;
  join(a, grid.coords, 0, ws, [&](const PrimeTuple&) { ++out.count; });
  out.value = std::pow(std::log(B), 4) * static_cast<double>(out.count);
  return out;
}

double N_a_loc(const CoeffTuple& a, double B) {
  require(B >= 3, "N_a_loc: B must be >= 3");
  return N_a_loc(a, B, LocalModel::for_height(B));
}

double N_a_loc(const CoeffTuple& a, double B, const LocalModel& model) {
  require(B >= 2, "N_a_loc: B must be >= 2");
  require(model.W >= 1 && model.alpha > 0, "N_a_loc: need alpha > 0 and W >= 1");
  auto grid = PrimeGrid::make(B);
  JoinWorkspace ws;
  CompensatedSum s;
  join(a, grid.coords, model.W, ws, [&](const PrimeTuple& x) {
    if (in_cone(a, x, model.alpha)) s.add(1.0 / norm_of(x));
  });
  const double na = std::sqrt(static_cast<double>(norm2_of(a)));
  return std::pow(std::log(B), 4) * model.alpha * static_cast<double>(model.W) / na * s.value();
}

double delta_pair(std::span<const int64_t> x, std::span<const int64_t> y) {
  auto d = d2(x, y);  // rejects dependent input
  return std::sqrt(static_cast<double>(norm2(x))) * std::sqrt(static_cast<double>(norm2(y))) /
         std::sqrt(static_cast<double>(d.gram_det));
}

double calE_pair(std::span<const int64_t> x, std::span<const int64_t> y, double B) {
  require(B >= 3, "calE_pair: B must be >= 3");
  return calE_pair(x, y, LocalModel::for_height(B));
}

double calE_pair(std::span<const int64_t> x, std::span<const int64_t> y, const LocalModel& model) {
  auto d = d2(x, y);
  const double delta2 = static_cast<double>(norm2(x)) * static_cast<double>(norm2(y)) / static_cast<double>(d.gram_det);
  const int64_t reduced = model.W / radical(model.W);
  return std::min(1.0, delta2 / (model.alpha * model.alpha)) + (reduced % d.minors_gcd != 0 ? 1.0 : 0.0);
}

PairSums pair_sums(double B, unsigned threads, bool with_F) {
  require(B >= 2, "pair_sums: B must be >= 2");
  auto grid = PrimeGrid::make(B);
  require_pair_budget(grid, "pair_sums");
  PairSums out;
  out.B = B;
  const uint64_t tuples = grid.tuple_count();
  out.pairs = tuples * tuples - tuples;
  if (tuples <= 1) return out;
  LocalModel model{};
  int64_t reduced = 1;
  if (with_F) {
    model = LocalModel::for_height(B);
    reduced = model.W / radical(model.W);
  }
  const double inv_alpha2 = with_F ? 1.0 / (model.alpha * model.alpha) : 0.0;

  const auto xs = sorted_tuples(grid.coords);
  const auto ys = all_tuples(grid.coords);
  struct Partial {
    CompensatedSum e, f;
    uint64_t dependent = 0;
  };
  std::vector<Partial> parts(xs.size());
  parallel_chunks(xs.size(), threads, [&](std::size_t c) {
    const auto& [x, weight] = xs[c];
    const int64_t xx = dot4(x, x);
    Partial p;
    double e = 0;
    double f = 0;
    for (const auto& y : ys) {
      if (y == x) continue;
      const int64_t yy = dot4(y, y);
      const int64_t xy = dot4(x, y);
      const int64_t gram = xx * yy - xy * xy;
      if (gram == 0) {
        ++p.dependent;
        continue;
      }
      const int64_t g = minors_gcd4(x, y);
      const double inv_d2 = static_cast<double>(g) / std::sqrt(static_cast<double>(gram));
      e += inv_d2;
      if (with_F) {
        const double delta2 = static_cast<double>(xx) * static_cast<double>(yy) / static_cast<double>(gram);
        const double weight_e = std::min(1.0, delta2 * inv_alpha2) + (reduced % g != 0 ? 1.0 : 0.0);
        f += weight_e * inv_d2;
      }
    }
    p.e.add(e * weight);
    p.f.add(f * weight);
    p.dependent = p.dependent * static_cast<uint64_t>(weight);
    parts[c] = p;
  });
  CompensatedSum e, f;
  for (const auto& p : parts) {
    e.add(p.e);
    f.add(p.f);
    out.dependent_pairs += p.dependent;
  }
  const double L8 = std::pow(std::log(B), 8);
  out.E = L8 * e.value();
  out.F = with_F ? L8 * f.value() : 0.0;
  return out;
}

double E_of_B(double B, unsigned threads) {
  require(B >= 3, "E_of_B: B must be >= 3");
  return pair_sums(B, threads, false).E;
}

double F_of_B(double B, unsigned threads) {
  require(B >= 3, "F_of_B: B must be >= 3");
  return pair_sums(B, threads, true).F;
}

uint64_t l_count(double X, double Y, double Delta, unsigned threads) {
  require(X >= 2 && Y >= 2 && Delta >= 2, "l_count: X, Y, Delta must be >= 2");
  auto gx = PrimeGrid::make(X);
  auto gy = PrimeGrid::make(Y);
  require_pair_budget(gx, "l_count");
  require_pair_budget(gy, "l_count");
  const long double X2 = static_cast<long double>(X) * X;
  const long double Y2 = static_cast<long double>(Y) * Y;
  const long double D2 = static_cast<long double>(Delta) * Delta;
  std::vector<SortedTuple> xs;
  for (const auto& s : sorted_tuples(gx.coords))
    if (static_cast<long double>(dot4(s.x, s.x)) <= X2) xs.push_back(s);
  std::vector<PrimeTuple> ys;
  for (const auto& y : all_tuples(gy.coords))
    if (static_cast<long double>(dot4(y, y)) <= Y2) ys.push_back(y);
  std::vector<uint64_t> parts(xs.size(), 0);
  parallel_chunks(xs.size(), threads, [&](std::size_t c) {
    const auto& [x, weight] = xs[c];
    const int64_t xx = dot4(x, x);
    uint64_t n = 0;
    for (const auto& y : ys) {
      const int64_t xy = dot4(x, y);
      const int64_t gram = xx * dot4(y, y) - xy * xy;
      if (gram == 0) continue;
      const int64_t g = minors_gcd4(x, y);
      // d_2^2 = gram / g^2 <= Delta^2
      if (static_cast<long double>(gram) <= D2 * static_cast<long double>(g) * static_cast<long double>(g)) ++n;
    }
    parts[c] = n * static_cast<uint64_t>(weight);
  });
  return std::accumulate(parts.begin(), parts.end(), uint64_t{0});
}

namespace {

double dot_r(const RealVec4& u, const RealVec4& v) { return u[0] * v[0] + u[1] * v[1] + u[2] * v[2] + u[3] * v[3]; }

double delta_wz(const RealVec4& w, const RealVec4& z) {
  const double ww = dot_r(w, w);
  const double zz = dot_r(z, z);
  const double wz = dot_r(w, z);
  const double d = ww * zz - wz * wz;
  require(d > 1e-12 * ww * zz, "volume: w and z must be linearly independent");
  return d;
}

// Rejection-sampling hit fraction over [-1,1]^dims; inside(t) tests the set.
template <int Dims, class Inside>
VolumeResult cube_monte_carlo(uint64_t samples, uint64_t seed, unsigned threads, Inside inside) {
  require(samples >= 10000, "volume: need at least 10^4 samples");
  constexpr uint64_t chunk = 1U << 16U;
  const std::size_t chunks = (samples + chunk - 1) / chunk;
  std::vector<uint64_t> hits(chunks, 0);
  parallel_chunks(chunks, threads, [&](std::size_t c) {
    const uint64_t begin = c * chunk;
    const uint64_t end = std::min<uint64_t>(samples, begin + chunk);
    CounterRng rng(seed, begin * Dims);
    uint64_t h = 0;
    std::array<double, Dims> t{};
    for (uint64_t s = begin; s < end; ++s) {
      for (auto& v : t) v = rng.next_signed();
      h += inside(t) ? 1 : 0;
    }
    hits[c] = h;
  });
  const double total = static_cast<double>(std::accumulate(hits.begin(), hits.end(), uint64_t{0}));
  const double n = static_cast<double>(samples);
  const double p = total / n;
  const double cube = std::pow(2.0, Dims);
  VolumeResult out;
  out.value = cube * p;
  out.std_error = cube * std::sqrt(p * (1 - p) / n);
  return out;
}

}  // namespace

VolumeResult vol_I(const RealVec4& w, const RealVec4& z, VolumeMode mode, uint64_t samples, uint64_t seed,
                   unsigned threads) {
  const double delta = delta_wz(w, z);
  const double ww = dot_r(w, w);
  const double band = std::min(1.0, ww / delta);
  if (mode == VolumeMode::Formula) {
    VolumeResult out;
    out.value = 4.0 * M_PI / 3.0 * std::sqrt(ww) / std::sqrt(delta);
    out.band = band;
    return out;
  }
  // Orthonormal basis of w^perp by Gram-Schmidt against the standard basis.
  std::vector<RealVec4> basis;
  RealVec4 wn = w;
  for (auto& v : wn) v /= std::sqrt(ww);
  basis.push_back(wn);
  for (int i = 0; i < 4 && basis.size() < 4; ++i) {
    RealVec4 e{};
    e[static_cast<std::size_t>(i)] = 1.0;
    for (const auto& b : basis) {
      const double c = dot_r(e, b);
      for (int k = 0; k < 4; ++k) e[k] -= c * b[k];
    }
    const double n = std::sqrt(dot_r(e, e));
    if (n < 1e-6) continue;
    for (auto& v : e) v /= n;
    basis.push_back(e);
  }
  // <z, t> for t = sum s_k b_k is sum s_k <z, b_k>
  std::array<double, 3> zc{};
  for (int k = 0; k < 3; ++k) zc[static_cast<std::size_t>(k)] = dot_r(z, basis[static_cast<std::size_t>(k) + 1]);
  auto out = cube_monte_carlo<3>(samples, seed, threads, [&](const std::array<double, 3>& s) {
    const double t2 = s[0] * s[0] + s[1] * s[1] + s[2] * s[2];
    if (t2 > 1.0) return false;
    const double zt = zc[0] * s[0] + zc[1] * s[1] + zc[2] * s[2];
    return zt * zt <= t2;
  });
  out.band = band;
  return out;
}

VolumeResult vol_J(const RealVec4& w, const RealVec4& z, VolumeMode mode, uint64_t samples, uint64_t seed,
                   unsigned threads) {
  const double delta = delta_wz(w, z);
  const double nw = std::sqrt(dot_r(w, w));
  const double nz = std::sqrt(dot_r(z, z));
  const double band = std::min(1.0, (nw + nz) * (nw + nz) / delta);
  if (mode == VolumeMode::Formula) {
    VolumeResult out;
    out.value = 2.0 * M_PI / std::sqrt(delta);
    out.band = band;
    return out;
  }
  auto out = cube_monte_carlo<4>(samples, seed, threads, [&](const std::array<double, 4>& t) {
    const double t2 = t[0] * t[0] + t[1] * t[1] + t[2] * t[2] + t[3] * t[3];
    if (t2 > 1.0) return false;
    const double wt = w[0] * t[0] + w[1] * t[1] + w[2] * t[2] + w[3] * t[3];
    const double zt = z[0] * t[0] + z[1] * t[1] + z[2] * t[2] + z[3] * t[3];
    return wt * wt <= t2 && zt * zt <= t2;
  });
  out.band = band;
  return out;
}

std::vector<std::pair<RealVec4, RealVec4>> separated_volume_pairs(std::size_t count, uint64_t seed) {
  std::vector<std::pair<RealVec4, RealVec4>> out;
  CounterRng rng(seed);
  auto entry = [&] { return static_cast<double>(static_cast<int64_t>(rng.next_u64() % 81) - 40); };
  while (out.size() < count) {
    const RealVec4 w{entry(), entry(), entry(), entry()};
    const RealVec4 z{entry(), entry(), entry(), entry()};
    const double ww = dot_r(w, w);
    const double zz = dot_r(z, z);
    const double wz = dot_r(w, z);
    const double s = std::sqrt(ww) + std::sqrt(zz);
    if (ww * zz - wz * wz >= 100 * s * s) out.emplace_back(w, z);
  }
  return out;
}

namespace {

void require_orbit_radius(double A) {
  require(A >= 2, "coefficient orbits: A must be >= 2");
  require(A <= 1000, "coefficient orbits: A must be <= 1000");
}

}  // namespace

std::vector<int64_t> orbit_leads(double A) {
  require_orbit_radius(A);
  // (a1, 1, 1, 1) needs a1^2 + 3 <= A^2
  std::vector<int64_t> out;
  const long double A2 = static_cast<long double>(A) * A;
  for (auto a1 = static_cast<int64_t>(std::floor(A)); a1 >= 1; --a1)
    if (static_cast<long double>(a1 * a1 + 3) <= A2) out.push_back(a1);
  return out;
}

std::vector<CoeffOrbit> orbits_with_lead(double A, int64_t a1) {
  require_orbit_radius(A);
  const auto amax = static_cast<int64_t>(std::floor(A));
  const long double A2 = static_cast<long double>(A) * A;
  auto fits = [&](int64_t s) { return static_cast<long double>(s) <= A2; };
  std::vector<CoeffOrbit> chunk;
  for (int64_t a2 = a1; a2 >= -amax; --a2) {
    if (a2 == 0 || !fits(a1 * a1 + a2 * a2)) continue;
    for (int64_t a3 = a2; a3 >= -amax; --a3) {
      if (a3 == 0 || !fits(a1 * a1 + a2 * a2 + a3 * a3)) continue;
      // a >= -reverse(a) forces a4 >= -a1
      for (int64_t a4 = a3; a4 >= -a1; --a4) {
        if (a4 == 0 || !fits(a1 * a1 + a2 * a2 + a3 * a3 + a4 * a4)) continue;
        const CoeffTuple a{a1, a2, a3, a4};
        const CoeffTuple neg{-a4, -a3, -a2, -a1};
        if (a < neg) continue;
        if (std::gcd(std::gcd(a1, a2), std::gcd(a3, a4)) != 1) continue;
        int w = 24;
        int run = 1;
        for (int t = 1; t <= 4; ++t) {
          if (t < 4 && a[t] == a[t - 1]) {
            ++run;
          } else {
            for (int f = 2; f <= run; ++f) w /= f;
            run = 1;
          }
        }
        if (a != neg) w *= 2;
        chunk.push_back({a, w});
      }
    }
  }
  return chunk;
}

std::vector<std::vector<CoeffOrbit>> coefficient_orbits(double A) {
  std::vector<std::vector<CoeffOrbit>> out;
  for (int64_t lead : orbit_leads(A)) out.push_back(orbits_with_lead(A, lead));
  return out;
}

double MomentReport::normalized() const { return V / (A * A * std::pow(B, 6)); }

double MomentReport::identity_residual() const {
  const double scale = std::max({std::abs(V), std::abs(D), std::abs(D_mix), std::abs(D_loc), std::abs(K)});
  if (scale == 0) return 0;
  return std::abs(V - (D - 2 * D_mix + D_loc + K)) / scale;
}

std::string MomentReport::csv_header() {
  return "A,B,alpha,W,coefficients,orbits,V,D,D_mix,D_loc,K,sum_N,sum_N_loc,normalized,identity_residual,E_B,F_B";
}

std::string MomentReport::csv_row() const {
  std::ostringstream os;
  os << fmt12(A) << ',' << fmt12(B) << ',' << fmt12(alpha) << ',' << W << ',' << coefficient_count << ','
     << orbit_count << ',' << fmt12(V) << ',' << fmt12(D) << ',' << fmt12(D_mix) << ',' << fmt12(D_loc) << ','
     << fmt12(K) << ',' << fmt12(sum_N) << ',' << fmt12(sum_N_loc) << ',' << fmt12(normalized()) << ','
     << fmt12(identity_residual()) << ',' << (E_B ? fmt12(*E_B) : "") << ',' << (F_B ? fmt12(*F_B) : "");
  return os.str();
}

std::string MomentReport::to_json() const {
  nlohmann::json j;
  j["A"] = A;
  j["B"] = B;
  j["alpha"] = alpha;
  j["W"] = W;
  j["coefficients"] = coefficient_count;
  j["orbits"] = orbit_count;
  j["V"] = V;
  j["D"] = D;
  j["D_mix"] = D_mix;
  j["D_loc"] = D_loc;
  j["K"] = K;
  j["sum_N"] = sum_N;
  j["sum_N_loc"] = sum_N_loc;
  j["D_pair_count"] = D_pair_count;
  j["normalized"] = normalized();
  j["identity_residual"] = identity_residual();
  j["E_B"] = E_B ? nlohmann::json(*E_B) : nlohmann::json(nullptr);
  j["F_B"] = F_B ? nlohmann::json(*F_B) : nlohmann::json(nullptr);
  return j.dump();
}

MomentReport moment_decomposition(double A, double B, const MomentOptions& options) {
  require(A >= 2, "moment_decomposition: A must be >= 2");
  require(B >= 3 || (B >= 2 && options.model), "moment_decomposition: B must be >= 3");
  if (A > kMaxMomentA)
    throw budget_error("moment_decomposition: A = " + fmt12(A) + " exceeds the cap " + fmt12(kMaxMomentA));
  auto grid = PrimeGrid::make(B);
  const LocalModel model = options.model ? *options.model : LocalModel::for_height(B);
  require(model.W >= 1 && model.alpha > 0, "moment_decomposition: need alpha > 0 and W >= 1");
  const auto leads = orbit_leads(A);

  const double L4 = std::pow(std::log(B), 4);
  const double L8 = L4 * L4;
  const double aW = model.alpha * static_cast<double>(model.W);
  const int64_t pmax = grid.coords.empty() ? 0 : grid.coords.back();

  struct Partial {
    CompensatedSum V, D, Dmix, Dloc, K, N, Nloc;
    uint64_t coefficients = 0;
    uint64_t orbits = 0;
    uint64_t pair_count = 0;
  };
  std::vector<Partial> parts(leads.size());
  parallel_chunks(leads.size(), options.threads, [&](std::size_t c) {
    JoinWorkspace ws;
    Partial p;
    for (const auto& [a, weight] : orbits_with_lead(A, leads[c])) {
      const double w = weight;
      const double na = std::sqrt(static_cast<double>(norm2_of(a)));
      uint64_t count = 0;
      CompensatedSum s1;
      join(a, grid.coords, 0, ws, [&](const PrimeTuple& x) {
        ++count;
        s1.add(1.0 / norm_of(x));
      });
      double loc1 = s1.value();
      double loc2 = 0;
      const int64_t reach = (abs64(a[0]) + abs64(a[1]) + abs64(a[2]) + abs64(a[3])) * pmax;
      if (model.W <= reach) {
        CompensatedSum l1, l2;
        join(a, grid.coords, model.W, ws, [&](const PrimeTuple& x) {
          if (!in_cone(a, x, model.alpha)) return;
          const double n = norm_of(x);
          l1.add(1.0 / n);
          l2.add(1.0 / (n * n));
        });
        loc1 = l1.value();
        loc2 = l2.value();
      } else {
        // congruence is equality here, and every solution lies in the cone
        CompensatedSum l2;
        join(a, grid.coords, 0, ws, [&](const PrimeTuple& x) { l2.add(1.0 / static_cast<double>(dot4(x, x))); });
        loc2 = l2.value();
      }
      const double cnt = static_cast<double>(count);
      const double N = L4 * cnt;
      const double Nloc = L4 * aW / na * loc1;
      const double delta_mix = L8 * aW / na * s1.value();
      const double delta_loc = L8 * aW * aW / (na * na) * loc2;
      p.V.add(w * (N - Nloc) * (N - Nloc));
      p.D.add(w * L8 * (cnt * cnt - cnt));
      p.Dmix.add(w * (N * Nloc - delta_mix));
      p.Dloc.add(w * (Nloc * Nloc - delta_loc));
      p.K.add(w * (L4 * N - 2 * delta_mix + delta_loc));
      p.N.add(w * N);
      p.Nloc.add(w * Nloc);
      p.coefficients += static_cast<uint64_t>(weight);
      p.orbits += 1;
      p.pair_count += static_cast<uint64_t>(weight) * (count * count - count);
    }
    parts[c] = p;
  });

  MomentReport r;
  r.A = A;
  r.B = B;
  r.alpha = model.alpha;
  r.W = model.W;
  Partial total;
  for (const auto& p : parts) {
    total.V.add(p.V);
    total.D.add(p.D);
    total.Dmix.add(p.Dmix);
    total.Dloc.add(p.Dloc);
    total.K.add(p.K);
    total.N.add(p.N);
    total.Nloc.add(p.Nloc);
    r.coefficient_count += p.coefficients;
    r.orbit_count += p.orbits;
    r.D_pair_count += p.pair_count;
  }
  r.V = total.V.value();
  r.D = total.D.value();
  r.D_mix = total.Dmix.value();
  r.D_loc = total.Dloc.value();
  r.K = total.K.value();
  r.sum_N = total.N.value();
  r.sum_N_loc = total.Nloc.value();
  if (options.with_pair_sums && grid.coords.size() <= kMaxPairPrimes) {
    auto ps = pair_sums(B, options.threads, true);
    r.E_B = ps.E;
    r.F_B = ps.F;
  }
  return r;
}

PairRepresentation moment_pair_representation(double A, double B, const std::optional<LocalModel>& model_opt) {
  require(A >= 2, "moment_pair_representation: A must be >= 2");
  require(A <= 30, "moment_pair_representation: A too large for the lattice-side evaluation");
  auto grid = PrimeGrid::make(B);
  require(grid.coords.size() <= 4, "moment_pair_representation: B too large for the lattice-side evaluation");
  require(B >= 3 || model_opt, "moment_pair_representation: B must be >= 3");
  const LocalModel model = model_opt ? *model_opt : LocalModel::for_height(B);
  const auto tuples = all_tuples(grid.coords);
  const double L8 = std::pow(std::log(B), 8);
  const double aW = model.alpha * static_cast<double>(model.W);

  auto nonzero_entries = [](std::span<const int64_t> v) {
    return std::none_of(v.begin(), v.end(), [](int64_t t) { return t == 0; });
  };
  auto to_vec = [](const PrimeTuple& x) { return IntVec(x.begin(), x.end()); };

  PairRepresentation out;
  CompensatedSum mix, loc;
  for (const auto& x : tuples)
    for (const auto& y : tuples) {
      if (x == y) continue;
      const IntVec xv = to_vec(x);
      const IntVec yv = to_vec(y);
      RegionQuery q;
      q.radius = A;
      q.primitive_only = true;

      auto exact = lattice_from_congruences({xv, yv}, {0, 0});
      for_each_point_in_region(exact, q, [&](std::span<const int64_t> a, int64_t) {
        if (nonzero_entries(a)) ++out.D_pair_count;
      });

      const double ny = norm_of(y);
      const double nx = norm_of(x);
      auto mixed = lattice_from_congruences({xv, yv}, {0, model.W});
      RegionQuery qm = q;
      qm.cones = {{yv}, model.alpha};
      for_each_point_in_region(mixed, qm, [&](std::span<const int64_t> a, int64_t a2) {
        if (nonzero_entries(a)) mix.add(1.0 / (std::sqrt(static_cast<double>(a2)) * ny));
      });

      auto local = lattice_from_congruences({xv, yv}, {model.W, model.W});
      RegionQuery ql = q;
      ql.cones = {{xv, yv}, model.alpha};
      for_each_point_in_region(local, ql, [&](std::span<const int64_t> a, int64_t a2) {
        if (nonzero_entries(a)) loc.add(1.0 / (static_cast<double>(a2) * nx * ny));
      });
    }
  out.D = L8 * static_cast<double>(out.D_pair_count);
  out.D_mix = L8 * aW * mix.value();
  out.D_loc = L8 * aW * aW * loc.value();
  return out;
}

}  // namespace primeforms
