#include "primeforms/cli.hpp"

#include "primeforms/counting.hpp"
#include "primeforms/errors.hpp"
#include "primeforms/experiments.hpp"
#include "primeforms/lattice.hpp"
#include "primeforms/local.hpp"
#include "primeforms/solver.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace primeforms::cli {

namespace {

using nlohmann::json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// 12 significant digits; the JSON writer then prints the shortest round trip.
double num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return std::strtod(buf, nullptr);
}

std::string fmt12(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

std::vector<std::string> split_commas(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) parts.push_back(item);
  if (!text.empty() && text.back() == ',') parts.emplace_back();
  return parts;
}

std::vector<int64_t> parse_ints(const std::string& text, const char* flag) {
  std::vector<int64_t> out;
  for (const auto& part : split_commas(text)) {
    int64_t v = 0;
    auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
    if (part.empty() || ec != std::errc() || ptr != part.data() + part.size())
      throw UsageError(std::string(flag) + ": expected comma-separated integers, got '" + text + "'");
    out.push_back(v);
  }
  return out;
}

std::vector<double> parse_reals(const std::string& text, const char* flag) {
  std::vector<double> out;
  for (const auto& part : split_commas(text)) {
    char* end = nullptr;
    const double v = std::strtod(part.c_str(), &end);
    if (part.empty() || end != part.c_str() + part.size())
      throw UsageError(std::string(flag) + ": expected comma-separated numbers, got '" + text + "'");
    out.push_back(v);
  }
  return out;
}

CoeffTuple parse_coeffs(const std::string& text) {
  auto v = parse_ints(text, "--a");
  if (v.size() != 4) throw UsageError("--a: expected 4 coefficients, got '" + text + "'");
  return {v[0], v[1], v[2], v[3]};
}

CoeffTuple coeffs_of(const json& j) {
  auto v = j.get<std::vector<int64_t>>();
  require(v.size() == 4, "config: a must have 4 entries");
  return {v[0], v[1], v[2], v[3]};
}

RealVec4 real4_of(const json& j) {
  auto v = j.get<std::vector<double>>();
  require(v.size() == 4, "config: volume vectors must have 4 entries");
  return {v[0], v[1], v[2], v[3]};
}

struct Output {
  std::string text;
  std::string ext;
  std::vector<std::pair<std::string, std::string>> files;  // extra artifacts by file name
  int exit_code = kExitOk;
};

unsigned threads_of(const json& cfg) { return cfg.at("threads").get<unsigned>(); }

std::string json_line(const json& j) { return j.dump() + "\n"; }

Output run_solve(const json& cfg) {
  auto record = min_prime_solution(coeffs_of(cfg.at("a")), cfg.at("bmax").get<int64_t>());
  return {record.to_json() + "\n", "json", {}};
}

Output run_local(const json& cfg) { return {local_profile(coeffs_of(cfg.at("a"))).to_json() + "\n", "json", {}}; }

Output run_sigma(const json& cfg) {
  const auto a = coeffs_of(cfg.at("a"));
  const auto Q = cfg.at("Q").get<int64_t>();
  const auto s = sigma(a, Q);
  if (cfg.at("format") == "json") return {json_line({{"a", a}, {"Q", Q}, {"sigma", s.str()}}), "json", {}};
  return {s.str() + "\n", "txt", {}};
}

Output run_tau(const json& cfg) {
  const auto a = coeffs_of(cfg.at("a"));
  const double gamma = cfg.at("gamma").get<double>();
  auto est = tau_monte_carlo(a, gamma, cfg.at("samples").get<uint64_t>(), cfg.at("seed").get<uint64_t>(),
                             threads_of(cfg));
  json j{{"a", a},
         {"gamma", gamma},
         {"value", num(est.value)},
         {"std_error", num(est.std_error)},
         {"samples", est.samples},
         {"hits", est.hits},
         {"seed", est.seed},
         {"lower_bound", num(singular_integral_lower_bound(a, gamma))}};
  return {json_line(j), "json", {}};
}

Output run_lattice(const json& cfg) {
  const auto c = cfg.at("c").get<IntVec>();
  const auto Q = cfg.at("Q").get<int64_t>();
  require(Q >= 0, "lattice: Q must be >= 0");
  const bool has_d = !cfg.at("d").is_null();
  std::optional<IntLattice> lattice;
  std::optional<int64_t> formula;
  if (!has_d) {
    lattice = Q == 0 ? kernel_lattice(c) : congruence_lattice(c, Q);
  } else {
    const auto d = cfg.at("d").get<IntVec>();
    require(d.size() == c.size(), "lattice: c and d must have the same length");
    if (Q == 0) {
      lattice = kernel_lattice_multi({c, d});
    } else {
      const auto mode = cfg.at("mode") == "exact" ? IntersectionMode::ExactAndModQ : IntersectionMode::BothModQ;
      lattice = congruence_intersection(c, d, Q, mode);
      formula = congruence_intersection_det_squared_formula(c, d, Q, mode);
    }
  }
  auto j = json::parse(lattice->to_json());
  if (formula) j["det_squared_formula"] = *formula;
  if (cfg.at("minima").get<bool>()) j["successive_minima_squared"] = successive_minima(*lattice);
  return {json_line(j), "json", {}};
}

std::optional<LocalModel> model_of(const json& cfg) {
  if (cfg.at("model").is_null()) return std::nullopt;
  return LocalModel{cfg.at("model").at("alpha").get<double>(), cfg.at("model").at("W").get<int64_t>()};
}

Output run_nab(const json& cfg) {
  const auto a = coeffs_of(cfg.at("a"));
  const double B = cfg.at("B").get<double>();
  auto n = N_a(a, B);
  const auto model = model_of(cfg);
  const double loc = model ? N_a_loc(a, B, *model) : N_a_loc(a, B);
  json j{{"a", a}, {"B", B}, {"N_a_count", n.count}, {"N_a", num(n.value)}, {"N_a_loc", num(loc)}};
  return {json_line(j), "json", {}};
}

Output run_moments(const json& cfg) {
  MomentOptions opt;
  opt.threads = threads_of(cfg);
  opt.with_pair_sums = cfg.at("pair_sums").get<bool>();
  opt.model = model_of(cfg);
  auto r = moment_decomposition(cfg.at("A").get<double>(), cfg.at("B").get<double>(), opt);
  if (cfg.at("format") == "json") return {r.to_json() + "\n", "json", {}};
  return {MomentReport::csv_header() + "\n" + r.csv_row() + "\n", "csv", {}};
}

Output run_density(const json& cfg) {
  auto r = density_report(cfg.at("A").get<double>(), cfg.at("T").get<int64_t>());
  if (cfg.at("format") == "json") return {r.to_json() + "\n", "json", {}};
  return {DensityReport::csv_header() + "\n" + r.csv_row() + "\n", "csv", {}};
}

Output run_rho(const json& cfg) {
  const auto As = cfg.at("A").get<std::vector<double>>();
  require(!As.empty(), "rho: at least one A");
  const bool ledger = cfg.at("ledger").get<bool>();
  const bool timing = cfg.at("timing").get<bool>();
  RhoOptions opt;
  opt.threads = threads_of(cfg);
  opt.keep_ledger = ledger;
  Output out;
  json rows = json::array();
  std::string csv = RhoReport::csv_header() + "\n";
  for (double A : As) {
    auto r = rho_of_A(A, opt);
    if (!timing) r.runtime_ms = 0;
    csv += r.csv_row() + "\n";
    rows.push_back({{"A", A},
                    {"fraction", num(r.fraction())},
                    {"numerator", r.numerator},
                    {"denominator", r.denominator},
                    {"undecided", r.undecided},
                    {"runtime_ms", num(r.runtime_ms)}});
    if (ledger) {
      std::ostringstream os;
      write_jsonl(os, r.ledger);
      out.files.emplace_back("rho_ledger_A" + fmt12(A) + ".jsonl", os.str());
    }
  }
  if (cfg.at("format") == "json") {
    out.text = json_line(rows);
    out.ext = "json";
  } else {
    out.text = csv;
    out.ext = "csv";
  }
  return out;
}

Output run_series(const json& cfg) {
  auto s = lprime_series_constant(cfg.at("T").get<int64_t>());
  json j{{"truncation", s.truncation},
         {"series", num(s.series)},
         {"constant", num(s.constant)},
         {"tail_bound", num(s.tail_bound)}};
  return {json_line(j), "json", {}};
}

json volume_entry(const VolumeResult& f, const VolumeResult& mc) {
  const bool ok = std::abs(mc.value - f.value) <= f.band * f.value + 3 * mc.std_error;
  return {{"formula", num(f.value)},
          {"monte_carlo", num(mc.value)},
          {"std_error", num(mc.std_error)},
          {"band", num(f.band)},
          {"agrees", ok}};
}

Output run_volcheck(const json& cfg) {
  std::vector<std::pair<RealVec4, RealVec4>> pairs;
  const auto samples = cfg.at("samples").get<uint64_t>();
  const auto seed = cfg.at("seed").get<uint64_t>();
  if (!cfg.at("w").is_null() || !cfg.at("z").is_null()) {
    require(!cfg.at("w").is_null() && !cfg.at("z").is_null(), "volcheck: give both w and z, or neither");
    pairs.emplace_back(real4_of(cfg.at("w")), real4_of(cfg.at("z")));
  } else {
    pairs = separated_volume_pairs(cfg.at("pairs").get<std::size_t>(), seed);
  }
  json list = json::array();
  bool all = true;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& [w, z] = pairs[i];
    const uint64_t s = seed + i;
    auto I = volume_entry(vol_I(w, z, VolumeMode::Formula),
                          vol_I(w, z, VolumeMode::MonteCarlo, samples, s, threads_of(cfg)));
    auto J = volume_entry(vol_J(w, z, VolumeMode::Formula),
                          vol_J(w, z, VolumeMode::MonteCarlo, samples, s, threads_of(cfg)));
    all = all && I["agrees"].get<bool>() && J["agrees"].get<bool>();
    list.push_back({{"w", w}, {"z", z}, {"I", I}, {"J", J}});
  }
  Output out{json_line({{"pairs", list}, {"all_agree", all}}), "json", {}};
  out.exit_code = all ? kExitOk : kExitFailure;
  return out;
}

const std::map<std::string, std::function<Output(const json&)>>& runners() {
  static const std::map<std::string, std::function<Output(const json&)>> table{
      {"solve", run_solve},       {"local", run_local},     {"sigma", run_sigma}, {"tau", run_tau},
      {"lattice", run_lattice},   {"nab", run_nab},         {"moments", run_moments},
      {"density", run_density},   {"rho", run_rho},         {"series", run_series},
      {"volcheck", run_volcheck},
  };
  return table;
}

json budgets() {
  return {{"max_moment_A", kMaxMomentA},
          {"max_pair_primes", kMaxPairPrimes},
          {"max_density_A", kMaxDensityA},
          {"solver_entry_cap", kSolverEntryCap},
          {"enumeration_budget", kEnumerationBudget}};
}

json manifest(const std::string& command, const json& config) {
  return {{"artifact", "primeforms"},
          {"version", kVersion},
          {"command", command},
          {"config", config},
          {"conventions", {{"ball", "closed"}, {"logs", "natural"}}},
          {"budgets", budgets()}};
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << content;
}

int execute(const std::string& command, const json& config, const std::optional<std::filesystem::path>& out_dir,
            std::ostream& out, std::ostream& err) {
  auto result = runners().at(command)(config);
  out << result.text;
  const auto m = manifest(command, config).dump(2) + "\n";
  if (out_dir) {
    std::filesystem::create_directories(*out_dir);
    write_file(*out_dir / (command + "." + result.ext), result.text);
    for (const auto& [name, content] : result.files) write_file(*out_dir / name, content);
    write_file(*out_dir / (command + ".manifest.json"), m);
  } else {
    require(result.files.empty(), command + ": extra artifacts need --out or PRIMEFORMS_OUT_DIR");
    err << m;
  }
  return result.exit_code;
}

// Flag values for one invocation; the config JSON is built from these after parsing.
struct Flags {
  unsigned threads = 1;
  std::string out_dir;
  std::string from_manifest;

  std::string a;
  int64_t bmax = 0;
  int64_t Q = 0;
  std::string format;
  double gamma = 1.0;
  uint64_t samples = 1000000;
  uint64_t seed = 1;
  std::string c;
  std::string d;
  std::string mode = "both";
  bool minima = false;
  double B = 0;
  double A = 0;
  std::string A_list;
  bool pair_sums = false;
  double alpha = 0;
  int64_t W = 0;
  int64_t T = 10000;
  bool ledger = false;
  bool no_timing = false;
  std::string w;
  std::string z;
  std::size_t pairs = 20;
};

json model_config(const Flags& f, const CLI::App& sc) {
  const bool has_alpha = sc.count("--alpha") > 0;
  const bool has_W = sc.count("--W") > 0;
  if (has_alpha != has_W) throw UsageError("--alpha and --W go together");
  if (!has_alpha) return nullptr;
  return {{"alpha", f.alpha}, {"W", f.W}};
}

json build_config(const std::string& cmd, const Flags& f, const CLI::App& sc) {
  json cfg{{"threads", f.threads}};
  if (cmd == "solve") {
    cfg["a"] = parse_coeffs(f.a);
    cfg["bmax"] = f.bmax;
  } else if (cmd == "local") {
    cfg["a"] = parse_coeffs(f.a);
  } else if (cmd == "sigma") {
    cfg["a"] = parse_coeffs(f.a);
    cfg["Q"] = f.Q;
    cfg["format"] = f.format.empty() ? "text" : f.format;
  } else if (cmd == "tau") {
    cfg["a"] = parse_coeffs(f.a);
    cfg["gamma"] = f.gamma;
    cfg["samples"] = f.samples;
    cfg["seed"] = f.seed;
  } else if (cmd == "lattice") {
    cfg["c"] = parse_ints(f.c, "--c");
    cfg["d"] = f.d.empty() ? json(nullptr) : json(parse_ints(f.d, "--d"));
    cfg["Q"] = f.Q;
    cfg["mode"] = f.mode;
    cfg["minima"] = f.minima;
  } else if (cmd == "nab") {
    cfg["a"] = parse_coeffs(f.a);
    cfg["B"] = f.B;
    cfg["model"] = model_config(f, sc);
  } else if (cmd == "moments") {
    cfg["A"] = f.A;
    cfg["B"] = f.B;
    cfg["pair_sums"] = f.pair_sums;
    cfg["model"] = model_config(f, sc);
    cfg["format"] = f.format.empty() ? "csv" : f.format;
  } else if (cmd == "density") {
    cfg["A"] = f.A;
    cfg["T"] = f.T;
    cfg["format"] = f.format.empty() ? "csv" : f.format;
  } else if (cmd == "rho") {
    cfg["A"] = parse_reals(f.A_list, "--A");
    cfg["ledger"] = f.ledger;
    cfg["timing"] = !f.no_timing;
    cfg["format"] = f.format.empty() ? "csv" : f.format;
  } else if (cmd == "series") {
    cfg["T"] = f.T;
  } else if (cmd == "volcheck") {
    auto vec = [](const std::string& s, const char* flag) {
      if (s.empty()) return json(nullptr);
      auto v = parse_reals(s, flag);
      if (v.size() != 4) throw UsageError(std::string(flag) + ": expected 4 entries");
      return json(v);
    };
    cfg["w"] = vec(f.w, "--w");
    cfg["z"] = vec(f.z, "--z");
    cfg["pairs"] = f.pairs;
    cfg["samples"] = f.samples;
    cfg["seed"] = f.seed;
  }
  return cfg;
}

void add_coeffs(CLI::App* sc, Flags& f) {
  sc->add_option("--a", f.a, "coefficients a1,a2,a3,a4")->required();
}

void add_threads(CLI::App* sc, Flags& f) {
  sc->add_option("--threads", f.threads, "worker threads (results do not depend on it)")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
}

void add_format(CLI::App* sc, Flags& f, std::vector<std::string> allowed) {
  sc->add_option("--format", f.format, "output format")->check(CLI::IsMember(std::move(allowed)));
}

void add_model(CLI::App* sc, Flags& f) {
  sc->add_option("--alpha", f.alpha, "override alpha = log B of the local model");
  sc->add_option("--W", f.W, "override the modulus W of the local model")->check(CLI::PositiveNumber);
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Prime solutions of a1 p1 + a2 p2 + a3 p3 + a4 p4 = 0: local data, counts and experiments",
               "primeforms"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(0, 1);
  app.fallthrough();
  Flags f;
  app.add_option("--out", f.out_dir, "output directory (default $PRIMEFORMS_OUT_DIR)");
  app.add_option("--from-manifest", f.from_manifest, "replay the run recorded in a manifest")
      ->check(CLI::ExistingFile);

  auto* solve = app.add_subcommand("solve", "minimal prime solution m(a)");
  add_coeffs(solve, f);
  solve->add_option("--bmax", f.bmax, "largest prime to try")->required();

  auto* local = app.add_subcommand("local", "local solvability and local densities");
  add_coeffs(local, f);

  auto* sig = app.add_subcommand("sigma", "local density sigma(a, Q)");
  add_coeffs(sig, f);
  sig->add_option("--Q", f.Q, "modulus")->required()->check(CLI::PositiveNumber);
  add_format(sig, f, {"text", "json"});

  auto* tau = app.add_subcommand("tau", "archimedean factor tau(a, gamma) by Monte Carlo");
  add_coeffs(tau, f);
  tau->add_option("--gamma", f.gamma, "cone parameter")->capture_default_str();
  tau->add_option("--samples", f.samples, "sample count")->capture_default_str();
  tau->add_option("--seed", f.seed, "random seed")->capture_default_str();
  add_threads(tau, f);

  auto* lat = app.add_subcommand("lattice", "kernel and congruence lattices");
  lat->add_option("--c", f.c, "first vector")->required();
  lat->add_option("--d", f.d, "second vector");
  lat->add_option("--Q", f.Q, "modulus, 0 for exact kernels")->capture_default_str();
  lat->add_option("--mode", f.mode, "with d and Q: both (mod Q) or exact (c exact, d mod Q)")
      ->check(CLI::IsMember({"both", "exact"}))
      ->capture_default_str();
  lat->add_flag("--minima", f.minima, "also report squared successive minima");

  auto* nab = app.add_subcommand("nab", "N_a(B) and its local model");
  add_coeffs(nab, f);
  nab->add_option("--B", f.B, "height")->required();
  add_model(nab, f);

  auto* mom = app.add_subcommand("moments", "variance decomposition V = D - 2 D^mix + D^loc + K");
  mom->add_option("--A", f.A, "coefficient radius")->required();
  mom->add_option("--B", f.B, "height")->required();
  mom->add_flag("--pair-sums", f.pair_sums, "also report E(B) and F(B)");
  add_model(mom, f);
  add_format(mom, f, {"csv", "json"});
  add_threads(mom, f);

  auto* den = app.add_subcommand("density", "#L(A), #L^loc(A), #L'(A) and the series constant");
  den->add_option("--A", f.A, "radius")->required();
  den->add_option("--T", f.T, "series truncation")->capture_default_str();
  add_format(den, f, {"csv", "json"});

  auto* rho = app.add_subcommand("rho", "proportion of L^loc(A) meeting the m(a) bound");
  rho->add_option("--A", f.A_list, "radius or comma-separated radii")->required();
  rho->add_flag("--ledger", f.ledger, "write per-orbit JSONL ledgers to the output directory");
  rho->add_flag("--no-timing", f.no_timing, "report runtime_ms as 0 for byte-stable output");
  add_format(rho, f, {"csv", "json"});
  add_threads(rho, f);

  auto* ser = app.add_subcommand("series", "truncated series constant of #L'(A) / A^4");
  ser->add_option("--T", f.T, "truncation")->capture_default_str();

  auto* vol = app.add_subcommand("volcheck", "volume formulas for I and J against Monte Carlo");
  vol->add_option("--w", f.w, "first vector");
  vol->add_option("--z", f.z, "second vector");
  vol->add_option("--pairs", f.pairs, "size of the seeded corpus when w, z are not given")->capture_default_str();
  vol->add_option("--samples", f.samples, "Monte Carlo samples")->capture_default_str();
  vol->add_option("--seed", f.seed, "random seed")->capture_default_str();
  add_threads(vol, f);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  std::optional<std::filesystem::path> out_dir;
  if (!f.out_dir.empty()) {
    out_dir = f.out_dir;
  } else if (const char* env = std::getenv("PRIMEFORMS_OUT_DIR"); env != nullptr && *env != '\0') {
    out_dir = env;
  }

  const auto used = app.get_subcommands();
  if (!f.from_manifest.empty()) {
    if (!used.empty()) throw UsageError("--from-manifest replaces the subcommand; give one or the other");
    std::ifstream in(f.from_manifest);
    const auto m = json::parse(in);
    const auto command = m.at("command").get<std::string>();
    require(runners().count(command) == 1, "manifest: unknown command '" + command + "'");
    if (m.value("version", "") != kVersion)
      err << "warning: manifest written by version " << m.value("version", "?") << "\n";
    return execute(command, m.at("config"), out_dir, out, err);
  }
  if (used.empty()) {
    out << app.help();
    return kExitUsage;
  }
  const auto* sc = used.front();
  return execute(sc->get_name(), build_config(sc->get_name(), f, *sc), out_dir, out, err);
}

}  // namespace

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  try {
    return run(argc, argv, out, err);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const precondition_error& e) {
    err << "precondition: " << e.what() << "\n";
    return kExitPrecondition;
  } catch (const budget_error& e) {
    err << "budget: " << e.what() << "\n";
    return kExitBudget;
  } catch (const nlohmann::json::exception& e) {
    err << "invalid config: " << e.what() << "\n";
    return kExitPrecondition;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"primeforms"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace primeforms::cli
