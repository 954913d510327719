// Command-line laboratory driver: exact/approximate field sampling, covariance
// queries, the integral-equation solver, and the path-regularity experiments.
//
// Conventions:
//   - flat `key = value` config files, '#' comments, every key overridable by
//     a --key value flag;
//   - exit 0 success, 2 config error, 3 numerical failure, 4 validate failure;
//   - CSV artifacts are deterministic for a fixed config+seed (replica-indexed
//     rows, %.17g floats); timestamps live only in the JSON summaries;
//   - KGLAB_OUT overrides the output directory.

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "kglab/covariance.hpp"
#include "kglab/errors.hpp"
#include "kglab/io.hpp"
#include "kglab/kernels.hpp"
#include "kglab/model.hpp"
#include "kglab/reduction.hpp"
#include "kglab/regularity.hpp"
#include "kglab/rng.hpp"
#include "kglab/sampler.hpp"
#include "kglab/version.hpp"

namespace {

using nlohmann::json;
namespace fs = std::filesystem;
using namespace kglab;

// ---------------------------------------------------------------------------
// config

struct ConfigError : std::runtime_error {
  std::string key;
  ConfigError(std::string k, const std::string& msg) : std::runtime_error(msg), key(std::move(k)) {}
};

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

class Config {
 public:
  void load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config", "cannot open config file '" + path + "'");
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      line = trim(line);
      if (line.empty()) continue;
      auto eq = line.find('=');
      if (eq == std::string::npos)
        throw ConfigError("config", path + ":" + std::to_string(lineno) + ": expected 'key = value'");
      std::string k = trim(line.substr(0, eq));
      std::string v = trim(line.substr(eq + 1));
      if (k.empty())
        throw ConfigError("config", path + ":" + std::to_string(lineno) + ": empty key");
      kv_[k] = v;
    }
  }

  void set(const std::string& key, const std::string& value) { kv_[key] = value; }
  bool has(const std::string& key) const { return kv_.count(key) != 0; }
  const std::map<std::string, std::string>& entries() const { return kv_; }

  std::string str(const std::string& key, const std::string& def) const {
    auto it = kv_.find(key);
    return it == kv_.end() ? def : it->second;
  }

  double num(const std::string& key, double def) const {
    auto it = kv_.find(key);
    return it == kv_.end() ? def : parse_num(key, it->second);
  }

  double num_required(const std::string& key) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) throw ConfigError(key, "required");
    return parse_num(key, it->second);
  }

  long long integer(const std::string& key, long long def) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) return def;
    errno = 0;
    char* end = nullptr;
    long long v = std::strtoll(it->second.c_str(), &end, 10);
    if (errno != 0 || end == it->second.c_str() || *end != '\0')
      throw ConfigError(key, "expected an integer, got '" + it->second + "'");
    return v;
  }

  std::uint64_t u64(const std::string& key, std::uint64_t def) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) return def;
    errno = 0;
    char* end = nullptr;
    unsigned long long v = std::strtoull(it->second.c_str(), &end, 10);
    if (errno != 0 || end == it->second.c_str() || *end != '\0' || it->second[0] == '-')
      throw ConfigError(key, "expected a non-negative integer, got '" + it->second + "'");
    return v;
  }

  std::size_t count(const std::string& key, std::size_t def) const {
    long long v = integer(key, static_cast<long long>(def));
    if (v < 0) throw ConfigError(key, "must be non-negative");
    return static_cast<std::size_t>(v);
  }

  std::vector<double> num_list(const std::string& key, std::vector<double> def) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) return def;
    std::vector<double> out;
    for (const auto& piece : split(it->second, ','))
      out.push_back(parse_num(key, trim(piece)));
    if (out.empty()) throw ConfigError(key, "expected a comma-separated list of numbers");
    return out;
  }

  std::vector<int> int_list(const std::string& key, std::vector<int> def) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) return def;
    std::vector<int> out;
    for (const auto& piece : split(it->second, ',')) {
      double v = parse_num(key, trim(piece));
      if (v != std::floor(v)) throw ConfigError(key, "expected integers, got '" + piece + "'");
      out.push_back(static_cast<int>(v));
    }
    if (out.empty()) throw ConfigError(key, "expected a comma-separated list of integers");
    return out;
  }

  SpaceTimePoint point_required(const std::string& key) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) throw ConfigError(key, "required (format 't,x')");
    auto pieces = split(it->second, ',');
    if (pieces.size() != 2) throw ConfigError(key, "expected 't,x', got '" + it->second + "'");
    return {parse_num(key, trim(pieces[0])), parse_num(key, trim(pieces[1]))};
  }

  static std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string piece;
    while (std::getline(ss, piece, sep)) out.push_back(piece);
    if (!s.empty() && s.back() == sep) out.push_back("");
    return out;
  }

 private:
  double parse_num(const std::string& key, const std::string& raw) const {
    errno = 0;
    char* end = nullptr;
    double v = std::strtod(raw.c_str(), &end);
    if (errno != 0 || end == raw.c_str() || *end != '\0' || !std::isfinite(v))
      throw ConfigError(key, "expected a finite number, got '" + raw + "'");
    return v;
  }

  std::map<std::string, std::string> kv_;
};

ModelParams params_from(const Config& cfg, double da, double dm, double dT) {
  const double a = cfg.num("a", da);
  const double m = cfg.num("m", dm);
  const double T = cfg.num("T", dT);
  if (!(a >= 0.0)) throw ConfigError("a", "must be non-negative");
  if (!(m >= 0.0)) throw ConfigError("m", "must be non-negative");
  if (!(T > 0.0)) throw ConfigError("T", "must be positive");
  return ModelParams(a, m, T);
}

// ---------------------------------------------------------------------------
// output helpers

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

fs::path out_dir(const Config& cfg) {
  fs::path p;
  if (const char* env = std::getenv("KGLAB_OUT"); env && *env)
    p = env;
  else
    p = cfg.str("out", ".");
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw ConfigError("out", "cannot create output directory '" + p.string() + "': " + ec.message());
  return p;
}

json summary_base(const std::string& command, const Config& cfg) {
  json j;
  j["version"] = kVersion;
  j["command"] = command;
  j["timestamp"] = iso_timestamp_utc();
  json echo = json::object();
  for (const auto& [k, v] : cfg.entries()) echo[k] = v;
  j["config"] = echo;
  return j;
}

void add_params(json& j, const ModelParams& p) {
  j["params"] = {{"a", p.a}, {"m", p.m}, {"T", p.T}, {"regime", regime_name(regime(p))}};
}

void write_json_file(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw ConfigError("out", "cannot write '" + path.string() + "'");
  out << j.dump(2) << '\n';
}

std::vector<double> to_vec(const Eigen::VectorXd& v) {
  return {v.data(), v.data() + v.size()};
}

// One row per (replica, scale); `stored_is_lil` says which normalizer the
// per-replica statistic already carries.
void write_ratio_csv(std::ostream& os, const std::vector<int>& n_values,
                     const Eigen::MatrixXd& per_replica, bool stored_is_lil, double w_col,
                     double z_col) {
  os << "n,h,w,z,numerator,ratio_lil,ratio_mc,replica_id\n";
  for (Eigen::Index r = 0; r < per_replica.rows(); ++r)
    for (std::size_t k = 0; k < n_values.size(); ++k) {
      const double h = std::ldexp(1.0, -n_values[k]);
      const double stat = per_replica(r, static_cast<Eigen::Index>(k));
      const double num = stat * (stored_is_lil ? lil_norm(h) : mc_norm(h));
      const double rl = stored_is_lil ? stat : num / lil_norm(h);
      const double rm = stored_is_lil ? num / mc_norm(h) : stat;
      os << n_values[k] << ',' << g17(h) << ',' << g17(w_col) << ',' << g17(z_col) << ','
         << g17(num) << ',' << g17(rl) << ',' << g17(rm) << ',' << r << '\n';
    }
}

std::ofstream open_csv(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("out", "cannot write '" + path.string() + "'");
  return out;
}

// ---------------------------------------------------------------------------
// workers

std::size_t worker_count(const Config& cfg) {
  const unsigned hw = std::thread::hardware_concurrency();
  const std::size_t def = hw == 0 ? 1 : hw;
  const std::size_t w = cfg.count("workers", def);
  if (w == 0) throw ConfigError("workers", "must be at least 1");
  return w;
}

// Replica r always lands in slot r, so the worker count never changes the
// artifacts, only the wall time.
template <class Fn>
void parallel_replicas(std::size_t replicas, std::size_t workers, Fn&& fn) {
  workers = std::min(workers, replicas == 0 ? std::size_t{1} : replicas);
  if (workers <= 1) {
    for (std::size_t r = 0; r < replicas; ++r) fn(r);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t r = next.fetch_add(1); r < replicas; r = next.fetch_add(1)) fn(r);
    });
  for (auto& t : pool) t.join();
}

// ---------------------------------------------------------------------------
// cov

int run_cov(const Config& cfg) {
  SpaceTimePoint p = cfg.point_required("p");
  SpaceTimePoint q = cfg.point_required("q");
  const double t_needed = std::max({1.0, p.t, q.t});
  ModelParams params = params_from(cfg, 1.0, 0.5, cfg.has("T") ? 0.0 : t_needed);
  if (p.t < 0.0 || p.t > params.T) throw ConfigError("p", "time must lie in [0, T]");
  if (q.t < 0.0 || q.t > params.T) throw ConfigError("q", "time must lie in [0, T]");
  const double tol = cfg.num("tol", 1e-8);
  if (!(tol > 0.0)) throw ConfigError("tol", "must be positive");

  const double value = regime(params) == Regime::Critical ? cov_critical(p, q, params.a)
                                                          : cov_spectral(p, q, params, tol);
  std::printf("%.17g\n", value);

  json j = summary_base("cov", cfg);
  add_params(j, params);
  j["p"] = {p.t, p.x};
  j["q"] = {q.t, q.x};
  j["tol"] = tol;
  j["value"] = value;
  write_json_file(out_dir(cfg) / "cov.json", j);
  return 0;
}

// ---------------------------------------------------------------------------
// sample

std::vector<SpaceTimePoint> parse_points(const Config& cfg, const ModelParams& params) {
  const std::string raw = cfg.str("points", "1,0");
  std::vector<SpaceTimePoint> pts;
  for (const auto& piece : Config::split(raw, ';')) {
    const std::string item = trim(piece);
    if (item.empty()) throw ConfigError("points", "empty entry in point list");
    auto coords = Config::split(item, ',');
    if (coords.size() != 2)
      throw ConfigError("points", "expected 't,x' entries separated by ';', got '" + item + "'");
    SpaceTimePoint p{};
    char* end = nullptr;
    errno = 0;
    p.t = std::strtod(coords[0].c_str(), &end);
    if (errno != 0 || *end != '\0' || !std::isfinite(p.t))
      throw ConfigError("points", "bad time in '" + item + "'");
    errno = 0;
    p.x = std::strtod(coords[1].c_str(), &end);
    if (errno != 0 || *end != '\0' || !std::isfinite(p.x))
      throw ConfigError("points", "bad position in '" + item + "'");
    if (p.t < 0.0 || p.t > params.T)
      throw ConfigError("points", "time outside [0, T] in '" + item + "'");
    pts.push_back(p);
  }
  if (pts.empty()) throw ConfigError("points", "need at least one point");
  if (pts.size() > 4096) throw ConfigError("points", "too many points (max 4096)");
  return pts;
}

int run_sample(const Config& cfg) {
  ModelParams params = params_from(cfg, 1.0, 0.5, 4.0);
  const std::vector<SpaceTimePoint> pts = parse_points(cfg, params);
  const std::size_t replicas = cfg.count("replicas", 1);
  if (replicas == 0) throw ConfigError("replicas", "must be at least 1");
  if (replicas > 10'000'000) throw ConfigError("replicas", "too many replicas");
  const std::uint64_t seed = cfg.u64("seed", 1);
  const double tol = cfg.num("tol", 1e-8);
  if (!(tol > 0.0)) throw ConfigError("tol", "must be positive");
  const std::size_t workers = worker_count(cfg);

  GaussianDesign design(pts, params, tol);
  std::vector<Eigen::VectorXd> values(replicas);
  parallel_replicas(replicas, workers,
                    [&](std::size_t r) { values[r] = design.sample({seed, r}); });

  const fs::path dir = out_dir(cfg);
  std::ofstream csv = open_csv(dir / "sample.csv");
  csv << "index,t,x,w,z,value,replica,sampler\n";
  for (std::size_t r = 0; r < replicas; ++r)
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const CharCoords c = pts[i].to_char();
      csv << i << ',' << g17(pts[i].t) << ',' << g17(pts[i].x) << ',' << g17(c.w) << ','
          << g17(c.z) << ',' << g17(values[r][static_cast<Eigen::Index>(i)]) << ',' << r
          << ",exact\n";
    }

  // Empirical moments against the design covariance diagonal.
  json stats = json::array();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    double mean = 0.0, sq = 0.0;
    for (std::size_t r = 0; r < replicas; ++r) {
      const double v = values[r][static_cast<Eigen::Index>(i)];
      mean += v;
      sq += v * v;
    }
    mean /= double(replicas);
    const double var = replicas > 1 ? (sq - double(replicas) * mean * mean) / double(replicas - 1) : 0.0;
    stats.push_back({{"t", pts[i].t},
                     {"x", pts[i].x},
                     {"mean", mean},
                     {"var", var},
                     {"design_var", design.covariance()(static_cast<Eigen::Index>(i),
                                                        static_cast<Eigen::Index>(i))}});
  }

  json j = summary_base("sample", cfg);
  add_params(j, params);
  j["seed"] = seed;
  j["replicas"] = replicas;
  j["points"] = stats;
  write_json_file(dir / "sample.json", j);
  return 0;
}

// ---------------------------------------------------------------------------
// picard

int run_picard(const Config& cfg) {
  ModelParams params = params_from(cfg, 2.0, 1.2, 1.5);
  const double step = cfg.num("step", 0.0078125);
  if (!(step > 0.0) || step > params.T) throw ConfigError("step", "must lie in (0, T]");
  const double x_lo = cfg.num("x_lo", -params.T);
  const double x_hi = cfg.num("x_hi", params.T);
  if (!(x_hi > x_lo)) throw ConfigError("x_hi", "must exceed x_lo");
  const double tol = cfg.num("tol", 1e-8);
  if (!(tol > 0.0)) throw ConfigError("tol", "must be positive");
  const long long max_iter = cfg.integer("max_iter", 50);
  if (max_iter < 1) throw ConfigError("max_iter", "must be at least 1");
  const std::uint64_t seed = cfg.u64("seed", 1);
  const std::uint64_t replica = cfg.u64("replica", 0);

  auto on_lattice = [&](double len) {
    const double cells = len / step;
    return std::abs(cells - std::round(cells)) < 1e-9 * std::max(1.0, cells);
  };
  if (!on_lattice(params.T)) throw ConfigError("step", "must divide T");
  if (!on_lattice(x_hi - x_lo)) throw ConfigError("step", "must divide x_hi - x_lo");

  GridSpec grid;
  grid.step = step;
  grid.nt = static_cast<std::size_t>(std::llround(params.T / step)) + 1;
  grid.nx = static_cast<std::size_t>(std::llround((x_hi - x_lo) / step)) + 1;
  grid.x0 = x_lo;
  if (grid.nt * grid.nx > (std::size_t{1} << 24)) throw ConfigError("step", "grid too large");

  const double y_lo = x_lo - params.T - step;
  const double y_hi = x_hi + params.T + step;
  NoiseGrid noise = NoiseGrid::generate(params.T, y_lo, y_hi, step, step, {seed, replica},
                                        StreamId::NoiseGrid);

  GridField u_C = stochastic_convolution(noise, params.a, grid);
  PicardSolution sol = picard_solve(u_C, params, tol, static_cast<int>(max_iter));
  DecomposeResult dec = decompose(sol.u, u_C);
  const double residual = fixed_point_residual(sol.u, u_C, params);
  const ShiftMasses masses = characteristic_shift_masses(params.T, step, params.a);

  const fs::path dir = out_dir(cfg);
  {
    std::ofstream csv = open_csv(dir / "picard_field.csv");
    write_grid_csv(csv, sol.u);
  }
  {
    std::ofstream bin(dir / "picard_field.bin", std::ios::binary);
    if (!bin) throw ConfigError("out", "cannot write picard_field.bin");
    write_matrix_binary(bin, sol.u.values);
  }

  json j = summary_base("picard", cfg);
  add_params(j, params);
  j["seed"] = seed;
  j["replica"] = replica;
  j["grid"] = {{"step", step}, {"nt", grid.nt}, {"nx", grid.nx}, {"x0", grid.x0}};
  j["iterations"] = sol.report.iterations;
  j["converged"] = sol.report.converged;
  j["residual_history"] = sol.report.residual_history;
  j["fixed_point_residual"] = residual;
  j["coupling"] = params.coupling();
  j["lipschitz_statistic"] = dec.lipschitz_statistic;
  j["sup_abs_u"] = dec.sup_abs_u;
  j["shift_masses"] = {{"overlap", masses.overlap},
                       {"sliver", masses.sliver},
                       {"cap", masses.cap},
                       {"total", masses.total()}};
  write_json_file(dir / "picard.json", j);
  return 0;
}

// ---------------------------------------------------------------------------
// lil

int run_lil(const Config& cfg) {
  ModelParams params = params_from(cfg, 1.0, 0.5, 4.0);
  LilConfig lc;
  lc.point.w = cfg.num("w", lc.point.w);
  lc.point.z = cfg.num("z", lc.point.z);
  lc.n_lo = static_cast<int>(cfg.integer("n_lo", lc.n_lo));
  lc.n_hi = static_cast<int>(cfg.integer("n_hi", lc.n_hi));
  lc.replicas = cfg.count("replicas", lc.replicas);
  if (lc.point.w < 0.0) throw ConfigError("w", "must be non-negative");
  if (lc.point.z < 0.0) throw ConfigError("z", "must be non-negative");
  if (lc.n_lo < 2) throw ConfigError("n_lo", "must be at least 2");
  if (lc.n_hi < lc.n_lo) throw ConfigError("n_hi", "must be >= n_lo");
  if (lc.n_hi > 40) throw ConfigError("n_hi", "must be at most 40");
  if (lc.replicas == 0) throw ConfigError("replicas", "must be at least 1");
  const double t_needed = (lc.point.w + lc.point.z) / kSqrt2 + std::ldexp(1.0, -lc.n_lo);
  if (t_needed > params.T)
    throw ConfigError("T", "horizon below the largest sampled time " + g17(t_needed));
  const std::uint64_t seed = cfg.u64("seed", 1);

  TraceSummary res = lil_experiment(lc, params, seed);

  const fs::path dir = out_dir(cfg);
  {
    std::ofstream csv = open_csv(dir / "lil.csv");
    write_ratio_csv(csv, res.n_values, res.per_replica, /*stored_is_lil=*/true, lc.point.w,
                    lc.point.z);
  }
  json j = summary_base("lil", cfg);
  add_params(j, params);
  j["seed"] = seed;
  j["point"] = {{"w", lc.point.w}, {"z", lc.point.z}};
  j["n_values"] = res.n_values;
  j["median"] = res.median;
  j["q25"] = res.q25;
  j["q75"] = res.q75;
  write_json_file(dir / "lil.json", j);
  return 0;
}

// ---------------------------------------------------------------------------
// mc

int run_mc(const Config& cfg) {
  ModelParams params = params_from(cfg, 0.0, 0.0, 2.0);
  McConfig mc;
  mc.z_lo = cfg.num("z_lo", mc.z_lo);
  mc.z_hi = cfg.num("z_hi", mc.z_hi);
  mc.w0 = cfg.num("w0", mc.w0);
  mc.n_lo = static_cast<int>(cfg.integer("n_lo", mc.n_lo));
  mc.n_hi = static_cast<int>(cfg.integer("n_hi", mc.n_hi));
  mc.replicas = cfg.count("replicas", mc.replicas);
  mc.grid_points = cfg.count("grid_points", mc.grid_points);
  const std::string source = cfg.str("source", "ypath");
  if (source == "field")
    mc.source = McSource::Field;
  else if (source == "ypath")
    mc.source = McSource::YPath;
  else if (source == "brownian")
    mc.source = McSource::Brownian;
  else
    throw ConfigError("source", "must be one of field, ypath, brownian");

  if (mc.z_lo < 0.0) throw ConfigError("z_lo", "must be non-negative");
  if (mc.z_hi < mc.z_lo) throw ConfigError("z_hi", "must be >= z_lo");
  if (mc.w0 < 0.0) throw ConfigError("w0", "must be non-negative");
  if (mc.n_lo < 2) throw ConfigError("n_lo", "must be at least 2");
  if (mc.n_hi < mc.n_lo) throw ConfigError("n_hi", "must be >= n_lo");
  if (mc.n_hi > 40) throw ConfigError("n_hi", "must be at most 40");
  if (mc.replicas == 0) throw ConfigError("replicas", "must be at least 1");

  const double width = mc.z_hi - mc.z_lo;
  const std::size_t auto_grid =
      width == 0.0 ? 1 : static_cast<std::size_t>(std::ceil(width * std::ldexp(1.0, mc.n_hi + 1))) + 1;
  const std::size_t bases = mc.grid_points == 0 ? auto_grid : mc.grid_points;
  const std::size_t design_points = bases * static_cast<std::size_t>(mc.n_hi - mc.n_lo + 2);
  if (mc.source == McSource::Field && design_points > 5000)
    throw ConfigError("grid_points",
                      "field source factors a dense covariance; keep the grid small "
                      "(would need " + std::to_string(design_points) + " points)");
  if (bases > (std::size_t{1} << 22)) throw ConfigError("grid_points", "grid too large");

  if (mc.source == McSource::Field) {
    const double t_needed = (mc.w0 + mc.z_hi) / kSqrt2 + std::ldexp(1.0, -mc.n_lo) + 1e-12;
    if (t_needed > params.T)
      throw ConfigError("T", "horizon below the largest sampled time " + g17(t_needed));
  } else if (mc.source == McSource::YPath && mc.w0 / kSqrt2 > params.T) {
    throw ConfigError("w0", "boundary time w0/sqrt2 exceeds the horizon T");
  }

  const std::uint64_t seed = cfg.u64("seed", 1);
  McResult res = mc_experiment(mc, params, seed);

  const fs::path dir = out_dir(cfg);
  {
    std::ofstream csv = open_csv(dir / "mc.csv");
    // z column holds the interval's lower endpoint; the JSON carries the rest.
    write_ratio_csv(csv, res.n_values, res.per_replica, /*stored_is_lil=*/false, mc.w0, mc.z_lo);
  }
  json j = summary_base("mc", cfg);
  add_params(j, params);
  j["seed"] = seed;
  j["interval"] = {{"z_lo", mc.z_lo}, {"z_hi", mc.z_hi}};
  j["w0"] = mc.w0;
  j["source"] = source;
  j["grid_points"] = bases;
  j["n_values"] = res.n_values;
  j["median_sup"] = res.median_sup;
  j["q25"] = res.q25;
  j["q75"] = res.q75;
  write_json_file(dir / "mc.json", j);
  return 0;
}

// ---------------------------------------------------------------------------
// simlil

int run_simlil(const Config& cfg) {
  ModelParams params = params_from(cfg, 1.0, 0.5, 4.0);
  SimLilConfig sc;
  sc.z0 = cfg.num("z0", sc.z0);
  sc.w_grid = cfg.num_list("w_grid", sc.w_grid);
  sc.n_lo = static_cast<int>(cfg.integer("n_lo", sc.n_lo));
  sc.n_hi = static_cast<int>(cfg.integer("n_hi", sc.n_hi));
  sc.replicas = cfg.count("replicas", sc.replicas);
  if (sc.z0 < 0.0) throw ConfigError("z0", "must be non-negative");
  for (double w : sc.w_grid)
    if (w < 0.0) throw ConfigError("w_grid", "entries must be non-negative");
  if (sc.w_grid.size() > 4096) throw ConfigError("w_grid", "too many grid points (max 4096)");
  if (sc.n_lo < 2) throw ConfigError("n_lo", "must be at least 2");
  if (sc.n_hi < sc.n_lo) throw ConfigError("n_hi", "must be >= n_lo");
  if (sc.n_hi > 40) throw ConfigError("n_hi", "must be at most 40");
  if (sc.replicas == 0) throw ConfigError("replicas", "must be at least 1");
  const double w_max = *std::max_element(sc.w_grid.begin(), sc.w_grid.end());
  const double t_needed = (w_max + sc.z0) / kSqrt2 + std::ldexp(1.0, -sc.n_lo);
  if (t_needed > params.T)
    throw ConfigError("T", "horizon below the largest sampled time " + g17(t_needed));
  const std::uint64_t seed = cfg.u64("seed", 1);

  SimLilResult res = sim_lil_bound(sc, params, seed);

  const fs::path dir = out_dir(cfg);
  {
    std::ofstream csv = open_csv(dir / "simlil.csv");
    const double w_col = *std::min_element(sc.w_grid.begin(), sc.w_grid.end());
    write_ratio_csv(csv, res.n_values, res.per_replica, /*stored_is_lil=*/true, w_col, sc.z0);
  }
  json j = summary_base("simlil", cfg);
  add_params(j, params);
  j["seed"] = seed;
  j["z0"] = sc.z0;
  j["w_grid"] = sc.w_grid;
  j["n_values"] = res.n_values;
  j["median_sup"] = res.median_sup;
  j["growth_ratio"] = res.growth_ratio;
  j["bounded"] = res.bounded;
  write_json_file(dir / "simlil.json", j);
  return 0;
}

// ---------------------------------------------------------------------------
// scan / propagate

ScanConfig scan_config_from(const Config& cfg) {
  ScanConfig sc;
  sc.z_lo = cfg.num("z_lo", sc.z_lo);
  sc.z_hi = cfg.num("z_hi", sc.z_hi);
  sc.w0 = cfg.num("w0", sc.w0);
  sc.n_star = static_cast<int>(cfg.integer("n_star", sc.n_star));
  sc.n_trace_lo = static_cast<int>(cfg.integer("n_trace_lo", sc.n_trace_lo));
  sc.null_runs = cfg.count("null_runs", sc.null_runs);
  if (sc.z_lo < 0.0) throw ConfigError("z_lo", "must be non-negative");
  if (!(sc.z_hi > sc.z_lo)) throw ConfigError("z_hi", "must exceed z_lo");
  if (sc.w0 < 0.0) throw ConfigError("w0", "must be non-negative");
  if (sc.n_star < 2) throw ConfigError("n_star", "must be at least 2");
  if (sc.n_star > 20) throw ConfigError("n_star", "must be at most 20");
  if (sc.n_trace_lo < 2 || sc.n_trace_lo > sc.n_star)
    throw ConfigError("n_trace_lo", "must lie in [2, n_star]");
  if (sc.null_runs == 0) throw ConfigError("null_runs", "must be at least 1");
  return sc;
}

json scan_json(const ScanResult& res) {
  json j;
  j["z_lo"] = res.z_lo;
  j["z_hi"] = res.z_hi;
  j["w0"] = res.w0;
  j["t0"] = res.t0;
  j["c0"] = res.c0;
  j["n_star"] = res.n_star;
  j["degenerate"] = res.degenerate;
  j["Z_hat"] = res.Z_hat;
  j["statistic"] = res.statistic;
  j["dY_at_Zhat"] = res.dY_at_Zhat;
  j["trace_n"] = res.trace_n;
  j["trace_max"] = res.trace_max;
  j["null_runs"] = res.null_sorted.size();
  j["null_q95"] = res.null_q95();
  j["exceeds_null_q95"] = res.statistic > res.null_q95();
  return j;
}

int run_scan(const Config& cfg) {
  ModelParams params = params_from(cfg, 0.5, 0.25, 4.0);
  ScanConfig sc = scan_config_from(cfg);
  if (sc.w0 / kSqrt2 > params.T) throw ConfigError("w0", "boundary time w0/sqrt2 exceeds the horizon T");
  const std::uint64_t seed = cfg.u64("seed", 1);
  const std::uint64_t replica = cfg.u64("replica", 0);

  ScanResult res = singularity_scan(sc, params, {seed, replica});

  const fs::path dir = out_dir(cfg);
  {
    std::ofstream csv = open_csv(dir / "scan.csv");
    Eigen::MatrixXd trace(1, static_cast<Eigen::Index>(res.trace_max.size()));
    for (std::size_t k = 0; k < res.trace_max.size(); ++k)
      trace(0, static_cast<Eigen::Index>(k)) = res.trace_max[k];
    // single realization: replica_id column is always this run's replica index
    std::ostringstream body;
    write_ratio_csv(body, res.trace_n, trace, /*stored_is_lil=*/true, res.w0, res.z_lo);
    std::string text = body.str();
    if (replica != 0) {
      // rewrite the trailing replica column
      std::istringstream in(text);
      std::string line, outbuf;
      std::getline(in, line);
      outbuf = line + '\n';
      while (std::getline(in, line)) {
        auto pos = line.rfind(',');
        outbuf += line.substr(0, pos + 1) + std::to_string(replica) + '\n';
      }
      text = outbuf;
    }
    csv << text;
  }
  json j = summary_base("scan", cfg);
  add_params(j, params);
  j["seed"] = seed;
  j["replica"] = replica;
  j["scan"] = scan_json(res);
  write_json_file(dir / "scan.json", j);
  return 0;
}

int run_propagate(const Config& cfg) {
  ModelParams params = params_from(cfg, 0.5, 0.25, 4.0);
  ScanConfig sc = scan_config_from(cfg);
  PropagationConfig pc;
  pc.w_offsets = cfg.num_list("w_offsets", pc.w_offsets);
  pc.null_runs = cfg.count("prop_null_runs", pc.null_runs);
  pc.fine_n = cfg.int_list("fine_n", pc.fine_n);
  for (double off : pc.w_offsets)
    if (!(off > 0.0)) throw ConfigError("w_offsets", "offsets must be positive");
  if (pc.null_runs == 0) throw ConfigError("prop_null_runs", "must be at least 1");
  for (int n : pc.fine_n)
    if (n < 2 || n > 60) throw ConfigError("fine_n", "entries must lie in [2, 60]");
  const double w_max = sc.w0 + *std::max_element(pc.w_offsets.begin(), pc.w_offsets.end());
  const double t_needed = (w_max + sc.z_hi) / kSqrt2 + std::ldexp(1.0, -sc.n_star);
  if (t_needed > params.T)
    throw ConfigError("T", "horizon below the largest sampled time " + g17(t_needed));
  const std::uint64_t seed = cfg.u64("seed", 1);
  const std::uint64_t replica = cfg.u64("replica", 0);

  ScanResult scan = singularity_scan(sc, params, {seed, replica});
  const fs::path dir = out_dir(cfg);

  json j = summary_base("propagate", cfg);
  add_params(j, params);
  j["seed"] = seed;
  j["replica"] = replica;
  j["scan"] = scan_json(scan);

  if (scan.degenerate) {
    std::ofstream csv = open_csv(dir / "propagate.csv");
    csv << "n,h,w,z,numerator,ratio_lil,ratio_mc,replica_id\n";
    j["degenerate"] = true;
    write_json_file(dir / "propagate.json", j);
    return 0;
  }

  PropagationResult res = propagation_experiment(scan, pc, params, {seed, replica});

  {
    std::ofstream csv = open_csv(dir / "propagate.csv");
    csv << "n,h,w,z,numerator,ratio_lil,ratio_mc,replica_id\n";
    const double h = std::ldexp(1.0, -scan.n_star);
    for (std::size_t i = 0; i < res.w_values.size(); ++i) {
      const double rl = res.statistic[i];
      const double num = rl * lil_norm(h);
      csv << scan.n_star << ',' << g17(h) << ',' << g17(res.w_values[i]) << ','
          << g17(scan.Z_hat) << ',' << g17(num) << ',' << g17(rl) << ','
          << g17(num / mc_norm(h)) << ',' << replica << '\n';
    }
  }
  j["degenerate"] = false;
  j["w_values"] = res.w_values;
  j["statistic"] = res.statistic;
  j["null_q95"] = res.null_q95;
  j["exceeded"] = res.exceeded;
  j["x_term_ratio_max"] = res.x_term_ratio_max;
  write_json_file(dir / "propagate.json", j);
  return 0;
}

// ---------------------------------------------------------------------------
// validate

struct CheckRow {
  std::string name;
  bool ok = false;
  std::string note;
};

int run_validate(const Config& cfg) {
  std::vector<CheckRow> rows;
  auto check = [&](const std::string& name, auto&& fn) {
    CheckRow row{name, false, ""};
    try {
      row.ok = fn(row.note);
    } catch (const std::exception& e) {
      row.ok = false;
      row.note = e.what();
    }
    rows.push_back(row);
  };
  auto rel_close = [](double a, double b, double tol) {
    return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
  };

  check("model: damping regimes classified by the discriminant", [&](std::string& note) {
    const bool ok = regime(ModelParams(2, 1, 1)) == Regime::Critical &&
                    regime(ModelParams(0.5, 1, 1)) == Regime::Oscillatory &&
                    regime(ModelParams(2, 0.3, 1)) == Regime::Mixed &&
                    std::string(regime_name(Regime::Critical)).size() > 0;
    if (!ok) note = "regime tags disagree with a^2/4 - m^2";
    return ok;
  });

  check("kernels: frequency symbol is even in xi", [&](std::string& note) {
    for (const ModelParams& p : {ModelParams(2, 1, 2), ModelParams(0.5, 1, 2), ModelParams(2, 0.3, 2)})
      for (double t : {0.3, 1.7})
        for (double xi : {0.37, 2.9}) {
          const double g1 = fourier_green(t, xi, p), g2 = fourier_green(t, -xi, p);
          if (!rel_close(g1, g2, 1e-13)) {
            note = "asymmetry at xi=" + g17(xi);
            return false;
          }
        }
    return true;
  });

  check("kernels: symbol continuous across the frequency crossover", [&](std::string& note) {
    const ModelParams p(2, 0.6, 1);  // crossover at xi = 0.8
    const double xi0 = std::sqrt(p.discriminant());
    for (double t : {0.5, 1.0}) {
      const double lo = fourier_green(t, xi0 * (1 - 5e-8), p);
      const double hi = fourier_green(t, xi0 * (1 + 5e-8), p);
      const double at = fourier_green(t, xi0, p);
      if (!std::isfinite(at) || !rel_close(lo, hi, 1e-5)) {
        note = "jump near xi0 at t=" + g17(t);
        return false;
      }
    }
    return true;
  });

  check("kernels: critically damped kernel closed form", [&](std::string& note) {
    const bool inside = rel_close(critical_kernel(1.0, 0.5, 2.0), std::exp(-1.0) / 2.0, 1e-14) &&
                        rel_close(critical_kernel(1.0, 0.5, 0.0), 0.5, 1e-14);
    const bool outside = critical_kernel(1.0, 1.5, 2.0) == 0.0 && critical_kernel(0.0, 0.5, 2.0) == 0.0;
    if (!inside || !outside) note = "kernel values off the exponential cone profile";
    return inside && outside;
  });

  check("kernels: time-frequency transform vanishes at t = 0", [&](std::string& note) {
    for (double x : {-0.7, 0.4})
      for (double tau : {0.0, 3.1})
        for (double xi : {0.0, 2.2})
          if (std::abs(spacetime_transform(0.0, x, tau, xi, ModelParams(1, 0.5, 1))) > 1e-18) {
            note = "nonzero at t=0";
            return false;
          }
    return true;
  });

  check("covariance: undamped massless variance at (1,0) is 1/4", [&](std::string& note) {
    const double v = variance({1.0, 0.0}, ModelParams(0, 0, 2));
    if (std::abs(v - 0.25) > 1e-10) {
      note = "got " + g17(v);
      return false;
    }
    return true;
  });

  check("covariance: characteristic rotation round-trips", [&](std::string& note) {
    GaussianStream rng({424242, 0}, StreamId::ExactSampler);
    for (int i = 0; i < 64; ++i) {
      SpaceTimePoint p{std::abs(rng.normal()) * 2, rng.normal() * 2};
      const SpaceTimePoint back = p.to_char().to_spacetime();
      if (!rel_close(back.t, p.t, 1e-12) || !rel_close(back.x, p.x, 1e-12)) {
        note = "round-trip drift at t=" + g17(p.t) + " x=" + g17(p.x);
        return false;
      }
    }
    return true;
  });

  check("covariance: spectral route matches closed form at critical coupling",
        [&](std::string& note) {
          for (double a : {1.0, 2.0}) {
            const ModelParams p(a, a / 2, 3);
            const SpaceTimePoint u{1.3, 0.4}, v{0.7, -0.2};
            const double s = cov_spectral(u, v, p, 1e-8);
            const double c = cov_critical(u, v, a);
            if (!rel_close(s, c, 1e-6)) {
              note = "a=" + g17(a) + ": " + g17(s) + " vs " + g17(c);
              return false;
            }
          }
          return true;
        });

  check("covariance: increment moment vanishes at zero lag and is symmetric",
        [&](std::string& note) {
          const ModelParams p(1, 0.5, 3);
          const SpaceTimePoint u{1.2, 0.3}, v{1.7, -0.4};
          const double zero = increment_moment(u, u, p);
          const double fwd = increment_moment(u, v, p), rev = increment_moment(v, u, p);
          if (std::abs(zero) > 1e-18 || !rel_close(fwd, rev, 1e-12)) {
            note = "zero-lag " + g17(zero) + ", asym " + g17(fwd - rev);
            return false;
          }
          return true;
        });

  check("sampler: identical seed reproduces, new replica decorrelates", [&](std::string& note) {
    const ModelParams p(1, 0.5, 3);
    GaussianDesign design({{1.0, 0.0}, {1.5, 0.5}, {2.0, -0.3}}, p);
    const Eigen::VectorXd v1 = design.sample({7, 0});
    const Eigen::VectorXd v2 = design.sample({7, 0});
    const Eigen::VectorXd v3 = design.sample({7, 1});
    if (v1 != v2) {
      note = "same seed differs";
      return false;
    }
    if (v1 == v3) {
      note = "replica change had no effect";
      return false;
    }
    return true;
  });

  check("sampler: zero-time points pinned, duplicates share a slot", [&](std::string& note) {
    const ModelParams p(1, 0.5, 3);
    GaussianDesign design({{0.0, 0.3}, {1.0, 0.25}, {1.0, 0.25}}, p);
    const Eigen::VectorXd v = design.sample({9, 0});
    if (v[0] != 0.0) {
      note = "t=0 slot not pinned to zero";
      return false;
    }
    if (v[1] != v[2]) {
      note = "duplicated point split";
      return false;
    }
    return true;
  });

  check("sampler: noise cells carry variance = cell area", [&](std::string& note) {
    const double s = 0.0078125;
    NoiseGrid noise = NoiseGrid::generate(1.0, 0.0, 1.0, s, s, {11, 0}, StreamId::NoiseGrid);
    const double n = double(noise.cells.size());
    const double var = noise.cells.squaredNorm() / n;
    const double expect = s * s;
    const double tol = 5.0 * std::sqrt(2.0 / n);
    if (std::abs(var / expect - 1.0) > tol) {
      note = "sample variance off by " + g17(var / expect - 1.0);
      return false;
    }
    return true;
  });

  check("sampler: zero noise yields the zero field", [&](std::string& note) {
    NoiseGrid noise = NoiseGrid::zeros(1.0, -2.0, 2.0, 0.0625, 0.0625);
    FieldSample f = walsh_on_noise({{0.5, 0.0}, {0.9, 0.3}}, noise, 1.0);
    if (f.values.cwiseAbs().maxCoeff() != 0.0) {
      note = "nonzero output from zero noise";
      return false;
    }
    return true;
  });

  check("reduction: critically coupled solve stops after one sweep", [&](std::string& note) {
    const ModelParams p(2, 1, 1);
    const double step = 0.0625;
    NoiseGrid noise = NoiseGrid::generate(1.0, -2.0 - step, 2.0 + step, step, step, {3, 0},
                                          StreamId::NoiseGrid);
    GridField u_C = stochastic_convolution(noise, p.a, {step, 17, 33, -1.0});
    PicardSolution sol = picard_solve(u_C, p);
    if (sol.report.iterations != 1 || !sol.report.converged) {
      note = "took " + std::to_string(sol.report.iterations) + " iterations";
      return false;
    }
    if (sol.u.values != u_C.values) {
      note = "zero-coupling solve moved the field";
      return false;
    }
    return true;
  });

  check("reduction: fixed-point residual meets the solver tolerance", [&](std::string& note) {
    const ModelParams p(2, 1.2, 1);
    const double step = 0.03125;
    NoiseGrid noise = NoiseGrid::generate(1.0, -2.0 - step, 2.0 + step, step, step, {5, 0},
                                          StreamId::NoiseGrid);
    GridField u_C = stochastic_convolution(noise, p.a, {step, 33, 65, -1.0});
    PicardSolution sol = picard_solve(u_C, p, 1e-10);
    const double r = fixed_point_residual(sol.u, u_C, p);
    if (!sol.report.converged || r > 2e-10) {
      note = "residual " + g17(r);
      return false;
    }
    return true;
  });

  check("reduction: kernel shift masses within their envelopes", [&](std::string& note) {
    for (double a : {0.5, 2.0})
      for (double t : {0.5, 1.5})
        for (double h : {0.01, 0.001}) {
          const ShiftMasses ms = characteristic_shift_masses(t, h, a);
          const double ramp = std::min(t * t / 2.0, 4.0 / (a * a));
          const bool ok = ms.overlap >= 0.0 && ms.sliver >= 0.0 && ms.cap >= 0.0 &&
                          ms.overlap <= (1.0 + 1e-12) * (1.0 - std::exp(-a * h / 2.0)) * ramp &&
                          ms.sliver <= (1.0 + 1e-12) * h * std::min(t, 2.0 / a) &&
                          ms.cap <= (1.0 + 1e-12) * h * h / 2.0;
          if (!ok) {
            note = "envelope breach at t=" + g17(t) + " h=" + g17(h) + " a=" + g17(a);
            return false;
          }
        }
    const ShiftMasses z = characteristic_shift_masses(1.0, 0.0, 1.0);
    if (z.total() != 0.0) {
      note = "zero shift has nonzero mass";
      return false;
    }
    return true;
  });

  check("regularity: normalizer identities and the h guard", [&](std::string& note) {
    const double h = std::ldexp(1.0, -12);
    const IncrementStatistic s = make_increment_statistic(0.37, h, {1.0, 1.0});
    if (!rel_close(s.ratio_lil * s.lil_normalizer, 0.37, 1e-14) ||
        !rel_close(s.ratio_mc * s.mc_normalizer, 0.37, 1e-14)) {
      note = "ratio * normalizer != numerator";
      return false;
    }
    try {
      lil_norm(0.5);
      note = "h guard missing";
      return false;
    } catch (const std::domain_error&) {
    }
    return true;
  });

  check("regularity: per-replica running max is non-decreasing", [&](std::string& note) {
    LilConfig lc;
    lc.point = {1.0, 1.0};
    lc.n_lo = 8;
    lc.n_hi = 12;
    lc.replicas = 6;
    TraceSummary res = lil_experiment(lc, ModelParams(1, 0.5, 4), 3);
    for (Eigen::Index r = 0; r < res.per_replica.rows(); ++r)
      for (Eigen::Index k = 1; k < res.per_replica.cols(); ++k)
        if (res.per_replica(r, k) + 1e-15 < res.per_replica(r, k - 1)) {
          note = "running max decreased";
          return false;
        }
    return res.median.size() == res.n_values.size();
  });

  check("regularity: scan statistic equals the final trace maximum", [&](std::string& note) {
    ScanConfig sc;
    sc.z_lo = 0.1;
    sc.z_hi = 0.35;
    sc.w0 = 1.0;
    sc.n_star = 8;
    sc.n_trace_lo = 6;
    sc.null_runs = 64;
    ScanResult res = singularity_scan(sc, ModelParams(0.5, 0.25, 4), {5, 0});
    if (res.statistic != res.trace_max.back()) {
      note = "statistic " + g17(res.statistic) + " vs trace " + g17(res.trace_max.back());
      return false;
    }
    if (res.Z_hat < sc.z_lo || res.Z_hat > sc.z_hi) {
      note = "located point outside the scan interval";
      return false;
    }
    if (!std::is_sorted(res.null_sorted.begin(), res.null_sorted.end()) ||
        res.null_sorted.size() != 64) {
      note = "null calibration not sorted";
      return false;
    }
    return true;
  });

  check("io: binary field matrices round-trip bitwise", [&](std::string& note) {
    Eigen::MatrixXd m(3, 2);
    m << 1.0, -2.5, 3.25e-12, 4.0, -5.0, 6.625;
    std::stringstream buf(std::ios::in | std::ios::out | std::ios::binary);
    write_matrix_binary(buf, m);
    const Eigen::MatrixXd back = read_matrix_binary(buf);
    if (back.rows() != m.rows() || back.cols() != m.cols() || back != m) {
      note = "round trip altered the matrix";
      return false;
    }
    return true;
  });

  bool all_ok = true;
  for (const auto& row : rows) {
    all_ok = all_ok && row.ok;
    std::printf("[%s] %s%s%s\n", row.ok ? " ok " : "FAIL", row.name.c_str(),
                row.note.empty() ? "" : " — ", row.note.c_str());
  }
  std::printf("validate: %zu/%zu checks passed\n",
              static_cast<std::size_t>(std::count_if(rows.begin(), rows.end(),
                                                     [](const CheckRow& r) { return r.ok; })),
              rows.size());

  json j = summary_base("validate", cfg);
  json checks = json::array();
  for (const auto& row : rows)
    checks.push_back({{"name", row.name}, {"ok", row.ok}, {"note", row.note}});
  j["checks"] = checks;
  j["passed"] = all_ok;
  write_json_file(out_dir(cfg) / "validate.json", j);
  return all_ok ? 0 : 4;
}

// ---------------------------------------------------------------------------
// driver

void usage(std::ostream& os) {
  os << "usage: kglab <subcommand> [--config FILE] [--key value ...]\n"
        "\n"
        "subcommands:\n"
        "  validate    run the property suite of every module (exit 4 on failure)\n"
        "  cov         print the covariance of two space-time points (--p t,x --q t,x)\n"
        "  sample      exact joint replicas at listed points (--points t,x;t,x;...)\n"
        "  picard      solve the damped-wave integral equation on a grid\n"
        "  lil         fixed-point running-max iterated-logarithm traces\n"
        "  mc          interval modulus-of-continuity statistics (--source field|ypath|brownian)\n"
        "  simlil      simultaneous grid boundedness statistic\n"
        "  scan        locate the exceptional point on a characteristic segment\n"
        "  propagate   follow the located point along the characteristic\n"
        "\n"
        "common keys: a, m, T, seed, replicas, out, workers, tol\n"
        "config files are flat `key = value` lines ('#' comments); flags override.\n"
        "KGLAB_OUT overrides the output directory. Exit codes: 0 ok, 2 config\n"
        "error, 3 numerical failure, 4 validation failure.\n";
}

int dispatch(const std::string& sub, const Config& cfg) {
  if (sub == "validate") return run_validate(cfg);
  if (sub == "cov") return run_cov(cfg);
  if (sub == "sample") return run_sample(cfg);
  if (sub == "picard") return run_picard(cfg);
  if (sub == "lil") return run_lil(cfg);
  if (sub == "mc") return run_mc(cfg);
  if (sub == "simlil") return run_simlil(cfg);
  if (sub == "scan") return run_scan(cfg);
  if (sub == "propagate") return run_propagate(cfg);
  throw ConfigError("subcommand", "unknown subcommand '" + sub + "'");
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    usage(std::cerr);
    return 2;
  }
  const std::string sub = argv[1];
  if (sub == "-h" || sub == "--help" || sub == "help") {
    usage(std::cout);
    return 0;
  }

  try {
    // Two passes: config files first, then flags, so flags always win.
    Config cfg;
    std::vector<std::pair<std::string, std::string>> flags;
    for (int i = 2; i < argc;) {
      const std::string arg = argv[i];
      if (arg.rfind("--", 0) != 0)
        throw ConfigError(arg, "expected --key value pairs after the subcommand");
      const std::string key = arg.substr(2);
      if (key.empty()) throw ConfigError(arg, "empty flag name");
      if (i + 1 >= argc) throw ConfigError(key, "missing value");
      if (key == "config")
        cfg.load_file(argv[i + 1]);
      else
        flags.emplace_back(key, argv[i + 1]);
      i += 2;
    }
    for (const auto& [k, v] : flags) cfg.set(k, v);
    return dispatch(sub, cfg);
  } catch (const ConfigError& e) {
    std::cerr << "config error: key '" << e.key << "': " << e.what() << '\n';
    return 2;
  } catch (const kglab::ToleranceNotMet& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const kglab::FactorizationError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const kglab::CoverageError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const kglab::GridMismatchError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
