#pragma once

// Study configuration, delta sweeps against the KdV expansion, order
// fitting and report serialization.

#include <kdvlab/error.hpp>
#include <kdvlab/euler_poisson.hpp>
#include <kdvlab/kdv.hpp>
#include <kdvlab/landau.hpp>

#include <nlohmann/json.hpp>
#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <array>
#include <atomic>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#ifndef KDVLAB_VERSION
#define KDVLAB_VERSION "unknown"
#endif

namespace kdvlab {

inline constexpr int report_schema_version = 1;

// ---------------------------------------------------------------------------
// Configuration

struct InitialData {
  enum class Kind { Soliton, Sine };
  Kind kind = Kind::Soliton;
  double speed = 0.5;                     // soliton speed c
  std::optional<double> center;           // soliton crest, default L/2
  std::vector<std::pair<int, double>> modes;  // sine: (wavenumber index, amplitude)
};

struct StudyConfig {
  int n = 512;
  double length = 40.0;
  InitialData initial;
  std::vector<double> deltas{0.2, 0.1, 0.05};
  std::vector<int> resolutions;  // extra grid sizes for the resolution check
  double t_final = 1.0;
  int output_times = 10;  // equal output intervals on [0, t_final]
  bool second_order = false;
  bool filter = false;
  CflPolicy cfl = CflPolicy::Clamp;
  double kdv_dt = 1e-3;
  double ep_dt = 1e-2;
  double poisson_tol = 1e-11;
  double order_min = 1.7;
  double order_max = 2.3;
  double second_order_min = 2.5;
  double resolution_tol = 0.1;
  std::optional<double> epsilon;  // Knudsen number, enables the window check
  double window_constant = 1.0;
  int velocity_points = 64;
  double vmax = 10.0;
  std::string output_dir = "out";
  std::string source_hash;  // FNV-1a of the config text

  void validate() const {
    if (deltas.size() < 3) throw ConfigError("deltas: at least 3 values are needed for order fitting");
    for (std::size_t i = 0; i < deltas.size(); ++i) {
      if (!(deltas[i] > 0.0 && deltas[i] <= 0.5)) throw ConfigError("deltas: values must lie in (0, 0.5]");
      if (i > 0 && !(deltas[i] < deltas[i - 1])) throw ConfigError("deltas: values must be strictly decreasing");
    }
    for (int m : resolutions) SpatialGrid(m, length);
    SpatialGrid(n, length);
    if (!(t_final > 0.0) || output_times < 1) throw ConfigError("t_final and output_times must be positive");
    if (!(kdv_dt > 0.0) || !(ep_dt > 0.0)) throw ConfigError("time steps must be positive");
    if (initial.kind == InitialData::Kind::Soliton && !(initial.speed > 0.0))
      throw ConfigError("initial.speed must be positive");
    if (!(order_min < order_max)) throw ConfigError("tolerances: order_min must be below order_max");
    if (epsilon && !(*epsilon > 0.0)) throw ConfigError("epsilon must be positive");
  }
};

inline std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

namespace detail {

[[noreturn]] inline void config_fail(const std::string& source, const YAML::Node& node, const std::string& what) {
  const auto mark = node.Mark();
  std::string where = source;
  if (mark.line >= 0) where += ":" + std::to_string(mark.line + 1) + ":" + std::to_string(mark.column + 1);
  throw ConfigError(where + ": " + what);
}

template <class T>
T read_scalar(const std::string& source, const YAML::Node& node, const std::string& key) {
  if (!node.IsScalar()) config_fail(source, node, key + ": expected a scalar");
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    config_fail(source, node, key + ": cannot read '" + node.Scalar() + "'");
  }
}

template <class T>
void read_optional(const std::string& source, const YAML::Node& map, const std::string& key, T& out) {
  if (const YAML::Node n = map[key]) out = read_scalar<T>(source, n, key);
}

template <class T>
std::vector<T> read_list(const std::string& source, const YAML::Node& node, const std::string& key) {
  if (!node.IsSequence()) config_fail(source, node, key + ": expected a list");
  std::vector<T> out;
  for (const auto& item : node) out.push_back(read_scalar<T>(source, item, key));
  return out;
}

inline void reject_unknown(const std::string& source, const YAML::Node& map, std::initializer_list<const char*> known,
                           const std::string& section) {
  for (const auto& kv : map) {
    const std::string key = kv.first.as<std::string>();
    if (std::none_of(known.begin(), known.end(), [&](const char* k) { return key == k; }))
      config_fail(source, kv.first, "unknown key '" + key + "'" + (section.empty() ? "" : " in " + section));
  }
}

}  // namespace detail

/// Parse a YAML study description. `source` names the input in diagnostics.
inline StudyConfig parse_config(const std::string& text, const std::string& source = "<config>") {
  using namespace detail;
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(source + ":" + std::to_string(e.mark.line + 1) + ":" + std::to_string(e.mark.column + 1) +
                      ": " + e.msg);
  }
  StudyConfig c;
  c.source_hash = [&] {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, fnv1a(text));
    return std::string(buf);
  }();
  if (root.IsNull()) return c.validate(), c;
  if (!root.IsMap()) config_fail(source, root, "top level must be a mapping");
  reject_unknown(source, root,
                 {"grid", "initial", "deltas", "resolutions", "t_final", "output_times", "second_order", "filter",
                  "cfl", "kdv_dt", "ep_dt", "tolerances", "epsilon", "window_constant", "velocity", "output"},
                 "");

  if (const YAML::Node g = root["grid"]) {
    if (!g.IsMap()) config_fail(source, g, "grid: expected a mapping");
    reject_unknown(source, g, {"n", "length"}, "grid");
    read_optional(source, g, "n", c.n);
    read_optional(source, g, "length", c.length);
  }
  if (const YAML::Node init = root["initial"]) {
    if (!init.IsMap()) config_fail(source, init, "initial: expected a mapping");
    reject_unknown(source, init, {"kind", "speed", "center", "modes"}, "initial");
    const std::string kind = init["kind"] ? read_scalar<std::string>(source, init["kind"], "kind") : "soliton";
    if (kind == "soliton") {
      c.initial.kind = InitialData::Kind::Soliton;
      read_optional(source, init, "speed", c.initial.speed);
      if (init["center"]) c.initial.center = read_scalar<double>(source, init["center"], "center");
    } else if (kind == "sine") {
      c.initial.kind = InitialData::Kind::Sine;
      const YAML::Node modes = init["modes"];
      if (!modes || !modes.IsSequence()) config_fail(source, init, "initial.modes: expected a list of [k, amplitude]");
      for (const auto& m : modes) {
        if (!m.IsSequence() || m.size() != 2) config_fail(source, m, "initial.modes: each entry is [k, amplitude]");
        const int k = read_scalar<int>(source, m[0], "k");
        if (k < 1) config_fail(source, m[0], "initial.modes: k must be >= 1");
        c.initial.modes.emplace_back(k, read_scalar<double>(source, m[1], "amplitude"));
      }
    } else {
      config_fail(source, init["kind"], "initial.kind must be 'soliton' or 'sine'");
    }
  }
  if (const YAML::Node d = root["deltas"]) c.deltas = read_list<double>(source, d, "deltas");
  if (const YAML::Node r = root["resolutions"]) c.resolutions = read_list<int>(source, r, "resolutions");
  read_optional(source, root, "t_final", c.t_final);
  read_optional(source, root, "output_times", c.output_times);
  read_optional(source, root, "second_order", c.second_order);
  read_optional(source, root, "filter", c.filter);
  if (const YAML::Node p = root["cfl"]) {
    const auto s = read_scalar<std::string>(source, p, "cfl");
    if (s == "clamp") c.cfl = CflPolicy::Clamp;
    else if (s == "strict") c.cfl = CflPolicy::Strict;
    else config_fail(source, p, "cfl must be 'clamp' or 'strict'");
  }
  read_optional(source, root, "kdv_dt", c.kdv_dt);
  read_optional(source, root, "ep_dt", c.ep_dt);
  if (const YAML::Node t = root["tolerances"]) {
    if (!t.IsMap()) config_fail(source, t, "tolerances: expected a mapping");
    reject_unknown(source, t, {"poisson", "order_min", "order_max", "second_order_min", "resolution"}, "tolerances");
    read_optional(source, t, "poisson", c.poisson_tol);
    read_optional(source, t, "order_min", c.order_min);
    read_optional(source, t, "order_max", c.order_max);
    read_optional(source, t, "second_order_min", c.second_order_min);
    read_optional(source, t, "resolution", c.resolution_tol);
  }
  if (const YAML::Node e = root["epsilon"]) c.epsilon = read_scalar<double>(source, e, "epsilon");
  read_optional(source, root, "window_constant", c.window_constant);
  if (const YAML::Node v = root["velocity"]) {
    if (!v.IsMap()) config_fail(source, v, "velocity: expected a mapping");
    reject_unknown(source, v, {"points", "vmax"}, "velocity");
    read_optional(source, v, "points", c.velocity_points);
    read_optional(source, v, "vmax", c.vmax);
  }
  read_optional(source, root, "output", c.output_dir);
  try {
    c.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(source + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(source + ": " + e.what());
  }
  return c;
}

inline StudyConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

inline Field1D initial_rho1(const StudyConfig& c, const SpatialGrid& grid, SoundSpeed A) {
  if (c.initial.kind == InitialData::Kind::Soliton)
    return kdv_soliton(grid, A, c.initial.speed, c.initial.center.value_or(grid.length() / 2.0));
  Field1D f(static_cast<std::size_t>(grid.size()));
  for (const auto& [k, a] : c.initial.modes) {
    if (k > grid.dealias_cutoff()) throw ConfigError("initial.modes: k exceeds the dealiasing cutoff");
    f += Field1D::sample(grid, [&](double x) { return a * std::sin(grid.wavenumber(k) * x); });
  }
  return f;
}

// ---------------------------------------------------------------------------
// Order fitting

struct OrderFit {
  double order = 0.0;             // least-squares slope of log error against log delta
  std::vector<double> pairwise;   // log(e_i / e_{i+1}) / log(delta_i / delta_{i+1})
};

inline OrderFit fit_order(const std::vector<double>& errors, const std::vector<double>& deltas) {
  if (errors.size() != deltas.size()) throw std::invalid_argument("fit_order: length mismatch");
  if (errors.size() < 3) throw std::invalid_argument("fit_order: at least 3 points are needed");
  for (double e : errors)
    if (!(e > 0.0) || !std::isfinite(e)) throw std::domain_error("fit_order: errors must be positive and finite");
  for (double d : deltas)
    if (!(d > 0.0)) throw std::domain_error("fit_order: deltas must be positive");
  const double n = static_cast<double>(errors.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < errors.size(); ++i) {
    const double x = std::log(deltas[i]), y = std::log(errors[i]);
    sx += x, sy += y, sxx += x * x, sxy += x * y;
  }
  OrderFit fit;
  fit.order = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  for (std::size_t i = 0; i + 1 < errors.size(); ++i)
    fit.pairwise.push_back(std::log(errors[i] / errors[i + 1]) / std::log(deltas[i] / deltas[i + 1]));
  return fit;
}

// ---------------------------------------------------------------------------
// Convergence study

inline constexpr std::array<const char*, 4> study_fields{"R", "U", "Theta", "Pi"};

struct FieldErrors {
  double l2 = 0.0;
  double linf = 0.0;
};

struct DeltaRun {
  int n = 0;
  double delta = 0.0;
  std::vector<double> times;
  std::vector<std::array<FieldErrors, 4>> per_time;
  std::array<FieldErrors, 4> sup{};  // sup over output times
  int steps = 0;
  double dt_used = 0.0;
  double filter_dissipation = 0.0;
  std::optional<WindowCheck> window;
  // (delta/eps)^{1/(2(1+q2))} - 1: the admissible final time with the
  // unknown prefactor 2 c2 q1 q2 / (3 C3) set to 1. Informational only.
  std::optional<double> tau_scale;
};

struct ResolutionFit {
  int n = 0;
  std::array<OrderFit, 4> l2, linf;
};

struct ConvergenceReport {
  StudyConfig config;
  std::vector<DeltaRun> runs;            // resolution-major, delta-minor
  std::vector<ResolutionFit> fits;       // one per resolution, the primary first
  std::optional<double> resolution_shift;  // largest change of an L2 order across resolutions
  bool trivially_converged = false;
  bool pass = false;
  std::vector<std::string> failures;
};

/// One delta of the sweep: the Euler-Poisson solve from expansion data and
/// the error against the (order-1 or order-2) expansion built from the
/// hierarchy trajectory `hier`.
inline DeltaRun run_delta(const StudyConfig& c, const SpatialGrid& grid, const KdVTrajectory& hier, double delta) {
  const SoundSpeed A = find_sound_speed();
  EPParams p;
  p.delta = delta;
  p.A = A;
  p.dt = c.ep_dt;
  p.cfl = c.cfl;
  p.poisson_tol = c.poisson_tol;
  p.hyperviscosity = c.filter;
  const Field1D& rho1 = hier.front().rho1;
  const FluidState init = expansion_initial_state(rho1, *hier.front().rho2, grid, p, c.second_order);
  EPRun ep;
  try {
    ep = ep_solve(init, grid, p, c.t_final, c.output_times);
  } catch (const std::exception& e) {
    throw SolverError("delta = " + std::to_string(delta) + ", n = " + std::to_string(grid.size()) + ": " + e.what());
  }
  DeltaRun run;
  run.n = grid.size();
  run.delta = delta;
  run.steps = ep.steps;
  run.dt_used = ep.dt_used;
  run.filter_dissipation = ep.filter_dissipation;
  if (c.epsilon) {
    run.window = window_check(*c.epsilon, delta, c.window_constant);
    const double q2 = WeightParams{}.q2;
    run.tau_scale = std::pow(std::sqrt(delta / *c.epsilon), 1.0 / (1.0 + q2)) - 1.0;
  }
  const double d = delta;
  for (std::size_t j = 0; j < ep.states.size(); ++j) {
    const auto& s = ep.states[j];
    const Field1D& r1 = hier[j].rho1;
    Field1D tR = 1.0 + d * r1, tU = d * A.value * r1, tT = 1.5 + d * r1, tP = d * r1;
    if (c.second_order) {
      const Field1D& r2 = *hier[j].rho2;
      const auto so = second_order_fields(r1, r2, grid, A);
      tR += d * d * r2;
      tU += d * d * so.u1_2;
      tT += 1.5 * d * d * so.theta2;
      tP += d * d * so.phi2;
    }
    std::array<FieldErrors, 4> e;
    const std::array<Field1D, 4> diff{s.R - tR, s.U - tU, s.Theta - tT, s.Pi - tP};
    for (int f = 0; f < 4; ++f) {
      const auto nrm = field_norms(diff[f], grid);
      e[f] = {nrm.l2, nrm.linf};
      run.sup[f].l2 = std::max(run.sup[f].l2, nrm.l2);
      run.sup[f].linf = std::max(run.sup[f].linf, nrm.linf);
    }
    run.times.push_back(s.time);
    run.per_time.push_back(e);
  }
  return run;
}

namespace detail {

// Run fn(i) for i in [0, count) on up to `jobs` threads. Results are
// written by index, so the outcome does not depend on scheduling.
template <class Fn>
void parallel_for(std::size_t count, int jobs, Fn&& fn) {
  const std::size_t workers = std::min<std::size_t>(count, static_cast<std::size_t>(std::max(jobs, 1)));
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(count);
  auto work = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < count;) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::jthread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  pool.clear();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace detail

/// Delta sweep at every resolution, order fits and the pass decision.
/// With strict_window, a (epsilon, delta) pair outside the window is a ConfigError.
inline ConvergenceReport run_convergence_study(const StudyConfig& c, int jobs = 1, bool strict_window = false) {
  c.validate();
  if (strict_window) {
    if (!c.epsilon) throw ConfigError("--strict-window needs epsilon in the config");
    for (double d : c.deltas)
      if (!window_check(*c.epsilon, d, c.window_constant).pass)
        throw ConfigError("delta = " + std::to_string(d) + " lies outside the window for epsilon = " +
                          std::to_string(*c.epsilon));
  }
  const SoundSpeed A = find_sound_speed();
  std::vector<int> sizes{c.n};
  for (int m : c.resolutions)
    if (std::find(sizes.begin(), sizes.end(), m) == sizes.end()) sizes.push_back(m);

  std::vector<SpatialGrid> grids;
  std::vector<KdVTrajectory> hier;
  for (int m : sizes) {
    grids.emplace_back(m, c.length);
    const Field1D rho1 = initial_rho1(c, grids.back(), A);
    hier.push_back(solve_hierarchy(rho1, Field1D(static_cast<std::size_t>(m)), grids.back(), A,
                                   {c.t_final, c.kdv_dt, c.output_times}));
  }

  ConvergenceReport rep;
  rep.config = c;
  const std::size_t nd = c.deltas.size();
  rep.runs.resize(sizes.size() * nd);
  detail::parallel_for(rep.runs.size(), jobs, [&](std::size_t i) {
    rep.runs[i] = run_delta(c, grids[i / nd], hier[i / nd], c.deltas[i % nd]);
  });

  double largest = 0.0;
  for (const auto& r : rep.runs)
    for (const auto& e : r.sup) largest = std::max(largest, e.linf);
  if (largest < 1e-13) {
    rep.trivially_converged = true;
    rep.pass = true;
    return rep;
  }

  for (std::size_t s = 0; s < sizes.size(); ++s) {
    ResolutionFit fit;
    fit.n = sizes[s];
    for (int f = 0; f < 4; ++f) {
      std::vector<double> l2, linf;
      for (std::size_t k = 0; k < nd; ++k) {
        l2.push_back(rep.runs[s * nd + k].sup[f].l2);
        linf.push_back(rep.runs[s * nd + k].sup[f].linf);
      }
      fit.l2[f] = fit_order(l2, c.deltas);
      fit.linf[f] = fit_order(linf, c.deltas);
    }
    rep.fits.push_back(std::move(fit));
  }

  rep.pass = true;
  const auto& primary = rep.fits.front();
  for (int f = 0; f < 4; ++f) {
    const double q = primary.l2[f].order;
    const bool ok = c.second_order ? q >= c.second_order_min : (q >= c.order_min && q <= c.order_max);
    if (!ok) {
      rep.pass = false;
      rep.failures.push_back(std::string(study_fields[f]) + ": fitted order " + std::to_string(q) + " outside the target");
    }
  }
  if (rep.fits.size() > 1) {
    double shift = 0.0;
    for (std::size_t s = 1; s < rep.fits.size(); ++s)
      for (int f = 0; f < 4; ++f) shift = std::max(shift, std::abs(rep.fits[s].l2[f].order - primary.l2[f].order));
    rep.resolution_shift = shift;
    if (!(shift < c.resolution_tol)) {
      rep.pass = false;
      rep.failures.push_back("fitted orders move by " + std::to_string(shift) + " across resolutions");
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Serialization

/// Floats with 17 significant digits.
inline std::string format_double(double v) {
  if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// JSON writer that prints every float with 17 significant digits
/// (non-finite values become null).
inline void write_json(std::ostream& os, const nlohmann::json& j, int indent = 0) {
  const std::string pad(static_cast<std::size_t>(indent + 2), ' '), close(static_cast<std::size_t>(indent), ' ');
  switch (j.type()) {
    case nlohmann::json::value_t::object: {
      if (j.empty()) {
        os << "{}";
        break;
      }
      os << "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) os << ",\n";
        first = false;
        os << pad << nlohmann::json(it.key()).dump() << ": ";
        write_json(os, it.value(), indent + 2);
      }
      os << "\n" << close << "}";
      break;
    }
    case nlohmann::json::value_t::array: {
      if (j.empty()) {
        os << "[]";
        break;
      }
      os << "[";
      bool first = true;
      for (const auto& item : j) {
        if (!first) os << ", ";
        first = false;
        write_json(os, item, indent + 2);
      }
      os << "]";
      break;
    }
    case nlohmann::json::value_t::number_float: {
      const double v = j.get<double>();
      os << (std::isfinite(v) ? format_double(v) : "null");
      break;
    }
    default:
      os << j.dump();
  }
}

inline nlohmann::json provenance(const StudyConfig& c) {
  return {{"config_hash", c.source_hash}, {"code_version", KDVLAB_VERSION}};
}

inline nlohmann::json to_json(const ConvergenceReport& r) {
  using nlohmann::json;
  const auto& c = r.config;
  json out;
  out["schema_version"] = report_schema_version;
  out["kind"] = "convergence";
  out["provenance"] = provenance(c);
  out["config"] = {{"n", c.n},
                   {"length", c.length},
                   {"deltas", c.deltas},
                   {"resolutions", c.resolutions},
                   {"t_final", c.t_final},
                   {"output_times", c.output_times},
                   {"second_order", c.second_order},
                   {"filter", c.filter},
                   {"kdv_dt", c.kdv_dt},
                   {"ep_dt", c.ep_dt}};
  json runs = json::array();
  for (const auto& run : r.runs) {
    json jr{{"n", run.n}, {"delta", run.delta}, {"steps", run.steps}, {"dt_used", run.dt_used},
            {"filter_dissipation", run.filter_dissipation}, {"times", run.times}};
    for (int f = 0; f < 4; ++f) {
      json series{{"l2", json::array()}, {"linf", json::array()}};
      for (const auto& e : run.per_time) {
        series["l2"].push_back(e[f].l2);
        series["linf"].push_back(e[f].linf);
      }
      jr["errors"][study_fields[f]] = {{"sup_l2", run.sup[f].l2}, {"sup_linf", run.sup[f].linf}, {"series", series}};
    }
    if (run.window)
      jr["window"] = {{"lower", run.window->lower}, {"upper", run.window->upper}, {"pass", run.window->pass},
                      {"tau_scale", *run.tau_scale}};
    runs.push_back(jr);
  }
  out["runs"] = runs;
  json fits = json::array();
  for (const auto& fit : r.fits) {
    json jf{{"n", fit.n}};
    for (int f = 0; f < 4; ++f)
      jf["orders"][study_fields[f]] = {{"l2", fit.l2[f].order},
                                        {"l2_pairwise", fit.l2[f].pairwise},
                                        {"linf", fit.linf[f].order},
                                        {"linf_pairwise", fit.linf[f].pairwise}};
    fits.push_back(jf);
  }
  out["fits"] = fits;
  out["resolution_shift"] = r.resolution_shift ? json(*r.resolution_shift) : json(nullptr);
  out["trivially_converged"] = r.trivially_converged;
  out["failures"] = r.failures;
  out["result"] = r.pass ? "PASS" : "FAIL";
  return out;
}

/// One row per (n, delta, output time, field).
inline void write_errors_csv(std::ostream& os, const ConvergenceReport& r) {
  os << "n,delta,t,field,l2,linf\n";
  for (const auto& run : r.runs)
    for (std::size_t j = 0; j < run.times.size(); ++j)
      for (int f = 0; f < 4; ++f)
        os << run.n << ',' << format_double(run.delta) << ',' << format_double(run.times[j]) << ',' << study_fields[f]
           << ',' << format_double(run.per_time[j][f].l2) << ',' << format_double(run.per_time[j][f].linf) << '\n';
}

}  // namespace kdvlab
