// kdvlab: batch driver for the KdV-limit studies.
//
// Exit status: 0 all checks pass, 1 a check failed, 2 bad usage or config,
// 3 a solver failed.

#include <kdvlab/checks.hpp>
#include <kdvlab/expansion.hpp>
#include <kdvlab/study.hpp>

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace kdvlab;
using nlohmann::json;

namespace {

struct Options {
  std::string config;
  std::string out;
  int jobs = 1;
  bool strict_window = false;
  bool delta_sweep = false;
};

StudyConfig load(const Options& o) {
  StudyConfig c = o.config.empty() ? parse_config("", "<defaults>") : load_config(o.config);
  if (!o.out.empty()) c.output_dir = o.out;
  return c;
}

std::ofstream open_out(const StudyConfig& c, const std::string& name) {
  fs::create_directories(c.output_dir);
  std::ofstream os(fs::path(c.output_dir) / name);
  if (!os) throw std::runtime_error("cannot write " + (fs::path(c.output_dir) / name).string());
  return os;
}

void write_report(const StudyConfig& c, const std::string& name, const json& j) {
  auto os = open_out(c, name);
  write_json(os, j);
  os << '\n';
}

json header(const StudyConfig& c, const char* kind) {
  return {{"schema_version", report_schema_version}, {"kind", kind}, {"provenance", provenance(c)}};
}

// One line per check on stdout; returns the overall verdict.
bool verdicts(json& report, const std::vector<std::tuple<std::string, double, double, bool>>& checks) {
  bool pass = true;
  for (const auto& [name, value, limit, ok] : checks) {
    std::cout << (ok ? "PASS " : "FAIL ") << name << " = " << format_double(value) << " (limit "
              << format_double(limit) << ")\n";
    report["checks"][name] = {{"value", value}, {"limit", limit}, {"pass", ok}};
    pass = pass && ok;
  }
  report["result"] = pass ? "PASS" : "FAIL";
  return pass;
}

void write_field_csv(std::ostream& os, const std::vector<double>& times, const std::vector<const Field1D*>& fields,
                     const SpatialGrid& grid) {
  os << "t,x,value\n";
  for (std::size_t i = 0; i < times.size(); ++i)
    for (int j = 0; j < grid.size(); ++j)
      os << format_double(times[i]) << ',' << format_double(grid.node(j)) << ',' << format_double((*fields[i])[j])
         << '\n';
}

int kdv_run(const Options& o) {
  const StudyConfig c = load(o);
  const SpatialGrid grid(c.n, c.length);
  const SoundSpeed A = find_sound_speed();
  const Field1D rho1 = initial_rho1(c, grid, A);
  const auto traj = solve_hierarchy(rho1, Field1D(rho1.size()), grid, A, {c.t_final, c.kdv_dt, c.output_times});

  std::vector<double> times;
  std::vector<const Field1D*> r1, r2;
  for (const auto& s : traj) {
    times.push_back(s.time);
    r1.push_back(&s.rho1);
    r2.push_back(&*s.rho2);
  }
  {
    auto os = open_out(c, "kdv_rho1.csv");
    write_field_csv(os, times, r1, grid);
  }
  {
    auto os = open_out(c, "kdv_rho2.csv");
    write_field_csv(os, times, r2, grid);
  }

  const double mass0 = integrate(rho1, grid), energy0 = integrate(rho1 * rho1, grid);
  const double mass_scale = std::max(std::abs(mass0), integrate(rho1.map([](double v) { return std::abs(v); }), grid));
  double mass_drift = 0.0, energy_drift = 0.0;
  for (const auto& s : traj) {
    mass_drift = std::max(mass_drift, std::abs(integrate(s.rho1, grid) - mass0) / mass_scale);
    energy_drift = std::max(energy_drift, std::abs(integrate(s.rho1 * s.rho1, grid) - energy0) / energy0);
  }
  json report = header(c, "kdv-run");
  report["sound_speed"] = A.value;
  std::vector<std::tuple<std::string, double, double, bool>> checks{
      {"mass_drift", mass_drift, 1e-8, mass_drift < 1e-8}, {"l2_drift", energy_drift, 1e-8, energy_drift < 1e-8}};
  if (c.initial.kind == InitialData::Kind::Soliton) {
    const double x0 = c.initial.center.value_or(grid.length() / 2.0);
    double shape = 0.0;
    for (const auto& s : traj)
      shape = std::max(shape, (s.rho1 - kdv_soliton(grid, A, c.initial.speed, x0, s.time)).max_abs());
    checks.emplace_back("soliton_shape_linf", shape, 1e-6, shape < 1e-6);
  }
  const bool pass = verdicts(report, checks);
  write_report(c, "kdv_run.json", report);
  return pass ? 0 : 1;
}

int ep_run(const Options& o) {
  const StudyConfig c = load(o);
  const SpatialGrid grid(c.n, c.length);
  const SoundSpeed A = find_sound_speed();
  const double delta = c.deltas.front();
  if (c.epsilon) {
    const auto w = window_check(*c.epsilon, delta, c.window_constant);
    if (!w.pass && o.strict_window) throw ConfigError("delta outside the (epsilon, delta) window");
  }
  EPParams p;
  p.delta = delta;
  p.A = A;
  p.dt = c.ep_dt;
  p.cfl = c.cfl;
  p.poisson_tol = c.poisson_tol;
  p.hyperviscosity = c.filter;
  const Field1D rho1 = initial_rho1(c, grid, A);
  const auto init = expansion_initial_state(rho1, Field1D(rho1.size()), grid, p, false);
  const EPRun run = ep_solve(init, grid, p, c.t_final, c.output_times);

  auto os = open_out(c, "ep_states.csv");
  os << "t,x,R,U,Theta,Pi\n";
  double mass_drift = 0.0, poisson = 0.0;
  const double mass0 = integrate(init.R, grid);
  for (const auto& s : run.states) {
    for (int j = 0; j < grid.size(); ++j)
      os << format_double(s.time) << ',' << format_double(grid.node(j)) << ',' << format_double(s.R[j]) << ','
         << format_double(s.U[j]) << ',' << format_double(s.Theta[j]) << ',' << format_double(s.Pi[j]) << '\n';
    mass_drift = std::max(mass_drift, std::abs(integrate(s.R, grid) - mass0) / mass0);
    poisson = std::max(poisson, poisson_residual_norm(s, grid, delta));
  }
  json report = header(c, "ep-run");
  report["delta"] = delta;
  report["steps"] = run.steps;
  report["dt_used"] = run.dt_used;
  report["filter_dissipation"] = run.filter_dissipation;
  const bool pass = verdicts(report, {{"mass_drift", mass_drift, 1e-10, mass_drift < 1e-10},
                                      {"poisson_residual_linf", poisson, 1e-9, poisson < 1e-9}});
  write_report(c, "ep_run.json", report);
  return pass ? 0 : 1;
}

int expansion_check(const Options& o) {
  const StudyConfig c = load(o);
  const SpatialGrid grid(c.n, c.length);
  const SoundSpeed A = find_sound_speed();
  const Field1D rho1 = initial_rho1(c, grid, A);
  const auto traj = solve_hierarchy(rho1, Field1D(rho1.size()), grid, A, {c.t_final, c.kdv_dt, c.output_times});
  json report = header(c, "expansion-check");
  std::vector<std::tuple<std::string, double, double, bool>> checks;

  // background identity: each line reproduces delta^2 R_i (delta^3 R4)
  double identity = 0.0;
  for (double d : c.deltas)
    for (const auto& s : traj) {
      const auto p = build_profile(s.rho1, *s.rho2, grid, A);
      const auto res =
          background_residuals(p, kdv_rhs(s.rho1, grid, A), kdv2_rhs(s.rho1, *s.rho2, grid, A), d, grid, A);
      identity = std::max(identity, *std::max_element(res.begin(), res.end()));
    }
  checks.emplace_back("background_identity_linf", identity, 1e-8, identity < 1e-8);

  if (o.delta_sweep) {
    auto os = open_out(c, "remainder_table.csv");
    os << "delta,k,R1,R2,R3,R4\n";
    // d/dt R1 along the flow, one-sided second-order difference; informational
    const double h = 1e-3;
    json dt_r1 = json::array();
    for (double d : c.deltas) {
      double sup = 0.0;
      for (const auto& s : traj) {
        const auto ahead = solve_hierarchy(s.rho1, *s.rho2, grid, A, {2.0 * h, h / 4.0, 2});
        std::array<Field1D, 3> r1;
        for (int i = 0; i < 3; ++i) r1[i] = remainders_on_flow(ahead[i].rho1, *ahead[i].rho2, d, grid, A).R1;
        sup = std::max(sup, field_norms((-3.0 * r1[0] + 4.0 * r1[1] - r1[2]) * (0.5 / h), grid).l2);
      }
      dt_r1.push_back({{"delta", d}, {"sup_l2", sup}});
    }
    report["dt_R1_diagnostic"] = dt_r1;
    for (int k = 0; k <= 2; ++k) {
      std::vector<RemainderNorms> table;
      for (double d : c.deltas) {
        RemainderNorms sup{d, k, {}};
        for (const auto& s : traj) {
          const auto row = remainder_norms(remainders_on_flow(s.rho1, *s.rho2, d, grid, A), d, k, grid);
          for (int i = 0; i < 4; ++i) sup.norms[i] = std::max(sup.norms[i], row.norms[i]);
        }
        os << format_double(d) << ',' << k;
        for (double v : sup.norms) os << ',' << format_double(v);
        os << '\n';
        table.push_back(sup);
      }
      const auto check = remainder_bound_check(table);
      for (int i = 0; i < 4; ++i) {
        const std::string name = "R" + std::to_string(i + 1) + "_H" + std::to_string(k) + "_spread";
        checks.emplace_back(name, check.spread[i], 3.0, check.spread[i] < 3.0);
      }
    }
  }
  const bool pass = verdicts(report, checks);
  write_report(c, "expansion_check.json", report);
  return pass ? 0 : 1;
}

int converge(const Options& o) {
  const StudyConfig c = load(o);
  const auto rep = run_convergence_study(c, o.jobs, o.strict_window);
  write_report(c, "report.json", to_json(rep));
  {
    auto os = open_out(c, "errors.csv");
    write_errors_csv(os, rep);
  }
  if (rep.trivially_converged) std::cout << "PASS trivially converged (zero perturbation)\n";
  for (const auto& fit : rep.fits)
    for (int f = 0; f < 4; ++f)
      std::cout << "n=" << fit.n << ' ' << study_fields[f] << " order l2 " << format_double(fit.l2[f].order)
                << " linf " << format_double(fit.linf[f].order) << '\n';
  for (const auto& msg : rep.failures) std::cout << "FAIL " << msg << '\n';
  std::cout << (rep.pass ? "PASS" : "FAIL") << " convergence study\n";
  return rep.pass ? 0 : 1;
}

int kinetic_check(const Options& o) {
  const StudyConfig c = load(o);
  const auto vg = VelocityGrid::uniform(c.velocity_points, c.vmax);
  json report = header(c, "kinetic-check");
  std::vector<std::tuple<std::string, double, double, bool>> checks;
  const std::array<MaxwellianParams, 2> states{MaxwellianParams{1.0, {0, 0, 0}, 1.5},
                                               MaxwellianParams{1.4, {0.3, 0.0, -0.1}, 1.8}};
  for (std::size_t i = 0; i < states.size(); ++i) {
    const auto s = kinetic_suite(vg, states[i]);
    const std::string tag = i == 0 ? "global" : "moving";
    checks.emplace_back(tag + "_gram", s.gram, 1e-8, s.gram < 1e-8);
    checks.emplace_back(tag + "_p0_idempotence", s.p0_idempotence, 1e-10, s.p0_idempotence < 1e-10);
    checks.emplace_back(tag + "_p1_microscopy", s.p1_microscopy, 1e-10, s.p1_microscopy < 1e-10);
    checks.emplace_back(tag + "_burnett", s.burnett, 1e-7, s.burnett < 1e-7);
  }
  const bool pass = verdicts(report, checks);
  write_report(c, "kinetic_check.json", report);
  return pass ? 0 : 1;
}

int sigma_table(const Options& o) {
  const StudyConfig c = load(o);
  const auto& table = SigmaTable::instance();
  {
    auto os = open_out(c, "sigma_table.csv");
    os << "r,lambda_par,lambda_perp\n";
    const auto& r = table.radii();
    for (std::size_t i = 0; i < r.size(); ++i)
      os << format_double(r[i]) << ',' << format_double(table.parallel_values()[i]) << ','
         << format_double(table.perpendicular_values()[i]) << '\n';
  }
  const auto vg = VelocityGrid::uniform(std::min(c.velocity_points, 48), c.vmax);
  const auto s = sigma_suite(vg);
  json report = header(c, "sigma-table");
  report["samples"] = s.samples;
  std::vector<std::tuple<std::string, double, double, bool>> checks{
      {"table_refinement", s.refinement, 1e-6, s.refinement < 1e-6},
      {"min_eigenvalue", s.min_eigenvalue, 0.0, s.min_eigenvalue > 0.0},
      {"parallel_exponent_gap", std::abs(s.par_exponent + 3.0), 0.3, std::abs(s.par_exponent + 3.0) <= 0.3},
      {"perpendicular_exponent_gap", std::abs(s.perp_exponent + 1.0), 0.3, std::abs(s.perp_exponent + 1.0) <= 0.3},
      {"weight_rate_relative", s.weight_rate_error, 1e-6, s.weight_rate_error < 1e-6}};
  for (int i = 0; i < 3; ++i) {
    const double q = s.three_term_ratio[i];
    checks.emplace_back("three_term_ratio_" + std::to_string(i), q, 20.0, q >= 1.0 / 20.0 && q <= 20.0);
  }
  const bool pass = verdicts(report, checks);
  write_report(c, "sigma_check.json", report);
  return pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"KdV-limit study driver"};
  app.require_subcommand(1);
  Options o;
  auto common = [&](CLI::App* sub) {
    sub->add_option("config,--config", o.config, "Study configuration (YAML)");
    sub->add_option("--out", o.out, "Output directory (overrides the config)");
    sub->add_option("--jobs", o.jobs, "Concurrent delta-sweep members")->check(CLI::PositiveNumber);
    sub->add_flag("--strict-window", o.strict_window, "Reject delta outside the epsilon window");
    return sub;
  };
  std::vector<std::pair<CLI::App*, int (*)(const Options&)>> commands{
      {common(app.add_subcommand("kdv-run", "Integrate the KdV hierarchy")), kdv_run},
      {common(app.add_subcommand("ep-run", "Integrate the Euler-Poisson system at the first delta")), ep_run},
      {common(app.add_subcommand("expansion-check", "Background identity and remainder bounds")), expansion_check},
      {common(app.add_subcommand("converge", "Delta sweep and convergence orders")), converge},
      {common(app.add_subcommand("kinetic-check", "Projection and Burnett identities")), kinetic_check},
      {common(app.add_subcommand("sigma-table", "Tabulate and check the collision frequency")), sigma_table}};
  commands[2].first->add_flag("--delta-sweep", o.delta_sweep, "Tabulate remainder norms across the delta list");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  try {
    for (const auto& [sub, fn] : commands)
      if (*sub) return fn(o);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const SolverError& e) {
    std::cerr << "solver error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
