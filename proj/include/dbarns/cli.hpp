/// @file cli.hpp
/// @brief The `dbarns` command line: simulate, verify, norms, pressure, linearize.
///
/// Exit codes: 0 success, 1 failed check or failed run, 2 usage error.
#pragma once

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdint>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "dbarns/dolbeault.hpp"
#include "dbarns/dynamics.hpp"
#include "dbarns/initial.hpp"
#include "dbarns/io.hpp"
#include "dbarns/norms.hpp"

namespace dbarns {

namespace checks {

struct Options {
  int n = 2, q = 1, N = 8;
  int trials = 20;
  std::uint64_t seed = 1;
  BilinearSpec spec;
};

inline nlohmann::json verdict(double value, double tol) {
  return {{"max_residual", value}, {"tolerance", tol}, {"pass", value < tol}};
}

/// max ‖∂̄∂̄u‖/‖u‖ over all q with q+2 <= n.
inline nlohmann::json complex_identity(const GridPtr& g, const Options& o) {
  std::mt19937_64 rng(o.seed);
  double worst = 0;
  for (int q = 0; q + 2 <= g->n(); ++q)
    for (int t = 0; t < o.trials; ++t) {
      const FormField u = random_form(g, q, rng, false);
      worst = std::max(worst, l2_norm(dbar(dbar(u))) / l2_norm(u));
    }
  return verdict(worst, 1e-12);
}

/// max |⟨∂̄u,v⟩ - ⟨u,∂̄*v⟩| / (‖u‖‖v‖) over all q < n.
inline nlohmann::json adjointness(const GridPtr& g, const Options& o) {
  std::mt19937_64 rng(o.seed + 1);
  double worst = 0;
  for (int q = 0; q < g->n(); ++q)
    for (int t = 0; t < o.trials; ++t) {
      const FormField u = random_form(g, q, rng, false);
      const FormField v = random_form(g, q + 1, rng, false);
      const double gap = std::abs(l2_inner(dbar(u), v) - l2_inner(u, dbar_star(v)));
      worst = std::max(worst, gap / (l2_norm(u) * l2_norm(v)));
    }
  return verdict(worst, 1e-12);
}

/// Projector algebra at the configured q.
inline nlohmann::json projector(const GridPtr& g, const Options& o) {
  std::mt19937_64 rng(o.seed + 2);
  double idem = 0, selfadj = 0, kills_exact = 0, constraint = 0;
  for (int t = 0; t < o.trials; ++t) {
    const FormField u = random_form(g, o.q, rng, false);
    const FormField v = random_form(g, o.q, rng, false);
    const FormField pu = leray_project(u);
    const double nu = l2_norm(u), nv = l2_norm(v);
    idem = std::max(idem, l2_norm(leray_project(pu) - pu) / nu);
    selfadj = std::max(selfadj, std::abs(l2_inner(pu, v) - l2_inner(u, leray_project(v))) / (nu * nv));
    constraint = std::max(constraint, constraint_residual(pu) / nu);
    const FormField gq = random_form(g, o.q - 1, rng, false);
    const FormField dg = dbar(gq);
    kills_exact = std::max(kills_exact, l2_norm(leray_project(dg)) / l2_norm(dg));
  }
  const double tol = 1e-10;
  return {{"idempotence", verdict(idem, tol)},
          {"self_adjoint", verdict(selfadj, tol)},
          {"kills_exact", verdict(kills_exact, tol)},
          {"constraint", verdict(constraint, tol)},
          {"pass", idem < tol && selfadj < tol && kills_exact < tol && constraint < tol}};
}

inline nlohmann::json key1(const GridPtr& g, const Options& o) {
  const Key1Report r = verify_key1(o.spec, g, o.q, o.trials, o.seed + 3, 1e-12);
  return {{"nonlinearity", o.spec.name()},
          {"trials", r.trials},
          {"max_pairing", r.max_pairing},
          {"max_relative", r.max_relative},
          {"tolerance", 1e-12},
          {"pass", r.pass}};
}

/// ‖𝒩(w+εv) - 𝒩(w) - ε𝐁(w,v)‖/ε² for ε ∈ {1e-1, 1e-2, 1e-3}; must not depend on ε.
inline nlohmann::json frechet(const GridPtr& g, const Options& o) {
  std::mt19937_64 rng(o.seed + 4);
  const double tol = 1e-8;
  double worst = 0;
  nlohmann::json samples = nlohmann::json::array();
  for (int t = 0; t < std::max(1, o.trials / 4); ++t) {
    FormField w = random_form(g, o.q, rng);
    FormField v = random_form(g, o.q, rng);
    w *= 1.0 / l2_norm(w);
    v *= 1.0 / l2_norm(v);
    std::vector<double> vals;
    for (double eps : {1e-1, 1e-2, 1e-3}) vals.push_back(frechet_residual(w, v, eps, o.spec) / (eps * eps));
    const auto [lo, hi] = std::minmax_element(vals.begin(), vals.end());
    const double spread = *hi > 0 ? (*hi - *lo) / *hi : 0.0;
    worst = std::max(worst, spread);
    samples.push_back(vals);
  }
  nlohmann::json out = verdict(worst, tol);
  out["quotients"] = samples;
  return out;
}

inline nlohmann::json run(const std::string& op, const Options& o) {
  const GridPtr g = make_grid(o.n, o.N);
  nlohmann::json report = {{"n", o.n}, {"q", o.q}, {"N", o.N}, {"trials", o.trials}, {"seed", o.seed}};
  bool pass = true;
  auto add = [&](const std::string& name, nlohmann::json r) {
    pass = pass && r.at("pass").get<bool>();
    report[name] = std::move(r);
  };
  if (op == "all" || op == "dbar") add("dbar", complex_identity(g, o));
  if (op == "all" || op == "adjoint") add("adjoint", adjointness(g, o));
  if (op == "all" || op == "leray") add("leray", projector(g, o));
  if (op == "all" || op == "key1") add("key1", key1(g, o));
  if (op == "all" || op == "frechet") add("frechet", frechet(g, o));
  report["pass"] = pass;
  return report;
}

}  // namespace checks

namespace detail {

inline nlohmann::json trajectory_summary(const Trajectory& t) {
  const auto& d = t.diagnostics.back();
  double worst = 0;
  for (const auto& di : t.diagnostics) worst = std::max(worst, di.dbar_star_residual);
  return {{"snapshots", t.velocity.size()},
          {"steps", t.diagnostics.size() - 1},
          {"final_time", d.t},
          {"final_energy", d.energy},
          {"max_constraint_residual", worst},
          {"lps_accum", d.lps_accum}};
}

}  // namespace detail

inline int cli_main(int argc, char** argv) {
  CLI::App app{"Navier-Stokes analogue on (0,q)-forms over the flat torus"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  auto* sim = app.add_subcommand("simulate", "run the nonlinear solver and save a trajectory directory");
  sim->add_option("--config", config_path, "JSON configuration")->required()->check(CLI::ExistingFile);
  sim->add_option("--out", out_dir, "output directory")->required();

  std::string op = "all", nonlin;
  checks::Options vo;
  auto* ver = app.add_subcommand("verify", "run the operator invariant suite");
  ver->add_option("--op", op, "check to run")
      ->check(CLI::IsMember({"all", "dbar", "adjoint", "leray", "key1", "frechet"}));
  ver->add_option("--n", vo.n, "complex dimension")->check(CLI::Range(2, 4));
  ver->add_option("--q", vo.q, "form degree")->check(CLI::Range(1, 4));
  ver->add_option("--N", vo.N, "points per axis");
  ver->add_option("--trials", vo.trials, "random samples per check")->check(CLI::PositiveNumber);
  ver->add_option("--seed", vo.seed, "RNG seed");
  ver->add_option("--nonlinearity", nonlin, "stokes, lamb or a custom tensor JSON file");

  std::string traj_dir;
  int k = 0, s = 0;
  double lps_r = 0;
  auto* nrm = app.add_subcommand("norms", "space-time norms of a saved trajectory");
  nrm->add_option("--traj", traj_dir, "trajectory directory")->required()->check(CLI::ExistingDirectory);
  nrm->add_option("--k", k, "spatial order")->check(CLI::NonNegativeNumber);
  nrm->add_option("--s", s, "time order")->check(CLI::NonNegativeNumber);
  nrm->add_option("--lps-r", lps_r, "spatial exponent of the LPS integral (default 2n+1)");

  std::string forces, pressure_out;
  auto* pre = app.add_subcommand("pressure", "recover p with dbar p = F from an exact force field");
  pre->add_option("--forces", forces, "field directory holding F")->required()->check(CLI::ExistingDirectory);
  pre->add_option("--out", pressure_out, "output field directory")->required();

  std::string base_traj, lin_out;
  auto* lin = app.add_subcommand("linearize", "solve the linearized problem around a saved trajectory");
  lin->add_option("--base-traj", base_traj, "trajectory directory")->required()->check(CLI::ExistingDirectory);
  lin->add_option("--config", config_path, "JSON configuration")->required()->check(CLI::ExistingFile);
  lin->add_option("--out", lin_out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*sim) {
      const RunConfig rc = load_config(config_path);
      const GridPtr g = make_grid(rc.sim.n, rc.sim.N);
      const FormField u0 = gen_initial(rc.initial, g, rc.sim.q);
      const Trajectory t = simulate(rc.sim, u0);
      save_trajectory(out_dir, t, config_to_json(rc));
      std::cout << detail::trajectory_summary(t).dump(2) << "\n";
      return 0;
    }
    if (*ver) {
      if (vo.q >= vo.n) throw ParameterError("verify: need q < n");
      if (vo.N < 4 || (vo.N & (vo.N - 1)) != 0) throw ParameterError("verify: N must be a power of two >= 4");
      if (nonlin.empty()) nonlin = vo.q == 1 ? "lamb" : "stokes";
      if (nonlin == "stokes" || nonlin == "lamb")
        vo.spec = bilinear_from_json(nonlin, vo.n, vo.q);
      else
        vo.spec = bilinear_from_json(detail::read_json(nonlin), vo.n, vo.q);
      const auto report = checks::run(op, vo);
      std::cout << report.dump(2) << "\n";
      return report.at("pass").get<bool>() ? 0 : 1;
    }
    if (*nrm) {
      const Trajectory t = load_trajectory(traj_dir);
      const double r = lps_r > 0 ? lps_r : 2.0 * t.grid->n() + 1.0;
      ForcingFn forcing;
      const auto cfg = trajectory_config(traj_dir);
      if (cfg.contains("forcing"))
        forcing = forcing_function(forcing_from_json(cfg.at("forcing"), traj_dir), t.grid, t.q);
      NormReport rep = energy_report(t, forcing);
      rep.values["bochner_vel"] = bochner_vel(t, k, s);
      rep.values["bochner_pre"] = bochner_pre(t, k, s);
      rep.values["lps"] = lps_integral(t, r);
      rep.params["k"] = k;
      rep.params["s"] = s;
      rep.params["r"] = r;
      rep.params["lps_time_exponent"] = lps_time_exponent(r, t.grid->n());
      rep.dt = t.snapshot_dt();
      std::cout << rep.to_json().dump(2) << "\n";
      return 0;
    }
    if (*pre) {
      const FormField F = load_field(forces);
      const FormField p = pressure_recover(F);
      save_field(pressure_out, p, field_metadata(forces));
      const double residual = l2_norm(dbar(p) - F) / std::max(l2_norm(F), 1e-300);
      std::cout << nlohmann::json{{"q", p.q()}, {"relative_residual", residual}}.dump(2) << "\n";
      return 0;
    }
    if (*lin) {
      const Trajectory w = load_trajectory(base_traj);
      const RunConfig rc = load_config(config_path);
      const FormField u0 = gen_initial(rc.initial, w.grid, rc.sim.q);
      const Trajectory t = solve_linearized(w, rc.sim, u0);
      if (!lin_out.empty()) save_trajectory(lin_out, t, config_to_json(rc));
      std::cout << detail::trajectory_summary(t).dump(2) << "\n";
      return 0;
    }
  } catch (const ConstraintError& e) {
    std::cerr << "error: " << e.what() << " (relative residual " << e.residual << ")\n";
    return 1;
  } catch (const ParameterError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace dbarns
