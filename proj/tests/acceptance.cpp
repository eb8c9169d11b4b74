// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "dbarns/dbarns.hpp"

using namespace dbarns;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

int failures = 0;

void criterion(int id, const char* name, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o{false, ""};
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!o.pass) ++failures;
  std::printf("%s  %2d  %-34s %s  [%.2fs]\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str(), secs);
  std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt(const char* f, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

FormField random_field(const GridPtr& g, int q, std::mt19937_64& rng) { return random_form(g, q, rng, false); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

SimConfig config(int N, double mu, double T, double dt, BilinearSpec spec) {
  SimConfig c;
  c.n = 2;
  c.q = 1;
  c.N = N;
  c.mu = mu;
  c.T = T;
  c.dt = dt;
  c.nonlinearity = spec;
  return c;
}

FormField solenoidal_data(const GridPtr& g, std::uint64_t seed, double rms) {
  InitialSpec s;
  s.seed = seed;
  s.rms = rms;
  return gen_initial(s, g, 1);
}

/// Per-mode relative deviation max_ζ |v̂(ζ) - ŵ(ζ)| / |ŵ(ζ)| over modes with ŵ(ζ) ≠ 0.
double modewise_error(const FormField& v, const FormField& w) {
  const FormField a = v.to_fourier(), b = w.to_fourier();
  const auto& g = *v.grid();
  double worst = 0;
  for (std::size_t m = 0; m < g.size(); ++m) {
    double diff = 0, ref = 0;
    for (std::size_t c = 0; c < a.count(); ++c) {
      diff += std::norm(a[c][m] - b[c][m]);
      ref += std::norm(b[c][m]);
    }
    if (ref > 0) worst = std::max(worst, std::sqrt(diff / ref));
    else if (diff > 0) worst = std::max(worst, 1.0);
  }
  return worst;
}

FormField heat_solution(const FormField& u0, double mu, double t) {
  FormField out = u0.to_fourier();
  const auto& g = *u0.grid();
  for (std::size_t c = 0; c < out.count(); ++c)
    for (std::size_t m = 0; m < g.size(); ++m) out[c][m] *= std::exp(-mu * g.ksq(m) * t / 4.0);
  return out;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

bool identical_trees(const fs::path& a, const fs::path& b, std::size_t& files) {
  std::vector<fs::path> fa, fb;
  for (const auto& e : fs::recursive_directory_iterator(a))
    if (e.is_regular_file()) fa.push_back(fs::relative(e.path(), a));
  for (const auto& e : fs::recursive_directory_iterator(b))
    if (e.is_regular_file()) fb.push_back(fs::relative(e.path(), b));
  std::sort(fa.begin(), fa.end());
  std::sort(fb.begin(), fb.end());
  files = fa.size();
  if (fa != fb) return false;
  for (const auto& f : fa)
    if (slurp(a / f) != slurp(b / f)) return false;
  return true;
}

struct LambRun {
  Trajectory traj;
  double seconds;
};

}  // namespace

int main() {
  std::printf("acceptance suite (threads=%u)\n", thread_count());

  const auto g2 = make_grid(2, 8);
  const auto g3 = make_grid(3, 4);
  const std::vector<GridPtr> grids{g2, g3};

  criterion(1, "complex identity dbar∘dbar = 0", [&] {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(101);
    double worst = 0;
    for (const auto& g : grids)
      for (int q = 0; q + 2 <= g->n(); ++q)
        for (int t = 0; t < 50; ++t) {
          const FormField u = random_field(g, q, rng);
          worst = std::max(worst, l2_norm(dbar(dbar(u))) / l2_norm(u));
        }
    const double secs = seconds_since(t0);
    return Outcome{worst < 1e-12 && secs < 10.0, fmt("max rel %.2e (<1e-12), runtime %.2fs (<10s)", worst, secs)};
  });

  criterion(2, "adjointness of dbar_star", [&] {
    std::mt19937_64 rng(102);
    double worst = 0;
    for (const auto& g : grids)
      for (int q = 0; q < g->n(); ++q)
        for (int t = 0; t < 50; ++t) {
          const FormField u = random_field(g, q, rng), v = random_field(g, q + 1, rng);
          const double gap = std::abs(l2_inner(dbar(u), v) - l2_inner(u, dbar_star(v)));
          worst = std::max(worst, gap / (l2_norm(u) * l2_norm(v)));
        }
    return Outcome{worst < 1e-12, fmt("max rel %.2e (<1e-12)", worst)};
  });

  criterion(3, "Laplacian is the |ζ|²/4 multiplier", [&] {
    std::mt19937_64 rng(103);
    double worst = 0;
    for (const auto& g : grids)
      for (int q = 0; q <= g->n(); ++q)
        for (int t = 0; t < 10; ++t) {
          const FormField u = random_field(g, q, rng);
          FormField expect = u;
          for (std::size_t c = 0; c < u.count(); ++c)
            for (std::size_t m = 0; m < g->size(); ++m) expect[c][m] *= g->ksq(m) / 4.0;
          worst = std::max(worst, l2_norm(laplacian_q(u) - expect) / l2_norm(u));
        }
    return Outcome{worst < 1e-12, fmt("max rel %.2e (<1e-12)", worst)};
  });

  criterion(4, "projector algebra", [&] {
    std::mt19937_64 rng(104);
    double idem = 0, selfadj = 0, exact = 0, constraint = 0;
    for (const auto& g : grids)
      for (int q = 1; q <= g->n(); ++q)
        for (int t = 0; t < 20; ++t) {
          const FormField u = random_field(g, q, rng), v = random_field(g, q, rng);
          const FormField pu = leray_project(u);
          const double nu = l2_norm(u), nv = l2_norm(v);
          idem = std::max(idem, l2_norm(leray_project(pu) - pu) / nu);
          selfadj = std::max(selfadj, std::abs(l2_inner(pu, v) - l2_inner(u, leray_project(v))) / (nu * nv));
          constraint = std::max(constraint, constraint_residual(pu) / nu);
          const FormField dg = dbar(random_field(g, q - 1, rng));
          exact = std::max(exact, l2_norm(leray_project(dg)) / l2_norm(dg));
        }
    const double worst = std::max({idem, selfadj, exact, constraint});
    char buf[200];
    std::snprintf(buf, sizeof buf, "P²-P %.1e, P-P* %.1e, P∂̄g %.1e, ∂̄*P %.1e (<1e-10)", idem, selfadj, exact,
                  constraint);
    return Outcome{worst < 1e-10, buf};
  });

  criterion(5, "pressure recovery", [&] {
    std::mt19937_64 rng(105);
    double recon = 0, gauge = 0;
    for (const auto& g : grids)
      for (int q = 1; q <= g->n(); ++q)
        for (int t = 0; t < 20; ++t) {
          const FormField F = dbar(random_field(g, q - 1, rng));
          const FormField p = pressure_recover(F);
          const double nF = l2_norm(F);
          recon = std::max(recon, l2_norm(dbar(p) - F) / nF);
          if (q >= 2) gauge = std::max(gauge, constraint_residual(p) / nF);
        }
    return Outcome{recon < 1e-10 && gauge < 1e-12,
                   fmt("‖∂̄p-F‖ rel %.2e (<1e-10), (∂̄^{q-2})*p rel %.2e (<1e-12)", recon, gauge)};
  });

  criterion(6, "Lamb orthogonality (key1)", [&] {
    const Key1Report r = verify_key1(BilinearSpec::lamb(), g2, 1, 100, 106, 1e-12);
    return Outcome{r.pass, fmt("max pairing/scale %.2e (<1e-12) over 100 trials, abs %.2e", r.max_relative,
                               r.max_pairing)};
  });

  // Criterion 7's run is reused by 12 and 14.
  const auto g16 = make_grid(2, 16);
  const FormField stokes_u0 = solenoidal_data(g16, 107, 1.0);
  const SimConfig stokes_cfg = config(16, 1.0, 1.0, 0.05, BilinearSpec::stokes());
  Trajectory stokes_traj;
  std::vector<Trajectory> runs_for_lps;

  criterion(7, "Stokes run equals heat solution", [&] {
    const auto t0 = std::chrono::steady_clock::now();
    stokes_traj = simulate(stokes_cfg, stokes_u0);
    const double secs = seconds_since(t0);
    const double err = modewise_error(stokes_traj.velocity.back(), heat_solution(stokes_u0, 1.0, 1.0));
    runs_for_lps.push_back(stokes_traj);
    return Outcome{err < 1e-8 && secs < 60.0 && std::abs(stokes_traj.times.back() - 1.0) < 1e-12,
                   fmt("max per-mode rel err %.2e (<1e-8) at T=1, runtime %.2fs (<60s)", err, secs)};
  });

  // Lamb runs at three step sizes, shared by 8, 9, 10, 14.
  const auto lamb_u0 = solenoidal_data(g16, 108, 1.0);
  std::vector<Trajectory> lamb;
  double lamb_worst_constraint = 0;
  auto lamb_runs = [&]() -> const std::vector<Trajectory>& {
    if (lamb.empty())
      for (double dt : {0.02, 0.01, 0.005}) {
        SimConfig c = config(16, 0.5, 0.5, dt, BilinearSpec::lamb());
        c.output_stride = static_cast<int>(c.steps());
        c.cfl_shrink = false;
        lamb.push_back(simulate(c, lamb_u0));
        for (const auto& d : lamb.back().diagnostics) lamb_worst_constraint = std::max(lamb_worst_constraint, d.dbar_star_residual);
      }
    return lamb;
  };

  criterion(8, "second-order convergence (Lamb)", [&] {
    const auto& r = lamb_runs();
    const FormField& a = r[0].velocity.back();
    const FormField& b = r[1].velocity.back();
    const FormField& c = r[2].velocity.back();
    const double e1 = l2_norm(a - b), e2 = l2_norm(b - c);
    const double ratio = e1 / e2;
    return Outcome{ratio >= 3.2 && ratio <= 4.8,
                   fmt("Richardson ratio %.3f in [3.2, 4.8], ‖u_dt/2-u_dt/4‖/‖u‖ %.2e", ratio, e2 / l2_norm(c))};
  });

  criterion(9, "energy law (Lamb, f=0)", [&] {
    const auto& r = lamb_runs();
    double worst_increase = -1e300;
    for (const auto& t : r)
      for (std::size_t i = 1; i < t.diagnostics.size(); ++i)
        worst_increase = std::max(worst_increase, t.diagnostics[i].energy - t.diagnostics[i - 1].energy);
    const double r1 = energy_report(r[0]).values.at("energy_residual");
    const double r2 = energy_report(r[1]).values.at("energy_residual");
    const double r3 = energy_report(r[2]).values.at("energy_residual");
    const double q1 = r1 / r2, q2 = r2 / r3;
    const bool ok = worst_increase <= 0 && q1 >= 3.2 && q1 <= 4.8 && q2 >= 3.2 && q2 <= 4.8;
    char buf[200];
    std::snprintf(buf, sizeof buf, "max ΔE %.2e (<=0), residual ratios %.3f, %.3f in [3.2, 4.8]", worst_increase, q1,
                  q2);
    return Outcome{ok, buf};
  });

  criterion(10, "constraint preserved every step", [&] {
    lamb_runs();
    double worst = lamb_worst_constraint;
    for (const auto& d : stokes_traj.diagnostics) worst = std::max(worst, d.dbar_star_residual);
    return Outcome{worst < 1e-10, fmt("max ‖∂̄*u‖/‖u‖ %.2e (<1e-10)", worst)};
  });

  criterion(11, "Fréchet quotient constant in ε", [&] {
    std::mt19937_64 rng(111);
    double worst = 0;
    for (int t = 0; t < 5; ++t) {
      FormField w = random_form(g2, 1, rng), v = random_form(g2, 1, rng);
      w *= 1.0 / l2_norm(w);
      v *= 1.0 / l2_norm(v);
      std::vector<double> vals;
      for (double eps : {1e-1, 1e-2, 1e-3})
        vals.push_back(frechet_residual(w, v, eps, BilinearSpec::lamb()) / (eps * eps));
      const auto [lo, hi] = std::minmax_element(vals.begin(), vals.end());
      worst = std::max(worst, (*hi - *lo) / *hi);
    }
    return Outcome{worst < 1e-8, fmt("max relative spread %.2e (<1e-8) over ε ∈ {1e-1,1e-2,1e-3}", worst)};
  });

  criterion(12, "linearized solver", [&] {
    Trajectory zero = stokes_traj;
    for (auto& w : zero.velocity) w = FormField(g16, 1, Representation::fourier);
    SimConfig c = stokes_cfg;
    c.nonlinearity = BilinearSpec::lamb();
    const Trajectory lin = solve_linearized(zero, c, stokes_u0);
    double worst = 0;
    for (std::size_t i = 0; i < lin.velocity.size(); ++i)
      worst = std::max(worst, l2_norm(lin.velocity[i] - stokes_traj.velocity[i]) / l2_norm(stokes_traj.velocity[i]));
    const Trajectory nil = solve_linearized(stokes_traj, c, FormField(g16, 1, Representation::fourier));
    double nil_max = 0;
    for (const auto& v : nil.velocity) nil_max = std::max(nil_max, l2_norm(v));
    for (const auto& p : nil.pressure) nil_max = std::max(nil_max, l2_norm(p));
    return Outcome{worst < 1e-10 && nil_max == 0.0,
                   fmt("w=0 vs Stokes rel %.2e (<1e-10), zero data max norm %.1e (==0)", worst, nil_max)};
  });

  criterion(13, "dense oracle equivalence (4⁴)", [&] {
    double worst = 0;
    std::string where;
    auto track = [&](double v, const std::string& what) {
      if (v >= worst) {
        worst = v;
        where = what;
      }
    };
    for (auto tag : {OperatorTag::dbar, OperatorTag::dbar_star, OperatorTag::laplacian, OperatorTag::leray})
      for (int q : {0, 1}) {
        if (tag == OperatorTag::leray && q == 0) continue;
        const auto a = dense_build(tag, 2, q, 4, Route::spectral);
        const auto b = dense_build(tag, 2, q, 4, Route::independent);
        track((a.matrix - b.matrix).norm(), std::string(to_string(tag)) + " q=" + std::to_string(q));
      }
    const auto d0 = dense_build(OperatorTag::dbar, 2, 0, 4), d1 = dense_build(OperatorTag::dbar, 2, 1, 4);
    const auto s0 = dense_build(OperatorTag::dbar_star, 2, 0, 4), s1 = dense_build(OperatorTag::dbar_star, 2, 1, 4);
    const auto L = dense_build(OperatorTag::laplacian, 2, 1, 4);
    const auto P = dense_build(OperatorTag::leray, 2, 1, 4);
    track((d1.matrix * d0.matrix).norm(), "dbar∘dbar");
    track((s0.matrix - d0.matrix.adjoint()).norm(), "adjoint q=0");
    track((s1.matrix - d1.matrix.adjoint()).norm(), "adjoint q=1");
    track((L.matrix - s1.matrix * d1.matrix - d0.matrix * s0.matrix).norm(), "laplacian composition");
    track((P.matrix * P.matrix - P.matrix).norm(), "P²-P");
    track((P.matrix - P.matrix.adjoint()).norm(), "P-P^H");
    return Outcome{worst < 1e-10, fmt("max Frobenius residual %.2e (<1e-10)", worst) + " at " + where};
  });

  criterion(14, "LPS monitor", [&] {
    for (const auto& t : lamb_runs()) runs_for_lps.push_back(t);
    double worst_finite = 0;
    bool finite = true;
    for (const auto& t : runs_for_lps) {
      const double v = lps_integral(t, 5.0);
      finite = finite && std::isfinite(v) && std::isfinite(t.diagnostics.back().lps_accum);
      worst_finite = std::max(worst_finite, v);
    }
    // unit mode on dz̄₁ with |ζ|² = 1: ‖u(t)‖_{L⁵}^{10} = vol² e^{-10λt}, λ = μ/4.
    InitialSpec s;
    s.kind = InitialSpec::Kind::single_mode;
    s.zeta = {0, 1, 0, 0};
    s.component = {1};
    const double mu = 0.2, T = 1.0;
    const Trajectory decay = simulate(config(8, mu, T, 4e-3, BilinearSpec::stokes()), gen_initial(s, g2, 1));
    const double lam = mu / 4.0, vol = g2->volume();
    const double exact = vol * vol * (1 - std::exp(-10 * lam * T)) / (10 * lam);
    const double rel = std::abs(lps_integral(decay, 5.0) - exact) / exact;
    const double rel_accum = std::abs(decay.diagnostics.back().lps_accum - exact) / exact;
    return Outcome{finite && rel < 1e-6 && rel_accum < 1e-6,
                   fmt("finite on all runs (r=5), analytic rel err %.2e (<1e-6)", std::max(rel, rel_accum))};
  });

  criterion(15, "bit-identical reruns", [&] {
    const nlohmann::json j = {{"n", 2},     {"q", 1},         {"N", 8},          {"mu", 0.5},
                              {"T", 0.1},   {"dt", 0.01},     {"output_stride", 2}, {"nonlinearity", "lamb"},
                              {"seed", 115}, {"initial", {{"kind", "random_solenoidal"}, {"rms", 1.0}}}};
    const RunConfig rc = config_from_json(j);
    const fs::path root = fs::temp_directory_path() / "dbarns_acceptance_repro";
    fs::remove_all(root);
    for (const char* name : {"a", "b"}) {
      const auto g = make_grid(2, 8);
      save_trajectory(root / name, simulate(rc.sim, gen_initial(rc.initial, g, 1)), config_to_json(rc));
    }
    std::size_t files = 0;
    const bool same = identical_trees(root / "a", root / "b", files);
    fs::remove_all(root);
    return Outcome{same && files > 0, "identical trees, " + std::to_string(files) + " files compared"};
  });

  std::printf("%s: %d of 15 criteria failed\n", failures == 0 ? "ALL PASS" : "FAILURES", failures);
  return failures == 0 ? 0 : 1;
}
