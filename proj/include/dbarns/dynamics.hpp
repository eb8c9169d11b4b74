/// @file dynamics.hpp
/// @brief Constrained evolution ∂_t u + μΔ^q u + 𝒩u + ∂̄p = f, (∂̄^{q-1})*u = 0,
/// its linearization around a given trajectory, and the algebraic checks on
/// the nonlinearity.
///
/// The solver advances the projected system ∂_t u = -μΔu + P(f - 𝒩u) on
/// Fourier coefficients. Diffusion is integrated exactly by the multiplier
/// exp(-μ|ζ|²dt/4); the remaining drift by Heun's method (ETD-Heun):
///
///   k₁ = G(u_m, t_m),  ũ = E(u_m + dt k₁),  k₂ = G(ũ, t_m + dt),
///   u_{m+1} = P(E u_m + dt/2 (E k₁ + k₂)).
#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "dbarns/dolbeault.hpp"
#include "dbarns/field_norms.hpp"
#include "dbarns/forms.hpp"
#include "dbarns/initial.hpp"
#include "dbarns/spectral.hpp"

namespace dbarns {

/// Right-hand side f of the evolution, evaluated to a Fourier-space (0,q)-form.
struct ForcingSpec {
  enum class Kind { zero, single_mode, file };
  Kind kind = Kind::zero;
  // single_mode: amplitude · e^{iωt} · e^{iζ·x} dz̄_J
  std::vector<int> zeta;
  std::vector<int> component;
  cplx amplitude = 0.0;
  double omega = 0.0;
  // file: a time-independent field read from disk
  std::string path;
  std::shared_ptr<const FormField> field;

  FormField evaluate(const GridPtr& grid, int q, double t) const {
    FormField f(grid, q, Representation::fourier);
    switch (kind) {
      case Kind::zero: break;
      case Kind::single_mode:
        f[MultiIndex(component, grid->n())][grid->flat_index(zeta)] = amplitude * std::exp(cplx(0.0, omega * t));
        break;
      case Kind::file:
        if (!field) throw ParameterError("forcing file '" + path + "' not loaded");
        if (field->q() != q) throw ParameterError("forcing file has the wrong bidegree");
        f = field->rebind(grid).to_fourier();
        break;
    }
    return f;
  }

  void validate(int n, int q, int N) const {
    if (kind != Kind::single_mode) return;
    if (static_cast<int>(zeta.size()) != 2 * n) throw ParameterError("forcing: zeta must have 2n entries");
    for (int z : zeta)
      if (z <= -N / 2 || z > N / 2) throw ParameterError("forcing: zeta outside the lattice");
    if (MultiIndex(component, n).degree() != q) throw ParameterError("forcing: component J must have length q");
  }
};

struct SimConfig {
  int n = 2;
  int q = 1;
  int N = 16;
  double mu = 1.0;
  double T = 1.0;
  double dt = 0.01;
  BilinearSpec nonlinearity;
  ForcingSpec forcing;
  int output_stride = 1;
  double cfl_safety = 0.5;
  // Split a step into equal substeps when it violates the CFL bound; otherwise fail.
  bool cfl_shrink = true;
  std::uint64_t seed = 0;
  // Spatial exponent of the LPS accumulator; 0 selects 2n + 1.
  double lps_r = 0.0;
  // Relative bound on ‖(∂̄^{q-1})*u‖/‖u‖ accepted for initial data.
  double constraint_tol = 1e-8;

  std::size_t steps() const { return static_cast<std::size_t>(std::llround(T / dt)); }
  double lps_exponent() const { return lps_r > 0 ? lps_r : 2.0 * n + 1.0; }

  void validate() const {
    if (n < 2) throw ParameterError("config: n must be >= 2");
    if (q < 1 || q > n - 1) throw ParameterError("config: q must lie in [1, n-1]");
    if (N < 4 || (N & (N - 1)) != 0) throw ParameterError("config: N must be a power of two >= 4");
    if (!(mu > 0)) throw ParameterError("config: mu must be positive");
    if (!(T > 0) || !(dt > 0)) throw ParameterError("config: T and dt must be positive");
    const double ratio = T / dt;
    if (ratio < 1.0 - 1e-9 || ratio > 1e7) throw ParameterError("config: T/dt must lie in [1, 1e7]");
    if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio)
      throw ParameterError("config: T must be an integer multiple of dt");
    if (output_stride < 1) throw ParameterError("config: output_stride must be >= 1");
    if (!(cfl_safety > 0 && cfl_safety <= 1)) throw ParameterError("config: cfl_safety must lie in (0, 1]");
    if (lps_r != 0 && !(lps_r > 2.0 * n)) throw ParameterError("config: lps_r must exceed 2n");
    nonlinearity.check_admissible(n, q);
    forcing.validate(n, q, N);
  }
};

/// Per-step scalar diagnostics. The first six fields form the CSV columns.
struct Diagnostics {
  double t = 0;
  double energy = 0;              // ‖u‖²
  double dbar_norm_sq = 0;        // ‖∂̄u‖²
  double dbar_star_residual = 0;  // ‖(∂̄^{q-1})*u‖ / ‖u‖
  double max_abs_u = 0;
  double lps_accum = 0;           // ∫₀ᵗ ‖u‖_{L^r}^s, trapezoid
  double dbar_star_norm_sq = 0;   // ‖(∂̄^{q-1})*u‖²
  double forcing_power = 0;       // Re (f, u)
};

struct Trajectory {
  GridPtr grid;
  int q = 1;
  double mu = 1.0;
  double dt = 0.0;  // integrator step
  int stride = 1;   // steps between snapshots
  double lps_r = 0.0;
  std::vector<double> times;
  std::vector<FormField> velocity;  // Fourier
  std::vector<FormField> pressure;  // Fourier, bidegree q-1
  std::vector<Diagnostics> diagnostics;

  double snapshot_dt() const { return dt * stride; }

  /// Velocity at time t, linear in t between stored snapshots.
  FormField velocity_at(double t) const {
    if (velocity.empty()) throw ParameterError("trajectory has no snapshots");
    if (velocity.size() == 1 || t <= times.front()) return velocity.front();
    if (t >= times.back()) return velocity.back();
    std::size_t i = static_cast<std::size_t>((t - times.front()) / snapshot_dt());
    i = std::min(i, velocity.size() - 2);
    const double h = times[i + 1] - times[i];
    const double s = (t - times[i]) / h;
    if (s <= 1e-12) return velocity[i];
    if (s >= 1 - 1e-12) return velocity[i + 1];
    FormField out = velocity[i];
    out *= (1.0 - s);
    out.axpy(s, velocity[i + 1]);
    return out;
  }
};

// ----------------------------------------------------------------------------
// Nonlinear terms
// ----------------------------------------------------------------------------

namespace detail {
inline FormField dealiased_fourier(const FormField& physical) {
  FormField f = physical.to_fourier();
  for (std::size_t c = 0; c < f.count(); ++c) f[c] = dealias(f.scalar(c)).values;
  return f;
}
}  // namespace detail

/// 𝒩u = M₁(∂̄u, u) + ∂̄M₂(u, u). Products in physical space, dealiased after.
inline FormField nonlinearity(const FormField& u, const BilinearSpec& spec) {
  spec.check_admissible(u.n(), u.q());
  if (u.q() >= u.n()) throw ParameterError("nonlinearity: needs q < n");
  FormField out(u.grid(), u.q(), Representation::fourier);
  if (spec.kind == BilinearSpec::Kind::stokes) return out.as(u.rep());
  const FormField uf = u.to_fourier();
  out = detail::dealiased_fourier(apply_m1(spec, dbar(uf), uf));
  out += dbar(detail::dealiased_fourier(apply_m2(spec, uf, uf)));
  return out.as(u.rep());
}

/// 𝐁(w,u) = M₁(∂̄w,u) + ∂̄M₂(w,u) + M₁(∂̄u,w) + ∂̄M₂(u,w), so that
/// 𝒩(w+v) = 𝒩w + 𝐁(w,v) + 𝒩v.
inline FormField linearized_b(const FormField& w, const FormField& u, const BilinearSpec& spec) {
  if (w.grid() != u.grid() || w.q() != u.q()) throw ParameterError("linearized_b: mismatched forms");
  spec.check_admissible(u.n(), u.q());
  FormField out(u.grid(), u.q(), Representation::fourier);
  if (spec.kind == BilinearSpec::Kind::stokes) return out.as(u.rep());
  const FormField wf = w.to_fourier(), uf = u.to_fourier();
  FormField m1 = apply_m1(spec, dbar(wf), uf);
  m1 += apply_m1(spec, dbar(uf), wf);
  FormField m2 = apply_m2(spec, wf, uf);
  m2 += apply_m2(spec, uf, wf);
  out = detail::dealiased_fourier(m1);
  out += dbar(detail::dealiased_fourier(m2));
  return out.as(u.rep());
}

/// ‖𝒩(w+εv) - 𝒩w - ε𝐁(w,v)‖; equals ε²‖𝒩v‖ since 𝒩 is quadratic.
inline double frechet_residual(const FormField& w, const FormField& v, double eps, const BilinearSpec& spec) {
  if (eps < 0) throw ParameterError("frechet_residual: eps must be >= 0");
  FormField shifted = w.to_fourier();
  shifted.axpy(eps, v.to_fourier());
  FormField r = nonlinearity(shifted, spec);
  r -= nonlinearity(w.to_fourier(), spec);
  r.axpy(-eps, linearized_b(w.to_fourier(), v.to_fourier(), spec));
  return l2_norm(r);
}

/// ‖𝐁(w,u)‖_{L²} / (‖w‖_{H²} ‖u‖_{H²}).
inline double bilinear_bound_ratio(const FormField& w, const FormField& u, const BilinearSpec& spec) {
  const double denom = sobolev_hs(w, 2) * sobolev_hs(u, 2);
  if (denom == 0) return 0.0;
  return l2_norm(linearized_b(w, u, spec)) / denom;
}

struct Key1Report {
  int trials = 0;
  double max_pairing = 0;   // max |(M₁(∂̄w, v), v)|
  double max_relative = 0;  // pairing / (max|∂̄w| ‖v‖²)
  bool pass = false;
};

/// Checks (M₁(∂̄w, v), v) = 0 for random band-limited w and projected v.
/// The relative pairing is normalised by the Hölder bound max|∂̄w|·‖v‖².
inline Key1Report verify_key1(const BilinearSpec& spec, const GridPtr& grid, int q, int trials, std::uint64_t seed,
                              double tolerance = 1e-10) {
  if (trials < 1) throw ParameterError("verify_key1: trials must be >= 1");
  spec.check_admissible(grid->n(), q);
  std::mt19937_64 rng(seed);
  Key1Report rep;
  rep.trials = trials;
  for (int t = 0; t < trials; ++t) {
    const FormField w = random_form(grid, q, rng);
    const FormField v = leray_project(random_form(grid, q, rng)).to_physical();
    const FormField omega = dbar(w);
    const double pairing = std::abs(l2_inner(apply_m1(spec, omega, v), v));
    const double vn = l2_norm(v);
    const double scale = max_abs(omega) * vn * vn;
    rep.max_pairing = std::max(rep.max_pairing, pairing);
    if (scale > 0) rep.max_relative = std::max(rep.max_relative, pairing / scale);
  }
  rep.pass = rep.max_relative < tolerance;
  return rep;
}

// ----------------------------------------------------------------------------
// Time stepping
// ----------------------------------------------------------------------------

/// Forcing as a function of time, returning a Fourier-space (0,q)-form.
using ForcingFn = std::function<FormField(double)>;
/// Drift term D(u, t) (𝒩u or 𝐁(w(t), u)), Fourier space.
using DriftFn = std::function<FormField(const FormField&, double)>;

inline ForcingFn forcing_function(const ForcingSpec& spec, const GridPtr& grid, int q) {
  if (spec.kind == ForcingSpec::Kind::zero)
    return [grid, q](double) { return FormField(grid, q, Representation::fourier); };
  if (spec.kind == ForcingSpec::Kind::file) {
    auto f = std::make_shared<const FormField>(spec.evaluate(grid, q, 0.0));
    return [f](double) { return *f; };
  }
  return [spec, grid, q](double t) { return spec.evaluate(grid, q, t); };
}

/// P(f - 𝒩u). The diffusion is left to the integrator.
inline FormField projected_rhs(const FormField& u, const FormField& f, const BilinearSpec& spec,
                               double constraint_tol = 1e-8) {
  const double norm = l2_norm(u);
  if (norm > 0) {
    const double rel = constraint_residual(u) / norm;
    if (rel > constraint_tol) throw ConstraintError("projected_rhs: velocity violates the constraint", rel);
  }
  FormField r = f.as(u.rep());
  r -= nonlinearity(u, spec);
  return leray_project(r);
}

namespace detail {

class EtdHeun {
 public:
  EtdHeun(GridPtr grid, double mu, DriftFn drift, ForcingFn forcing)
      : grid_(std::move(grid)), mu_(mu), drift_(std::move(drift)), forcing_(std::move(forcing)) {}

  FormField rhs(const FormField& u, double t) const {
    FormField r = forcing_(t);
    r -= drift_(u, t);
    return leray_project(r);
  }

  FormField step(const FormField& u, double t, double dt) {
    const auto& E = multiplier(dt);
    const FormField k1 = rhs(u, t);
    FormField pred = u;
    pred.axpy(dt, k1);
    scale(pred, E);
    FormField k2 = rhs(pred, t + dt);
    FormField next = u;
    scale(next, E);
    FormField ek1 = k1;
    scale(ek1, E);
    next.axpy(0.5 * dt, ek1);
    next.axpy(0.5 * dt, k2);
    return leray_project(next);
  }

  FormField pressure_force(const FormField& u, double t) const {
    FormField F = forcing_(t);
    F -= drift_(u, t);
    return hodge_split(F).exact;
  }

  const ForcingFn& forcing() const { return forcing_; }

 private:
  const std::vector<double>& multiplier(double dt) {
    if (dt != cached_dt_) {
      cached_dt_ = dt;
      E_.resize(grid_->size());
      for (std::size_t m = 0; m < grid_->size(); ++m) E_[m] = heat_multiplier(mu_, dt, grid_->ksq(m));
    }
    return E_;
  }

  static void scale(FormField& u, const std::vector<double>& E) {
    for (std::size_t c = 0; c < u.count(); ++c)
      for (std::size_t m = 0; m < E.size(); ++m) u[c][m] *= E[m];
  }

  GridPtr grid_;
  double mu_;
  DriftFn drift_;
  ForcingFn forcing_;
  double cached_dt_ = -1;
  std::vector<double> E_;
};

inline Diagnostics measure(const FormField& u, const FormField& f, double t) {
  Diagnostics d;
  d.t = t;
  d.energy = l2_inner(u, u).real();
  d.dbar_norm_sq = u.q() < u.n() ? l2_inner(dbar(u), dbar(u)).real() : 0.0;
  d.dbar_star_norm_sq = u.q() > 0 ? l2_inner(dbar_star(u), dbar_star(u)).real() : 0.0;
  d.dbar_star_residual = d.energy > 0 ? std::sqrt(d.dbar_star_norm_sq / d.energy) : 0.0;
  d.max_abs_u = max_abs(u);
  d.forcing_power = l2_inner(f, u).real();
  return d;
}

inline Trajectory integrate(const SimConfig& cfg, const FormField& u0, DriftFn drift, ForcingFn forcing) {
  cfg.validate();
  const GridPtr& grid = u0.grid();
  if (grid->n() != cfg.n || grid->N() != cfg.N || u0.q() != cfg.q)
    throw ParameterError("initial data does not match the configured n, q, N");

  FormField u = u0.to_fourier();
  const double norm0 = l2_norm(u);
  if (norm0 > 0) {
    const double rel = constraint_residual(u) / norm0;
    if (rel > cfg.constraint_tol) throw ConstraintError("initial data violates the constraint", rel);
  }
  u = leray_project(u);

  EtdHeun stepper(grid, cfg.mu, std::move(drift), std::move(forcing));
  const double r = cfg.lps_exponent();
  const double s = lps_time_exponent(r, cfg.n);

  Trajectory traj;
  traj.grid = grid;
  traj.q = cfg.q;
  traj.mu = cfg.mu;
  traj.dt = cfg.dt;
  traj.stride = cfg.output_stride;
  traj.lps_r = r;

  double prev_lps = 0;
  auto record = [&](const FormField& state, double t, std::size_t step) {
    Diagnostics d = measure(state, stepper.forcing()(t), t);
    const double lps = std::pow(lr_norm(state, r), s);
    if (!traj.diagnostics.empty()) {
      const auto& prev = traj.diagnostics.back();
      d.lps_accum = prev.lps_accum + 0.5 * (t - prev.t) * (prev_lps + lps);
    }
    prev_lps = lps;
    traj.diagnostics.push_back(d);
    if (step % static_cast<std::size_t>(cfg.output_stride) == 0) {
      traj.times.push_back(t);
      traj.velocity.push_back(state);
      traj.pressure.push_back(pressure_recover(stepper.pressure_force(state, t), 1e-6));
    }
    return d;
  };

  const std::size_t steps = cfg.steps();
  Diagnostics d = record(u, 0.0, 0);
  for (std::size_t m = 0; m < steps; ++m) {
    const double t = static_cast<double>(m) * cfg.dt;
    const double allowed = cfg.cfl_safety * grid->spacing() / std::max(1.0, d.max_abs_u);
    std::size_t sub = 1;
    if (cfg.dt > allowed) {
      if (!cfg.cfl_shrink) throw CflError("dt = " + std::to_string(cfg.dt) + " exceeds CFL bound " +
                                          std::to_string(allowed) + " at t = " + std::to_string(t));
      sub = static_cast<std::size_t>(std::ceil(cfg.dt / allowed));
    }
    const double h = cfg.dt / static_cast<double>(sub);
    for (std::size_t k = 0; k < sub; ++k) {
      u = stepper.step(u, t + static_cast<double>(k) * h, h);
      if (!u.all_finite()) throw BlowUpError(t + static_cast<double>(k + 1) * h);
    }
    d = record(u, static_cast<double>(m + 1) * cfg.dt, m + 1);
    if (!std::isfinite(d.energy) || !std::isfinite(d.max_abs_u)) throw BlowUpError(d.t);
  }
  return traj;
}

}  // namespace detail

/// One ETD-Heun step of the nonlinear problem.
inline FormField step_etd_heun(const FormField& u, double t, const SimConfig& cfg) {
  const BilinearSpec spec = cfg.nonlinearity;
  detail::EtdHeun stepper(
      u.grid(), cfg.mu, [spec](const FormField& v, double) { return nonlinearity(v, spec); },
      forcing_function(cfg.forcing, u.grid(), u.q()));
  FormField next = stepper.step(u.to_fourier(), t, cfg.dt);
  if (!next.all_finite()) throw BlowUpError(t + cfg.dt);
  return next.as(u.rep());
}

/// Runs the nonlinear problem from u0 to T. Snapshots every output_stride
/// steps carry the velocity and the pressure recovered from (I-P)(f - 𝒩u).
inline Trajectory simulate(const SimConfig& cfg, const FormField& u0, ForcingFn forcing = {}) {
  const BilinearSpec spec = cfg.nonlinearity;
  if (!forcing) forcing = forcing_function(cfg.forcing, u0.grid(), u0.q());
  return detail::integrate(
      cfg, u0, [spec](const FormField& v, double) { return nonlinearity(v, spec); }, std::move(forcing));
}

/// Solves ∂_t u + μΔu + P𝐁(w(t), u) = Pf around the base trajectory w, with
/// w interpolated linearly between its snapshots.
inline Trajectory solve_linearized(const Trajectory& w, const SimConfig& cfg, const FormField& u0,
                                   ForcingFn forcing = {}) {
  if (w.velocity.empty()) throw ParameterError("solve_linearized: empty base trajectory");
  const GridPtr grid = w.grid;
  const FormField start = u0.rebind(grid);
  if (!forcing) forcing = forcing_function(cfg.forcing, grid, start.q());
  const BilinearSpec spec = cfg.nonlinearity;
  const Trajectory* base = &w;
  return detail::integrate(
      cfg, start,
      [spec, base](const FormField& v, double t) { return linearized_b(base->velocity_at(t), v, spec); },
      std::move(forcing));
}

}  // namespace dbarns
