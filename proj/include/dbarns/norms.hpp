/// @file norms.hpp
/// @brief Space-time norms over trajectories: the velocity/force/pressure
/// Bochner-Sobolev scales, the LPS integral and the energy report.
///
/// Conventions:
///  - ∂_x^α and ∇^i are spectral; ‖∇^i v‖² = Σ_ζ |ζ|^{2i} |v̂(ζ)|² vol.
///  - ∂_t^j is the second-order finite difference applied j times (centred in
///    the interior, one-sided at the ends).
///  - C(I,·) is the max over stored snapshots, L²(I,·) the trapezoid rule.
#pragma once

#include <json.hpp>

#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "dbarns/dolbeault.hpp"
#include "dbarns/dynamics.hpp"
#include "dbarns/field_norms.hpp"

namespace dbarns {

struct NormReport {
  std::map<std::string, double> values;
  std::map<std::string, double> params;
  double dt = 0.0;
  int stencil_order = 2;

  nlohmann::json to_json() const {
    return {{"values", values}, {"params", params}, {"time", {{"dt", dt}, {"stencil_order", stencil_order}}}};
  }
};

namespace detail {

inline double trapezoid(const std::vector<double>& y, double h) {
  if (y.size() < 2) return 0.0;
  double s = 0.5 * (y.front() + y.back());
  for (std::size_t i = 1; i + 1 < y.size(); ++i) s += y[i];
  return s * h;
}

/// d/dt of a uniformly spaced sequence, second order everywhere.
inline std::vector<FormField> time_derivative(const std::vector<FormField>& f, double h) {
  const std::size_t m = f.size();
  if (m < 3) throw ParameterError("time derivative needs at least 3 snapshots");
  std::vector<FormField> d;
  d.reserve(m);
  auto combo = [&](std::initializer_list<std::pair<std::size_t, double>> terms) {
    FormField out(f[0].grid(), f[0].q(), f[0].rep());
    for (auto [i, c] : terms) out.axpy(c / (2.0 * h), f[i]);
    return out;
  };
  d.push_back(combo({{0, -3.0}, {1, 4.0}, {2, -1.0}}));
  for (std::size_t i = 1; i + 1 < m; ++i) d.push_back(combo({{i + 1, 1.0}, {i - 1, -1.0}}));
  d.push_back(combo({{m - 1, 3.0}, {m - 2, -4.0}, {m - 3, 1.0}}));
  return d;
}

/// Multi-indices α ∈ ℕ^dims with |α| <= max_order.
inline std::vector<std::vector<int>> multi_indices_up_to(int dims, int max_order) {
  std::vector<std::vector<int>> out;
  std::vector<int> a(static_cast<std::size_t>(dims), 0);
  std::function<void(int, int)> rec = [&](int axis, int budget) {
    if (axis == dims) {
      out.push_back(a);
      return;
    }
    for (int v = 0; v <= budget; ++v) {
      a[static_cast<std::size_t>(axis)] = v;
      rec(axis + 1, budget - v);
    }
    a[static_cast<std::size_t>(axis)] = 0;
  };
  rec(0, std::max(max_order, 0));
  return out;
}

/// S[j][α][i][t] = ‖∇^i ∂_x^α ∂_t^j v(t)‖² for i <= max_i, |α| + 2j <= 2s.
struct DerivativeTable {
  std::vector<std::vector<std::vector<std::vector<double>>>> S;
  std::vector<std::vector<std::vector<int>>> alphas;  // per j
};

inline DerivativeTable derivative_table(const std::vector<FormField>& series, double h, int s, int max_i) {
  if (series.empty()) throw ParameterError("norm of an empty trajectory");
  if (s > 0 && series.size() < static_cast<std::size_t>(2 * s + 1))
    throw ParameterError("too few snapshots for the requested time order");
  const auto& g = *series[0].grid();
  const int dims = g.dims();
  DerivativeTable tab;
  std::vector<FormField> cur;
  for (const auto& f : series) cur.push_back(f.to_fourier());
  std::vector<double> e(g.size()), wa(g.size());
  for (int j = 0; j <= s; ++j) {
    if (j > 0) cur = time_derivative(cur, h);
    tab.alphas.push_back(multi_indices_up_to(dims, 2 * s - 2 * j));
    const auto& alphas = tab.alphas.back();
    auto& Sj = tab.S.emplace_back(alphas.size(), std::vector<std::vector<double>>(
                                                     static_cast<std::size_t>(max_i + 1),
                                                     std::vector<double>(cur.size())));
    for (std::size_t t = 0; t < cur.size(); ++t) {
      for (std::size_t m = 0; m < g.size(); ++m) {
        double acc = 0;
        for (std::size_t c = 0; c < cur[t].count(); ++c) acc += std::norm(cur[t][c][m]);
        e[m] = acc;
      }
      for (std::size_t ai = 0; ai < alphas.size(); ++ai) {
        for (std::size_t m = 0; m < g.size(); ++m) {
          double w = e[m];
          const auto z = g.zeta(m);
          for (int a = 0; a < dims && w != 0.0; ++a)
            for (int p = 0; p < alphas[ai][static_cast<std::size_t>(a)]; ++p)
              w *= static_cast<double>(z[static_cast<std::size_t>(a)]) * z[static_cast<std::size_t>(a)];
          wa[m] = w;
        }
        for (int i = 0; i <= max_i; ++i) {
          double sum = 0;
          for (std::size_t m = 0; m < g.size(); ++m)
            if (wa[m] != 0.0) sum += std::pow(g.ksq(m), i) * wa[m];
          Sj[ai][static_cast<std::size_t>(i)][t] = sum * g.volume();
        }
      }
    }
  }
  return tab;
}

inline double max_of(const std::vector<double>& v) {
  double m = 0;
  for (double x : v) m = std::max(m, x);
  return m;
}

}  // namespace detail

/// ‖u‖_{B_vel^{k,2s,s}} = (Σ_{i<=k} Σ_{|α|+2j<=2s} ‖∂_x^α ∂_t^j u‖²_{i,q,T})^{1/2} with
/// ‖v‖²_{i,q,T} = ‖∇^i v‖²_{C(I,L²)} + μ‖∇^{i+1} v‖²_{L²(I,L²)}.
inline double bochner_vel(const std::vector<FormField>& series, double h, double mu, int k, int s) {
  if (k < 0 || s < 0) throw ParameterError("bochner_vel: k, s must be >= 0");
  const auto tab = detail::derivative_table(series, h, s, k + 1);
  double total = 0;
  for (std::size_t j = 0; j < tab.S.size(); ++j)
    for (const auto& per_alpha : tab.S[j])
      for (int i = 0; i <= k; ++i)
        total += detail::max_of(per_alpha[static_cast<std::size_t>(i)]) +
                 mu * detail::trapezoid(per_alpha[static_cast<std::size_t>(i + 1)], h);
  return std::sqrt(total);
}

inline double bochner_vel(const Trajectory& traj, int k, int s) {
  return bochner_vel(traj.velocity, traj.snapshot_dt(), traj.mu, k, s);
}

/// ‖f‖_{B_for^{k,2s,s}}: the same double sum without μ, C(I,L²) and L²(I,L²) parts
/// for ∇^i and ∇^{i+1} of ∂_x^α ∂_t^j f.
inline double bochner_for(const std::vector<FormField>& series, double h, int k, int s) {
  if (k < 0 || s < 0) throw ParameterError("bochner_for: k, s must be >= 0");
  const auto tab = detail::derivative_table(series, h, s, k + 1);
  double total = 0;
  for (std::size_t j = 0; j < tab.S.size(); ++j)
    for (const auto& per_alpha : tab.S[j])
      for (int i = 0; i <= k; ++i)
        total += detail::max_of(per_alpha[static_cast<std::size_t>(i)]) +
                 detail::trapezoid(per_alpha[static_cast<std::size_t>(i + 1)], h);
  return std::sqrt(total);
}

/// Which sup-norm terms the pressure norm carries for given (k, s, n).
enum class PressureBranch { for_only, plus_l2_cb, plus_l2_and_c_cb };

inline PressureBranch pressure_branch(int k, int s, int n) {
  const int order = 2 * s + k;
  if (order <= n) return PressureBranch::for_only;
  if (order == n + 1) return PressureBranch::plus_l2_cb;
  return PressureBranch::plus_l2_and_c_cb;
}

/// ‖p‖_{B_pre^{k+1,2s,s}} = ‖∂̄p‖_{B_for^{k,2s,s}} [+ ‖p‖_{L²(I,C_b)} [+ ‖p‖_{C(I,C_b)}]],
/// the bracketed terms switched on by 2s+k = n+1 and 2s+k > n+1 respectively.
inline double bochner_pre(const std::vector<FormField>& series, double h, int k, int s, int n) {
  if (series.empty()) throw ParameterError("bochner_pre: empty trajectory");
  std::vector<FormField> dp;
  dp.reserve(series.size());
  for (const auto& p : series) dp.push_back(dbar(p.to_fourier()));
  double norm = bochner_for(dp, h, k, s);
  const PressureBranch branch = pressure_branch(k, s, n);
  if (branch == PressureBranch::for_only) return norm;
  std::vector<double> sup_sq, sup;
  for (const auto& p : series) {
    const double m = max_abs(p);
    sup.push_back(m);
    sup_sq.push_back(m * m);
  }
  norm += std::sqrt(detail::trapezoid(sup_sq, h));
  if (branch == PressureBranch::plus_l2_and_c_cb) norm += detail::max_of(sup);
  return norm;
}

inline double bochner_pre(const Trajectory& traj, int k, int s) {
  return bochner_pre(traj.pressure, traj.snapshot_dt(), k, s, traj.grid->n());
}

/// ∫₀ᵀ ‖u(t)‖_{L^r}^s dt with 2/s + 2n/r = 1, trapezoid over snapshots.
inline double lps_integral(const std::vector<FormField>& series, double h, double r) {
  if (series.empty()) return 0.0;
  const double s = lps_time_exponent(r, series[0].n());
  std::vector<double> y;
  y.reserve(series.size());
  for (const auto& u : series) y.push_back(std::pow(lr_norm(u, r), s));
  return detail::trapezoid(y, h);
}

inline double lps_integral(const Trajectory& traj, double r) {
  return lps_integral(traj.velocity, traj.snapshot_dt(), r);
}

/// Energy bookkeeping over the per-step diagnostics:
///  - norm_0qT            (max‖u‖² + μ∫‖∇u‖²)^{1/2}, ‖∇u‖² = 4(‖∂̄u‖² + ‖∂̄*u‖²)
///  - energy_residual     ½Δ‖u‖² + μ∫(‖∂̄u‖² + ‖∂̄*u‖²) - ∫Re(f,u), trapezoid
///  - data_norm           a priori bound on norm_0qT from ‖u₀‖ and f
///  - max_constraint_residual, lps (r = trajectory's lps_r), energy_increase
inline NormReport energy_report(const Trajectory& traj, const ForcingFn& forcing = {}) {
  NormReport rep;
  rep.dt = traj.dt;
  const auto& d = traj.diagnostics;
  if (d.empty()) throw ParameterError("energy_report: trajectory has no diagnostics");
  const double h = traj.dt;
  const double mu = traj.mu;

  std::vector<double> diss, power, grad_sq;
  double max_energy = 0, max_residual = 0, max_increase = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    diss.push_back(d[i].dbar_norm_sq + d[i].dbar_star_norm_sq);
    grad_sq.push_back(4.0 * diss.back());
    power.push_back(d[i].forcing_power);
    max_energy = std::max(max_energy, d[i].energy);
    max_residual = std::max(max_residual, d[i].dbar_star_residual);
    if (i > 0) max_increase = std::max(max_increase, d[i].energy - d[i - 1].energy);
  }
  const double dissipated = mu * detail::trapezoid(diss, h);
  const double work = detail::trapezoid(power, h);
  const double residual = 0.5 * (d.back().energy - d.front().energy) + dissipated - work;
  double abs_work = 0;
  {
    std::vector<double> ap;
    for (double p : power) ap.push_back(std::abs(p));
    abs_work = detail::trapezoid(ap, h);
  }
  const double scale = 0.5 * d.front().energy + dissipated + abs_work;

  const double norm_sq = max_energy + mu * detail::trapezoid(grad_sq, h);

  // Data bound: split f into its mean f₀ and the rest f'. Then
  // E(t) + (μ/4)∫‖∇u‖² <= A + 2MG with A = ‖u₀‖² + (4/μ)∫‖f'‖²_{Ḣ⁻¹}, G = ∫‖f₀‖,
  // M = max‖u‖ <= G + (G² + A)^{1/2}.
  double f_hm1 = 0, f_mean = 0;
  if (forcing) {
    std::vector<double> hm1, mean;
    const auto& g = *traj.grid;
    for (const auto& di : d) {
      const FormField f = forcing(di.t).to_fourier();
      double acc = 0;
      double acc0 = 0;
      for (std::size_t c = 0; c < f.count(); ++c) {
        acc0 += std::norm(f[c][0]);
        for (std::size_t m = 1; m < g.size(); ++m) acc += std::norm(f[c][m]) / g.ksq(m);
      }
      hm1.push_back(acc * g.volume());
      mean.push_back(std::sqrt(acc0 * g.volume()));
    }
    f_hm1 = detail::trapezoid(hm1, h);
    f_mean = detail::trapezoid(mean, h);
  }
  const double A = d.front().energy + 4.0 / mu * f_hm1;
  const double M = f_mean + std::sqrt(f_mean * f_mean + A);
  const double data_sq = M * M + 4.0 * (A + 2.0 * M * f_mean);

  rep.values["norm_0qT"] = std::sqrt(norm_sq);
  rep.values["data_norm"] = std::sqrt(data_sq);
  rep.values["energy_bound_holds"] = norm_sq <= data_sq * (1 + 1e-12) ? 1.0 : 0.0;
  rep.values["energy_residual"] = residual;
  rep.values["energy_residual_relative"] = scale > 0 ? std::abs(residual) / scale : 0.0;
  rep.values["max_energy"] = max_energy;
  rep.values["initial_energy"] = d.front().energy;
  rep.values["energy_increase"] = max_increase;
  rep.values["max_constraint_residual"] = max_residual;
  if (traj.lps_r > 0 && !traj.velocity.empty()) {
    rep.values["lps"] = lps_integral(traj, traj.lps_r);
    rep.params["r"] = traj.lps_r;
    rep.params["s"] = lps_time_exponent(traj.lps_r, traj.grid->n());
  }
  rep.params["mu"] = mu;
  return rep;
}

}  // namespace dbarns
