/// @file dolbeault.hpp
/// @brief Operators of the Dolbeault complex on periodic (0,q)-forms: ∂̄, its
/// formal adjoint, the generalized Laplacian, the Leray-type projector and
/// pressure recovery. Everything is a Fourier multiplier; operators return
/// their result in the representation of their input.
#pragma once

#include <cmath>
#include <vector>

#include "dbarns/common.hpp"
#include "dbarns/forms.hpp"
#include "dbarns/multi_index.hpp"
#include "dbarns/spectral.hpp"

namespace dbarns {

/// (∂̄u)_K = Σ_a (-1)^{a-1} ∂̄_{k_a} u_{K∖k_a} for K = (k_1 < … < k_{q+1}).
inline FormField dbar(const FormField& u) {
  const int n = u.n(), q = u.q();
  if (q >= n) throw ParameterError("dbar: undefined on (0,n)-forms");
  const FormField uf = u.to_fourier();
  FormField out(u.grid(), q + 1, Representation::fourier);
  const std::size_t size = u.grid()->size();
  for_each_index(out.count(), [&](std::size_t c) {
    const MultiIndex& K = out.indices()[c];
    auto& o = out[c];
    for (std::size_t a = 0; a <= static_cast<std::size_t>(q); ++a) {
      const double sign = a % 2 == 0 ? 1.0 : -1.0;
      const auto& sig = u.grid()->sigma(K[a]);
      const auto& src = uf[K.without(a)];
      for (std::size_t m = 0; m < size; ++m) o[m] += sign * sig[m] * src[m];
    }
  });
  return out.as(u.rep());
}

/// Formal adjoint of ∂̄ under the L² pairing:
/// (∂̄*v)_J = -Σ_{j∉J} ε(j,J) ∂_j v_{J∪{j}}, ε from insert_sign.
inline FormField dbar_star(const FormField& v) {
  const int n = v.n(), q = v.q() - 1;
  if (q < 0) throw ParameterError("dbar_star: undefined on (0,0)-forms");
  const FormField vf = v.to_fourier();
  FormField out(v.grid(), q, Representation::fourier);
  const std::size_t size = v.grid()->size();
  for_each_index(out.count(), [&](std::size_t c) {
    const MultiIndex& J = out.indices()[c];
    auto& o = out[c];
    for (int j = 1; j <= n; ++j) {
      if (J.contains(j)) continue;
      const auto [sign, K] = insert_sign(j, J, n);
      const auto& d = v.grid()->del(j);
      const auto& src = vf[K];
      for (std::size_t m = 0; m < size; ++m) o[m] -= static_cast<double>(sign) * d[m] * src[m];
    }
  });
  return out.as(v.rep());
}

/// Δ^q = (∂̄^q)*∂̄^q + ∂̄^{q-1}(∂̄^{q-1})*, with ∂̄^{-1} = ∂̄^n = 0.
inline FormField laplacian_q(const FormField& u) {
  const int n = u.n(), q = u.q();
  FormField out(u.grid(), q, u.rep());
  if (q < n) out += dbar_star(dbar(u));
  if (q > 0) out += dbar(dbar_star(u));
  return out;
}

/// ‖(∂̄^{q-1})* u‖, the incompressibility residual; zero for q = 0.
inline double constraint_residual(const FormField& u) {
  if (u.q() == 0) return 0.0;
  return l2_norm(dbar_star(u));
}

/// P^q = φ^q (∂̄^q)* ∂̄^q, the orthogonal projection onto forms with
/// (∂̄^{q-1})*u = 0. The zero mode passes through unchanged. For q = 0 the
/// projection is not defined and the input is returned as is.
inline FormField leray_project(const FormField& u) {
  const int n = u.n(), q = u.q();
  if (q == 0) return u;
  const FormField uf = u.to_fourier();
  FormField out = q < n ? dbar_star(dbar(uf)) : FormField(u.grid(), q, Representation::fourier);
  const auto& g = *u.grid();
  for (std::size_t c = 0; c < out.count(); ++c)
    for (std::size_t m = 0; m < g.size(); ++m) out[c][m] = g.ksq(m) == 0.0 ? uf[c][m] : out[c][m] * (4.0 / g.ksq(m));
  return out.as(u.rep());
}

/// Dense symbol of P^q at a single lattice point, acting on the component
/// vector of length binomial(n, q). Row-major.
struct FiberMatrix {
  std::size_t dim = 0;
  std::vector<cplx> data;
  cplx operator()(std::size_t r, std::size_t c) const { return data[r * dim + c]; }
};

inline FiberMatrix fiber_matrix(const SpectralGrid& g, int q, std::size_t flat) {
  const int n = g.n();
  if (q < 1 || q > n) throw ParameterError("fiber_matrix: need 1 <= q <= n");
  const auto rows = enumerate(n, q);
  FiberMatrix P{rows.size(), std::vector<cplx>(rows.size() * rows.size())};
  if (g.ksq(flat) == 0.0) {
    for (std::size_t r = 0; r < P.dim; ++r) P.data[r * P.dim + r] = 1.0;
    return P;
  }
  if (q == n) return P;
  // S: symbol of ∂̄^q, binomial(n,q+1) × binomial(n,q).
  const auto out_rows = enumerate(n, q + 1);
  std::vector<cplx> S(out_rows.size() * P.dim);
  for (std::size_t r = 0; r < out_rows.size(); ++r)
    for (std::size_t a = 0; a < out_rows[r].indices().size(); ++a) {
      const double sign = a % 2 == 0 ? 1.0 : -1.0;
      S[r * P.dim + index_of(out_rows[r].without(a), n)] += sign * g.sigma(out_rows[r][a])[flat];
    }
  const double scale = 4.0 / g.ksq(flat);
  for (std::size_t i = 0; i < P.dim; ++i)
    for (std::size_t j = 0; j < P.dim; ++j) {
      cplx s{};
      for (std::size_t r = 0; r < out_rows.size(); ++r) s += std::conj(S[r * P.dim + i]) * S[r * P.dim + j];
      P.data[i * P.dim + j] = scale * s;
    }
  return P;
}

struct HodgeSplit {
  FormField solenoidal;
  FormField exact;
};

/// u = Pu + (I - P)u, the exact part being ∂̄^{q-1}(∂̄^{q-1})*φ^q u.
inline HodgeSplit hodge_split(const FormField& u) {
  if (u.q() == 0) throw ParameterError("hodge_split: undefined for q = 0");
  FormField s = leray_project(u);
  FormField e = u - s;
  return {std::move(s), std::move(e)};
}

/// Reconstructs p with ∂̄^{q-1}p = F from an exact form F (P^q F = 0):
/// p = (∂̄^{q-1})* φ^q F, mean zero. Throws ConstraintError carrying the
/// relative residual ‖P F‖/‖F‖ when it exceeds `tolerance`.
inline FormField pressure_recover(const FormField& F, double tolerance = 1e-8) {
  if (F.q() == 0) throw ParameterError("pressure_recover: undefined for q = 0");
  const FormField Ff = F.to_fourier();
  const double norm = l2_norm(Ff);
  if (norm > 0) {
    const double rel = l2_norm(leray_project(Ff)) / norm;
    if (rel > tolerance) throw ConstraintError("pressure_recover: force has a solenoidal part", rel);
  }
  FormField phiF(F.grid(), F.q(), Representation::fourier);
  for (std::size_t c = 0; c < Ff.count(); ++c) phiF[c] = inv_laplacian(Ff.scalar(c)).values;
  FormField p = dbar_star(phiF);
  for (std::size_t c = 0; c < p.count(); ++c) p[c][0] = 0.0;
  return p.as(F.rep());
}

}  // namespace dbarns
