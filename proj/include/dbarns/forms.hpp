/// @file forms.hpp
/// @brief (0,q)-form containers, the L² pairing, and the zero-order bilinear
/// maps M₁: (0,q+1)×(0,q) → (0,q) and M₂: (0,q)×(0,q) → (0,q-1).
#pragma once

#include <json.hpp>

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "dbarns/common.hpp"
#include "dbarns/multi_index.hpp"
#include "dbarns/spectral.hpp"

namespace dbarns {

/// A (0,q)-form on the grid: one complex scalar field per sorted multi-index,
/// stored in the canonical enumeration order. All components share one
/// representation.
class FormField {
 public:
  FormField() = default;

  FormField(GridPtr grid, int q, Representation rep = Representation::physical)
      : grid_(std::move(grid)), q_(q), rep_(rep) {
    if (!grid_) throw ParameterError("FormField: null grid");
    if (q < 0 || q > grid_->n()) throw ParameterError("FormField: bidegree q outside [0, n]");
    indices_ = enumerate(grid_->n(), q);
    comps_.assign(indices_.size(), std::vector<cplx>(grid_->size()));
  }

  const GridPtr& grid() const { return grid_; }
  int n() const { return grid_->n(); }
  int q() const { return q_; }
  Representation rep() const { return rep_; }
  std::size_t count() const { return comps_.size(); }
  const std::vector<MultiIndex>& indices() const { return indices_; }

  std::vector<cplx>& operator[](std::size_t c) { return comps_[c]; }
  const std::vector<cplx>& operator[](std::size_t c) const { return comps_[c]; }
  std::vector<cplx>& operator[](const MultiIndex& J) { return comps_.at(slot(J)); }
  const std::vector<cplx>& operator[](const MultiIndex& J) const { return comps_.at(slot(J)); }

  std::size_t slot(const MultiIndex& J) const {
    if (J.degree() != q_) throw ParameterError("FormField: multi-index " + J.str() + " has wrong degree");
    return index_of(J, n());
  }

  ScalarField scalar(std::size_t c) const { return ScalarField(grid_, rep_, comps_[c]); }

  FormField to_fourier() const {
    if (rep_ == Representation::fourier) return *this;
    FormField out = *this;
    for_each_index(count(), [&](std::size_t c) { grid_->fft_forward(out.comps_[c]); });
    out.rep_ = Representation::fourier;
    return out;
  }

  FormField to_physical() const {
    if (rep_ == Representation::physical) return *this;
    FormField out = *this;
    for_each_index(count(), [&](std::size_t c) { grid_->fft_inverse(out.comps_[c]); });
    out.rep_ = Representation::physical;
    return out;
  }

  FormField as(Representation r) const { return r == Representation::fourier ? to_fourier() : to_physical(); }

  /// The same data attached to another grid object of identical shape.
  FormField rebind(const GridPtr& g) const {
    if (g == grid_) return *this;
    if (!g || g->n() != grid_->n() || g->N() != grid_->N()) throw ParameterError("rebind: grid shape mismatch");
    FormField out = *this;
    out.grid_ = g;
    return out;
  }

  /// Same grid, bidegree and representation.
  bool compatible(const FormField& o) const { return grid_ == o.grid_ && q_ == o.q_ && rep_ == o.rep_; }

  FormField& operator+=(const FormField& o) { return axpy(1.0, o); }
  FormField& operator-=(const FormField& o) { return axpy(-1.0, o); }
  FormField& operator*=(cplx s) {
    for (auto& c : comps_)
      for (auto& v : c) v *= s;
    return *this;
  }

  /// this += a·o
  FormField& axpy(cplx a, const FormField& o) {
    require_compatible(o, "axpy");
    for (std::size_t c = 0; c < count(); ++c)
      for (std::size_t m = 0; m < grid_->size(); ++m) comps_[c][m] += a * o.comps_[c][m];
    return *this;
  }

  void require_compatible(const FormField& o, const char* op) const {
    if (grid_ != o.grid_) throw ParameterError(std::string(op) + ": grid mismatch");
    if (q_ != o.q_) throw ParameterError(std::string(op) + ": bidegree mismatch");
    if (rep_ != o.rep_) throw ParameterError(std::string(op) + ": representation mismatch");
  }

  bool all_finite() const {
    for (const auto& c : comps_)
      for (const auto& v : c)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
    return true;
  }

  friend bool operator==(const FormField& a, const FormField& b) {
    return a.grid_->n() == b.grid_->n() && a.grid_->N() == b.grid_->N() && a.q_ == b.q_ && a.rep_ == b.rep_ &&
           a.comps_ == b.comps_;
  }

 private:
  GridPtr grid_;
  int q_ = 0;
  Representation rep_ = Representation::physical;
  std::vector<MultiIndex> indices_;
  std::vector<std::vector<cplx>> comps_;
};

inline FormField operator+(FormField a, const FormField& b) { return a += b; }
inline FormField operator-(FormField a, const FormField& b) { return a -= b; }
inline FormField operator*(cplx s, FormField a) { return a *= s; }

/// (u, v)_{L²} = Σ_J ∫ u_J conj(v_J) dx. Rectangle rule on physical samples,
/// Parseval on Fourier coefficients; both are exact for band-limited fields.
inline cplx l2_inner(const FormField& u, const FormField& v) {
  if (u.grid() != v.grid()) throw ParameterError("l2_inner: grid mismatch");
  if (u.q() != v.q()) throw ParameterError("l2_inner: bidegree mismatch");
  const FormField vv = v.as(u.rep());
  const auto& g = *u.grid();
  cplx s{};
  for (std::size_t c = 0; c < u.count(); ++c)
    for (std::size_t m = 0; m < g.size(); ++m) s += u[c][m] * std::conj(vv[c][m]);
  return s * (u.rep() == Representation::physical ? g.cell_volume() : g.volume());
}

inline double l2_norm(const FormField& u) { return std::sqrt(std::max(0.0, l2_inner(u, u).real())); }

/// max over grid points of the pointwise Euclidean norm (Σ_J |u_J(x)|²)^{1/2}.
inline double max_abs(const FormField& u) {
  const FormField p = u.to_physical();
  double best = 0;
  for (std::size_t m = 0; m < u.grid()->size(); ++m) {
    double s = 0;
    for (std::size_t c = 0; c < p.count(); ++c) s += std::norm(p[c][m]);
    best = std::max(best, s);
  }
  return std::sqrt(best);
}

/// One nonzero coefficient of a constant-coefficient bilinear map:
/// out_K += coeff · x_A · (conj_second ? conj(y_B) : y_B).
struct TensorEntry {
  MultiIndex K, A, B;
  cplx coeff;
  bool conj_second = true;
};

/// Choice of the bilinear maps M₁, M₂ entering 𝒩u = M₁(∂̄u, u) + ∂̄M₂(u, u).
struct BilinearSpec {
  enum class Kind { stokes, lamb, custom };

  Kind kind = Kind::stokes;
  // Declared bidegree of a custom spec; ignored otherwise.
  int n = 0, q = 0;
  std::vector<TensorEntry> m1, m2;

  static BilinearSpec stokes() { return {}; }
  static BilinearSpec lamb() {
    BilinearSpec s;
    s.kind = Kind::lamb;
    return s;
  }

  /// Throws unless the spec can act on (0,q)-forms in complex dimension n.
  void check_admissible(int n_, int q_) const {
    if (kind == Kind::lamb && q_ != 1) throw ParameterError("lamb nonlinearity is only defined for q = 1");
    if (kind != Kind::custom) return;
    if (n != n_ || q != q_) throw ParameterError("custom bilinear spec declared for a different (n, q)");
    for (const auto& e : m1)
      if (e.K.degree() != q_ || e.A.degree() != q_ + 1 || e.B.degree() != q_)
        throw ParameterError("custom m1 entry has mismatched index degrees");
    for (const auto& e : m2)
      if (e.K.degree() != q_ - 1 || e.A.degree() != q_ || e.B.degree() != q_)
        throw ParameterError("custom m2 entry has mismatched index degrees");
  }

  std::string name() const {
    switch (kind) {
      case Kind::stokes: return "stokes";
      case Kind::lamb: return "lamb";
      default: return "custom";
    }
  }
};

namespace detail {
inline std::vector<TensorEntry> entries_from_json(const nlohmann::json& j, int n) {
  std::vector<TensorEntry> out;
  if (j.is_null()) return out;
  for (const auto& e : j.at("entries")) {
    TensorEntry t{MultiIndex(e.at("K").get<std::vector<int>>(), n), MultiIndex(e.at("A").get<std::vector<int>>(), n),
                  MultiIndex(e.at("B").get<std::vector<int>>(), n),
                  cplx(e.value("re", 0.0), e.value("im", 0.0)), e.value("conj_u", true)};
    out.push_back(std::move(t));
  }
  return out;
}

inline nlohmann::json entries_to_json(const std::vector<TensorEntry>& es) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& e : es)
    arr.push_back({{"K", e.K.indices()},
                   {"A", e.A.indices()},
                   {"B", e.B.indices()},
                   {"re", e.coeff.real()},
                   {"im", e.coeff.imag()},
                   {"conj_u", e.conj_second}});
  return {{"entries", arr}};
}
}  // namespace detail

/// Parses {"kind":"stokes"|"lamb"} or a sparse custom tensor document
/// {"kind":"custom","m1":{"entries":[…]},"m2":{"entries":[…]}}; absent entries are zero.
inline BilinearSpec bilinear_from_json(const nlohmann::json& j, int n, int q) {
  const std::string kind = j.is_string() ? j.get<std::string>() : j.at("kind").get<std::string>();
  BilinearSpec s;
  if (kind == "stokes") return s;
  if (kind == "lamb") {
    s.kind = BilinearSpec::Kind::lamb;
  } else if (kind == "custom") {
    s.kind = BilinearSpec::Kind::custom;
    s.n = n;
    s.q = q;
    s.m1 = detail::entries_from_json(j.value("m1", nlohmann::json()), n);
    s.m2 = detail::entries_from_json(j.value("m2", nlohmann::json()), n);
  } else {
    throw ParameterError("unknown nonlinearity kind '" + kind + "'");
  }
  s.check_admissible(n, q);
  return s;
}

inline nlohmann::json bilinear_to_json(const BilinearSpec& s) {
  nlohmann::json j = {{"kind", s.name()}};
  if (s.kind == BilinearSpec::Kind::custom) {
    j["m1"] = detail::entries_to_json(s.m1);
    j["m2"] = detail::entries_to_json(s.m2);
  }
  return j;
}

namespace detail {
inline void contract(const std::vector<TensorEntry>& entries, const FormField& x, const FormField& y, FormField& out) {
  const std::size_t size = x.grid()->size();
  for (const auto& e : entries) {
    const auto& xa = x[e.A];
    const auto& yb = y[e.B];
    auto& o = out[e.K];
    if (e.conj_second)
      for (std::size_t m = 0; m < size; ++m) o[m] += e.coeff * xa[m] * std::conj(yb[m]);
    else
      for (std::size_t m = 0; m < size; ++m) o[m] += e.coeff * xa[m] * yb[m];
  }
}
}  // namespace detail

/// M₁(ω, u) for ω a (0,q+1)-form and u a (0,q)-form, evaluated pointwise.
/// Lamb (q = 1): M₁(ω,u)_k = Σ_{j≠k} ε(j,k) ω_{jk} conj(u_j) with ε = +1 for j < k,
/// so that Σ_k M₁(ω,v)_k conj(v_k) vanishes identically.
inline FormField apply_m1(const BilinearSpec& spec, const FormField& omega, const FormField& u) {
  const int n = u.n(), q = u.q();
  spec.check_admissible(n, q);
  if (omega.grid() != u.grid()) throw ParameterError("apply_m1: grid mismatch");
  if (omega.q() != q + 1) throw ParameterError("apply_m1: first argument must have bidegree q+1");
  FormField out(u.grid(), q, Representation::physical);
  if (spec.kind == BilinearSpec::Kind::stokes) return out;

  const FormField w = omega.to_physical();
  const FormField v = u.to_physical();
  if (spec.kind == BilinearSpec::Kind::custom) {
    detail::contract(spec.m1, w, v, out);
    return out;
  }
  const std::size_t size = u.grid()->size();
  for (int k = 1; k <= n; ++k) {
    auto& o = out[static_cast<std::size_t>(k - 1)];
    for (int j = 1; j <= n; ++j) {
      if (j == k) continue;
      const double eps = j < k ? 1.0 : -1.0;
      const auto& wjk = w[MultiIndex({std::min(j, k), std::max(j, k)}, n)];
      const auto& uj = v[static_cast<std::size_t>(j - 1)];
      for (std::size_t m = 0; m < size; ++m) o[m] += eps * wjk[m] * std::conj(uj[m]);
    }
  }
  return out;
}

/// M₂(u, w), a (0,q-1)-form. Lamb: the scalar Σ_j u_j conj(w_j), so M₂(u,u) = |u|².
inline FormField apply_m2(const BilinearSpec& spec, const FormField& u, const FormField& w) {
  const int n = u.n(), q = u.q();
  if (q == 0) throw ParameterError("apply_m2: undefined for q = 0");
  spec.check_admissible(n, q);
  u.require_compatible(w.as(u.rep()), "apply_m2");
  FormField out(u.grid(), q - 1, Representation::physical);
  if (spec.kind == BilinearSpec::Kind::stokes) return out;

  const FormField a = u.to_physical();
  const FormField b = w.to_physical();
  if (spec.kind == BilinearSpec::Kind::custom) {
    detail::contract(spec.m2, a, b, out);
    return out;
  }
  auto& o = out[0];
  for (std::size_t c = 0; c < a.count(); ++c)
    for (std::size_t m = 0; m < o.size(); ++m) o[m] += a[c][m] * std::conj(b[c][m]);
  return out;
}

}  // namespace dbarns
