/// @file initial.hpp
/// @brief Random and analytic initial data. All generators return a projected
/// (constraint-satisfying), dealiased form in Fourier representation.
#pragma once

#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "dbarns/dolbeault.hpp"
#include "dbarns/forms.hpp"

namespace dbarns {

/// Complex Gaussian coefficients on every mode (or only the dealiased band).
inline FormField random_form(const GridPtr& grid, int q, std::mt19937_64& rng, bool band_limited = true) {
  std::normal_distribution<double> normal(0.0, 1.0);
  FormField u(grid, q, Representation::fourier);
  for (std::size_t c = 0; c < u.count(); ++c)
    for (std::size_t m = 0; m < grid->size(); ++m) {
      const double re = normal(rng), im = normal(rng);
      if (!band_limited || grid->kept(m)) u[c][m] = cplx(re, im);
    }
  return u;
}

struct InitialSpec {
  enum class Kind { random_solenoidal, single_mode, taylor_green_analog };
  Kind kind = Kind::random_solenoidal;
  std::uint64_t seed = 0;
  // random_solenoidal: |û(ζ)| ∝ |ζ|^{-decay}, rescaled to the requested RMS.
  double decay = 2.0;
  double rms = 1.0;
  // single_mode
  std::vector<int> zeta;
  std::vector<int> component;
  cplx amplitude = 1.0;
};

inline InitialSpec initial_from_json(const nlohmann::json& j) {
  InitialSpec s;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "random_solenoidal")
    s.kind = InitialSpec::Kind::random_solenoidal;
  else if (kind == "single_mode")
    s.kind = InitialSpec::Kind::single_mode;
  else if (kind == "taylor_green_analog")
    s.kind = InitialSpec::Kind::taylor_green_analog;
  else
    throw ParameterError("unknown initial condition kind '" + kind + "'");
  s.seed = j.value("seed", std::uint64_t{0});
  s.decay = j.value("decay", 2.0);
  s.rms = j.value("rms", 1.0);
  s.zeta = j.value("zeta", std::vector<int>{});
  s.component = j.value("J", std::vector<int>{});
  s.amplitude = cplx(j.value("re", 1.0), j.value("im", 0.0));
  return s;
}

inline nlohmann::json initial_to_json(const InitialSpec& s) {
  static const char* names[] = {"random_solenoidal", "single_mode", "taylor_green_analog"};
  return {{"kind", names[static_cast<int>(s.kind)]}, {"seed", s.seed}, {"decay", s.decay}, {"rms", s.rms},
          {"zeta", s.zeta}, {"J", s.component}, {"re", s.amplitude.real()}, {"im", s.amplitude.imag()}};
}

namespace detail {
inline FormField finish_initial(FormField u) {
  u = leray_project(u);
  for (std::size_t c = 0; c < u.count(); ++c) u[c] = dealias(u.scalar(c)).values;
  return u;
}
}  // namespace detail

inline FormField gen_initial(const InitialSpec& spec, const GridPtr& grid, int q) {
  const int n = grid->n();
  if (q < 1 || q > n) throw ParameterError("gen_initial: need 1 <= q <= n");
  switch (spec.kind) {
    case InitialSpec::Kind::random_solenoidal: {
      std::mt19937_64 rng(spec.seed);
      std::normal_distribution<double> normal(0.0, 1.0);
      FormField u(grid, q, Representation::fourier);
      for (std::size_t c = 0; c < u.count(); ++c)
        for (std::size_t m = 0; m < grid->size(); ++m) {
          if (!grid->kept(m) || grid->ksq(m) == 0.0) continue;
          const double amp = std::pow(grid->ksq(m), -spec.decay / 2.0) / std::sqrt(2.0);
          const double re = normal(rng), im = normal(rng);
          u[c][m] = amp * cplx(re, im);
        }
      u = detail::finish_initial(std::move(u));
      const double norm = l2_norm(u);
      if (norm == 0.0) throw ParameterError("gen_initial: random field vanished after projection");
      u *= spec.rms * std::sqrt(grid->volume()) / norm;
      return u;
    }
    case InitialSpec::Kind::single_mode: {
      FormField u(grid, q, Representation::fourier);
      u[MultiIndex(spec.component, n)][grid->flat_index(spec.zeta)] = spec.amplitude;
      u = detail::finish_initial(std::move(u));
      if (spec.amplitude != 0.0 && l2_norm(u) == 0.0)
        throw ParameterError("gen_initial: single mode is exact and vanishes under projection");
      return u;
    }
    case InitialSpec::Kind::taylor_green_analog: {
      if (q != 1) throw ParameterError("gen_initial: taylor_green_analog requires q = 1");
      // u_k = cos(x_{k'}) sin(x_{k+n}) + i sin(x_{k'}),  k' = k mod n + 1.
      FormField u(grid, 1, Representation::physical);
      for (int k = 1; k <= n; ++k) {
        const int kp = k % n + 1;
        auto& comp = u[static_cast<std::size_t>(k - 1)];
        for (std::size_t m = 0; m < grid->size(); ++m) {
          const double a = grid->coordinate(m, kp - 1), b = grid->coordinate(m, k + n - 1);
          comp[m] = spec.amplitude * cplx(std::cos(a) * std::sin(b), std::sin(a));
        }
      }
      return detail::finish_initial(u.to_fourier());
    }
  }
  throw ParameterError("gen_initial: inadmissible kind");
}

}  // namespace dbarns
