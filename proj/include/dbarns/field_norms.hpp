/// @file field_norms.hpp
/// @brief Single-snapshot Sobolev and Lebesgue norms of forms.
#pragma once

#include <cmath>

#include "dbarns/forms.hpp"

namespace dbarns {

/// (Σ_J Σ_ζ (1+|ζ|²)^s |û_J(ζ)|² vol)^{1/2}
inline double sobolev_hs(const FormField& u, int s) {
  if (s < 0) throw ParameterError("sobolev_hs: s must be >= 0");
  const FormField f = u.to_fourier();
  const auto& g = *u.grid();
  double sum = 0;
  for (std::size_t c = 0; c < f.count(); ++c)
    for (std::size_t m = 0; m < g.size(); ++m) sum += std::pow(1.0 + g.ksq(m), s) * std::norm(f[c][m]);
  return std::sqrt(sum * g.volume());
}

/// (Σ_J ∫ |u_J(x)|^r dx)^{1/r}, rectangle rule.
inline double lr_norm(const FormField& u, double r) {
  if (!(r >= 1.0)) throw ParameterError("lr_norm: r must be >= 1");
  const FormField p = u.to_physical();
  const auto& g = *u.grid();
  double sum = 0;
  for (std::size_t c = 0; c < p.count(); ++c)
    for (std::size_t m = 0; m < g.size(); ++m) sum += std::pow(std::abs(p[c][m]), r);
  return std::pow(sum * g.cell_volume(), 1.0 / r);
}

/// Time exponent paired with r in 2/s + 2n/r = 1.
inline double lps_time_exponent(double r, int n) {
  if (!(r > 2.0 * n)) throw ParameterError("LPS exponent requires r > 2n");
  return 2.0 / (1.0 - 2.0 * n / r);
}

}  // namespace dbarns
