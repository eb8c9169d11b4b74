#pragma once

#include <functional>
#include <random>

#include "dbarns/dbarns.hpp"

namespace testing_util {

using namespace dbarns;

/// Physical field whose component c is fn(c, x).
inline FormField field_from(const GridPtr& g, int q, const std::function<cplx(std::size_t, const std::vector<double>&)>& fn) {
  FormField u(g, q, Representation::physical);
  std::vector<double> x(static_cast<std::size_t>(g->dims()));
  for (std::size_t m = 0; m < g->size(); ++m) {
    for (int a = 0; a < g->dims(); ++a) x[static_cast<std::size_t>(a)] = g->coordinate(m, a);
    for (std::size_t c = 0; c < u.count(); ++c) u[c][m] = fn(c, x);
  }
  return u;
}

inline FormField random_field(const GridPtr& g, int q, std::uint64_t seed, bool band_limited = false) {
  std::mt19937_64 rng(seed);
  return random_form(g, q, rng, band_limited);
}

inline double rel_diff(const FormField& a, const FormField& b) {
  return l2_norm(a - b.as(a.rep())) / std::max(l2_norm(a), 1e-300);
}

}  // namespace testing_util
