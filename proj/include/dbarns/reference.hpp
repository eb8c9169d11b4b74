/// @file reference.hpp
/// @brief Dense-matrix oracle for the Dolbeault operators on tiny grids.
///
/// Two construction routes:
///  - Route::spectral applies the FFT-based operator to every basis field.
///  - Route::independent assembles the same operator from 1-D Fourier
///    differentiation matrices evaluated by direct summation, with no FFT.
/// Vectors stack the components in canonical multi-index order, each one
/// row-major over (x₁, …, x_{2n}).
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <string>
#include <vector>

#include "dbarns/dolbeault.hpp"
#include "dbarns/forms.hpp"
#include "dbarns/multi_index.hpp"
#include "dbarns/spectral.hpp"

namespace dbarns {

enum class OperatorTag { dbar, dbar_star, laplacian, leray };

inline const char* to_string(OperatorTag t) {
  switch (t) {
    case OperatorTag::dbar: return "dbar";
    case OperatorTag::dbar_star: return "dbar_star";
    case OperatorTag::laplacian: return "laplacian";
    default: return "leray";
  }
}

enum class Route { spectral, independent };

/// Upper bound on rows and columns of a dense oracle.
inline constexpr std::size_t dense_size_limit = 100000;

struct DenseOperator {
  OperatorTag tag;
  int n = 0, N = 0;
  int q_in = 0, q_out = 0;
  Eigen::MatrixXcd matrix;
};

/// Input/output bidegrees. `q` is the level of the complex: dbar_star at level q
/// is the adjoint of dbar at level q and maps (0,q+1) to (0,q).
inline std::pair<int, int> dense_degrees(OperatorTag tag, int q) {
  switch (tag) {
    case OperatorTag::dbar: return {q, q + 1};
    case OperatorTag::dbar_star: return {q + 1, q};
    default: return {q, q};
  }
}

inline Eigen::VectorXcd vec(const FormField& u) {
  const FormField p = u.to_physical();
  const std::size_t G = u.grid()->size();
  Eigen::VectorXcd v(static_cast<index_t>(G * p.count()));
  for (std::size_t c = 0; c < p.count(); ++c)
    for (std::size_t m = 0; m < G; ++m) v(static_cast<index_t>(c * G + m)) = p[c][m];
  return v;
}

inline FormField unvec(const Eigen::VectorXcd& v, const GridPtr& grid, int q) {
  FormField u(grid, q, Representation::physical);
  const std::size_t G = grid->size();
  if (static_cast<std::size_t>(v.size()) != G * u.count()) throw ParameterError("unvec: length mismatch");
  for (std::size_t c = 0; c < u.count(); ++c)
    for (std::size_t m = 0; m < G; ++m) u[c][m] = v(static_cast<index_t>(c * G + m));
  return u;
}

inline FormField apply_operator(OperatorTag tag, const FormField& u) {
  switch (tag) {
    case OperatorTag::dbar: return dbar(u);
    case OperatorTag::dbar_star: return dbar_star(u);
    case OperatorTag::laplacian: return laplacian_q(u);
    default: return leray_project(u);
  }
}

namespace detail {

/// Periodic spectral derivative of order `order` on N points, lattice (-N/2, N/2].
inline Eigen::MatrixXcd fourier_diff_1d(int N, int order) {
  Eigen::MatrixXcd D = Eigen::MatrixXcd::Zero(N, N);
  const double h = 2.0 * pi / N;
  for (int i = 0; i < N; ++i)
    for (int k = 0; k < N; ++k) {
      cplx s{};
      for (int m = -N / 2 + 1; m <= N / 2; ++m) s += std::pow(cplx(0.0, m), order) * std::exp(cplx(0.0, m * (i - k) * h));
      D(i, k) = s / static_cast<double>(N);
    }
  return D;
}

/// Lifts a 1-D operator to act along `axis` of the 2n-dimensional grid.
inline Eigen::MatrixXcd along_axis(const Eigen::MatrixXcd& d1, const SpectralGrid& g, int axis) {
  const std::size_t G = g.size();
  const std::size_t N = static_cast<std::size_t>(g.N());
  std::size_t stride = 1;
  for (int b = g.dims() - 1; b > axis; --b) stride *= N;
  Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(static_cast<index_t>(G), static_cast<index_t>(G));
  for (std::size_t x = 0; x < G; ++x) {
    const std::size_t xa = (x / stride) % N;
    const std::size_t base = x - xa * stride;
    for (std::size_t ya = 0; ya < N; ++ya)
      M(static_cast<index_t>(x), static_cast<index_t>(base + ya * stride)) =
          d1(static_cast<index_t>(xa), static_cast<index_t>(ya));
  }
  return M;
}

struct IndependentCalculus {
  const SpectralGrid& g;
  std::vector<Eigen::MatrixXcd> dx;  // ∂/∂x_a
  std::vector<Eigen::MatrixXcd> d2;  // ∂²/∂x_a²

  explicit IndependentCalculus(const SpectralGrid& grid) : g(grid) {
    const auto d1 = fourier_diff_1d(g.N(), 1);
    const auto dd = fourier_diff_1d(g.N(), 2);
    for (int a = 0; a < g.dims(); ++a) {
      dx.push_back(along_axis(d1, g, a));
      d2.push_back(along_axis(dd, g, a));
    }
  }

  Eigen::MatrixXcd dbar_j(int j) const { return 0.5 * (dx[j - 1] + cplx(0, 1) * dx[j - 1 + g.n()]); }
  Eigen::MatrixXcd del_j(int j) const { return 0.5 * (dx[j - 1] - cplx(0, 1) * dx[j - 1 + g.n()]); }

  Eigen::MatrixXcd dbar(int q) const {
    const int n = g.n();
    const auto in = enumerate(n, q), out = enumerate(n, q + 1);
    const index_t G = static_cast<index_t>(g.size());
    Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(G * static_cast<index_t>(out.size()), G * static_cast<index_t>(in.size()));
    for (std::size_t r = 0; r < out.size(); ++r)
      for (std::size_t a = 0; a < out[r].indices().size(); ++a) {
        const double sign = a % 2 == 0 ? 1.0 : -1.0;
        const auto c = static_cast<index_t>(index_of(out[r].without(a), n));
        M.block(static_cast<index_t>(r) * G, c * G, G, G) += sign * dbar_j(out[r][a]);
      }
    return M;
  }

  Eigen::MatrixXcd dbar_star(int q) const {
    const int n = g.n();
    const auto in = enumerate(n, q + 1), out = enumerate(n, q);
    const index_t G = static_cast<index_t>(g.size());
    Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(G * static_cast<index_t>(out.size()), G * static_cast<index_t>(in.size()));
    for (std::size_t r = 0; r < out.size(); ++r)
      for (int j = 1; j <= n; ++j) {
        if (out[r].contains(j)) continue;
        const auto [sign, K] = insert_sign(j, out[r], n);
        const auto c = static_cast<index_t>(index_of(K, n));
        M.block(static_cast<index_t>(r) * G, c * G, G, G) -= static_cast<double>(sign) * del_j(j);
      }
    return M;
  }

  /// -¼ Σ_a ∂²/∂x_a² on every component.
  Eigen::MatrixXcd laplacian(int q) const {
    const index_t G = static_cast<index_t>(g.size());
    Eigen::MatrixXcd scalar = Eigen::MatrixXcd::Zero(G, G);
    for (const auto& m : d2) scalar -= 0.25 * m;
    return block_diag(scalar, binomial(g.n(), q));
  }

  /// φ, then ∂̄*∂̄, plus the mean (zero mode) on every component.
  Eigen::MatrixXcd leray(int q) const {
    const index_t G = static_cast<index_t>(g.size());
    const auto dims = g.dims();
    // Kernel of φ by direct summation over nonzero modes; depends only on x - y.
    Eigen::VectorXcd kernel(G);
    for (index_t d = 0; d < G; ++d) {
      cplx s{};
      for (std::size_t m = 1; m < g.size(); ++m) {
        double phase = 0;
        const auto z = g.zeta(m);
        for (int a = 0; a < dims; ++a) phase += z[static_cast<std::size_t>(a)] * g.coordinate(static_cast<std::size_t>(d), a);
        s += (4.0 / g.ksq(m)) * std::exp(cplx(0.0, phase));
      }
      kernel(d) = s / static_cast<double>(G);
    }
    const std::size_t N = static_cast<std::size_t>(g.N());
    Eigen::MatrixXcd phi(G, G);
    for (std::size_t x = 0; x < g.size(); ++x)
      for (std::size_t y = 0; y < g.size(); ++y) {
        // flat index of (x - y) mod N per axis
        std::size_t diff = 0, rx = x, ry = y, place = 1;
        for (int a = 0; a < dims; ++a) {
          const std::size_t xa = rx % N, ya = ry % N;
          rx /= N;
          ry /= N;
          diff += ((xa + N - ya) % N) * place;
          place *= N;
        }
        phi(static_cast<index_t>(x), static_cast<index_t>(y)) = kernel(static_cast<index_t>(diff));
      }
    const std::size_t comps = binomial(g.n(), q);
    Eigen::MatrixXcd mean = Eigen::MatrixXcd::Constant(G, G, 1.0 / static_cast<double>(G));
    Eigen::MatrixXcd P = block_diag(mean, comps);
    if (q < g.n()) P += dbar_star(q) * dbar(q) * block_diag(phi, comps);
    return P;
  }

  static Eigen::MatrixXcd block_diag(const Eigen::MatrixXcd& b, std::size_t count) {
    const index_t G = b.rows();
    const index_t C = static_cast<index_t>(count);
    Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(G * C, G * C);
    for (index_t c = 0; c < C; ++c) M.block(c * G, c * G, G, G) = b;
    return M;
  }
};

}  // namespace detail

inline DenseOperator dense_build(OperatorTag tag, int n, int q, int N, Route route = Route::spectral) {
  const auto [q_in, q_out] = dense_degrees(tag, q);
  if (q_in < 0 || q_out < 0 || q_in > n || q_out > n) throw ParameterError("dense_build: bidegree outside [0, n]");
  if (tag == OperatorTag::leray && q == 0) throw ParameterError("dense_build: leray needs q >= 1");
  const std::size_t G = ipow(static_cast<std::size_t>(N), 2 * n);
  const std::size_t cols = G * binomial(n, q_in), rows = G * binomial(n, q_out);
  if (cols > dense_size_limit || rows > dense_size_limit)
    throw ParameterError("dense_build: operator of size " + std::to_string(rows) + "x" + std::to_string(cols) +
                         " exceeds the oracle limit");
  const GridPtr grid = make_grid(n, N);
  DenseOperator op{tag, n, N, q_in, q_out, {}};

  if (route == Route::spectral) {
    op.matrix.resize(static_cast<index_t>(rows), static_cast<index_t>(cols));
    for (std::size_t col = 0; col < cols; ++col) {
      FormField e(grid, q_in, Representation::physical);
      e[col / G][col % G] = 1.0;
      op.matrix.col(static_cast<index_t>(col)) = vec(apply_operator(tag, e));
    }
    return op;
  }

  const detail::IndependentCalculus calc(*grid);
  switch (tag) {
    case OperatorTag::dbar: op.matrix = calc.dbar(q); break;
    case OperatorTag::dbar_star: op.matrix = calc.dbar_star(q); break;
    case OperatorTag::laplacian: op.matrix = calc.laplacian(q); break;
    case OperatorTag::leray: op.matrix = calc.leray(q); break;
  }
  return op;
}

/// ‖dense·vec(u) - vec(spectral_op(u))‖ / ‖u‖ with the independently built matrix.
inline double oracle_compare(OperatorTag tag, const FormField& u, Route route = Route::independent) {
  const int q = tag == OperatorTag::dbar_star ? u.q() - 1 : u.q();
  const DenseOperator op = dense_build(tag, u.n(), q, u.grid()->N(), route);
  const Eigen::VectorXcd x = vec(u);
  const double norm = x.norm();
  if (norm == 0) return 0.0;
  return (op.matrix * x - vec(apply_operator(tag, u))).norm() / norm;
}

}  // namespace dbarns
