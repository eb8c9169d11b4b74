/// @file spectral.hpp
/// @brief Periodic grid on the torus [0,2π)^{2n} ≅ ℂⁿ, FFT-backed transforms and
/// the Fourier symbols of the Cauchy-Riemann operators.
///
/// Coordinates are z_j = x_j + i x_{j+n}. A mode e^{iζ·x} with ζ in the lattice
/// {-N/2+1, …, N/2}^{2n} is an eigenfunction of ∂̄_j = ½(∂_{x_j} + i∂_{x_{j+n}})
/// with eigenvalue σ_j(ζ) = (i/2)(ζ_j + iζ_{j+n}).
///
/// Transforms are forward-normalized: f̂(ζ) = N^{-2n} Σ_x f(x) e^{-iζ·x} and
/// f(x) = Σ_ζ f̂(ζ) e^{iζ·x}, so coefficients equal mode amplitudes.
#pragma once

#include <fftw3.h>

#include <cmath>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include "dbarns/common.hpp"

namespace dbarns {

namespace detail {
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace detail

class SpectralGrid {
 public:
  SpectralGrid(int n, int N) : n_(n), N_(N), dims_(2 * n) {
    if (n < 1) throw ParameterError("SpectralGrid: n must be >= 1");
    if (N < 4 || (N & (N - 1)) != 0) throw ParameterError("SpectralGrid: N must be a power of two >= 4");
    size_ = ipow(static_cast<std::size_t>(N), dims_);

    zeta_.resize(size_ * static_cast<std::size_t>(dims_));
    ksq_.resize(size_);
    mask_.resize(size_);
    sigma_.assign(static_cast<std::size_t>(n), std::vector<cplx>(size_));
    del_.assign(static_cast<std::size_t>(n), std::vector<cplx>(size_));
    std::vector<int> z(static_cast<std::size_t>(dims_));
    for (std::size_t flat = 0; flat < size_; ++flat) {
      std::size_t rem = flat;
      for (int a = dims_ - 1; a >= 0; --a) {
        const int k = static_cast<int>(rem % static_cast<std::size_t>(N));
        rem /= static_cast<std::size_t>(N);
        z[static_cast<std::size_t>(a)] = k <= N / 2 ? k : k - N;
      }
      double s = 0;
      bool keep = true;
      for (int a = 0; a < dims_; ++a) {
        const int za = z[static_cast<std::size_t>(a)];
        zeta_[flat * static_cast<std::size_t>(dims_) + static_cast<std::size_t>(a)] = za;
        s += static_cast<double>(za) * za;
        // 2/3 rule: keep |ζ_a| <= N/3 on every axis.
        if (3 * std::abs(za) > N) keep = false;
      }
      ksq_[flat] = s;
      mask_[flat] = keep ? 1 : 0;
      for (int j = 0; j < n; ++j) {
        sigma_[static_cast<std::size_t>(j)][flat] =
            dbar_symbol(z[static_cast<std::size_t>(j)], z[static_cast<std::size_t>(j + n)]);
        del_[static_cast<std::size_t>(j)][flat] =
            del_symbol(z[static_cast<std::size_t>(j)], z[static_cast<std::size_t>(j + n)]);
      }
    }

    std::vector<int> shape(static_cast<std::size_t>(dims_), N);
    auto* scratch = fftw_alloc_complex(size_);
    {
      std::lock_guard lock(detail::fftw_planner_mutex());
      const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
      fwd_ = fftw_plan_dft(dims_, shape.data(), scratch, scratch, FFTW_FORWARD, flags);
      inv_ = fftw_plan_dft(dims_, shape.data(), scratch, scratch, FFTW_BACKWARD, flags);
    }
    fftw_free(scratch);
    if (!fwd_ || !inv_) throw Error("SpectralGrid: FFTW planning failed");
  }

  SpectralGrid(const SpectralGrid&) = delete;
  SpectralGrid& operator=(const SpectralGrid&) = delete;

  ~SpectralGrid() {
    std::lock_guard lock(detail::fftw_planner_mutex());
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(inv_);
  }

  /// ∂̄_j symbol for a mode with real wavenumbers (ζ_j, ζ_{j+n}).
  static cplx dbar_symbol(double zj, double zjn) { return cplx(0.0, 0.5) * cplx(zj, zjn); }
  /// ∂_j symbol, ∂_j = ½(∂_{x_j} - i∂_{x_{j+n}}).
  static cplx del_symbol(double zj, double zjn) { return cplx(0.0, 0.5) * cplx(zj, -zjn); }

  int n() const { return n_; }
  int N() const { return N_; }
  int dims() const { return dims_; }
  std::size_t size() const { return size_; }
  double volume() const { return std::pow(2.0 * pi, dims_); }
  /// Rectangle-rule weight of one grid sample.
  double cell_volume() const { return volume() / static_cast<double>(size_); }
  double spacing() const { return 2.0 * pi / N_; }

  /// Lattice vector of the mode stored at `flat`.
  std::span<const int> zeta(std::size_t flat) const {
    return {zeta_.data() + flat * static_cast<std::size_t>(dims_), static_cast<std::size_t>(dims_)};
  }
  double ksq(std::size_t flat) const { return ksq_[flat]; }
  bool kept(std::size_t flat) const { return mask_[flat] != 0; }
  /// σ_j over the whole lattice, 1 <= j <= n.
  const std::vector<cplx>& sigma(int j) const { return sigma_.at(static_cast<std::size_t>(j - 1)); }
  const std::vector<cplx>& del(int j) const { return del_.at(static_cast<std::size_t>(j - 1)); }

  /// Storage position of lattice vector ζ (entries in (-N/2, N/2]).
  std::size_t flat_index(std::span<const int> z) const {
    if (static_cast<int>(z.size()) != dims_) throw ParameterError("flat_index: wrong lattice dimension");
    std::size_t flat = 0;
    for (int za : z) {
      if (za <= -N_ / 2 || za > N_ / 2) throw ParameterError("flat_index: wavenumber outside lattice");
      flat = flat * static_cast<std::size_t>(N_) + static_cast<std::size_t>(za < 0 ? za + N_ : za);
    }
    return flat;
  }

  /// Physical coordinate of sample `flat` along axis a (0-based).
  double coordinate(std::size_t flat, int a) const {
    std::size_t rem = flat;
    for (int b = dims_ - 1; b > a; --b) rem /= static_cast<std::size_t>(N_);
    return spacing() * static_cast<double>(rem % static_cast<std::size_t>(N_));
  }

  void fft_forward(std::span<cplx> data) const {
    auto* p = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(fwd_, p, p);
    const double scale = 1.0 / static_cast<double>(size_);
    for (auto& v : data) v *= scale;
  }
  void fft_inverse(std::span<cplx> data) const {
    auto* p = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(inv_, p, p);
  }

 private:
  int n_, N_, dims_;
  std::size_t size_ = 0;
  std::vector<int> zeta_;
  std::vector<double> ksq_;
  std::vector<unsigned char> mask_;
  std::vector<std::vector<cplx>> sigma_, del_;
  fftw_plan fwd_ = nullptr;
  fftw_plan inv_ = nullptr;
};

using GridPtr = std::shared_ptr<const SpectralGrid>;

inline GridPtr make_grid(int n, int N) { return std::make_shared<const SpectralGrid>(n, N); }

/// One complex scalar field (a single component u_J of a form).
struct ScalarField {
  GridPtr grid;
  Representation rep = Representation::physical;
  std::vector<cplx> values;

  ScalarField() = default;
  ScalarField(GridPtr g, Representation r) : grid(std::move(g)), rep(r), values(grid->size()) {}
  ScalarField(GridPtr g, Representation r, std::vector<cplx> v) : grid(std::move(g)), rep(r), values(std::move(v)) {
    if (values.size() != grid->size()) throw ParameterError("ScalarField: value count does not match grid");
  }
};

inline ScalarField forward_transform(ScalarField f) {
  if (f.rep != Representation::physical) throw ParameterError("forward_transform: field is not physical");
  f.grid->fft_forward(f.values);
  f.rep = Representation::fourier;
  return f;
}

inline ScalarField inverse_transform(ScalarField f) {
  if (f.rep != Representation::fourier) throw ParameterError("inverse_transform: field is not in Fourier form");
  f.grid->fft_inverse(f.values);
  f.rep = Representation::physical;
  return f;
}

/// σ_j(ζ) for an arbitrary lattice point of a grid with complex dimension n.
inline cplx dbar_symbol(int j, std::span<const int> zeta, int n) {
  if (j < 1 || j > n) throw ParameterError("dbar_symbol: j outside [1, n]");
  return SpectralGrid::dbar_symbol(zeta[static_cast<std::size_t>(j - 1)], zeta[static_cast<std::size_t>(j - 1 + n)]);
}

inline cplx del_symbol(int j, std::span<const int> zeta, int n) {
  if (j < 1 || j > n) throw ParameterError("del_symbol: j outside [1, n]");
  return SpectralGrid::del_symbol(zeta[static_cast<std::size_t>(j - 1)], zeta[static_cast<std::size_t>(j - 1 + n)]);
}

/// Applies φ, the inverse of the generalized Laplacian (multiplier |ζ|²/4).
/// The zero mode is sent to 0.
inline ScalarField inv_laplacian(ScalarField f) {
  if (f.rep != Representation::fourier) throw ParameterError("inv_laplacian: field is not in Fourier form");
  const auto& g = *f.grid;
  for (std::size_t m = 0; m < g.size(); ++m) f.values[m] = g.ksq(m) == 0.0 ? cplx{} : f.values[m] * (4.0 / g.ksq(m));
  return f;
}

inline ScalarField dealias(ScalarField f) {
  if (f.rep != Representation::fourier) throw ParameterError("dealias: field is not in Fourier form");
  const auto& g = *f.grid;
  for (std::size_t m = 0; m < g.size(); ++m)
    if (!g.kept(m)) f.values[m] = {};
  return f;
}

/// exp(-μ|ζ|²dt/4): exact propagator of ∂_t û = -μ(|ζ|²/4)û over one step.
inline double heat_multiplier(double mu, double dt, double ksq) { return std::exp(-mu * ksq * dt / 4.0); }

}  // namespace dbarns
