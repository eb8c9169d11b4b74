/// @file common.hpp
/// @brief Shared scalar types, error hierarchy and small helpers.
#pragma once

#include <algorithm>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace dbarns {

using cplx = std::complex<double>;
using index_t = std::ptrdiff_t;

inline constexpr double pi = 3.14159265358979323846;

/// Whether field samples live on the physical grid or are Fourier coefficients.
enum class Representation { physical, fourier };

inline const char* to_string(Representation r) {
  return r == Representation::physical ? "physical" : "fourier";
}

inline Representation representation_from_string(const std::string& s);

// Base class for everything this library throws.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad parameters, mismatched shapes, inadmissible bidegrees.
struct ParameterError : Error {
  using Error::Error;
};

// Reordering a wedge product hit a repeated index.
struct DuplicateIndexError : ParameterError {
  using ParameterError::ParameterError;
};

// A field violated a required constraint; carries the measured residual.
struct ConstraintError : Error {
  ConstraintError(const std::string& what, double residual)
      : Error(what + " (residual " + std::to_string(residual) + ")"), residual(residual) {}
  double residual;
};

// The time integrator produced a non-finite value.
struct BlowUpError : Error {
  BlowUpError(double t)
      : Error("non-finite value encountered at t = " + std::to_string(t)), time(t) {}
  double time;
};

// Advective step constraint violated while configured to fail.
struct CflError : Error {
  using Error::Error;
};

// Persistence failures: truncated blobs, checksum mismatches, bad schema version.
struct FormatError : Error {
  using Error::Error;
};

inline Representation representation_from_string(const std::string& s) {
  if (s == "physical") return Representation::physical;
  if (s == "fourier") return Representation::fourier;
  throw FormatError("unknown representation '" + s + "'");
}

inline std::size_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  std::size_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * static_cast<std::size_t>(n - k + i) / static_cast<std::size_t>(i);
  return r;
}

inline std::size_t ipow(std::size_t base, int exp) {
  std::size_t r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

/// Worker count for per-component parallelism; DBARNS_THREADS overrides the default of 1.
inline unsigned thread_count() {
  if (const char* env = std::getenv("DBARNS_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return static_cast<unsigned>(v);
  }
  return 1;
}

/// Runs fn(i) for i in [0, count). Each index is handled by exactly one worker,
/// so results are identical for every thread count.
template <class Fn>
void for_each_index(std::size_t count, Fn&& fn) {
  const unsigned workers = std::min<std::size_t>(thread_count(), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < count; i += workers) fn(i);
    });
}

}  // namespace dbarns
