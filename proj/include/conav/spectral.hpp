#pragma once

// Spectral (FFT based) operations on uniform samples of 2*pi-periodic functions.
// Samples are taken at s_j = 2*pi*j/N, j = 0..N-1.

#include <conav/core.hpp>

#include <unsupported/Eigen/FFT>

#include <cstddef>
#include <span>
#include <vector>

namespace conav::spectral {

inline constexpr bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

/// Signed wavenumber of DFT bin k for length n. The Nyquist bin maps to +n/2.
inline constexpr long wavenumber(std::size_t k, std::size_t n) {
  return k <= n / 2 ? static_cast<long>(k) : static_cast<long>(k) - static_cast<long>(n);
}

namespace detail {
inline Eigen::FFT<double>& engine() {
  thread_local Eigen::FFT<double> fft;
  return fft;
}
}  // namespace detail

/// Fourier coefficients c_k with f(s_j) = sum_k c_k e^{i k s_j} (forward DFT divided by n).
inline std::vector<Complex> coefficients(std::span<const Complex> values) {
  std::vector<Complex> in(values.begin(), values.end());
  std::vector<Complex> out;
  detail::engine().fwd(out, in);
  const double scale = 1.0 / static_cast<double>(values.size());
  for (auto& c : out) c *= scale;
  return out;
}

/// Inverse of coefficients().
inline std::vector<Complex> synthesize(std::span<const Complex> coeffs) {
  std::vector<Complex> in(coeffs.begin(), coeffs.end());
  std::vector<Complex> out;
  detail::engine().inv(out, in);  // Eigen scales the inverse by 1/n
  const double scale = static_cast<double>(coeffs.size());
  for (auto& v : out) v *= scale;
  return out;
}

/// order-th derivative of the trigonometric interpolant, evaluated at the nodes.
/// The Nyquist mode is dropped for odd orders (its derivative is not representable).
inline std::vector<Complex> derivative(std::span<const Complex> values, int order = 1) {
  const std::size_t n = values.size();
  if (!is_power_of_two(n)) throw ContractError("spectral::derivative: length must be a power of two");
  auto c = coefficients(values);
  for (std::size_t k = 0; k < n; ++k) {
    const long m = wavenumber(k, n);
    if (order % 2 == 1 && 2 * static_cast<std::size_t>(std::abs(m)) == n) {
      c[k] = 0.0;
      continue;
    }
    c[k] *= std::pow(Complex(0.0, static_cast<double>(m)), order);
  }
  return synthesize(c);
}

/// Periodic harmonic conjugate: e^{ins} -> -i sgn(n) e^{ins}; kills the mean and the Nyquist mode.
/// Maps cos(ns) to sin(ns) and sin(ns) to -cos(ns).
inline std::vector<double> conjugate(std::span<const double> values) {
  const std::size_t n = values.size();
  if (!is_power_of_two(n)) throw ContractError("spectral::conjugate: length must be a power of two");
  std::vector<Complex> v(values.begin(), values.end());
  auto c = coefficients(v);
  for (std::size_t k = 0; k < n; ++k) {
    const long m = wavenumber(k, n);
    if (m == 0 || 2 * static_cast<std::size_t>(std::abs(m)) == n) {
      c[k] = 0.0;
    } else {
      c[k] *= Complex(0.0, m > 0 ? -1.0 : 1.0);
    }
  }
  auto out = synthesize(c);
  std::vector<double> result(n);
  for (std::size_t j = 0; j < n; ++j) result[j] = out[j].real();
  return result;
}

/// Resample the trigonometric interpolant on new_n uniform nodes.
/// Upsampling splits the Nyquist coefficient evenly; downsampling folds it back,
/// so resample(resample(v, 2n), n) == v up to rounding.
inline std::vector<Complex> resample(std::span<const Complex> values, std::size_t new_n) {
  const std::size_t n = values.size();
  if (!is_power_of_two(n) || !is_power_of_two(new_n))
    throw ContractError("spectral::resample: lengths must be powers of two");
  if (new_n == n) return {values.begin(), values.end()};
  const auto c = coefficients(values);
  std::vector<Complex> out(new_n, Complex(0.0));
  auto slot = [new_n](long m) { return static_cast<std::size_t>(m >= 0 ? m : m + static_cast<long>(new_n)); };
  if (new_n > n) {
    for (std::size_t k = 0; k < n; ++k) {
      const long m = wavenumber(k, n);
      if (2 * static_cast<std::size_t>(std::abs(m)) == n) {
        out[slot(m)] += 0.5 * c[k];
        out[slot(-m)] += 0.5 * c[k];
      } else {
        out[slot(m)] += c[k];
      }
    }
  } else {
    for (std::size_t k = 0; k < n; ++k) {
      const long m = wavenumber(k, n);
      const std::size_t am = static_cast<std::size_t>(std::abs(m));
      if (2 * am < new_n) {
        out[slot(m)] += c[k];
      } else if (2 * am == new_n) {
        out[new_n / 2] += c[k];
      }
    }
  }
  return synthesize(out);
}

}  // namespace conav::spectral
