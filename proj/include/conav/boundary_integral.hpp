#pragma once

// Nystrom discretization of the Riemann-Hilbert boundary integral equation
//
//     upsilon - R upsilon = -H mu,     c = [H upsilon - (I - R) mu] / 2
//
// for the unknown imaginary part upsilon and constant c of  A(s) f(gamma(s)) = mu(s) + c + i upsilon(s),
// with f holomorphic on the domain to the left of the curve.
//
// Kernel:  K(s,t) = (1/pi) (A(s)/A(t)) gamma'(t) / (gamma(t) - gamma(s)),  R = Im K,  H = Re K.
//   interior maps (bounded domain):   A(s) = gamma(s) - z_c
//   exterior maps (unbounded domain): A(s) = 1
//
// As t -> s,  K -> 1/(pi (t-s)) + (1/pi) [gamma''/(2 gamma') - A'/A].  The imaginary part is continuous;
// the real part is split as (1/2pi) cot((t-s)/2) plus a continuous remainder. The principal-value
// convolution with (1/2pi) cot((t-s)/2) equals minus the periodic conjugation operator, applied
// spectrally. All integrals use the trapezoidal rule with weight 2pi/N.
//
// The constant formula above (rather than c = [H mu - (I - R) upsilon]/2) is the one that reproduces
// the analytic constant for a disk of radius 2: c = log 2 for the interior map, -log 2 for the exterior.

#include <conav/core.hpp>
#include <conav/geometry.hpp>
#include <conav/spectral.hpp>

#include <Eigen/Dense>

#include <cstdint>
#include <fstream>
#include <span>
#include <string>
#include <vector>

namespace conav {

/// Which multiplier A(s) the kernel uses.
enum class KernelKind { interior, exterior };

/// Kernel values at node pairs. The quadrature weight 2pi/N is applied by the operators, not stored.
struct KernelOperators {
  ParametricCurve curve;
  Complex center{};
  KernelKind kind = KernelKind::interior;
  Eigen::MatrixXd R_matrix;  // R(s_i, t_j)
  Eigen::MatrixXd H_smooth;  // Re K(s_i, t_j) - (1/2pi) cot((t_j - s_i)/2)

  std::size_t size() const { return curve.size(); }
  double weight() const { return curve.node_spacing(); }
};

struct BoundaryData {
  std::vector<double> mu;
  std::vector<double> upsilon;
  double c_const = 0.0;
  double residual = 0.0;   // || upsilon - R upsilon + H mu ||_inf
  double condition = 0.0;  // estimated 1-norm condition number of I - R
  double c_spread = 0.0;   // max deviation of the pointwise constant formula from its mean
};

/// Solves above this estimated condition number are rejected.
inline constexpr double kMaxCondition = 1e12;

/// Total change of arg(gamma(s) - z) over one period divided by 2pi, from node increments.
inline int winding_about(const ParametricCurve& curve, Complex z) {
  const auto& g = curve.gamma();
  const std::size_t n = g.size();
  double total = 0.0;
  for (std::size_t j = 0; j < n; ++j) total += std::arg((g[(j + 1) % n] - z) / (g[j] - z));
  return static_cast<int>(std::lround(total / kTwoPi));
}

/// Assemble R and the smooth part of H for one curve and center.
/// Throws SingularConfigurationError if the center lies on the curve or has the wrong winding
/// (interior: curve must wind +1 about the center; exterior: -1).
inline KernelOperators build_kernels(const ParametricCurve& curve, Complex center,
                                     KernelKind kind = KernelKind::interior) {
  const std::size_t n = curve.size();
  const auto& g = curve.gamma();
  const auto& d1 = curve.dgamma();
  const auto& d2 = curve.ddgamma();
  for (std::size_t j = 0; j < n; ++j) {
    if (std::abs(g[j] - center) <= 1e-14 * std::max(1.0, curve.diameter()))
      throw SingularConfigurationError("build_kernels: center lies on the curve");
  }
  const int wind = winding_about(curve, center);
  const int expected = kind == KernelKind::interior ? 1 : -1;
  if (wind != expected)
    throw SingularConfigurationError("build_kernels: curve winds " + std::to_string(wind) +
                                     " times about the center, expected " + std::to_string(expected));

  KernelOperators ops;
  ops.curve = curve;
  ops.center = center;
  ops.kind = kind;
  ops.R_matrix.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  ops.H_smooth.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));

  const double h = curve.node_spacing();
  std::vector<Complex> A(n, Complex(1.0));
  if (kind == KernelKind::interior)
    for (std::size_t j = 0; j < n; ++j) A[j] = g[j] - center;

  // cot((t_j - s_i)/2) depends only on (j - i) mod n
  std::vector<double> cot_table(n, 0.0);
  for (std::size_t k = 1; k < n; ++k) cot_table[k] = 1.0 / std::tan(0.5 * h * static_cast<double>(k));

  for (std::size_t i = 0; i < n; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    for (std::size_t j = 0; j < n; ++j) {
      const auto jj = static_cast<Eigen::Index>(j);
      if (i == j) {
        Complex lim = d2[i] / (2.0 * d1[i]);
        if (kind == KernelKind::interior) lim -= d1[i] / A[i];
        ops.R_matrix(ii, jj) = lim.imag() / kPi;
        ops.H_smooth(ii, jj) = lim.real() / kPi;
      } else {
        const Complex k = (A[i] / A[j]) * d1[j] / (g[j] - g[i]) / kPi;
        ops.R_matrix(ii, jj) = k.imag();
        ops.H_smooth(ii, jj) = k.real() - cot_table[(j + n - i) % n] / kTwoPi;
      }
    }
  }
  return ops;
}

namespace detail {
inline Eigen::Map<const Eigen::VectorXd> as_vector(std::span<const double> v) {
  return {v.data(), static_cast<Eigen::Index>(v.size())};
}
inline void check_length(const KernelOperators& ops, std::size_t len, const char* who) {
  if (len != ops.size()) throw ContractError(std::string(who) + ": length does not match node count");
}
}  // namespace detail

/// H g = -conj(g) + (2pi/N) H_smooth g.
inline std::vector<double> apply_H(const KernelOperators& ops, std::span<const double> g) {
  detail::check_length(ops, g.size(), "apply_H");
  auto out = spectral::conjugate(g);
  const Eigen::VectorXd smooth = ops.weight() * (ops.H_smooth * detail::as_vector(g));
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = -out[j] + smooth(static_cast<Eigen::Index>(j));
  return out;
}

/// R g = (2pi/N) R_matrix g.
inline std::vector<double> apply_R(const KernelOperators& ops, std::span<const double> g) {
  detail::check_length(ops, g.size(), "apply_R");
  const Eigen::VectorXd r = ops.weight() * (ops.R_matrix * detail::as_vector(g));
  return {r.data(), r.data() + r.size()};
}

/// Solve (I - R) upsilon = -H mu densely and recover the constant c.
inline BoundaryData solve_riemann_hilbert(const KernelOperators& ops, std::span<const double> mu) {
  detail::check_length(ops, mu.size(), "solve_riemann_hilbert");
  for (double v : mu)
    if (!std::isfinite(v)) throw ContractError("solve_riemann_hilbert: non-finite mu");
  const auto n = static_cast<Eigen::Index>(ops.size());
  const Eigen::MatrixXd system = Eigen::MatrixXd::Identity(n, n) - ops.weight() * ops.R_matrix;
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(system);
  const double rcond = lu.rcond();
  const double condition = rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity();
  if (!(condition <= kMaxCondition))
    throw SolverError("solve_riemann_hilbert: system is singular or badly conditioned (condition estimate " +
                          std::to_string(condition) + ")",
                      condition);

  const auto h_mu = apply_H(ops, mu);
  const Eigen::VectorXd rhs = -detail::as_vector(h_mu);
  const Eigen::VectorXd ups = lu.solve(rhs);

  BoundaryData out;
  out.mu.assign(mu.begin(), mu.end());
  out.upsilon.assign(ups.data(), ups.data() + ups.size());
  out.condition = condition;
  out.residual = (system * ups - rhs).cwiseAbs().maxCoeff();

  const auto h_ups = apply_H(ops, out.upsilon);
  const Eigen::VectorXd i_minus_r_mu = system * detail::as_vector(mu);
  std::vector<double> c_pointwise(mu.size());
  double c_sum = 0.0;
  for (std::size_t j = 0; j < mu.size(); ++j) {
    c_pointwise[j] = 0.5 * (h_ups[j] - i_minus_r_mu(static_cast<Eigen::Index>(j)));
    c_sum += c_pointwise[j];
  }
  out.c_const = c_sum / static_cast<double>(mu.size());
  for (double v : c_pointwise) out.c_spread = std::max(out.c_spread, std::abs(v - out.c_const));
  return out;
}

/// Debug dump: "<prefix>.R.bin" and "<prefix>.H.bin", each a uint64 N followed by N*N row-major doubles.
inline void write_kernel_dump(const KernelOperators& ops, const std::string& prefix) {
  auto dump = [&](const Eigen::MatrixXd& m, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("write_kernel_dump: cannot open " + path);
    const std::uint64_t n = static_cast<std::uint64_t>(m.rows());
    out.write(reinterpret_cast<const char*>(&n), sizeof n);
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = m;
    out.write(reinterpret_cast<const char*>(rm.data()), static_cast<std::streamsize>(sizeof(double) * rm.size()));
  };
  dump(ops.R_matrix, prefix + ".R.bin");
  dump(ops.H_smooth, prefix + ".H.bin");
}

}  // namespace conav
