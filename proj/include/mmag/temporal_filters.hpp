#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "mmag/core.hpp"

namespace mmag {

/// Temporal passband: centre +/- half width, in Hz, at frame rate `fps`.
struct BandSpec {
  double center_hz = 1.0;
  double half_width_hz = 0.1;
  double fps = 30.0;

  double low_hz() const { return center_hz - half_width_hz; }
  double high_hz() const { return center_hz + half_width_hz; }

  void validate() const {
    if (!(fps > 0.0)) throw Error(Errc::invalid_band, "frame rate must be positive");
    if (!(half_width_hz >= 0.0)) throw Error(Errc::invalid_band, "negative band half width");
    if (!(low_hz() > 0.0)) throw Error(Errc::invalid_band, "band reaches DC");
    if (!(high_hz() < fps / 2.0))
      throw Error(Errc::invalid_band, "band upper edge " + std::to_string(high_hz()) +
                                          " Hz is not below Nyquist " + std::to_string(fps / 2.0));
  }
};

/// Standard deviation, in frames, of the Gaussian whose derivative tunes to
/// `freq_hz` at `fps`: sigma = fps / (4 freq sqrt(2)).
inline double gaussian_sigma(double fps, double freq_hz) {
  if (!(fps > 0.0)) throw Error(Errc::invalid_argument, "frame rate must be positive");
  if (!(freq_hz > 0.0)) throw Error(Errc::invalid_argument, "frequency must be positive");
  if (!(freq_hz < fps / 2.0))
    throw Error(Errc::super_nyquist, std::to_string(freq_hz) + " Hz is not below Nyquist " +
                                         std::to_string(fps / 2.0) + " Hz");
  return fps / (4.0 * freq_hz * std::numbers::sqrt2);
}

inline Index default_kernel_radius(double sigma) {
  return static_cast<Index>(std::ceil(4.0 * sigma));
}

/// Sampled n-th derivative of a Gaussian, taps ordered t = -radius..radius.
template <typename Scalar = double>
struct TemporalKernel {
  Series<Scalar> taps;
  double sigma = 0.0;
  int order = 0;
  Index radius = 0;

  Index length() const { return taps.size(); }
  Scalar at(Index t) const { return taps(t + radius); }
};

namespace detail {

inline double hermite_prob(int n, double z) {
  double h0 = 1.0;
  if (n == 0) return h0;
  double h1 = z;
  for (int k = 1; k < n; ++k) {
    const double h2 = z * h1 - k * h0;
    h0 = h1;
    h1 = h2;
  }
  return h1;
}

inline double factorial(int n) { return std::tgamma(n + 1.0); }

}  // namespace detail

/// n-th derivative of the unit-area Gaussian at t (same units as sigma).
inline double gaussian_derivative(double t, double sigma, int order) {
  const double z = t / sigma;
  const double g = std::exp(-0.5 * z * z) / (std::sqrt(2.0 * std::numbers::pi) * sigma);
  return std::pow(-1.0 / sigma, order) * detail::hermite_prob(order, z) * g;
}

/// Builds the order-n Gaussian derivative kernel, then corrects its moments
/// so that the truncated kernel is an exact differentiator on polynomials:
/// sum_t taps[t] t^k = 0 for k < n and (-1)^n n! for k = n.
template <typename Scalar = double>
TemporalKernel<Scalar> make_gaussian_derivative_kernel(double sigma, int order, Index radius = -1) {
  if (!(sigma > 0.0)) throw Error(Errc::invalid_argument, "sigma must be positive");
  if (order < 1 || order > 3) throw Error(Errc::invalid_argument, "derivative order must be 1..3");
  const Index min_radius = default_kernel_radius(sigma);
  if (radius < 0) radius = min_radius;
  if (radius < min_radius)
    throw Error(Errc::radius_too_small, "radius " + std::to_string(radius) + " < ceil(4 sigma) = " +
                                            std::to_string(min_radius));

  const Index len = 2 * radius + 1;
  Eigen::VectorXd taps(len);
  Eigen::MatrixXd basis(len, order + 1);    // (t/sigma)^k G(t): correction directions
  Eigen::MatrixXd moments(len, order + 1);  // (t/sigma)^k: constraint rows
  for (Index i = 0; i < len; ++i) {
    const double t = static_cast<double>(i - radius);
    taps(i) = gaussian_derivative(t, sigma, order);
    const double g = gaussian_derivative(t, sigma, 0);
    double zk = 1.0;
    for (int k = 0; k <= order; ++k) {
      moments(i, k) = zk;
      basis(i, k) = zk * g;
      zk *= t / sigma;
    }
  }
  Eigen::VectorXd target = Eigen::VectorXd::Zero(order + 1);
  target(order) = std::pow(-1.0, order) * detail::factorial(order) / std::pow(sigma, order);

  const Eigen::MatrixXd system = moments.transpose() * basis;
  const Eigen::VectorXd residual = target - moments.transpose() * taps;
  taps += basis * system.fullPivLu().solve(residual);

  // Restore exact (anti)symmetry lost to rounding in the solve.
  const double parity = (order % 2 == 0) ? 1.0 : -1.0;
  const Eigen::VectorXd mirrored = taps.reverse();
  taps = 0.5 * (taps + parity * mirrored);
  if (order % 2 == 1) taps(radius) = 0.0;

  TemporalKernel<Scalar> kernel;
  kernel.taps = taps.cast<Scalar>();
  kernel.sigma = sigma;
  kernel.order = order;
  kernel.radius = radius;
  return kernel;
}

/// Same-length convolution along time with edge replication:
/// out[t] = sum_j taps[j] * series[clamp(t - j)].
template <typename Derived, typename Scalar>
Series<Scalar> convolve_time(const Eigen::MatrixBase<Derived>& series,
                             const TemporalKernel<Scalar>& kernel) {
  const Index n = series.size();
  if (n < kernel.length())
    throw Error(Errc::series_too_short, "series of " + std::to_string(n) +
                                            " samples is shorter than the kernel (" +
                                            std::to_string(kernel.length()) + ")");
  Series<Scalar> out(n);
  const Index r = kernel.radius;
  for (Index t = 0; t < n; ++t) {
    Scalar acc(0);
    if (t >= r && t + r < n) {
      for (Index j = -r; j <= r; ++j) acc += kernel.at(j) * series(t - j);
    } else {
      for (Index j = -r; j <= r; ++j) acc += kernel.at(j) * series(std::clamp<Index>(t - j, 0, n - 1));
    }
    out(t) = acc;
  }
  return out;
}

/// Zeroes every temporal frequency bin outside [low, high] Hz (mirrored onto
/// negative frequencies) and returns the real inverse transform.
template <typename Derived>
Series<typename Derived::Scalar> ideal_bandpass_time(const Eigen::MatrixBase<Derived>& series,
                                                     const BandSpec& band) {
  using Scalar = typename Derived::Scalar;
  using C = std::complex<Scalar>;
  band.validate();
  const Index n = series.size();
  if (n < 2) throw Error(Errc::series_too_short, "bandpass needs at least two samples");

  Eigen::FFT<Scalar> fft;
  std::vector<C> in(static_cast<size_t>(n)), spec(static_cast<size_t>(n)), out(static_cast<size_t>(n));
  for (Index t = 0; t < n; ++t) in[static_cast<size_t>(t)] = C(series(t), 0);
  fft.fwd(spec.data(), in.data(), n);
  for (Index k = 0; k < n; ++k) {
    const Index signed_k = (k <= n / 2) ? k : k - n;
    const double hz = std::abs(static_cast<double>(signed_k)) * band.fps / static_cast<double>(n);
    if (hz < band.low_hz() || hz > band.high_hz()) spec[static_cast<size_t>(k)] = C(0);
  }
  fft.inv(out.data(), spec.data(), n);
  Series<Scalar> result(n);
  for (Index t = 0; t < n; ++t) result(t) = out[static_cast<size_t>(t)].real();
  return result;
}

/// n x n matrix form of convolve_time, so that filtering every pixel of a
/// time-major stack is one product: filtered = op * stack.
template <typename Scalar>
TimeMatrix<Scalar> convolution_operator(Index n, const TemporalKernel<Scalar>& kernel) {
  if (n < kernel.length())
    throw Error(Errc::series_too_short, "clip of " + std::to_string(n) +
                                            " frames is shorter than the kernel (" +
                                            std::to_string(kernel.length()) + ")");
  TimeMatrix<Scalar> op = TimeMatrix<Scalar>::Zero(n, n);
  for (Index t = 0; t < n; ++t)
    for (Index j = -kernel.radius; j <= kernel.radius; ++j)
      op(t, std::clamp<Index>(t - j, 0, n - 1)) += kernel.at(j);
  return op;
}

/// n x n matrix form of ideal_bandpass_time.
template <typename Scalar>
TimeMatrix<Scalar> bandpass_operator(Index n, const BandSpec& band) {
  TimeMatrix<Scalar> op(n, n);
  for (Index j = 0; j < n; ++j)
    op.col(j) = ideal_bandpass_time(Series<Scalar>::Unit(n, j), band);
  return op;
}

/// Frames within `radius` of either end, where edge replication feeds the kernel.
inline std::vector<Index> boundary_frames(Index length, Index radius) {
  std::vector<Index> out;
  for (Index t = 0; t < length; ++t)
    if (t < radius || t >= length - radius) out.push_back(t);
  return out;
}

}  // namespace mmag
