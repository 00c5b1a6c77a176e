#pragma once

#include <unsupported/Eigen/FFT>

#include "mmag/core.hpp"

namespace mmag {

namespace detail {

template <typename Scalar>
Eigen::FFT<Scalar>& fft_engine() {
  // kissfft caches twiddles per length; one engine per thread keeps calls pure.
  thread_local Eigen::FFT<Scalar> engine;
  return engine;
}

template <typename Scalar>
void fft2_inplace(ComplexImage<Scalar>& a, bool inverse) {
  using C = std::complex<Scalar>;
  auto& fft = fft_engine<Scalar>();
  const Index rows = a.rows();
  const Index cols = a.cols();

  std::vector<C> in(static_cast<size_t>(std::max(rows, cols)));
  std::vector<C> out(in.size());
  for (Index r = 0; r < rows; ++r) {
    C* row = a.data() + r * cols;
    if (inverse)
      fft.inv(out.data(), row, cols);
    else
      fft.fwd(out.data(), row, cols);
    std::copy_n(out.data(), cols, row);
  }
  for (Index c = 0; c < cols; ++c) {
    for (Index r = 0; r < rows; ++r) in[r] = a(r, c);
    if (inverse)
      fft.inv(out.data(), in.data(), rows);
    else
      fft.fwd(out.data(), in.data(), rows);
    for (Index r = 0; r < rows; ++r) a(r, c) = out[r];
  }
}

}  // namespace detail

/// Unnormalized forward 2-D DFT.
template <typename Derived>
auto fft2(const Eigen::ArrayBase<Derived>& img) {
  using Real = typename Eigen::NumTraits<typename Derived::Scalar>::Real;
  ComplexImage<Real> a = img.derived().template cast<std::complex<Real>>();
  detail::fft2_inplace<Real>(a, false);
  return a;
}

/// Inverse 2-D DFT including the 1/(rows*cols) factor.
template <typename Real>
ComplexImage<Real> ifft2(ComplexImage<Real> spectrum) {
  detail::fft2_inplace<Real>(spectrum, true);
  return spectrum;
}

/// Signed DFT frequency of bin k for length n, in cycles per sample.
inline double dft_frequency(Index k, Index n) {
  const Index half = n / 2;
  const Index signed_k = (k < n - half) ? k : k - n;
  return static_cast<double>(signed_k) / static_cast<double>(n);
}

}  // namespace mmag
