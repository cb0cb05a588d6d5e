#pragma once

// Trigonometric toolkit on uniform periodic grids: DFT wrappers, spectral
// differentiation, zero-padded resampling and local high-order interpolation
// of band-limited samples at arbitrary points.
//
// Everything is templated on the real scalar and explicitly instantiated for
// double and long double in spectral.cpp.

#include <Eigen/Core>

#include <array>
#include <complex>

namespace curveflow {

template <typename Scalar>
using Complex = std::complex<Scalar>;
template <typename Scalar>
using ComplexVector = Eigen::Matrix<Complex<Scalar>, Eigen::Dynamic, 1>;
template <typename Scalar>
using RealVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Point2 = Eigen::Matrix<Scalar, 2, 1>;

using Index = Eigen::Index;

template <typename Scalar>
constexpr Scalar kPi = Scalar(3.14159265358979323846264338327950288L);

constexpr bool is_power_of_two(Index n) { return n > 0 && (n & (n - 1)) == 0; }

namespace spectral {

/// Signed wavenumber held in DFT slot j of an n-point transform. For even n
/// the single Nyquist slot maps to -n/2.
constexpr Index wavenumber(Index j, Index n) { return j < (n + 1) / 2 ? j : j - n; }

/// Unnormalized forward DFT: X_k = sum_j x_j exp(-2 pi i j k / n).
template <typename Scalar>
ComplexVector<Scalar> forward(const ComplexVector<Scalar>& values);

/// Inverse of forward(), including the 1/n factor.
template <typename Scalar>
ComplexVector<Scalar> inverse(const ComplexVector<Scalar>& coefficients);

template <typename Scalar>
ComplexVector<Scalar> forward_real(const RealVector<Scalar>& values);

/// Multiplies DFT coefficients by (2 pi i k / period)^order. The Nyquist slot
/// is zeroed for every order >= 1.
template <typename Scalar>
ComplexVector<Scalar> differentiate(const ComplexVector<Scalar>& coefficients, int order,
                                    Scalar period);

/// Re-expresses the DFT of an n-point grid on a p-point grid of the same
/// period (zero padding when p > n, truncation when p < n), rescaled so that
/// inverse() of the result samples the same trigonometric interpolant. The
/// Nyquist coefficient is split evenly between +n/2 and -n/2 when padding.
template <typename Scalar>
ComplexVector<Scalar> resize_spectrum(const ComplexVector<Scalar>& coefficients, Index p);

/// Samples on a p-point grid of the trigonometric interpolant of `values`.
template <typename Scalar>
ComplexVector<Scalar> upsample(const ComplexVector<Scalar>& values, Index p);

/// Antiderivative of a periodic real function sampled on [0, 1): returns the
/// mean and the zero-start periodic part q with  int_0^u h = mean * u + q(u).
template <typename Scalar>
struct Antiderivative {
  Scalar mean;
  RealVector<Scalar> periodic_part;
};

template <typename Scalar>
Antiderivative<Scalar> integrate_periodic(const RealVector<Scalar>& values);

/// Barycentric Lagrange interpolation on a 16-point equispaced stencil of
/// periodic samples over [0, 1). Accurate to round-off for content well
/// below the grid Nyquist frequency, so callers oversample first.
template <typename Scalar, typename Value>
class PeriodicInterpolator {
 public:
  static constexpr int kStencil = 16;
  using Samples = Eigen::Matrix<Value, Eigen::Dynamic, 1>;

  explicit PeriodicInterpolator(Samples samples);

  Value operator()(Scalar u) const;
  Index size() const { return samples_.size(); }

 private:
  Samples samples_;
  std::array<Scalar, kStencil> weights_;
};

}  // namespace spectral
}  // namespace curveflow
