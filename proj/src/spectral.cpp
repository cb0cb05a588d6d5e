#include "curveflow/spectral.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>

namespace curveflow::spectral {

namespace {

template <typename Scalar>
Eigen::FFT<Scalar>& fft_engine() {
  // kissfft caches twiddles per size; one engine per thread keeps that cache
  // private.
  thread_local Eigen::FFT<Scalar> engine;
  return engine;
}

}  // namespace

template <typename Scalar>
ComplexVector<Scalar> forward(const ComplexVector<Scalar>& values) {
  ComplexVector<Scalar> out(values.size());
  fft_engine<Scalar>().fwd(out, values);
  return out;
}

template <typename Scalar>
ComplexVector<Scalar> inverse(const ComplexVector<Scalar>& coefficients) {
  ComplexVector<Scalar> out(coefficients.size());
  fft_engine<Scalar>().inv(out, coefficients);
  return out;
}

template <typename Scalar>
ComplexVector<Scalar> forward_real(const RealVector<Scalar>& values) {
  return forward<Scalar>(values.template cast<Complex<Scalar>>());
}

template <typename Scalar>
ComplexVector<Scalar> differentiate(const ComplexVector<Scalar>& coefficients, int order,
                                    Scalar period) {
  const Index n = coefficients.size();
  ComplexVector<Scalar> out = coefficients;
  if (order == 0) return out;
  const Scalar base = 2 * kPi<Scalar> / period;
  for (Index j = 0; j < n; ++j) {
    const Index k = wavenumber(j, n);
    if (n % 2 == 0 && k == -n / 2) {
      out(j) = Complex<Scalar>(0);
      continue;
    }
    out(j) *= std::pow(Complex<Scalar>(0, base * Scalar(k)), order);
  }
  return out;
}

template <typename Scalar>
ComplexVector<Scalar> resize_spectrum(const ComplexVector<Scalar>& coefficients, Index p) {
  const Index n = coefficients.size();
  ComplexVector<Scalar> out = ComplexVector<Scalar>::Zero(p);
  const Scalar scale = Scalar(p) / Scalar(n);
  const bool n_even = n % 2 == 0;
  const Index half = n / 2;
  for (Index j = 0; j < n; ++j) {
    const Index k = wavenumber(j, n);
    Complex<Scalar> c = coefficients(j) * scale;
    if (p > n && n_even && k == -half) {
      out(p - half) += c / Scalar(2);
      out(half) += c / Scalar(2);
      continue;
    }
    if (p < n && (2 * std::abs(k) >= p)) {
      if (p % 2 == 0 && k == -p / 2) out(p / 2) += c;  // keeps the Nyquist slot
      continue;
    }
    out(k >= 0 ? k : p + k) += c;
  }
  return out;
}

template <typename Scalar>
ComplexVector<Scalar> upsample(const ComplexVector<Scalar>& values, Index p) {
  if (p == values.size()) return values;
  return inverse<Scalar>(resize_spectrum<Scalar>(forward<Scalar>(values), p));
}

template <typename Scalar>
Antiderivative<Scalar> integrate_periodic(const RealVector<Scalar>& values) {
  const Index n = values.size();
  ComplexVector<Scalar> coeffs = forward_real<Scalar>(values);
  const Scalar mean = coeffs(0).real() / Scalar(n);
  coeffs(0) = Complex<Scalar>(0);
  for (Index j = 1; j < n; ++j) {
    const Index k = wavenumber(j, n);
    if (n % 2 == 0 && k == -n / 2) {
      coeffs(j) = Complex<Scalar>(0);
      continue;
    }
    coeffs(j) /= Complex<Scalar>(0, 2 * kPi<Scalar> * Scalar(k));
  }
  const ComplexVector<Scalar> q = inverse<Scalar>(coeffs);
  Antiderivative<Scalar> result{mean, RealVector<Scalar>(n)};
  const Scalar q0 = q(0).real();
  for (Index j = 0; j < n; ++j) result.periodic_part(j) = q(j).real() - q0;
  return result;
}

template <typename Scalar, typename Value>
PeriodicInterpolator<Scalar, Value>::PeriodicInterpolator(Samples samples)
    : samples_(std::move(samples)) {
  // Equispaced barycentric weights (-1)^j C(m-1, j).
  Scalar binom = 1;
  for (int j = 0; j < kStencil; ++j) {
    weights_[j] = (j % 2 == 0 ? binom : -binom);
    binom = binom * Scalar(kStencil - 1 - j) / Scalar(j + 1);
  }
}

template <typename Scalar, typename Value>
Value PeriodicInterpolator<Scalar, Value>::operator()(Scalar u) const {
  const Index p = samples_.size();
  const Scalar x = u * Scalar(p);
  const Scalar fl = std::floor(x);
  const Scalar frac = x - fl;
  const Index base = static_cast<Index>(fl);
  auto wrap = [p](Index i) { return ((i % p) + p) % p; };
  if (frac == Scalar(0)) return samples_(wrap(base));
  const Index first = base - (kStencil / 2 - 1);
  const Scalar t = frac + Scalar(kStencil / 2 - 1);
  Value num = Value(0);
  Scalar den = 0;
  for (int j = 0; j < kStencil; ++j) {
    // frac below half an ulp of the stencil offset lands exactly on a node
    if (t == Scalar(j)) return samples_(wrap(first + j));
    const Scalar c = weights_[j] / (t - Scalar(j));
    num += c * samples_(wrap(first + j));
    den += c;
  }
  return num / den;
}

#define CURVEFLOW_INSTANTIATE_SPECTRAL(S)                                                      \
  template ComplexVector<S> forward<S>(const ComplexVector<S>&);                               \
  template ComplexVector<S> inverse<S>(const ComplexVector<S>&);                               \
  template ComplexVector<S> forward_real<S>(const RealVector<S>&);                             \
  template ComplexVector<S> differentiate<S>(const ComplexVector<S>&, int, S);                 \
  template ComplexVector<S> resize_spectrum<S>(const ComplexVector<S>&, Index);                \
  template ComplexVector<S> upsample<S>(const ComplexVector<S>&, Index);                       \
  template Antiderivative<S> integrate_periodic<S>(const RealVector<S>&);                      \
  template class PeriodicInterpolator<S, S>;                                                   \
  template class PeriodicInterpolator<S, Complex<S>>;

CURVEFLOW_INSTANTIATE_SPECTRAL(double)
CURVEFLOW_INSTANTIATE_SPECTRAL(long double)

#undef CURVEFLOW_INSTANTIATE_SPECTRAL

}  // namespace curveflow::spectral
