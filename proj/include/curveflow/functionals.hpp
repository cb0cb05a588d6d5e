#pragma once

// Fourier coefficients of the position and the scale-invariant functionals
// built from them.
//
// Normalization: fhat(k) = L^{-1/2} int_0^L f(s) exp(-2 pi i k s / L) ds,
// so that Parseval reads int |f|^2 ds = sum |fhat(k)|^2 and an n-fold circle
// of radius r has |fhat(n)| = sqrt(L) r.

#include "curveflow/curve.hpp"
#include "curveflow/flow_kind.hpp"

#include <initializer_list>
#include <string>
#include <utility>
#include <vector>

namespace curveflow {

template <typename Scalar>
struct CoefficientTable {
  ComplexVector<Scalar> values;  ///< fhat(k) stored at k + bandwidth
  Index bandwidth = 0;
  Scalar length = 0;
  int rotation_number = 0;

  Complex<Scalar> operator()(Index k) const {
    return (k < -bandwidth || k > bandwidth) ? Complex<Scalar>(0) : values(k + bandwidth);
  }
};

/// Throws BandwidthTooLow when the discarded tail carries more than 1e-8 of
/// sum k^2 |fhat(k)|^2 (the translation-invariant energy).
template <typename Scalar>
CoefficientTable<Scalar> fourier_coefficients(const ArcLengthCurve<Scalar>& curve,
                                              Index bandwidth);

/// Full table, bandwidth N/2.
template <typename Scalar>
CoefficientTable<Scalar> fourier_coefficients(const ArcLengthCurve<Scalar>& curve);

/// Polynomial weight in k with real coefficients, lowest degree first.
class Polynomial {
 public:
  Polynomial(std::initializer_list<double> coeffs) : c_(coeffs) {}
  explicit Polynomial(std::vector<double> coeffs) : c_(std::move(coeffs)) {}

  static Polynomial monomial(int degree) {
    std::vector<double> c(static_cast<std::size_t>(degree) + 1, 0.0);
    c.back() = 1.0;
    return Polynomial(std::move(c));
  }

  int degree() const { return static_cast<int>(c_.size()) - 1; }

  template <typename Scalar>
  Scalar operator()(Scalar k) const {
    Scalar acc = 0;
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * k + Scalar(*it);
    return acc;
  }

  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    std::vector<double> c(a.c_.size() + b.c_.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.c_.size(); ++i)
      for (std::size_t j = 0; j < b.c_.size(); ++j) c[i + j] += a.c_[i] * b.c_[j];
    return Polynomial(std::move(c));
  }

 private:
  std::vector<double> c_;
};

/// sum_k weight(k) |fhat(k)|^2. Throws std::invalid_argument for degree > 6.
template <typename Scalar>
Scalar power_sum(const CoefficientTable<Scalar>& table, const Polynomial& weight,
                 bool skip_zero = false);

template <typename Scalar>
struct Diagnostics {
  Scalar t = 0;
  Scalar L = 0;
  Scalar A = 0;
  int n = 0;
  Scalar R = 0;  ///< oint kappa ds
  Scalar W = 0;  ///< oint kappa^2 ds
  Scalar I_m1 = 0;
  Scalar I0 = 0;
  Scalar I1 = 0;
  Scalar tilde_I_m1 = 0;
  Scalar J3 = 0;
  Scalar J4 = 0;
  Scalar g = 0;
  Scalar kappa_max = 0;
  Scalar kappa_min = 0;
};

/// Every field by spectral quadrature in physical space on a 4x oversampled
/// grid.
template <typename Scalar>
Diagnostics<Scalar> functionals(const ArcLengthCurve<Scalar>& curve, FlowKind flow);

/// I_l = L^{2l+1} oint |d^l kappa~ / ds^l|^2 ds for l >= 0.
template <typename Scalar>
Scalar dirichlet_energy(const ArcLengthCurve<Scalar>& curve, int order);

/// oint (kappa^4 + kappa'^2) ds.
template <typename Scalar>
Scalar sixth_moment_integral(const ArcLengthCurve<Scalar>& curve);

/// Sup norm over the nodes of the normal velocity kappa~ - g/L.
template <typename Scalar>
Scalar normal_velocity_sup(const ArcLengthCurve<Scalar>& curve, FlowKind flow);

// ---------------------------------------------------------------------------

struct IdentityRecord {
  std::string name;
  double lhs;  ///< Fourier-sum side
  double rhs;  ///< physical-space side
  double residual;
  bool pass;
};

struct IdentityReport {
  std::vector<IdentityRecord> records;
  double max_residual() const;
  bool pass() const;
};

/// residual = |lhs - rhs| / (1 + |rhs|), except the balance identity whose
/// right side is 0 and is measured against sum k^3 |fhat|^2.
template <typename Scalar>
IdentityReport verify_identities(const ArcLengthCurve<Scalar>& curve, double tolerance = 1e-7);

struct InequalityRecord {
  std::string name;
  double lhs;  ///< larger side
  double rhs;
  double slack;  ///< lhs - rhs
  bool pass;
};

struct InterpolationRatio {
  int j;
  int ell;
  double ratio;      ///< NaN when degenerate
  bool degenerate;   ///< exact n-fold circle, denominator vanishes
};

struct InequalityReport {
  std::vector<InequalityRecord> records;
  std::vector<InterpolationRatio> ratios;
  /// Slack of the Schwarz estimate read without the square root on the
  /// bracket; informational only.
  double schwarz_unrooted_slack = 0;
  bool pass() const;
};

template <typename Scalar>
InequalityReport check_inequalities(
    const ArcLengthCurve<Scalar>& curve,
    const std::vector<std::pair<int, int>>& pairs = {{0, 1}, {0, 2}, {1, 2}},
    double tolerance = 1e-10);

// ---------------------------------------------------------------------------

/// f = c + r exp(2 pi i n (s + sigma) / L) + rho.
template <typename Scalar>
struct CircleFit {
  Complex<Scalar> centre;
  Scalar radius = 0;
  Scalar sigma_over_L = 0;  ///< in [0, 1/n)
  ComplexVector<Scalar> remainder;
  Scalar rho_L2 = 0;
  Scalar rho_C0 = 0;
  Scalar rho_C1 = 0;
  Scalar rho_C2 = 0;
};

/// Throws PhaseUndefined when |fhat(n)| <= 1e-12 sqrt(L) r.
template <typename Scalar>
CircleFit<Scalar> circle_fit(const ArcLengthCurve<Scalar>& curve,
                             const CoefficientTable<Scalar>& table);

template <typename Scalar>
CircleFit<Scalar> circle_fit(const ArcLengthCurve<Scalar>& curve);

}  // namespace curveflow
