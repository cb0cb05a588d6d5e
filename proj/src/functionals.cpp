#include "curveflow/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace curveflow {

namespace {

constexpr Index kOversample = 4;

/// Position, tangent and curvature derivatives resampled on a 4x grid.
template <typename Scalar>
struct FineGrid {
  Index size = 0;
  Scalar length = 0;
  Scalar h = 0;
  ComplexVector<Scalar> f;
  ComplexVector<Scalar> df;
  std::vector<RealVector<Scalar>> kappa;  ///< kappa, kappa', kappa'', ...

  Scalar integrate(const RealVector<Scalar>& v) const { return v.sum() * h; }
};

template <typename Scalar>
FineGrid<Scalar> fine_grid(const ArcLengthCurve<Scalar>& curve, int kappa_derivatives) {
  const Index n = curve.node_count();
  const Scalar length = curve.total_length();
  const Index p = kOversample * n;
  const ComplexVector<Scalar> coeffs = spectral::forward<Scalar>(curve.points());
  const ComplexVector<Scalar> c1 = spectral::differentiate<Scalar>(coeffs, 1, length);
  const ComplexVector<Scalar> c2 = spectral::differentiate<Scalar>(coeffs, 2, length);
  const ComplexVector<Scalar> d1 = spectral::inverse<Scalar>(c1);
  const ComplexVector<Scalar> d2 = spectral::inverse<Scalar>(c2);

  RealVector<Scalar> kappa(n);
  for (Index j = 0; j < n; ++j) {
    const Scalar speed = std::abs(d1(j));
    kappa(j) = std::imag(std::conj(d1(j)) * d2(j)) / (speed * speed * speed);
  }
  const ComplexVector<Scalar> kc = spectral::forward_real<Scalar>(kappa);

  FineGrid<Scalar> g;
  g.size = p;
  g.length = length;
  g.h = length / Scalar(p);
  g.f = spectral::inverse<Scalar>(spectral::resize_spectrum<Scalar>(coeffs, p));
  g.df = spectral::inverse<Scalar>(spectral::resize_spectrum<Scalar>(c1, p));
  for (int order = 0; order <= kappa_derivatives; ++order) {
    const ComplexVector<Scalar> dk = spectral::differentiate<Scalar>(kc, order, length);
    g.kappa.push_back(
        spectral::inverse<Scalar>(spectral::resize_spectrum<Scalar>(dk, p)).real());
  }
  return g;
}

/// Refines a discrete extremum of kappa by Newton on kappa' = 0.
template <typename Scalar>
Scalar refine_extremum(const FineGrid<Scalar>& g, Index i) {
  const spectral::PeriodicInterpolator<Scalar, Scalar> k0(g.kappa[0]), k1(g.kappa[1]),
      k2(g.kappa[2]);
  const Scalar cell = Scalar(1) / Scalar(g.size);
  const Scalar u_grid = Scalar(i) * cell;
  Scalar u = u_grid;
  for (int it = 0; it < 6; ++it) {
    const Scalar curvature2 = k2(u);
    if (curvature2 == Scalar(0)) break;
    // d/du = L d/ds
    const Scalar step = k1(u) / curvature2 / g.length;
    u -= step;
    if (std::abs(u - u_grid) > cell) return g.kappa[0](i);
    if (std::abs(step) < 64 * std::numeric_limits<Scalar>::epsilon()) break;
  }
  return k0(u);
}

template <typename Scalar>
Scalar ipow(Scalar x, int p) {
  Scalar r = 1;
  for (int i = 0; i < p; ++i) r *= x;
  return r;
}

}  // namespace

// ---------------------------------------------------------------------------

template <typename Scalar>
CoefficientTable<Scalar> fourier_coefficients(const ArcLengthCurve<Scalar>& curve,
                                              Index bandwidth) {
  const Index n = curve.node_count();
  if (bandwidth > n / 2 || bandwidth < 0) {
    throw std::invalid_argument("bandwidth must lie in [0, N/2]");
  }
  const Scalar length = curve.total_length();
  const ComplexVector<Scalar> dft = spectral::forward<Scalar>(curve.points());
  const Scalar scale = std::sqrt(length) / Scalar(n);

  CoefficientTable<Scalar> table;
  table.bandwidth = bandwidth;
  table.length = length;
  table.rotation_number = curve.rotation_number();
  table.values = ComplexVector<Scalar>::Zero(2 * bandwidth + 1);
  Scalar kept = 0, dropped = 0;
  for (Index j = 0; j < n; ++j) {
    const Index k = spectral::wavenumber(j, n);
    const Complex<Scalar> value = dft(j) * scale;
    const Scalar energy = Scalar(k * k) * std::norm(value);
    if (std::abs(k) <= bandwidth) {
      table.values(k + bandwidth) = value;
      kept += energy;
    } else {
      dropped += energy;
    }
  }
  if (dropped > Scalar(1e-8) * (kept + dropped)) {
    throw CurveflowError(ErrorCode::BandwidthTooLow,
                         "discarded tail energy " + std::to_string(double(dropped / (kept + dropped))));
  }
  return table;
}

template <typename Scalar>
CoefficientTable<Scalar> fourier_coefficients(const ArcLengthCurve<Scalar>& curve) {
  return fourier_coefficients(curve, curve.node_count() / 2);
}

template <typename Scalar>
Scalar power_sum(const CoefficientTable<Scalar>& table, const Polynomial& weight,
                 bool skip_zero) {
  if (weight.degree() > 6) throw std::invalid_argument("weight degree exceeds 6");
  Scalar total = 0;
  for (Index k = -table.bandwidth; k <= table.bandwidth; ++k) {
    if (skip_zero && k == 0) continue;
    total += weight(Scalar(k)) * std::norm(table(k));
  }
  return total;
}

template <typename Scalar>
Scalar nonlocal_forcing(const Diagnostics<Scalar>& d, FlowKind flow) {
  switch (flow) {
    case FlowKind::AP: return 0;
    case FlowKind::LP: return d.I0 / d.R;
    case FlowKind::JP:
      if (!(d.A > 0)) {
        throw CurveflowError(ErrorCode::NonPositiveArea,
                             "enclosed area " + std::to_string(double(d.A)));
      }
      return d.L * d.L / (2 * d.A) - d.R;
  }
  return 0;
}

template <typename Scalar>
Diagnostics<Scalar> functionals(const ArcLengthCurve<Scalar>& curve, FlowKind flow) {
  const FineGrid<Scalar> g = fine_grid(curve, 2);
  const Scalar L = g.length;
  const auto& kappa = g.kappa[0];

  Diagnostics<Scalar> d;
  d.L = L;
  d.n = curve.rotation_number();
  d.R = g.integrate(kappa);
  d.W = g.integrate(kappa.array().square().matrix());

  RealVector<Scalar> twice_area(g.size);
  for (Index i = 0; i < g.size; ++i) twice_area(i) = std::imag(std::conj(g.f(i)) * g.df(i));
  d.A = g.integrate(twice_area) / 2;
  d.I_m1 = 1 - 4 * kPi<Scalar> * Scalar(d.n) * d.A / (L * L);

  const auto tilde = (kappa.array() - d.R / L).eval();
  d.I0 = L * g.integrate(tilde.square().matrix());
  d.I1 = L * L * L * g.integrate(g.kappa[1].array().square().matrix());
  d.J3 = L * L * g.integrate(tilde.cube().matrix());
  d.J4 = L * L * L * g.integrate(tilde.square().square().matrix());

  const Complex<Scalar> mean = g.f.mean();
  const Scalar omega = 2 * kPi<Scalar> * Scalar(d.n) / L;
  RealVector<Scalar> defect(g.size);
  for (Index i = 0; i < g.size; ++i) {
    defect(i) = std::norm(omega * (g.f(i) - mean) + Complex<Scalar>(0, 1) * g.df(i));
  }
  d.tilde_I_m1 = g.integrate(defect) / L;

  Index imax = 0, imin = 0;
  kappa.maxCoeff(&imax);
  kappa.minCoeff(&imin);
  d.kappa_max = std::max(refine_extremum(g, imax), kappa(imax));
  d.kappa_min = std::min(refine_extremum(g, imin), kappa(imin));

  d.g = nonlocal_forcing(d, flow);
  return d;
}

template <typename Scalar>
Scalar dirichlet_energy(const ArcLengthCurve<Scalar>& curve, int order) {
  const FineGrid<Scalar> g = fine_grid(curve, order);
  const Scalar L = g.length;
  RealVector<Scalar> v = g.kappa[static_cast<std::size_t>(order)];
  if (order == 0) v.array() -= g.integrate(v) / L;
  return ipow(L, 2 * order + 1) * g.integrate(v.array().square().matrix());
}

template <typename Scalar>
Scalar sixth_moment_integral(const ArcLengthCurve<Scalar>& curve) {
  const FineGrid<Scalar> g = fine_grid(curve, 1);
  return g.integrate((g.kappa[0].array().square().square() + g.kappa[1].array().square()).matrix());
}

template <typename Scalar>
Scalar normal_velocity_sup(const ArcLengthCurve<Scalar>& curve, FlowKind flow) {
  const Diagnostics<Scalar> d = functionals(curve, flow);
  const auto fr = frenet_data(curve);
  return (fr.curvature.array() - d.R / d.L - d.g / d.L).abs().maxCoeff();
}

// ---------------------------------------------------------------------------

double IdentityReport::max_residual() const {
  double m = 0;
  for (const auto& r : records) m = std::max(m, r.residual);
  return m;
}

bool IdentityReport::pass() const {
  return std::all_of(records.begin(), records.end(), [](const auto& r) { return r.pass; });
}

bool InequalityReport::pass() const {
  return std::all_of(records.begin(), records.end(), [](const auto& r) { return r.pass; }) &&
         std::all_of(ratios.begin(), ratios.end(),
                     [](const auto& r) { return r.degenerate || std::isfinite(r.ratio); });
}

template <typename Scalar>
IdentityReport verify_identities(const ArcLengthCurve<Scalar>& curve, double tolerance) {
  const auto table = fourier_coefficients(curve);
  const FineGrid<Scalar> g = fine_grid(curve, 1);
  const Scalar L = g.length;
  const int n = curve.rotation_number();
  const Scalar two_pi = 2 * kPi<Scalar>;
  const Scalar scale = L / two_pi;
  const auto& kappa = g.kappa[0].array();

  RealVector<Scalar> twice_area(g.size);
  for (Index i = 0; i < g.size; ++i) twice_area(i) = std::imag(std::conj(g.f(i)) * g.df(i));
  const Scalar A = g.integrate(twice_area) / 2;
  const Scalar R = g.integrate(kappa.matrix());

  IdentityReport report;
  auto add = [&](std::string name, Scalar lhs, Scalar rhs, Scalar denom) {
    const double residual = double(std::abs(lhs - rhs) / denom);
    report.records.push_back(
        {std::move(name), double(lhs), double(rhs), residual, residual <= tolerance});
  };
  auto add_rel = [&](std::string name, Scalar lhs, Scalar rhs) {
    add(std::move(name), lhs, rhs, 1 + std::abs(rhs));
  };
  auto moment = [&](int p) { return power_sum(table, Polynomial::monomial(p)); };

  add_rel("moment_k1_area", moment(1), L * A / kPi<Scalar>);
  add_rel("moment_k2_length", moment(2), L * L * L / (two_pi * two_pi));
  add_rel("moment_k3_curvature", moment(3), ipow(scale, 3) * R);
  add_rel("moment_k4_kappa2", moment(4), ipow(scale, 4) * g.integrate(kappa.square().matrix()));
  add_rel("moment_k5_kappa3", moment(5), ipow(scale, 5) * g.integrate(kappa.cube().matrix()));
  add_rel("moment_k6_kappa4",
          moment(6),
          ipow(scale, 6) *
              g.integrate((kappa.square().square() + g.kappa[1].array().square()).matrix()));

  const Polynomial k_minus_n{-double(n), 1.0};
  add("balance_k2_k_minus_n", power_sum(table, Polynomial::monomial(2) * k_minus_n), Scalar(0),
      std::abs(moment(3)));

  const Scalar I0_phys = L * g.integrate((kappa - R / L).square().matrix());
  const Scalar c0 = 16 * ipow(kPi<Scalar>, 4) / (L * L * L);
  add_rel("I0_cubic_form", c0 * power_sum(table, Polynomial::monomial(3) * k_minus_n), I0_phys);
  add_rel("I0_square_form",
          c0 * power_sum(table, Polynomial::monomial(2) * k_minus_n * k_minus_n), I0_phys);

  const Scalar Im1_phys = 1 - 4 * kPi<Scalar> * Scalar(n) * A / (L * L);
  const Scalar cm1 = 4 * kPi<Scalar> * kPi<Scalar> / (L * L * L);
  add_rel("Im1_quadratic_form", cm1 * power_sum(table, Polynomial::monomial(1) * k_minus_n),
          Im1_phys);
  add_rel("Im1_cubic_form",
          -cm1 / Scalar(n) *
              power_sum(table, Polynomial::monomial(1) * k_minus_n * k_minus_n, true),
          Im1_phys);

  // tilde I_{-1}: Fourier sum against the physical norm, then the three-term
  // expansion |nu|^2 + 2 omega Re<f~, nu> + omega^2 |f~|^2 term by term.
  const Complex<Scalar> mean = g.f.mean();
  const Scalar omega = two_pi * Scalar(n) / L;
  Scalar nu2 = 0, cross = 0, f2 = 0, full = 0;
  for (Index i = 0; i < g.size; ++i) {
    const Complex<Scalar> ft = g.f(i) - mean;
    const Complex<Scalar> nu = Complex<Scalar>(0, 1) * g.df(i);
    nu2 += std::norm(nu);
    cross += std::real(std::conj(ft) * nu);
    f2 += std::norm(ft);
    full += std::norm(omega * ft + nu);
  }
  nu2 *= g.h;
  cross *= g.h;
  f2 *= g.h;
  full *= g.h;
  const Scalar tilde_spec = cm1 * power_sum(table, k_minus_n * k_minus_n, true);
  add_rel("tildeIm1_norm_form", tilde_spec, full / L);
  const Scalar nu2_spec = (two_pi / L) * (two_pi / L) * moment(2);
  const Scalar cross_spec = -(two_pi / L) * power_sum(table, Polynomial::monomial(1), true);
  const Scalar f2_spec = power_sum(table, Polynomial{1.0}, true);
  add_rel("tildeIm1_expansion",
          (nu2_spec + 2 * omega * cross_spec + omega * omega * f2_spec) / L,
          (nu2 + 2 * omega * cross + omega * omega * f2) / L);
  return report;
}

template <typename Scalar>
InequalityReport check_inequalities(const ArcLengthCurve<Scalar>& curve,
                                    const std::vector<std::pair<int, int>>& pairs,
                                    double tolerance) {
  const Diagnostics<Scalar> d = functionals(curve, FlowKind::AP);
  const Scalar L = d.L;
  const Scalar pi = kPi<Scalar>;
  InequalityReport report;
  auto add = [&](std::string name, Scalar lhs, Scalar rhs) {
    const double slack = double(lhs - rhs);
    report.records.push_back({std::move(name), double(lhs), double(rhs), slack,
                              slack >= -tolerance});
  };
  add("isoperimetric", L * L, 4 * pi * d.A);
  add("wirtinger_I_m1", d.I0, 4 * pi * pi * Scalar(d.n) * std::abs(d.I_m1));
  add("wirtinger_tilde_I_m1", d.I0, 4 * pi * pi * d.tilde_I_m1);
  const Scalar bracket = L * L * L * sixth_moment_integral(curve);
  add("schwarz", std::sqrt(d.tilde_I_m1) * std::sqrt(bracket), d.I0);
  report.schwarz_unrooted_slack = double(std::sqrt(d.tilde_I_m1) * bracket - d.I0);

  Scalar energies[3] = {d.I0, d.I1, Scalar(-1)};
  for (const auto& [j, ell] : pairs) {
    if (ell < 1 || ell > 2 || j < 0 || j >= ell) {
      throw std::invalid_argument("interpolation pair needs 0 <= j < l <= 2");
    }
    if (energies[2] < 0 && (j == 2 || ell == 2)) energies[2] = dirichlet_energy(curve, 2);
    const Scalar tilde = d.tilde_I_m1;
    const Scalar Ij = energies[j], Il = energies[ell];
    const Scalar denom = std::pow(tilde, Scalar(ell - j) / 2) * Il +
                         std::pow(tilde, Scalar(ell - j) / Scalar(ell + 1)) *
                             std::pow(Il, Scalar(j + 1) / Scalar(ell + 1));
    InterpolationRatio r{j, ell, std::numeric_limits<double>::quiet_NaN(), true};
    if (tilde > Scalar(1e-20) && denom > Scalar(0)) {
      r.ratio = double(Ij / denom);
      r.degenerate = false;
    }
    report.ratios.push_back(r);
  }
  return report;
}

// ---------------------------------------------------------------------------

template <typename Scalar>
CircleFit<Scalar> circle_fit(const ArcLengthCurve<Scalar>& curve,
                             const CoefficientTable<Scalar>& table) {
  const Scalar L = curve.total_length();
  const int n = curve.rotation_number();
  const Scalar two_pi = 2 * kPi<Scalar>;
  CircleFit<Scalar> fit;
  fit.radius = L / (two_pi * Scalar(n));
  fit.centre = table(0) / std::sqrt(L);
  const Complex<Scalar> fn = table(n);
  if (!(std::abs(fn) > Scalar(1e-12) * std::sqrt(L) * fit.radius)) {
    throw CurveflowError(ErrorCode::PhaseUndefined, "n-th Fourier coefficient vanishes");
  }
  Scalar phase = std::arg(fn) / (two_pi * Scalar(n));
  const Scalar period = Scalar(1) / Scalar(n);
  phase = std::fmod(phase, period);
  if (phase < 0) phase += period;
  if (phase >= period) phase = 0;
  fit.sigma_over_L = phase;

  const Index N = curve.node_count();
  fit.remainder.resize(N);
  for (Index j = 0; j < N; ++j) {
    const Scalar angle = two_pi * Scalar(n) * (Scalar(j) / Scalar(N) + phase);
    fit.remainder(j) =
        curve[j] - fit.centre - fit.radius * Complex<Scalar>(std::cos(angle), std::sin(angle));
  }
  const ComplexVector<Scalar> rc = spectral::forward<Scalar>(fit.remainder);
  const ComplexVector<Scalar> r1 =
      spectral::inverse<Scalar>(spectral::differentiate<Scalar>(rc, 1, L));
  const ComplexVector<Scalar> r2 =
      spectral::inverse<Scalar>(spectral::differentiate<Scalar>(rc, 2, L));
  fit.rho_L2 = std::sqrt(fit.remainder.squaredNorm() * curve.spacing());
  fit.rho_C0 = fit.remainder.cwiseAbs().maxCoeff();
  fit.rho_C1 = r1.cwiseAbs().maxCoeff();
  fit.rho_C2 = r2.cwiseAbs().maxCoeff();
  return fit;
}

template <typename Scalar>
CircleFit<Scalar> circle_fit(const ArcLengthCurve<Scalar>& curve) {
  const Index n = curve.node_count();
  return circle_fit(curve, fourier_coefficients(curve, n / 2));
}

#define CURVEFLOW_INSTANTIATE_FUNCTIONALS(S)                                                  \
  template CoefficientTable<S> fourier_coefficients<S>(const ArcLengthCurve<S>&, Index);      \
  template CoefficientTable<S> fourier_coefficients<S>(const ArcLengthCurve<S>&);             \
  template S power_sum<S>(const CoefficientTable<S>&, const Polynomial&, bool);               \
  template S nonlocal_forcing<S>(const Diagnostics<S>&, FlowKind);                            \
  template Diagnostics<S> functionals<S>(const ArcLengthCurve<S>&, FlowKind);                 \
  template S dirichlet_energy<S>(const ArcLengthCurve<S>&, int);                              \
  template S sixth_moment_integral<S>(const ArcLengthCurve<S>&);                              \
  template S normal_velocity_sup<S>(const ArcLengthCurve<S>&, FlowKind);                      \
  template IdentityReport verify_identities<S>(const ArcLengthCurve<S>&, double);             \
  template InequalityReport check_inequalities<S>(                                            \
      const ArcLengthCurve<S>&, const std::vector<std::pair<int, int>>&, double);             \
  template CircleFit<S> circle_fit<S>(const ArcLengthCurve<S>&, const CoefficientTable<S>&);  \
  template CircleFit<S> circle_fit<S>(const ArcLengthCurve<S>&);

CURVEFLOW_INSTANTIATE_FUNCTIONALS(double)
CURVEFLOW_INSTANTIATE_FUNCTIONALS(long double)

#undef CURVEFLOW_INSTANTIATE_FUNCTIONALS

}  // namespace curveflow
