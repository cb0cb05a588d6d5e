#include "curveflow/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace curveflow::oracle {

namespace {

constexpr Index kMinCoarsePoints = 1024;

template <typename Scalar>
struct Level {
  Scalar L, A, R, W, I0, I1, J3, J4, tilde, kmax, kmin;
  int n;
};

template <typename Scalar>
Scalar parabolic_peak(Scalar left, Scalar mid, Scalar right) {
  const Scalar curv = left - 2 * mid + right;
  if (curv == Scalar(0)) return mid;
  return mid - (right - left) * (right - left) / (8 * curv);
}

template <typename Scalar>
struct Differences {
  ComplexVector<Scalar> d1, d2;
  RealVector<Scalar> speed, kappa;
};

template <typename Scalar>
Differences<Scalar> differences(const ComplexVector<Scalar>& z) {
  const Index m = z.size();
  const Scalar du = Scalar(1) / Scalar(m);
  Differences<Scalar> out{ComplexVector<Scalar>(m), ComplexVector<Scalar>(m), RealVector<Scalar>(m),
                          RealVector<Scalar>(m)};
  for (Index j = 0; j < m; ++j) {
    const auto& prev = z((j + m - 1) % m);
    const auto& next = z((j + 1) % m);
    out.d1(j) = (next - prev) / (2 * du);
    out.d2(j) = (next - Scalar(2) * z(j) + prev) / (du * du);
    out.speed(j) = std::abs(out.d1(j));
    out.kappa(j) = std::imag(std::conj(out.d1(j)) * out.d2(j)) /
                   (out.speed(j) * out.speed(j) * out.speed(j));
  }
  return out;
}

template <typename Scalar>
Level<Scalar> measure(const ComplexVector<Scalar>& z) {
  const Index m = z.size();
  const Scalar du = Scalar(1) / Scalar(m);
  const Scalar pi = Scalar(3.14159265358979323846264338327950288L);
  const auto fd = differences(z);

  Level<Scalar> lv{};
  Scalar turning = 0;
  for (Index j = 0; j < m; ++j) {
    const Complex<Scalar> chord = z((j + 1) % m) - z(j);
    const Complex<Scalar> next_chord = z((j + 2) % m) - z((j + 1) % m);
    lv.L += std::abs(chord);
    turning += std::arg(next_chord * std::conj(chord));
    lv.A += std::imag(std::conj(z(j)) * fd.d1(j)) * du / 2;
    lv.R += fd.kappa(j) * fd.speed(j) * du;
    lv.W += fd.kappa(j) * fd.kappa(j) * fd.speed(j) * du;
  }
  lv.n = static_cast<int>(std::lround(double(turning / (2 * pi))));

  const Scalar mean_kappa = lv.R / lv.L;
  Complex<Scalar> centre(0);
  for (Index j = 0; j < m; ++j) centre += z(j) * fd.speed(j) * du;
  centre /= lv.L;
  const Scalar omega = 2 * pi * Scalar(lv.n) / lv.L;
  Scalar s2 = 0, s3 = 0, s4 = 0, d2 = 0, tilde = 0;
  for (Index j = 0; j < m; ++j) {
    const Scalar w = fd.speed(j) * du;
    const Scalar dev = fd.kappa(j) - mean_kappa;
    s2 += dev * dev * w;
    s3 += dev * dev * dev * w;
    s4 += dev * dev * dev * dev * w;
    const Scalar dk = (fd.kappa((j + 1) % m) - fd.kappa((j + m - 1) % m)) / (2 * du) / fd.speed(j);
    d2 += dk * dk * w;
    const Complex<Scalar> tangent = fd.d1(j) / fd.speed(j);
    tilde += std::norm(omega * (z(j) - centre) + Complex<Scalar>(0, 1) * tangent) * w;
  }
  const Scalar L = lv.L;
  lv.I0 = L * s2;
  lv.I1 = L * L * L * d2;
  lv.J3 = L * L * s3;
  lv.J4 = L * L * L * s4;
  lv.tilde = tilde / L;

  Index imax = 0, imin = 0;
  for (Index j = 1; j < m; ++j) {
    if (fd.kappa(j) > fd.kappa(imax)) imax = j;
    if (fd.kappa(j) < fd.kappa(imin)) imin = j;
  }
  auto at = [&](Index j) { return fd.kappa((j + m) % m); };
  lv.kmax = parabolic_peak(at(imax - 1), at(imax), at(imax + 1));
  lv.kmin = parabolic_peak(at(imin - 1), at(imin), at(imin + 1));
  return lv;
}

template <typename Scalar>
Scalar forcing(FlowKind flow, Scalar L, Scalar A, Scalar R, Scalar I0) {
  switch (flow) {
    case FlowKind::AP: return 0;
    case FlowKind::LP: return I0 / R;
    case FlowKind::JP:
      if (!(A > 0)) throw CurveflowError(ErrorCode::NonPositiveArea, "oracle: area <= 0");
      return L * L / (2 * A) - R;
  }
  return 0;
}

}  // namespace

template <typename Scalar>
Diagnostics<Scalar> oracle_functionals(const ComplexVector<Scalar>& points, int refinement,
                                       FlowKind flow) {
  if (refinement < 2) throw std::invalid_argument("refinement factor must be >= 2");
  const Index m = points.size();
  const Index coarse_m = m / refinement;
  if (m % refinement != 0 || coarse_m < kMinCoarsePoints) {
    throw CurveflowError(ErrorCode::TooCoarse,
                         std::to_string(m) + " points give a coarse level below 1024");
  }
  ComplexVector<Scalar> coarse(coarse_m);
  for (Index j = 0; j < coarse_m; ++j) coarse(j) = points(j * refinement);

  const Level<Scalar> f = measure(points);
  const Level<Scalar> c = measure(coarse);
  const Scalar r2 = Scalar(refinement) * Scalar(refinement);
  auto rich = [r2](Scalar fine, Scalar crude) { return fine + (fine - crude) / (r2 - 1); };

  Diagnostics<Scalar> d;
  d.n = f.n;
  d.L = rich(f.L, c.L);
  d.A = rich(f.A, c.A);
  d.R = rich(f.R, c.R);
  d.W = rich(f.W, c.W);
  d.I0 = rich(f.I0, c.I0);
  d.I1 = rich(f.I1, c.I1);
  d.J3 = rich(f.J3, c.J3);
  d.J4 = rich(f.J4, c.J4);
  d.tilde_I_m1 = rich(f.tilde, c.tilde);
  d.kappa_max = rich(f.kmax, c.kmax);
  d.kappa_min = rich(f.kmin, c.kmin);
  const Scalar pi = Scalar(3.14159265358979323846264338327950288L);
  d.I_m1 = 1 - 4 * pi * Scalar(d.n) * d.A / (d.L * d.L);
  d.g = forcing(flow, d.L, d.A, d.R, d.I0);
  return d;
}

template <typename Scalar>
Scalar oracle_stable_dt(const ComplexVector<Scalar>& points) {
  const Index m = points.size();
  const auto fd = differences(points);
  Scalar h_min = std::abs(points(1) - points(0));
  for (Index j = 0; j < m; ++j) h_min = std::min(h_min, std::abs(points((j + 1) % m) - points(j)));
  const Scalar kappa_abs = fd.kappa.cwiseAbs().maxCoeff();
  const Scalar rho_min = Scalar(1) / kappa_abs;
  return std::min(Scalar(1e-5) * rho_min * rho_min, h_min * h_min / 4);
}

template <typename Scalar>
PolylineState<Scalar> oracle_step_explicit(const PolylineState<Scalar>& state, FlowKind flow,
                                           Scalar dt) {
  const auto& z = state.points;
  const Index m = z.size();
  const Scalar limit = oracle_stable_dt(z);
  if (dt > limit) {
    throw CurveflowError(ErrorCode::StabilityViolation,
                         "dt " + std::to_string(double(dt)) + " exceeds explicit limit " +
                             std::to_string(double(limit)));
  }
  const Scalar du = Scalar(1) / Scalar(m);
  const auto fd = differences(z);
  Scalar L = 0, A = 0, R = 0;
  for (Index j = 0; j < m; ++j) {
    L += fd.speed(j) * du;
    A += std::imag(std::conj(z(j)) * fd.d1(j)) * du / 2;
    R += fd.kappa(j) * fd.speed(j) * du;
  }
  Scalar I0 = 0;
  for (Index j = 0; j < m; ++j) {
    const Scalar dev = fd.kappa(j) - R / L;
    I0 += dev * dev * fd.speed(j) * du;
  }
  I0 *= L;
  const Scalar g = forcing(flow, L, A, R, I0);

  PolylineState<Scalar> out{ComplexVector<Scalar>(m), state.t + dt};
  for (Index j = 0; j < m; ++j) {
    const Complex<Scalar> normal = Complex<Scalar>(0, 1) * fd.d1(j) / fd.speed(j);
    out.points(j) = z(j) + dt * (fd.kappa(j) - (R + g) / L) * normal;
  }
  return out;
}

#define CURVEFLOW_INSTANTIATE_ORACLE(S)                                                       \
  template Diagnostics<S> oracle_functionals<S>(const ComplexVector<S>&, int, FlowKind);      \
  template S oracle_stable_dt<S>(const ComplexVector<S>&);                                    \
  template PolylineState<S> oracle_step_explicit<S>(const PolylineState<S>&, FlowKind, S);

CURVEFLOW_INSTANTIATE_ORACLE(double)
CURVEFLOW_INSTANTIATE_ORACLE(long double)

#undef CURVEFLOW_INSTANTIATE_ORACLE

}  // namespace curveflow::oracle
