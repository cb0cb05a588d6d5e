#include "curveflow/flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace curveflow {

namespace {

/// DFT of nu [kappa (1 - sigma^2 / L0^2) - (R + g) / L] for a curve given by
/// the DFT of its samples on u in [0, 1).
template <typename Scalar>
ComplexVector<Scalar> explicit_part(const ComplexVector<Scalar>& coeffs, Scalar L0,
                                    FlowKind flow) {
  const Index n = coeffs.size();
  const ComplexVector<Scalar> f = spectral::inverse<Scalar>(coeffs);
  const ComplexVector<Scalar> fu =
      spectral::inverse<Scalar>(spectral::differentiate<Scalar>(coeffs, 1, Scalar(1)));
  const ComplexVector<Scalar> fuu =
      spectral::inverse<Scalar>(spectral::differentiate<Scalar>(coeffs, 2, Scalar(1)));

  RealVector<Scalar> speed(n), kappa(n);
  Scalar length = 0, total_curvature = 0, twice_area = 0;
  for (Index j = 0; j < n; ++j) {
    speed(j) = std::abs(fu(j));
    kappa(j) = std::imag(std::conj(fu(j)) * fuu(j)) / (speed(j) * speed(j) * speed(j));
    length += speed(j);
    total_curvature += kappa(j) * speed(j);
    twice_area += std::imag(std::conj(f(j)) * fu(j));
  }
  length /= Scalar(n);
  total_curvature /= Scalar(n);
  const Scalar area = twice_area / Scalar(2 * n);

  Scalar g = 0;
  if (flow == FlowKind::LP) {
    Scalar dev = 0;
    const Scalar mean_kappa = total_curvature / length;
    for (Index j = 0; j < n; ++j) {
      dev += (kappa(j) - mean_kappa) * (kappa(j) - mean_kappa) * speed(j);
    }
    g = length * dev / Scalar(n) / total_curvature;
  } else if (flow == FlowKind::JP) {
    if (!(area > 0)) {
      throw CurveflowError(ErrorCode::NonPositiveArea, "enclosed area became non-positive");
    }
    g = length * length / (2 * area) - total_curvature;
  }

  const Scalar shift = (total_curvature + g) / length;
  ComplexVector<Scalar> out(n);
  for (Index j = 0; j < n; ++j) {
    const Complex<Scalar> normal = Complex<Scalar>(0, 1) * fu(j) / speed(j);
    const Scalar ratio = speed(j) / L0;
    out(j) = normal * (kappa(j) * (1 - ratio * ratio) - shift);
  }
  return spectral::forward<Scalar>(out);
}

/// phi-functions of ETDRK4 for real z <= 0 by the complex contour mean.
template <typename Scalar>
struct EtdCoefficients {
  Scalar e, e2, q, f1, f2, f3;
};

template <typename Scalar>
EtdCoefficients<Scalar> etd_coefficients(Scalar c, Scalar dt) {
  constexpr int kContour = 32;
  using C = Complex<Scalar>;
  EtdCoefficients<Scalar> out{};
  const Scalar h = c * dt;
  out.e = std::exp(h);
  out.e2 = std::exp(h / 2);
  C q(0), f1(0), f2(0), f3(0);
  for (int m = 1; m <= kContour; ++m) {
    const Scalar theta = kPi<Scalar> * (Scalar(m) - Scalar(0.5)) / Scalar(kContour);
    const C z = h + C(std::cos(theta), std::sin(theta));
    const C ez = std::exp(z), ez2 = std::exp(z / Scalar(2));
    const C z3 = z * z * z;
    q += (ez2 - Scalar(1)) / z;
    f1 += (Scalar(-4) - z + ez * (Scalar(4) - Scalar(3) * z + z * z)) / z3;
    f2 += (Scalar(2) + z + ez * (z - Scalar(2))) / z3;
    f3 += (Scalar(-4) - Scalar(3) * z - z * z + ez * (Scalar(4) - z)) / z3;
  }
  out.q = dt * q.real() / Scalar(kContour);
  out.f1 = dt * f1.real() / Scalar(kContour);
  out.f2 = dt * f2.real() / Scalar(kContour);
  out.f3 = dt * f3.real() / Scalar(kContour);
  return out;
}

template <typename Scalar>
Scalar filter_factor(Index k, Index n) {
  const Scalar x = Scalar(std::abs(k)) / Scalar(n / 2);
  return std::exp(Scalar(-36) * std::pow(x, Scalar(36)));
}

}  // namespace

template <typename Scalar>
FlowState<Scalar> step(const FlowState<Scalar>& state, Scalar dt, FlowKind flow,
                       const StepOptions& options) {
  const auto& curve = state.curve;
  const Index n = curve.node_count();
  const Scalar L0 = curve.total_length();
  const ComplexVector<Scalar> v = spectral::forward<Scalar>(curve.points());

  ComplexVector<Scalar> next(n);
  if (options.scheme == TimeScheme::IMEXEuler) {
    const ComplexVector<Scalar> nv = explicit_part(v, L0, flow);
    for (Index j = 0; j < n; ++j) {
      const Scalar k = Scalar(spectral::wavenumber(j, n));
      const Scalar c = -(2 * kPi<Scalar> * k / L0) * (2 * kPi<Scalar> * k / L0);
      next(j) = (v(j) + dt * nv(j)) / (1 - c * dt);
    }
  } else {
    std::vector<EtdCoefficients<Scalar>> coef(static_cast<std::size_t>(n / 2 + 1));
    for (Index k = 0; k <= n / 2; ++k) {
      const Scalar w = 2 * kPi<Scalar> * Scalar(k) / L0;
      coef[static_cast<std::size_t>(k)] = etd_coefficients<Scalar>(-w * w, dt);
    }
    auto at = [&](Index j) -> const EtdCoefficients<Scalar>& {
      return coef[static_cast<std::size_t>(std::abs(spectral::wavenumber(j, n)))];
    };
    const ComplexVector<Scalar> nv = explicit_part(v, L0, flow);
    ComplexVector<Scalar> a(n), b(n), c(n);
    for (Index j = 0; j < n; ++j) a(j) = at(j).e2 * v(j) + at(j).q * nv(j);
    const ComplexVector<Scalar> na = explicit_part(a, L0, flow);
    for (Index j = 0; j < n; ++j) b(j) = at(j).e2 * v(j) + at(j).q * na(j);
    const ComplexVector<Scalar> nb = explicit_part(b, L0, flow);
    for (Index j = 0; j < n; ++j) c(j) = at(j).e2 * a(j) + at(j).q * (Scalar(2) * nb(j) - nv(j));
    const ComplexVector<Scalar> nc = explicit_part(c, L0, flow);
    for (Index j = 0; j < n; ++j) {
      const auto& e = at(j);
      next(j) = e.e * v(j) + e.f1 * nv(j) + Scalar(2) * e.f2 * (na(j) + nb(j)) + e.f3 * nc(j);
    }
  }
  if (options.filter) {
    for (Index j = 0; j < n; ++j) next(j) *= filter_factor<Scalar>(spectral::wavenumber(j, n), n);
  }

  const ComplexVector<Scalar> points = spectral::inverse<Scalar>(next);
  if (!points.allFinite()) {
    throw CurveflowError(ErrorCode::RemeshFailed, "non-finite positions after step");
  }
  FlowState<Scalar> out;
  try {
    out.curve = resample_to_arclength<Scalar>(points, n, Closure::Periodic, options.remesh);
  } catch (const CurveflowError& e) {
    if (e.code() == ErrorCode::RemeshFailed) throw;
    throw CurveflowError(ErrorCode::RemeshFailed, e.what());
  }
  if (out.curve.rotation_number() != curve.rotation_number()) {
    throw CurveflowError(ErrorCode::RemeshFailed, "rotation number changed within a step");
  }
  out.t = state.t + dt;
  out.step_index = state.step_index + 1;
  out.dt_last = dt;
  return out;
}

template <typename Scalar>
Scalar adaptive_dt(const FlowState<Scalar>& state, Scalar kappa_max, const DtPolicy& policy) {
  if (policy.fixed) return Scalar(*policy.fixed);
  Scalar dt = Scalar(policy.c_cfl) / (1 + kappa_max * kappa_max);
  if (state.dt_last > 0) dt = std::min(dt, Scalar(policy.growth) * state.dt_last);
  return std::min(dt, Scalar(policy.dt_max));
}

std::string to_string(TerminationKind kind) {
  switch (kind) {
    case TerminationKind::ReachedTmax: return "ReachedTmax";
    case TerminationKind::BlowUpDeclared: return "BlowUpDeclared";
    case TerminationKind::StepLimit: return "StepLimit";
  }
  return "?";
}

namespace {

Sample make_sample(const FlowState<double>& state, const Diagnostics<double>& d) {
  Sample s;
  s.t = state.t;
  s.dt = state.dt_last;
  s.nodes = state.curve.node_count();
  s.d = d;
  s.d.t = state.t;
  try {
    s.fit = circle_fit(state.curve);
    s.fit.remainder.resize(0);
  } catch (const CurveflowError&) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    s.fit.centre = {nan, nan};
    s.fit.radius = state.curve.total_length() / (2 * kPi<double> * state.curve.rotation_number());
    s.fit.sigma_over_L = s.fit.rho_L2 = s.fit.rho_C0 = s.fit.rho_C1 = s.fit.rho_C2 = nan;
  }
  return s;
}

double curvature_bound(const Diagnostics<double>& d) {
  return std::max(std::abs(d.kappa_max), std::abs(d.kappa_min));
}

}  // namespace

Trajectory evolve(const FlowState<double>& initial, FlowKind flow, const EvolveOptions& options) {
  Trajectory traj;
  traj.flow = flow;
  FlowState<double> state = initial;
  Diagnostics<double> d = functionals(state.curve, flow);
  if (!(d.A > 0)) {
    throw CurveflowError(ErrorCode::NonPositiveArea, "initial enclosed area must be positive");
  }
  const auto& stop = options.stop;
  const long sample_every = std::max(1L, options.sample_every);
  long samples_taken = 0;
  auto record = [&](bool force_snapshot) {
    traj.samples.push_back(make_sample(state, d));
    const bool snap = force_snapshot || (options.snapshot_every > 0 &&
                                         samples_taken % options.snapshot_every == 0);
    if (snap) traj.snapshots.emplace_back(state.t, state.curve);
    ++samples_taken;
  };
  record(true);

  Termination& term = traj.termination;
  auto declare = [&](TerminationKind kind, std::string cause) {
    term.kind = kind;
    term.cause = std::move(cause);
    term.t_num = state.t;
  };

  const double t_eps = 1e-12 * std::max(1.0, stop.t_max);
  while (true) {
    if (state.t >= stop.t_max - t_eps) {
      declare(TerminationKind::ReachedTmax, "");
      break;
    }
    if (term.steps >= stop.max_steps) {
      declare(TerminationKind::StepLimit, "max_steps");
      break;
    }
    if (d.W > stop.W_max) {
      declare(TerminationKind::BlowUpDeclared, "W_max");
      break;
    }
    double kh = curvature_bound(d) * state.curve.spacing();
    while (kh > options.resolution.refine_kh &&
           state.curve.node_count() < options.resolution.max_nodes) {
      const Index m = 2 * state.curve.node_count();
      state.curve = ArcLengthCurve<double>(spectral::upsample<double>(state.curve.points(), m),
                                           state.curve.total_length(),
                                           state.curve.rotation_number());
      kh /= 2;
    }
    if (kh > options.resolution.blowup_kh) {
      declare(TerminationKind::BlowUpDeclared, "resolution");
      break;
    }

    double dt = adaptive_dt(state, curvature_bound(d), options.dt);
    dt = std::min(dt, stop.t_max - state.t);
    bool accepted = false;
    FlowState<double> next;
    while (!accepted) {
      if (dt < stop.dt_min) break;
      try {
        next = step(state, dt, flow, options.step);
        accepted = true;
      } catch (const CurveflowError& e) {
        if (e.code() != ErrorCode::RemeshFailed) throw;
        dt /= 2;
        ++term.rejected_steps;
      }
    }
    if (!accepted) {
      declare(TerminationKind::BlowUpDeclared, "dt_min");
      break;
    }
    state = std::move(next);
    ++term.steps;
    d = functionals(state.curve, flow);
    if (term.steps % sample_every == 0) record(false);
  }
  if (traj.samples.back().t < state.t) record(true);
  else if (traj.snapshots.empty() || traj.snapshots.back().first < state.t) {
    traj.snapshots.emplace_back(state.t, state.curve);
  }
  term.final_nodes = state.curve.node_count();
  traj.final_state = state;
  return traj;
}

template <typename Scalar>
Scalar scale_invariance_check(const ArcLengthCurve<Scalar>& curve, FlowKind flow) {
  const Scalar g0 = functionals(curve, flow).g;
  Scalar worst = 0;
  for (Scalar lambda : {Scalar(0.5), Scalar(2)}) {
    const Scalar g = functionals(curve.transformed(lambda), flow).g;
    worst = std::max(worst, std::abs(g - g0) / (1 + std::abs(g0)));
  }
  return worst;
}

#define CURVEFLOW_INSTANTIATE_FLOW(S)                                                         \
  template FlowState<S> step<S>(const FlowState<S>&, S, FlowKind, const StepOptions&);        \
  template S adaptive_dt<S>(const FlowState<S>&, S, const DtPolicy&);                         \
  template S scale_invariance_check<S>(const ArcLengthCurve<S>&, FlowKind);

CURVEFLOW_INSTANTIATE_FLOW(double)
CURVEFLOW_INSTANTIATE_FLOW(long double)

#undef CURVEFLOW_INSTANTIATE_FLOW

}  // namespace curveflow
