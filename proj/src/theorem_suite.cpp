#include "curveflow/theorem_suite.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace curveflow {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kPiD = kPi<double>;

/// Second-order derivative at interior sample i of non-uniform data.
double centred_derivative(const std::vector<Sample>& s, std::size_t i, double (*get)(const Sample&)) {
  const double h1 = s[i].t - s[i - 1].t;
  const double h2 = s[i + 1].t - s[i].t;
  return -h2 / (h1 * (h1 + h2)) * get(s[i - 1]) + (h2 - h1) / (h1 * h2) * get(s[i]) +
         h1 / (h2 * (h1 + h2)) * get(s[i + 1]);
}

double relative(double lhs, double rhs) { return std::abs(lhs - rhs) / (1 + std::abs(rhs)); }

struct LineFit {
  double slope, intercept, rms;
};

LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t m = x.size();
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < m; ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / double(m), my = sy / double(m);
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < m; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  LineFit f{sxy / sxx, 0, 0};
  f.intercept = my - f.slope * mx;
  double ss = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const double r = y[i] - (f.intercept + f.slope * x[i]);
    ss += r * r;
  }
  f.rms = std::sqrt(ss / double(m));
  return f;
}

}  // namespace

// ---------------------------------------------------------------------------

BlowUpBoundReport blow_up_bound(const Diagnostics<double>& d0, FlowKind flow) {
  if (!(d0.I_m1 < 0)) {
    throw CurveflowError(ErrorCode::NotApplicable,
                         "I_{-1}(0) = " + std::to_string(d0.I_m1) + " is not negative");
  }
  BlowUpBoundReport r{flow, 0, d0.L, d0.A, d0.I_m1, d0.n};
  const double deficit = d0.L * d0.L - 4 * kPiD * d0.A;
  const double denom = -8 * kPiD * kPiD * d0.I_m1;
  switch (flow) {
    case FlowKind::AP: r.T_bound = deficit / (denom * d0.n); break;
    case FlowKind::LP: r.T_bound = deficit / denom; break;
    case FlowKind::JP: r.T_bound = d0.L * d0.L / (denom * d0.n); break;
  }
  return r;
}

BlowUpBoundReport check_blow_up_time(const Trajectory& traj, double relative_slack) {
  BlowUpBoundReport r = blow_up_bound(traj.samples.front().d, traj.flow);
  r.t_num = traj.termination.t_num;
  r.pass = traj.termination.kind == TerminationKind::BlowUpDeclared &&
           r.t_num <= r.T_bound * (1 + relative_slack);
  return r;
}

// ---------------------------------------------------------------------------

AuditReport audit_monotonicity(const Trajectory& traj) {
  const auto& s = traj.samples;
  if (s.size() < 10) throw std::invalid_argument("audit needs at least 10 samples");
  AuditReport a{};
  a.samples = s.size();
  a.rotation_constant = true;
  a.I_m1_lower_violation = -std::numeric_limits<double>::infinity();
  a.ratio_upper_violation = -std::numeric_limits<double>::infinity();
  a.ratio_lower_violation = -std::numeric_limits<double>::infinity();
  a.max_I_m1_increase = -std::numeric_limits<double>::infinity();
  a.max_ratio_increase = -std::numeric_limits<double>::infinity();
  const auto& d0 = s.front().d;
  const double ratio0 = d0.L * d0.L / d0.A;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto& d = s[i].d;
    const double ratio = d.L * d.L / d.A;
    a.rotation_constant = a.rotation_constant && d.n == d0.n;
    a.I_m1_lower_violation = std::max(a.I_m1_lower_violation, (1.0 - d.n) - d.I_m1);
    a.ratio_upper_violation = std::max(a.ratio_upper_violation, ratio - ratio0);
    a.ratio_lower_violation = std::max(a.ratio_lower_violation, 4 * kPiD - ratio);
    a.area_drift = std::max(a.area_drift, std::abs(d.A - d0.A) / d0.A);
    a.length_drift = std::max(a.length_drift, std::abs(d.L - d0.L) / d0.L);
    if (i > 0) {
      const auto& p = s[i - 1].d;
      a.max_I_m1_increase = std::max(a.max_I_m1_increase, d.I_m1 - p.I_m1);
      a.max_ratio_increase = std::max(a.max_ratio_increase, ratio - p.L * p.L / p.A);
    }
    if (i == 0 || i + 1 == s.size()) continue;
    const double energy_rate = centred_derivative(
        s, i, [](const Sample& x) { return x.d.L * x.d.L * x.d.I_m1; });
    a.energy_identity = std::max(a.energy_identity, relative(energy_rate, -2 * d.I0));
    const double area_rate = centred_derivative(s, i, [](const Sample& x) { return x.d.A; });
    a.area_identity = std::max(a.area_identity, relative(area_rate, d.g));
    const double length_rate =
        centred_derivative(s, i, [](const Sample& x) { return x.d.L * x.d.L; });
    a.length_identity =
        std::max(a.length_identity, relative(length_rate + 2 * d.I0, 4 * kPiD * d.n * d.g));
    const double W_rate = centred_derivative(s, i, [](const Sample& x) { return x.d.W; });
    const double W_formula = (-2 * d.I1 + d.J4 + (3 * d.R - d.g) * d.J3 +
                              3 * d.R * (d.R - d.g) * d.I0 - d.R * d.R * d.R * d.g) /
                             (d.L * d.L * d.L);
    a.elastic_identity = std::max(a.elastic_identity, relative(W_rate, W_formula));
  }
  return a;
}

// ---------------------------------------------------------------------------

RateFit fit_power_law(const std::vector<double>& t, const std::vector<double>& y, double T) {
  std::vector<double> x(t.size()), ly(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    x[i] = std::log(T - t[i]);
    ly[i] = std::log(y[i]);
  }
  const LineFit f = least_squares(x, ly);
  RateFit r;
  r.t_a = t.front();
  r.t_b = t.back();
  r.samples = t.size();
  r.T = T;
  r.exponent = f.slope;
  r.prefactor = std::exp(f.intercept);
  r.residual = f.rms;
  return r;
}

BlowUpRates fit_blow_up_rates(const Trajectory& traj, const RateOptions& options) {
  if (traj.termination.kind != TerminationKind::BlowUpDeclared) {
    throw CurveflowError(ErrorCode::InsufficientResolution, "trajectory did not blow up");
  }
  const auto& s = traj.samples;
  const double t_num = traj.termination.t_num;
  const auto& last = s.back().d;
  BlowUpRates out{};
  out.max_side = last.kappa_max >= -last.kappa_min;
  const double K = out.max_side ? last.kappa_max : -last.kappa_min;
  out.delta = 1 / (2 * K * K);

  std::vector<const Sample*> window;
  for (const auto& x : s) {
    const double tau = t_num - x.t;
    if (tau >= options.window_lo * out.delta && tau <= options.window_hi * out.delta) {
      window.push_back(&x);
    }
  }
  if (window.size() < options.min_samples) {
    throw CurveflowError(ErrorCode::InsufficientResolution,
                         std::to_string(window.size()) + " samples in the final decade, need " +
                             std::to_string(options.min_samples));
  }

  std::vector<double> t;
  for (const auto* x : window) t.push_back(x->t);
  auto series = [&](auto get) {
    std::vector<double> y;
    for (const auto* x : window) y.push_back(get(x->d));
    return y;
  };
  auto gate = [&](RateFit f) {
    f.reported = f.residual <= options.max_residual;
    if (!f.reported) f.exponent = kNaN;
    return f;
  };
  auto fit_both = [&](const std::string& name, const std::vector<double>& y) {
    if (*std::min_element(y.begin(), y.end()) <= 0) return;
    RateFit fixed = fit_power_law(t, y, t_num);
    fixed.quantity = name;
    out.fits.push_back(gate(fixed));
    RateFit best = fixed;
    const double span = options.window_lo * out.delta;
    for (int i = 1; i <= 400; ++i) {
      const double T = t_num + span * double(i) / 400.0;
      RateFit f = fit_power_law(t, y, T);
      if (f.residual < best.residual) best = f;
    }
    best.quantity = name;
    best.T_free = true;
    out.fits.push_back(gate(best));
  };
  // Series that are not positive over the whole window are skipped.
  fit_both("W", series([](const auto& d) { return d.W; }));
  fit_both("kappa_max", series([](const auto& d) { return d.kappa_max; }));
  fit_both("-kappa_min", series([](const auto& d) { return -d.kappa_min; }));

  std::size_t max_ok = 0, min_ok = 0;
  const double L0 = s.front().d.L;
  const int n = s.front().d.n;
  out.T_star = kNaN;
  out.C_star = kNaN;
  for (const auto& x : s) {
    if (-x.d.kappa_min >= x.d.kappa_max) {
      out.T_star = x.t;
      out.C_star = 1 + x.d.L * x.d.L / (4 * kPiD * n * x.d.A);
      break;
    }
  }
  for (const auto* x : window) {
    const double tau = t_num - x->t;
    if (x->d.kappa_max >= 1 / std::sqrt(2 * tau)) ++max_ok;
    double bound = kNaN;
    switch (traj.flow) {
      case FlowKind::AP: bound = 1 / std::sqrt(4 * tau); break;
      case FlowKind::LP: bound = std::cbrt(2 * kPiD * n / (9 * L0 * tau)); break;
      case FlowKind::JP: bound = 1 / std::sqrt(2 * out.C_star * tau); break;
    }
    if (-x->d.kappa_min >= bound) ++min_ok;
  }
  out.kappa_max_bound_fraction = double(max_ok) / double(window.size());
  out.kappa_min_bound_fraction = out.max_side ? kNaN : double(min_ok) / double(window.size());
  return out;
}

// ---------------------------------------------------------------------------

ExponentialFit fit_exponential(const std::vector<double>& t, const std::vector<double>& y,
                               double t_from, double floor) {
  std::vector<double> x, ly;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] >= t_from && y[i] > floor) {
      x.push_back(t[i]);
      ly.push_back(std::log(y[i]));
    }
  }
  ExponentialFit f{kNaN, kNaN, x.size()};
  if (x.size() < 3) return f;
  const LineFit lf = least_squares(x, ly);
  f.rate = -lf.slope;
  f.log_prefactor = lf.intercept;
  return f;
}

DecayReport fit_decay(const Trajectory& traj, double slack) {
  const auto& s = traj.samples;
  DecayReport r{};
  r.min_I_m1 = std::numeric_limits<double>::infinity();
  r.max_I_m1_increase = -std::numeric_limits<double>::infinity();
  r.L_bar = 0;
  std::vector<double> t, energy, i0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto& d = s[i].d;
    t.push_back(s[i].t);
    energy.push_back(d.L * d.L * d.I_m1);
    i0.push_back(d.I0);
    r.L_bar = std::max(r.L_bar, d.L);
    r.min_I_m1 = std::min(r.min_I_m1, d.I_m1);
    if (i > 0) r.max_I_m1_increase = std::max(r.max_I_m1_increase, d.I_m1 - s[i - 1].d.I_m1);
  }
  if (r.max_I_m1_increase > slack) {
    throw CurveflowError(ErrorCode::NotDecaying,
                         "I_{-1} increased by " + std::to_string(r.max_I_m1_increase));
  }
  const double t_half = t.back() / 2;
  const int n = s.front().d.n;
  r.energy = fit_exponential(t, energy, t_half, 1e-11 * r.L_bar * r.L_bar);
  r.I0 = fit_exponential(t, i0, t_half, 1e-14);
  r.rate_bound = 8 * kPiD * kPiD * n / (r.L_bar * r.L_bar);

  const auto& a = s[s.size() - 2];
  const auto& b = s.back();
  r.L_inf = b.d.L;
  r.A_inf = b.d.A;
  const double lambda = std::isfinite(r.energy.rate) && r.energy.rate > 0 ? r.energy.rate
                                                                          : r.rate_bound;
  const double dt = b.t - a.t;
  r.L_inf_error = dt > 0 ? std::abs(b.d.L - a.d.L) / dt / lambda : 0;
  r.A_inf_error = dt > 0 ? std::abs(b.d.A - a.d.A) / dt / lambda : 0;
  r.isoperimetric_defect = std::abs(4 * kPiD * n * r.A_inf / (r.L_inf * r.L_inf) - 1);
  return r;
}

ConvergenceReport convergence_report(const Trajectory& traj) {
  const auto& s = traj.samples;
  const double t_half = s.back().t / 2;
  const int n = s.front().d.n;
  std::vector<double> t, c0, c1, l2;
  for (const auto& x : s) {
    t.push_back(x.t);
    c0.push_back(x.fit.rho_C0);
    c1.push_back(x.fit.rho_C1);
    l2.push_back(x.fit.rho_L2);
  }
  ConvergenceReport r{};
  r.rho_C0 = fit_exponential(t, c0, t_half, 1e-13);
  r.rho_C1 = fit_exponential(t, c1, t_half, 1e-12);
  r.rho_L2 = fit_exponential(t, l2, t_half, 1e-13);

  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin, rmin = xmin, rmax = -xmin, pmin = xmin, pmax = -xmin;
  const double period = 1.0 / n;
  double phase_ref = kNaN;
  for (const auto& x : s) {
    if (x.t < t_half) continue;
    xmin = std::min(xmin, x.fit.centre.real());
    xmax = std::max(xmax, x.fit.centre.real());
    ymin = std::min(ymin, x.fit.centre.imag());
    ymax = std::max(ymax, x.fit.centre.imag());
    rmin = std::min(rmin, x.fit.radius);
    rmax = std::max(rmax, x.fit.radius);
    if (std::isnan(phase_ref)) phase_ref = x.fit.sigma_over_L;
    double dphi = std::remainder(x.fit.sigma_over_L - phase_ref, period);
    pmin = std::min(pmin, dphi);
    pmax = std::max(pmax, dphi);
  }
  r.centre_variation = std::hypot(xmax - xmin, ymax - ymin);
  r.radius_variation = rmax - rmin;
  r.phase_variation = pmax - pmin;
  return r;
}

// ---------------------------------------------------------------------------

StationaryReport stationary_classifier(const ArcLengthCurve<double>& curve, FlowKind flow) {
  StationaryReport r{};
  r.velocity_sup = normal_velocity_sup(curve, flow);
  r.stationary = r.velocity_sup <= 1e-9;
  r.tilde_I_m1 = functionals(curve, flow).tilde_I_m1;
  r.consistent = r.stationary == (r.tilde_I_m1 <= 1e-12);
  return r;
}

RealVector<double> signed_normal_distance(const ComplexVector<double>& points,
                                          const ArcLengthCurve<double>& reference) {
  const Index n = reference.node_count();
  const Index p = 4 * n;
  const double L = reference.total_length();
  const ComplexVector<double> c = spectral::forward<double>(reference.points());
  auto resampled = [&](int order) {
    return spectral::inverse<double>(
        spectral::resize_spectrum<double>(spectral::differentiate<double>(c, order, L), p));
  };
  const spectral::PeriodicInterpolator<double, Complex<double>> f0(resampled(0)), f1(resampled(1)),
      f2(resampled(2));

  RealVector<double> out(points.size());
  for (Index i = 0; i < points.size(); ++i) {
    const Complex<double> q = points(i);
    Index best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (Index j = 0; j < n; ++j) {
      const double dist = std::norm(reference[j] - q);
      if (dist < best_d) {
        best_d = dist;
        best = j;
      }
    }
    double u = double(best) / double(n);
    for (int it = 0; it < 12; ++it) {
      const Complex<double> diff = f0(u) - q, d1 = f1(u), d2 = f2(u);
      const double phi = std::real(std::conj(diff) * d1);
      const double dphi = std::norm(d1) + std::real(std::conj(diff) * d2);
      const double step = phi / dphi / L;  // derivatives are per unit arc length
      u -= step;
      u -= std::floor(u);
      if (std::abs(step) < 1e-15) break;
    }
    const Complex<double> d1 = f1(u);
    const Complex<double> normal = Complex<double>(0, 1) * d1 / std::abs(d1);
    out(i) = std::real(std::conj(q - f0(u)) * normal);
  }
  return out;
}

}  // namespace curveflow
