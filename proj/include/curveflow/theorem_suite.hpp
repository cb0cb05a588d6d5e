#pragma once

// Post-processing of trajectories: blow-up time bounds, finite-difference
// audits of the evolution identities, blow-up rate fits, decay fits and the
// circle decomposition of global solutions.

#include "curveflow/flow.hpp"

#include <string>
#include <vector>

namespace curveflow {

/// One line of a verdict: value compared against bound.
struct Check {
  std::string name;
  std::string paper_ref;  ///< which statement the check exercises
  double value;
  double bound;
  bool pass;
};

// ---------------------------------------------------------------------------

struct BlowUpBoundReport {
  FlowKind flow;
  double T_bound;
  double L0, A0, I_m1_0;
  int n;
  double t_num = 0;
  bool pass = false;
};

/// AP: (L0^2 - 4 pi A0) / (-8 pi^2 n I_{-1}(0)); LP: same without n;
/// JP: L0^2 / (-8 pi^2 n I_{-1}(0)). Throws NotApplicable when I_{-1}(0) >= 0.
BlowUpBoundReport blow_up_bound(const Diagnostics<double>& d0, FlowKind flow);

/// Fills t_num from the trajectory; pass iff t_num <= T_bound (1 + slack).
BlowUpBoundReport check_blow_up_time(const Trajectory& traj, double relative_slack = 1e-2);

// ---------------------------------------------------------------------------

struct AuditReport {
  /// Max over interior samples of |lhs - rhs| / (1 + |rhs|) with lhs a
  /// centred (non-uniform) difference quotient.
  double energy_identity;   ///< d(L^2 I_{-1})/dt = -2 I0
  double area_identity;     ///< dA/dt = g
  double length_identity;   ///< dL^2/dt + 2 I0 = 4 pi n g
  double elastic_identity;  ///< dW/dt = L^{-3}{-2I1 + J4 + (3R-g)J3 + 3R(R-g)I0 - R^3 g}
  double max_I_m1_increase;  ///< largest sample-to-sample increase of I_{-1}
  double I_m1_lower_violation;  ///< max of (1 - n) - I_{-1}, <= 0 when fine
  double ratio_upper_violation;  ///< max of L^2/A - L0^2/A0
  double ratio_lower_violation;  ///< max of 4 pi - L^2/A
  double max_ratio_increase;     ///< largest step increase of L^2/A
  double area_drift;    ///< max |A - A0| / A0
  double length_drift;  ///< max |L - L0| / L0
  bool rotation_constant;
  std::size_t samples;
};

/// Requires at least 10 samples.
AuditReport audit_monotonicity(const Trajectory& traj);

// ---------------------------------------------------------------------------

struct RateFit {
  std::string quantity;  ///< "W", "kappa_max", "-kappa_min"
  double t_a = 0, t_b = 0;
  std::size_t samples = 0;
  double T = 0;  ///< blow-up time used in T - t
  bool T_free = false;
  double exponent = 0;  ///< NaN when the quality gate rejects the fit
  double prefactor = 0;
  double residual = 0;  ///< RMS of the log-space residuals
  double reference_exponent = -0.5;
  bool reported = false;
};

struct RateOptions {
  double window_lo = 30;   ///< in units of delta = 1 / (2 K(t_num)^2)
  double window_hi = 300;
  std::size_t min_samples = 30;
  double max_residual = 0.2;
};

struct BlowUpRates {
  bool max_side;  ///< kappa_max is the blowing-up side
  double delta;
  std::vector<RateFit> fits;
  /// Fraction of window samples with kappa_max >= 1 / sqrt(2 (t_num - t)).
  double kappa_max_bound_fraction = 0;
  /// Min-curvature bound fraction (flow specific; NaN when max side blows).
  double kappa_min_bound_fraction = 0;
  double T_star = 0;  ///< first sample with -kappa_min >= kappa_max (NaN if none)
  double C_star = 0;  ///< 1 + L(T*)^2 / (4 pi n A(T*))
};

/// Fits W, kappa_max and -kappa_min with T = t_num and with T free.
/// Throws InsufficientResolution unless the trajectory ended in blow-up and
/// the final decade holds at least min_samples samples.
BlowUpRates fit_blow_up_rates(const Trajectory& traj, const RateOptions& options = {});

/// Log-linear least squares of log y = log C + p log(T - t).
RateFit fit_power_law(const std::vector<double>& t, const std::vector<double>& y, double T);

// ---------------------------------------------------------------------------

struct ExponentialFit {
  double rate = 0;  ///< lambda in y ~ C exp(-lambda t)
  double log_prefactor = 0;
  std::size_t samples = 0;
};

/// Least squares of log y against t over samples with t >= t_from and
/// y > floor.
ExponentialFit fit_exponential(const std::vector<double>& t, const std::vector<double>& y,
                               double t_from, double floor);

struct DecayReport {
  ExponentialFit energy;  ///< L^2 I_{-1}
  ExponentialFit I0;
  double L_bar;
  double rate_bound;  ///< 8 pi^2 n / L_bar^2
  double L_inf, A_inf;
  double L_inf_error, A_inf_error;
  double isoperimetric_defect;  ///< |4 pi n A_inf / L_inf^2 - 1|
  double min_I_m1;
  double max_I_m1_increase;
};

/// Throws NotDecaying if I_{-1} increases by more than slack between samples.
DecayReport fit_decay(const Trajectory& traj, double slack = 1e-8);

struct ConvergenceReport {
  ExponentialFit rho_C0, rho_C1, rho_L2;
  double centre_variation;  ///< max |c(t) - c(t')| over the final half
  double radius_variation;
  double phase_variation;   ///< of sigma / L modulo 1 / n
};

ConvergenceReport convergence_report(const Trajectory& traj);

// ---------------------------------------------------------------------------

struct StationaryReport {
  bool stationary;  ///< sup |kappa~ - g / L| <= 1e-9
  double velocity_sup;
  double tilde_I_m1;
  bool consistent;  ///< agrees with tilde I_{-1} <= 1e-12
};

StationaryReport stationary_classifier(const ArcLengthCurve<double>& curve, FlowKind flow);

// ---------------------------------------------------------------------------

/// Distance from each point to the reference curve, signed along the
/// reference normal at the nearest point. Nearest points come from Newton
/// iteration on the spectral interpolant of the reference.
RealVector<double> signed_normal_distance(const ComplexVector<double>& points,
                                          const ArcLengthCurve<double>& reference);

}  // namespace curveflow
