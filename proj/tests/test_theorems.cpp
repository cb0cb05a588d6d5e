#include <doctest.h>

#include "curveflow/theorem_suite.hpp"

#include <cmath>

using namespace curveflow;

namespace {

constexpr double kPiD = kPi<double>;

Diagnostics<double> diag(double L, double A, int n) {
  Diagnostics<double> d{};
  d.L = L;
  d.A = A;
  d.n = n;
  d.R = 2 * kPiD * n;
  d.I_m1 = 1 - 4 * kPiD * n * A / (L * L);
  return d;
}

// Blow-up shaped samples: kappa_max = a / sqrt(T - t), W = b / sqrt(T - t).
Trajectory synthetic_blowup(double T, double a, double b, FlowKind flow) {
  Trajectory tr;
  tr.flow = flow;
  const double t_num = T - 1e-6;
  for (int i = 0; i <= 4000; ++i) {
    const double t = T - std::pow(10.0, -6.0 * i / 4000.0);  // T - t from 1 down to 1e-6
    Sample s;
    s.t = t;
    s.d = diag(12.6, 6.35, 2);
    s.d.kappa_max = a / std::sqrt(T - t);
    s.d.kappa_min = -0.5;
    s.d.W = b / std::sqrt(T - t);
    tr.samples.push_back(s);
  }
  tr.termination.kind = TerminationKind::BlowUpDeclared;
  tr.termination.t_num = t_num;
  tr.termination.cause = "resolution";
  return tr;
}

EvolveOptions every_step(double t_max) {
  EvolveOptions o;
  o.stop.t_max = t_max;
  o.sample_every = 1;
  return o;
}

}  // namespace

TEST_CASE("blow-up time bounds") {
  const auto d = diag(12.6, 6.35, 2);
  REQUIRE(d.I_m1 < 0);
  const double deficit = 12.6 * 12.6 - 4 * kPiD * 6.35;
  const double denom = -8 * kPiD * kPiD * d.I_m1;
  CHECK(blow_up_bound(d, FlowKind::AP).T_bound == doctest::Approx(deficit / (2 * denom)));
  CHECK(blow_up_bound(d, FlowKind::LP).T_bound == doctest::Approx(deficit / denom));
  CHECK(blow_up_bound(d, FlowKind::JP).T_bound == doctest::Approx(12.6 * 12.6 / (2 * denom)));
  try {
    blow_up_bound(diag(2 * kPiD, kPiD, 1), FlowKind::AP);
    FAIL("expected NotApplicable");
  } catch (const CurveflowError& e) {
    CHECK(e.code() == ErrorCode::NotApplicable);
  }
}

TEST_CASE("blow-up time check") {
  auto tr = synthetic_blowup(1.0, 1.0, 3.0, FlowKind::AP);
  const double bound = blow_up_bound(tr.samples.front().d, FlowKind::AP).T_bound;
  tr.termination.t_num = 0.5 * bound;
  CHECK(check_blow_up_time(tr).pass);
  tr.termination.t_num = 1.005 * bound;
  CHECK(check_blow_up_time(tr).pass);
  tr.termination.t_num = 1.02 * bound;
  CHECK_FALSE(check_blow_up_time(tr).pass);
  tr.termination.t_num = 0.5 * bound;
  tr.termination.kind = TerminationKind::ReachedTmax;
  CHECK_FALSE(check_blow_up_time(tr).pass);
}

TEST_CASE("power law and exponential fits recover exact data") {
  std::vector<double> t, y, e;
  for (int i = 0; i < 50; ++i) {
    t.push_back(0.9 + 0.002 * i);
    y.push_back(3.0 * std::pow(1.0 - t.back(), -0.5));
    e.push_back(7.0 * std::exp(-2.5 * t.back()));
  }
  const RateFit f = fit_power_law(t, y, 1.0);
  CHECK(f.exponent == doctest::Approx(-0.5).epsilon(1e-10));
  CHECK(f.prefactor == doctest::Approx(3.0).epsilon(1e-10));
  CHECK(f.residual < 1e-12);
  const ExponentialFit x = fit_exponential(t, e, 0.95, 1e-30);
  CHECK(x.rate == doctest::Approx(2.5).epsilon(1e-10));
  CHECK(x.samples == 25);
  CHECK(std::isnan(fit_exponential(t, e, 2.0, 0.0).rate));
}

TEST_CASE("blow-up rate fits on synthetic data") {
  const auto tr = synthetic_blowup(1.0, 1.2, 3.0, FlowKind::AP);
  const BlowUpRates r = fit_blow_up_rates(tr);
  CHECK(r.max_side);
  CHECK(r.kappa_max_bound_fraction == 1.0);
  CHECK(std::isnan(r.kappa_min_bound_fraction));
  REQUIRE(r.fits.size() == 6);
  for (const auto& f : r.fits) {
    CHECK(f.reported);
    CHECK(f.samples >= 30);
    if (f.T_free && f.quantity != "-kappa_min") {
      CHECK(f.exponent == doctest::Approx(-0.5).epsilon(0.02));
      CHECK(f.T == doctest::Approx(1.0).epsilon(1e-6));
    }
  }
  // Below the lower bound by a constant factor.
  const BlowUpRates weak = fit_blow_up_rates(synthetic_blowup(1.0, 0.5, 3.0, FlowKind::AP));
  CHECK(weak.kappa_max_bound_fraction == 0.0);

  Trajectory calm = tr;
  calm.termination.kind = TerminationKind::ReachedTmax;
  CHECK_THROWS_AS(fit_blow_up_rates(calm), CurveflowError);
  RateOptions strict;
  strict.min_samples = 100000;
  CHECK_THROWS_AS(fit_blow_up_rates(tr, strict), CurveflowError);
}

TEST_CASE("audit of an LP ellipse run") {
  const FlowState<double> s0{make_test_curve<double>({Ellipse{2.0, 1.0}, 256})};
  EvolveOptions o = every_step(0.1);
  o.dt.fixed = 1e-3;
  const AuditReport a = audit_monotonicity(evolve(s0, FlowKind::LP, o));
  MESSAGE("identity residuals " << a.energy_identity << " " << a.area_identity << " "
                                << a.length_identity << " " << a.elastic_identity);
  CHECK(a.energy_identity < 1e-4);
  CHECK(a.area_identity < 1e-4);
  CHECK(a.length_identity < 1e-4);
  CHECK(a.elastic_identity < 1e-3);
  CHECK(a.max_I_m1_increase < 0);
  CHECK(a.max_ratio_increase < 0);
  CHECK(a.ratio_lower_violation < 0);
  CHECK(a.I_m1_lower_violation < 0);
  CHECK(a.length_drift < 1e-8);
  CHECK(a.rotation_constant);
}

TEST_CASE("decay and convergence of a perturbed double circle") {
  const FlowState<double> s0{make_test_curve<double>(perturbed_n_circle(1.0, 2, 5, 0.05))};
  EvolveOptions o;
  o.stop.t_max = 3.0;
  o.sample_every = 5;
  const Trajectory tr = evolve(s0, FlowKind::LP, o);
  const DecayReport d = fit_decay(tr);
  MESSAGE("energy rate " << d.energy.rate << " bound " << d.rate_bound);
  CHECK(d.energy.samples >= 10);
  CHECK(d.energy.rate >= d.rate_bound);
  CHECK(d.min_I_m1 >= 0);
  CHECK(d.isoperimetric_defect < 1e-6);
  CHECK(d.L_inf == doctest::Approx(tr.samples.front().d.L).epsilon(1e-8));

  const ConvergenceReport c = convergence_report(tr);
  CHECK(c.rho_C0.rate > 0);
  CHECK(c.centre_variation < 1e-5);
  CHECK(c.radius_variation < 1e-5);
  CHECK(c.phase_variation < 1e-3);
}

TEST_CASE("decay fit refuses growing I_m1") {
  Trajectory tr;
  for (int i = 0; i < 20; ++i) {
    Sample s;
    s.t = 0.1 * i;
    s.d = diag(12.6, 6.35 - 0.01 * i, 2);
    tr.samples.push_back(s);
  }
  CHECK_THROWS_AS(fit_decay(tr), CurveflowError);
}

TEST_CASE("stationary classifier") {
  for (int n : {1, 2, 3}) {
    const auto r = stationary_classifier(make_test_curve<double>({Circle{0.7, n}, 256}),
                                         FlowKind::JP);
    CHECK(r.stationary);
    CHECK(r.consistent);
  }
  const auto e = stationary_classifier(make_test_curve<double>({Ellipse{2.0, 1.0}, 256}),
                                       FlowKind::AP);
  CHECK_FALSE(e.stationary);
  CHECK(e.consistent);
}

TEST_CASE("signed normal distance") {
  const auto circle = make_test_curve<double>({Circle{1.0, 1}, 128});
  ComplexVector<double> p(4);
  p << Complex<double>(0.9, 0), Complex<double>(0, 1.2), std::polar(1.0, 2.0),
      std::polar(0.5, 4.0);
  const auto dist = signed_normal_distance(p, circle);
  CHECK(dist(0) == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(dist(1) == doctest::Approx(-0.2).epsilon(1e-12));
  CHECK(std::abs(dist(2)) < 1e-13);
  CHECK(dist(3) == doctest::Approx(0.5).epsilon(1e-12));

  const auto ellipse = make_test_curve<double>({Ellipse{2.0, 1.0}, 256});
  const auto tip = signed_normal_distance(ellipse.points(), ellipse);
  CHECK(tip.cwiseAbs().maxCoeff() < 1e-12);
}
