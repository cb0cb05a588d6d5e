#include <doctest.h>

#include "curveflow/oracle.hpp"

#include <cmath>

using namespace curveflow;
using namespace curveflow::oracle;

namespace {

constexpr double kPiD = kPi<double>;

// Same frozen quadrature values as the functionals tests.
constexpr double kEllipseL = 9.6884482205476762;
constexpr double kEllipseI_m1 = 0.15883481899368091;
constexpr double kEllipseI1 = 10434.866207462277;

bool close(double a, double b, double tol) { return std::abs(a - b) <= tol * (1 + std::abs(b)); }

template <typename Error>
void expect_code(ErrorCode code, Error&& body) {
  try {
    body();
    FAIL("expected " << to_string(code));
  } catch (const CurveflowError& e) {
    CHECK(e.code() == code);
  }
}

}  // namespace

TEST_CASE("oracle circle and multiply covered circle") {
  const auto z = sample_parametric<double>(Circle{1.0, 1}, 4096);
  const auto d = oracle_functionals<double>(z, 2, FlowKind::AP);
  CHECK(std::abs(d.L - 2 * kPiD) < 1e-8);
  CHECK(std::abs(d.A - kPiD) < 1e-8);
  CHECK(d.n == 1);
  CHECK(std::abs(d.I_m1) < 1e-8);
  CHECK(std::abs(d.kappa_max - 1) < 1e-8);

  const auto d2 = oracle_functionals<double>(sample_parametric<double>(Circle{1.0, 2}, 8192), 2,
                                             FlowKind::JP);
  CHECK(d2.n == 2);
  CHECK(std::abs(d2.A - 2 * kPiD) < 1e-8);
  CHECK(std::abs(d2.L - 4 * kPiD) < 1e-8);
  CHECK(std::abs(d2.g) < 1e-7);
}

TEST_CASE("oracle ellipse against quadrature") {
  const auto d = oracle_functionals<double>(sample_parametric<double>(Ellipse{2.0, 1.0}, 4096), 2,
                                            FlowKind::LP);
  CHECK(close(d.L, kEllipseL, 1e-10));
  CHECK(std::abs(d.I_m1 - kEllipseI_m1) < 1e-6);
  CHECK(close(d.kappa_max, 2.0, 1e-7));
  CHECK(close(d.kappa_min, 0.25, 1e-7));
}

TEST_CASE("oracle extrapolation converges at least at second order") {
  auto error = [](Index m) {
    const auto d = oracle_functionals<double>(sample_parametric<double>(Ellipse{2.0, 1.0}, m), 2,
                                              FlowKind::AP);
    return std::abs(d.I1 - kEllipseI1);
  };
  const double e1 = error(2048), e2 = error(4096);
  MESSAGE("I1 errors " << e1 << " " << e2);
  CHECK(std::log2(e1 / e2) >= 2.0);
}

TEST_CASE("oracle agrees with the spectral diagnostics") {
  const auto curve = make_test_curve<double>(perturbed_n_circle(1.0, 2, 3, 0.1));
  const auto spec = functionals(curve, FlowKind::LP);
  const auto z = sample_parametric<double>(perturbed_n_circle(1.0, 2, 3, 0.1).family, 8192);
  const auto orc = oracle_functionals<double>(z, 2, FlowKind::LP);
  CHECK(orc.n == spec.n);
  CHECK(close(orc.L, spec.L, 1e-8));
  CHECK(close(orc.A, spec.A, 1e-8));
  CHECK(close(orc.W, spec.W, 1e-8));
  CHECK(close(orc.I0, spec.I0, 1e-8));
  CHECK(close(orc.tilde_I_m1, spec.tilde_I_m1, 1e-8));
  CHECK(close(orc.g, spec.g, 1e-8));
  CHECK(std::abs(orc.I_m1 - spec.I_m1) < 1e-10);
}

TEST_CASE("oracle refuses coarse polylines") {
  const auto z = sample_parametric<double>(Circle{1.0, 1}, 1024);
  expect_code(ErrorCode::TooCoarse, [&] { oracle_functionals<double>(z, 2, FlowKind::AP); });
  CHECK_THROWS_AS(oracle_functionals<double>(z, 1, FlowKind::AP), std::invalid_argument);
}

TEST_CASE("explicit step") {
  const auto z = sample_parametric<double>(Ellipse{2.0, 1.0}, 2048);
  const PolylineState<double> s{z, 0.0};
  const double dt = oracle_stable_dt(z);
  CHECK(dt > 0);
  expect_code(ErrorCode::StabilityViolation,
              [&] { oracle_step_explicit(s, FlowKind::AP, 1.01 * dt); });
  const auto s1 = oracle_step_explicit(s, FlowKind::AP, dt);
  CHECK(s1.t == doctest::Approx(dt));
  // Points move along the normal with speed kappa - 2 pi / L.
  const double v_tip = 2.0 - 2 * kPiD / kEllipseL;
  CHECK(std::abs(std::abs(s1.points(0) - z(0)) / dt - v_tip) < 1e-4);
  CHECK(s1.points(0).real() < z(0).real());

  const auto c = sample_parametric<double>(Circle{1.0, 1}, 2048);
  const double dc = oracle_stable_dt(c);
  const auto c1 = oracle_step_explicit<double>({c, 0.0}, FlowKind::AP, dc);
  CHECK((c1.points - c).cwiseAbs().maxCoeff() < 1e-14);
  // JP sees the O(h^2) mismatch between trapezoid length and area.
  const auto c2 = oracle_step_explicit<double>({c, 0.0}, FlowKind::JP, dc);
  CHECK((c2.points - c).cwiseAbs().maxCoeff() / dc < 1e-4);
}
