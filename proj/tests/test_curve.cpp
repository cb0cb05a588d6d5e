#include <doctest.h>

#include "curveflow/curve.hpp"

#include <cmath>
#include <sstream>

using namespace curveflow;

namespace {
constexpr double kTwoPi = 2 * kPi<double>;
}

TEST_CASE("non-uniformly sampled unit circle is resampled to unit speed") {
  const Index m = 256;
  ComplexVector<double> raw(m);
  for (Index j = 0; j < m; ++j) {
    const double u = double(j) / m;
    const double theta = kTwoPi * u + 0.3 * std::sin(kTwoPi * u);
    raw(j) = std::polar(1.0, theta);
  }
  const auto curve = resample_to_arclength<double>(raw, 256);
  CHECK(curve.total_length() == doctest::Approx(kTwoPi).epsilon(1e-12));
  CHECK(curve.rotation_number() == 1);
  const auto inv = check_invariants(curve);
  CHECK(inv.ok);
  CHECK(inv.max_speed_defect < 1e-10);
  for (Index j = 0; j < curve.node_count(); ++j) {
    CHECK(std::abs(std::abs(curve[j]) - 1.0) < 1e-12);
  }
}

TEST_CASE("ellipse perimeter and curvature") {
  const auto curve = make_test_curve<double>({Ellipse{2.0, 1.0}, 512});
  // Adaptive Gauss-Kronrod quadrature of sqrt(4 sin^2 + cos^2) over [0, 2 pi].
  CHECK(std::abs(curve.total_length() - 9.688448220547679) < 1e-10);
  const auto fr = frenet_data(curve);
  CHECK(std::abs(fr.curvature(0) - 2.0) < 1e-10);
  CHECK(std::abs(fr.curvature.sum() * curve.spacing() - kTwoPi) < 1e-10);
  for (Index j = 0; j < curve.node_count(); ++j) {
    CHECK(std::abs(std::real(std::conj(fr.normal(j)) * fr.tangent(j))) < 1e-12);
    CHECK(std::abs(std::abs(fr.normal(j)) - 1.0) < 1e-12);
  }
}

TEST_CASE("multiply covered circles") {
  const auto curve = make_test_curve<double>({Circle{1.0, 2}, 256});
  const auto lar = length_area_rotation(curve);
  CHECK(lar.length == doctest::Approx(4 * kPi<double>).epsilon(1e-12));
  CHECK(lar.area == doctest::Approx(kTwoPi).epsilon(1e-12));
  CHECK(lar.rotation_number == 2);
  const auto fr = frenet_data(make_test_curve<double>({Circle{0.5, 3}, 256}));
  CHECK((fr.curvature.array() - 2.0).abs().maxCoeff() < 1e-10);
}

TEST_CASE("limacon with inner loop has rotation number two") {
  const auto curve = make_test_curve<double>({Limacon{1.5, 1.0}, 512});
  const auto lar = length_area_rotation(curve);
  CHECK(lar.rotation_number == 2);
  CHECK(lar.area == doctest::Approx(2.125 * kPi<double>).epsilon(1e-10));
}

TEST_CASE("resampling is idempotent") {
  const auto once = make_test_curve<double>({RandomBandLimited{2, 7}, 512});
  const auto twice = resample_to_arclength<double>(once.points(), 512);
  CHECK((once.points() - twice.points()).cwiseAbs().maxCoeff() <= 1e-10 * once.total_length());
}

TEST_CASE("scale covariance") {
  const auto base = make_test_curve<double>({Ellipse{2.0, 1.0}, 256});
  const auto big = resample_to_arclength<double>((3.0 * base.points().array()).matrix(), 256);
  const auto a = length_area_rotation(base);
  const auto b = length_area_rotation(big);
  CHECK(b.length == doctest::Approx(3 * a.length).epsilon(1e-12));
  CHECK(b.area == doctest::Approx(9 * a.area).epsilon(1e-12));
  CHECK(b.rotation_number == a.rotation_number);
  CHECK(frenet_data(big).curvature(0) == doctest::Approx(frenet_data(base).curvature(0) / 3));
}

TEST_CASE("closure and immersion errors") {
  ComplexVector<double> open(100);
  for (Index j = 0; j < 100; ++j) open(j) = std::polar(1.0, 0.9 * kTwoPi * j / 99.0);
  CHECK_THROWS_AS(resample_to_arclength<double>(open, 64, Closure::RepeatedEndpoint),
                  CurveflowError);
  // z = e^{iu} + e^{2iu}/2 has a cusp at u = pi.
  ComplexVector<double> cusp(128);
  for (Index j = 0; j < 128; ++j) {
    const double u = kTwoPi * j / 128.0;
    cusp(j) = std::polar(1.0, u) + 0.5 * std::polar(1.0, 2 * u);
  }
  try {
    resample_to_arclength<double>(cusp, 128);
    FAIL("expected NonImmersed");
  } catch (const CurveflowError& e) {
    CHECK(e.code() == ErrorCode::NonImmersed);
  }
  CHECK_THROWS(make_test_curve<double>(perturbed_n_circle(1.0, 2, 1, 2.5)));
}

TEST_CASE("curve csv round trip") {
  const auto curve = make_test_curve<double>({Ellipse{2.0, 1.0}, 128});
  std::stringstream ss;
  write_curve_csv(ss, curve);
  const auto back = read_curve_csv(ss);
  CHECK(back.total_length() == curve.total_length());
  CHECK(back.rotation_number() == 1);
  CHECK((back.points() - curve.points()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("long double instantiation") {
  const auto curve = make_test_curve<long double>({Circle{1.0, 1}, 128});
  CHECK(std::abs(double(curve.total_length()) - kTwoPi) < 1e-14);
}
