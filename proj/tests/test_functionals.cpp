#include <doctest.h>

#include "curveflow/functionals.hpp"

#include <cmath>

using namespace curveflow;

namespace {

constexpr double kTwoPi = 2 * kPi<double>;

bool close(double a, double b, double tol) { return std::abs(a - b) <= tol * (1 + std::abs(b)); }

// Reference values from 30-digit adaptive quadrature of the analytic
// parametrizations (independent of the FFT path).
struct Reference {
  const char* name;
  CurveSpec spec;
  double L, A, W, I_m1, I0, I1, J3, J4, tilde_I_m1, g_LP;
};

const Reference kReferences[] = {
    {"ellipse", {Ellipse{2.0, 1.0}, 512}, 9.6884482205476762, 6.2831853071795865,
     6.6360297521233013, 0.15883481899368091, 24.814413039103001, 10434.866207462277,
     171.17941992810488, 2250.1685370147016, 0.26828306006451267, 3.9493364950972237},
    {"2-circle mode 1", perturbed_n_circle(1.0, 2, 1, 0.05), 12.568334186478693,
     6.291039288813561, 12.573247914173297, -0.00093717047499353249, 0.11111117734642991,
     4.4050407300854713, 0.0029478804115573641, 0.018608982536372246, 0.0015614567354726594,
     0.0088419465537222714},
    {"2-circle mode 5", perturbed_n_circle(1.0, 2, 5, 0.05), 12.615506124876382,
     6.3224552153494589, 12.546297220433515, 0.0015731219876459446, 0.36421901146879333,
     203.44781303022523, -0.1941998710439516, 0.29991874386363618, 0.0040174434653987909,
     0.028983628021651088},
    {"2-circle mode 3", perturbed_n_circle(1.0, 2, 3, 0.1), 12.637156415125152,
     6.3774330867872803, 12.530439027890164, -0.0036609990742341335, 0.43544752820702629,
     17.485792777938642, 0.044729626496916732, 0.28572009365728987, 0.0060950709768373948,
     0.034651813285647879},
    {"limacon", {Limacon{1.5, 1.0}, 1024}, 10.5050222698445, 6.6758843888783106,
     30.345365471494766, -0.52038897588786072, 160.86506964719313, 218257.58708794453,
     7482.929897620225, 447115.28855920925, 0.71065663010542796, 12.801235502586401},
};

}  // namespace

TEST_CASE("Fourier normalization on circles") {
  const auto unit = make_test_curve<double>({Circle{1.0, 1}, 256});
  const auto t = fourier_coefficients(unit);
  CHECK(std::abs(std::abs(t(1)) - std::sqrt(kTwoPi)) < 1e-12);
  for (Index k = -t.bandwidth; k <= t.bandwidth; ++k) {
    if (k != 1) CHECK(std::abs(t(k)) < 1e-12);
  }
  const auto c3 = make_test_curve<double>({Circle{3.0, 2, 1.0, 2.0}, 256});
  const auto t3 = fourier_coefficients(c3, 16);
  const double L = c3.total_length();
  CHECK(std::abs(t3(0) - std::sqrt(L) * Complex<double>(1, 2)) < 1e-11);
  CHECK(std::abs(std::abs(t3(2)) - std::sqrt(L) * 3.0) < 1e-11);
  CHECK(std::abs(t3(1)) < 1e-11);
}

TEST_CASE("bandwidth truncation is refused when energy is lost") {
  const auto e = make_test_curve<double>({Ellipse{2.0, 1.0}, 512});
  CHECK_THROWS_AS(fourier_coefficients(e, 4), CurveflowError);
  CHECK_NOTHROW(fourier_coefficients(e, 128));
}

TEST_CASE("power sums") {
  const auto unit = fourier_coefficients(make_test_curve<double>({Circle{1.0, 1}, 128}));
  CHECK(power_sum(unit, Polynomial::monomial(1)) == doctest::Approx(kTwoPi).epsilon(1e-13));
  const auto two = fourier_coefficients(make_test_curve<double>({Circle{1.0, 2}, 128}));
  CHECK(power_sum(two, Polynomial::monomial(3)) ==
        doctest::Approx(32 * kPi<double>).epsilon(1e-13));
  const auto e = fourier_coefficients(make_test_curve<double>({Ellipse{2.0, 1.0}, 512}));
  const double L = e.length;
  CHECK(power_sum(e, Polynomial::monomial(2)) ==
        doctest::Approx(L * L * L / (kTwoPi * kTwoPi)).epsilon(1e-12));
  const double balance = power_sum(e, Polynomial::monomial(2) * Polynomial{-1.0, 1.0});
  CHECK(std::abs(balance) <= 1e-7 * power_sum(e, Polynomial::monomial(3)));
  CHECK_THROWS(power_sum(e, Polynomial::monomial(7)));
}

TEST_CASE("functionals agree with quadrature references") {
  for (const auto& ref : kReferences) {
    CAPTURE(ref.name);
    const auto curve = make_test_curve<double>(ref.spec);
    const auto d = functionals(curve, FlowKind::LP);
    CHECK(close(d.L, ref.L, 1e-12));
    CHECK(close(d.A, ref.A, 1e-12));
    CHECK(close(d.R, curve.rotation_number() * kTwoPi, 1e-12));
    CHECK(close(d.W, ref.W, 1e-10));
    CHECK(close(d.I_m1, ref.I_m1, 1e-12));
    CHECK(close(d.I0, ref.I0, 1e-9));
    CHECK(close(d.I1, ref.I1, 1e-8));
    CHECK(close(d.J3, ref.J3, 1e-9));
    CHECK(close(d.J4, ref.J4, 1e-9));
    CHECK(close(d.tilde_I_m1, ref.tilde_I_m1, 1e-12));
    CHECK(close(d.g, ref.g_LP, 1e-10));
    CHECK(close(d.L * d.W, d.I0 + d.R * d.R, 1e-10));
    CHECK(d.I_m1 >= 1 - d.n);
  }
}

TEST_CASE("ellipse curvature extremes and JP forcing") {
  const auto e = make_test_curve<double>({Ellipse{2.0, 1.0}, 512});
  const auto d = functionals(e, FlowKind::JP);
  CHECK(d.kappa_max == doctest::Approx(2.0).epsilon(1e-11));
  CHECK(d.kappa_min == doctest::Approx(0.25).epsilon(1e-11));
  // L^2 / 2A - 2 pi with the reference L and A = 2 pi.
  CHECK(close(d.g, 1.1864359385105454, 1e-11));
  CHECK(functionals(e, FlowKind::AP).g == 0.0);
}

TEST_CASE("n-fold circles are critical points of every functional") {
  for (int n = 1; n <= 3; ++n) {
    CAPTURE(n);
    const double r = 0.7;
    const auto d = functionals(make_test_curve<double>({Circle{r, n}, 256}), FlowKind::JP);
    CHECK(std::abs(d.I_m1) < 1e-12);
    CHECK(std::abs(d.I0) < 1e-10);
    CHECK(std::abs(d.tilde_I_m1) < 1e-12);
    CHECK(std::abs(d.J3) < 1e-10);
    CHECK(std::abs(d.J4) < 1e-10);
    CHECK(std::abs(d.g) < 1e-10);
    CHECK(close(d.W, kTwoPi * n / r, 1e-12));
  }
}

TEST_CASE("identity report") {
  SUBCASE("unit circle") {
    const auto rep = verify_identities(make_test_curve<double>({Circle{1.0, 1}, 256}));
    CHECK(rep.records.size() == 13);
    CHECK(rep.max_residual() <= 1e-10);
  }
  SUBCASE("ellipse") {
    const auto rep = verify_identities(make_test_curve<double>({Ellipse{2.0, 1.0}, 512}));
    CHECK(rep.pass());
    CHECK(rep.max_residual() <= 1e-7);
  }
  SUBCASE("random curves") {
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
      const int n = 1 + int(seed % 3);
      const auto rep = verify_identities(make_test_curve<double>({RandomBandLimited{n, seed}, 512}));
      CAPTURE(seed);
      CHECK(rep.max_residual() <= 1e-7);
    }
  }
}

TEST_CASE("inequality report") {
  const auto circle = check_inequalities(make_test_curve<double>({Circle{1.0, 1}, 256}));
  CHECK(circle.pass());
  CHECK(std::abs(circle.records[0].slack) < 1e-12);
  for (const auto& r : circle.ratios) CHECK(r.degenerate);

  const auto pert = check_inequalities(make_test_curve<double>(perturbed_n_circle(1.0, 2, 3, 0.1)));
  CHECK(pert.pass());
  for (const auto& r : pert.ratios) {
    CHECK_FALSE(r.degenerate);
    CHECK(std::isfinite(r.ratio));
    CHECK(r.ratio > 0);
  }
  CHECK(pert.ratios[0].ratio <= 10);
}

TEST_CASE("sign of the isoperimetric deficit along single-mode perturbations") {
  // Pairing of modes k and 2n - k: negative for 0 < k < 2n, k != n.
  const int n = 2;
  for (int k = -3; k <= 8; ++k) {
    if (k == 0) continue;
    CAPTURE(k);
    const auto curve = make_test_curve<double>(perturbed_n_circle(1.0, n, k, 0.05));
    const double im1 = functionals(curve, FlowKind::AP).I_m1;
    if (k == n) {
      CHECK(std::abs(im1) <= 1e-9);
    } else if (k > 0 && k < 2 * n) {
      CHECK(im1 < 0);
    } else if (k != 2 * n) {
      CHECK(im1 > 0);
    }
  }
}

TEST_CASE("scale invariance of the dimensionless functionals") {
  const auto base = make_test_curve<double>({RandomBandLimited{2, 3}, 512});
  const auto d0 = functionals(base, FlowKind::LP);
  const auto q0 = check_inequalities(base);
  for (double lambda : {0.5, 2.0, 10.0}) {
    const auto d = functionals(base.transformed(lambda), FlowKind::LP);
    CHECK(close(d.I_m1, d0.I_m1, 1e-8));
    CHECK(close(d.I0, d0.I0, 1e-8));
    CHECK(close(d.I1, d0.I1, 1e-8));
    CHECK(close(d.tilde_I_m1, d0.tilde_I_m1, 1e-8));
    CHECK(close(d.J3, d0.J3, 1e-8));
    CHECK(close(d.J4, d0.J4, 1e-8));
    CHECK(close(d.R, d0.R, 1e-8));
    CHECK(close(d.g, d0.g, 1e-8));
    const auto q = check_inequalities(base.transformed(lambda));
    for (std::size_t i = 0; i < q.ratios.size(); ++i) {
      CHECK(close(q.ratios[i].ratio, q0.ratios[i].ratio, 1e-8));
    }
  }
}

TEST_CASE("circle decomposition") {
  const auto c = make_test_curve<double>({Circle{3.0, 2, 1.0, 2.0}, 256});
  const auto fit = circle_fit(c);
  CHECK(std::abs(fit.centre - Complex<double>(1, 2)) < 1e-12);
  CHECK(fit.radius == doctest::Approx(3.0).epsilon(1e-13));
  CHECK(fit.rho_C0 < 1e-11);

  const auto p = make_test_curve<double>(perturbed_n_circle(1.0, 2, 5, 0.01));
  const auto pf = circle_fit(p);
  CHECK(pf.rho_C0 >= 0.005);
  CHECK(pf.rho_C0 <= 0.02);
  CHECK(pf.sigma_over_L >= 0);
  CHECK(pf.sigma_over_L < 0.5);
  for (Index j = 0; j < p.node_count(); ++j) {
    const double angle = kTwoPi * 2 * (double(j) / p.node_count() + pf.sigma_over_L);
    const auto rebuilt = pf.centre + pf.radius * std::polar(1.0, angle) + pf.remainder(j);
    CHECK(std::abs(rebuilt - p[j]) < 1e-10);
  }
}

TEST_CASE("stationarity of the normal velocity") {
  for (auto flow : {FlowKind::AP, FlowKind::LP, FlowKind::JP}) {
    CHECK(normal_velocity_sup(make_test_curve<double>({Circle{1.0, 3}, 256}), flow) < 1e-9);
    CHECK(normal_velocity_sup(make_test_curve<double>({Ellipse{2.0, 1.0}, 256}), flow) > 0.1);
  }
}
