#include "curveflow/curve.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

namespace curveflow {

namespace {

template <typename Scalar>
Scalar bounding_diameter(const ComplexVector<Scalar>& z) {
  const Scalar x0 = z.real().minCoeff(), x1 = z.real().maxCoeff();
  const Scalar y0 = z.imag().minCoeff(), y1 = z.imag().maxCoeff();
  return std::hypot(x1 - x0, y1 - y0);
}

// Fritsch-Carlson limited Hermite slopes for an increasing segment.
template <typename Scalar>
Scalar hermite_inverse(Scalar s, Scalar s0, Scalar s1, Scalar u0, Scalar u1, Scalar m0,
                       Scalar m1) {
  const Scalar h = s1 - s0;
  const Scalar secant = (u1 - u0) / h;
  auto limit = [secant](Scalar m) {
    if (m <= 0) return Scalar(0);
    return std::min(m, 3 * secant);
  };
  m0 = limit(m0);
  m1 = limit(m1);
  const Scalar t = (s - s0) / h;
  const Scalar t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * u0 + (t3 - 2 * t2 + t) * h * m0 + (-2 * t3 + 3 * t2) * u1 +
         (t3 - t2) * h * m1;
}

template <typename Scalar>
ComplexVector<Scalar> arclength_tangent(const ArcLengthCurve<Scalar>& curve) {
  const ComplexVector<Scalar> coeffs = spectral::forward<Scalar>(curve.points());
  return spectral::inverse<Scalar>(
      spectral::differentiate<Scalar>(coeffs, 1, curve.total_length()));
}

}  // namespace

template <typename Scalar>
Scalar tangent_winding(const ComplexVector<Scalar>& tangent) {
  const Index n = tangent.size();
  Scalar total = 0;
  for (Index j = 0; j < n; ++j) {
    const Complex<Scalar> step = tangent((j + 1) % n) * std::conj(tangent(j));
    total += std::arg(step);  // in (-pi, pi]
  }
  return total;
}

template <typename Scalar>
ArcLengthCurve<Scalar> resample_to_arclength(const ComplexVector<Scalar>& raw_in,
                                             Index node_count, Closure closure,
                                             const ResampleTolerances& tol) {
  if (!is_power_of_two(node_count) || node_count < 64) {
    throw std::invalid_argument("node count must be a power of two >= 64");
  }
  ComplexVector<Scalar> raw = raw_in;
  if (closure == Closure::RepeatedEndpoint) {
    if (raw.size() < 2) throw CurveflowError(ErrorCode::NotClosed, "polyline too short");
    const Scalar gap = std::abs(raw(raw.size() - 1) - raw(0));
    const Scalar diameter = bounding_diameter(raw);
    if (gap > Scalar(tol.closure) * diameter) {
      std::ostringstream msg;
      msg << "endpoint gap " << double(gap) << " exceeds " << tol.closure << " of diameter";
      throw CurveflowError(ErrorCode::NotClosed, msg.str());
    }
    raw = ComplexVector<Scalar>(raw.head(raw.size() - 1));
  }
  const Index m = raw.size();
  if (m < 8) throw std::invalid_argument("need at least 8 samples");

  const Index p = 4 * std::max(m, node_count);
  const ComplexVector<Scalar> coeffs = spectral::forward<Scalar>(raw);
  const ComplexVector<Scalar> fine_f =
      spectral::inverse<Scalar>(spectral::resize_spectrum<Scalar>(coeffs, p));
  const ComplexVector<Scalar> fine_du = spectral::inverse<Scalar>(
      spectral::resize_spectrum<Scalar>(spectral::differentiate<Scalar>(coeffs, 1, Scalar(1)), p));

  RealVector<Scalar> speed = fine_du.cwiseAbs();
  const Scalar mean_speed = speed.mean();
  if (!(speed.minCoeff() >= Scalar(tol.min_speed) * mean_speed)) {
    throw CurveflowError(ErrorCode::NonImmersed, "parameter speed vanishes");
  }

  const auto anti = spectral::integrate_periodic<Scalar>(speed);
  const Scalar length = anti.mean;
  RealVector<Scalar> arc(p + 1);
  for (Index i = 0; i < p; ++i) arc(i) = length * Scalar(i) / Scalar(p) + anti.periodic_part(i);
  arc(p) = length;
  for (Index i = 0; i < p; ++i) {
    if (!(arc(i + 1) > arc(i))) {
      throw CurveflowError(ErrorCode::NonImmersed, "cumulative length not monotone");
    }
  }

  const spectral::PeriodicInterpolator<Scalar, Scalar> periodic_arc(anti.periodic_part);
  const spectral::PeriodicInterpolator<Scalar, Scalar> speed_at(speed);
  const spectral::PeriodicInterpolator<Scalar, Complex<Scalar>> position_at(fine_f);

  ComplexVector<Scalar> points(node_count);
  const Scalar du = Scalar(1) / Scalar(p);
  const Scalar newton_tol = 8 * std::numeric_limits<Scalar>::epsilon() * length;
  Index seg = 0;
  for (Index j = 0; j < node_count; ++j) {
    const Scalar target = length * Scalar(j) / Scalar(node_count);
    while (seg + 1 < p && arc(seg + 1) <= target) ++seg;
    const Scalar u0 = du * Scalar(seg), u1 = du * Scalar(seg + 1);
    Scalar u = hermite_inverse(target, arc(seg), arc(seg + 1), u0, u1, 1 / speed(seg),
                               1 / speed((seg + 1) % p));
    if (j > 0) {
      for (int it = 0; it < 4; ++it) {
        const Scalar residual = length * u + periodic_arc(u) - target;
        if (std::abs(residual) <= newton_tol) break;
        u -= residual / speed_at(u);
      }
    }
    points(j) = position_at(u);
  }

  ArcLengthCurve<Scalar> provisional(points, length, 0);
  const ComplexVector<Scalar> tangent = arclength_tangent(provisional);
  const Scalar defect = (tangent.cwiseAbs().array() - Scalar(1)).abs().maxCoeff();
  if (!(defect <= Scalar(tol.unit_speed))) {
    std::ostringstream msg;
    msg << "unit-speed defect " << double(defect) << " after reparametrization";
    throw CurveflowError(ErrorCode::RemeshFailed, msg.str());
  }
  const int rotation =
      static_cast<int>(std::lround(double(tangent_winding<Scalar>(tangent) / (2 * kPi<Scalar>))));
  return ArcLengthCurve<Scalar>(std::move(points), length, rotation);
}

template <typename Scalar>
FrenetData<Scalar> frenet_data(const ArcLengthCurve<Scalar>& curve) {
  const Scalar length = curve.total_length();
  const ComplexVector<Scalar> coeffs = spectral::forward<Scalar>(curve.points());
  const ComplexVector<Scalar> d1 =
      spectral::inverse<Scalar>(spectral::differentiate<Scalar>(coeffs, 1, length));
  const ComplexVector<Scalar> d2 =
      spectral::inverse<Scalar>(spectral::differentiate<Scalar>(coeffs, 2, length));
  const Index n = curve.node_count();
  FrenetData<Scalar> out{ComplexVector<Scalar>(n), ComplexVector<Scalar>(n), RealVector<Scalar>(n)};
  for (Index j = 0; j < n; ++j) {
    const Scalar speed = std::abs(d1(j));
    out.tangent(j) = d1(j) / speed;
    out.normal(j) = Complex<Scalar>(0, 1) * out.tangent(j);
    out.curvature(j) = std::imag(std::conj(d1(j)) * d2(j)) / (speed * speed * speed);
  }
  return out;
}

template <typename Scalar>
LengthAreaRotation<Scalar> length_area_rotation(const ArcLengthCurve<Scalar>& curve) {
  const Scalar length = curve.total_length();
  const Scalar h = curve.spacing();
  const ComplexVector<Scalar> tangent = arclength_tangent(curve);
  const auto frenet = frenet_data(curve);
  Scalar twice_area = 0;
  for (Index j = 0; j < curve.node_count(); ++j) {
    twice_area += std::imag(std::conj(curve[j]) * tangent(j));
  }
  const Scalar total_curvature = frenet.curvature.sum() * h;
  const Scalar winding = total_curvature / (2 * kPi<Scalar>);
  if (!(std::abs(winding - Scalar(curve.rotation_number())) < Scalar(0.1))) {
    std::ostringstream msg;
    msg << "total curvature / 2pi = " << double(winding) << " but n = "
        << curve.rotation_number();
    throw CurveflowError(ErrorCode::RotationResidual, msg.str());
  }
  return {length, twice_area * h / 2, curve.rotation_number()};
}

template <typename Scalar>
ComplexVector<Scalar> sample_parametric(const CurveFamily& family, Index samples) {
  using C = Complex<Scalar>;
  const Scalar two_pi = 2 * kPi<Scalar>;
  ComplexVector<Scalar> z(samples);
  auto unit = [&](Index j, Scalar k) {
    const Scalar angle = two_pi * k * Scalar(j) / Scalar(samples);
    return C(std::cos(angle), std::sin(angle));
  };

  if (const auto* c = std::get_if<Circle>(&family)) {
    const C centre(Scalar(c->center_x), Scalar(c->center_y));
    for (Index j = 0; j < samples; ++j) z(j) = centre + Scalar(c->radius) * unit(j, c->rotation);
  } else if (const auto* e = std::get_if<Ellipse>(&family)) {
    for (Index j = 0; j < samples; ++j) {
      const C w = unit(j, 1);
      z(j) = C(Scalar(e->a) * w.real(), Scalar(e->b) * w.imag());
    }
  } else if (const auto* pc = std::get_if<PerturbedCircle>(&family)) {
    for (Index j = 0; j < samples; ++j) {
      C value = unit(j, pc->rotation);
      for (const auto& pert : pc->perturbations) {
        value += Scalar(pert.amplitude) * std::polar(Scalar(1), Scalar(pert.phase)) *
                 unit(j, pert.mode);
      }
      z(j) = Scalar(pc->radius) * value;
    }
  } else if (const auto* l = std::get_if<Limacon>(&family)) {
    for (Index j = 0; j < samples; ++j) {
      const C w = unit(j, 1);
      z(j) = (Scalar(l->b) + Scalar(l->a) * w.real()) * w;
    }
  } else {
    const auto& rb = std::get<RandomBandLimited>(family);
    std::mt19937_64 rng(rb.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const int kmax = rb.max_mode;
    for (int attempt = 0;; ++attempt) {
      if (attempt > 1000) throw CurveflowError(ErrorCode::NonImmersed, "random curve rejected");
      std::vector<C> modes(2 * kmax + 1, C(0));
      for (int k = -kmax; k <= kmax; ++k) {
        if (k == 0) continue;
        const double amp = rb.scale * std::ldexp(1.0, -std::abs(k)) / std::sqrt(2.0);
        modes[k + kmax] = C(Scalar(amp * gauss(rng)), Scalar(amp * gauss(rng)));
      }
      if (std::abs(rb.rotation) <= kmax) modes[rb.rotation + kmax] += C(1);
      // Reject unless immersed with the requested tangent winding.
      const Index check = 64 * kmax;
      ComplexVector<Scalar> deriv(check);
      for (Index j = 0; j < check; ++j) {
        C d(0);
        for (int k = -kmax; k <= kmax; ++k) {
          const Scalar angle = two_pi * Scalar(k) * Scalar(j) / Scalar(check);
          d += C(0, Scalar(k)) * modes[k + kmax] * C(std::cos(angle), std::sin(angle));
        }
        deriv(j) = d;
      }
      const Scalar min_speed = deriv.cwiseAbs().minCoeff();
      const Scalar mean_speed = deriv.cwiseAbs().mean();
      const long winding = std::lround(double(tangent_winding<Scalar>(deriv) / two_pi));
      if (min_speed < Scalar(0.05) * mean_speed || winding != rb.rotation) continue;
      for (Index j = 0; j < samples; ++j) {
        C value(0);
        for (int k = -kmax; k <= kmax; ++k) value += modes[k + kmax] * unit(j, k);
        z(j) = value;
      }
      break;
    }
  }
  return z;
}

template <typename Scalar>
ArcLengthCurve<Scalar> make_test_curve(const CurveSpec& spec) {
  const Index samples = 2 * spec.node_count;
  ArcLengthCurve<Scalar> curve =
      resample_to_arclength<Scalar>(sample_parametric<Scalar>(spec.family, samples), spec.node_count);
  int expected = 0;
  if (const auto* c = std::get_if<Circle>(&spec.family)) expected = c->rotation;
  if (const auto* pc = std::get_if<PerturbedCircle>(&spec.family)) expected = pc->rotation;
  if (expected != 0 && curve.rotation_number() != expected) {
    throw CurveflowError(ErrorCode::NonImmersed,
                         "perturbation changed the rotation number; amplitude too large");
  }
  return curve;
}

template <typename Scalar>
InvariantReport<Scalar> check_invariants(const ArcLengthCurve<Scalar>& curve) {
  const Index n = curve.node_count();
  // One-sided 8-point extrapolation of the last nodes to s = L, compared with node 0.
  constexpr int kPoints = 8;
  Complex<Scalar> extrapolated(0);
  for (int i = 0; i < kPoints; ++i) {
    const Scalar xi = Scalar(i + 1);  // node n-1-i sits at distance (i+1) h before L
    Scalar weight = 1;
    for (int m = 0; m < kPoints; ++m) {
      if (m != i) weight *= Scalar(m + 1) / (Scalar(m + 1) - xi);
    }
    extrapolated += weight * curve[n - 1 - i];
  }
  InvariantReport<Scalar> report{};
  report.seam_jump = std::abs(extrapolated - curve[0]) / curve.total_length();
  const ComplexVector<Scalar> tangent = arclength_tangent(curve);
  report.max_speed_defect = (tangent.cwiseAbs().array() - Scalar(1)).abs().maxCoeff();
  const auto frenet = frenet_data(curve);
  report.rotation_residual = std::abs(frenet.curvature.sum() * curve.spacing() /
                                          (2 * kPi<Scalar>) -
                                      Scalar(curve.rotation_number()));
  report.ok = report.seam_jump <= Scalar(1e-8) && report.max_speed_defect <= Scalar(1e-6) &&
              report.rotation_residual < Scalar(0.1);
  return report;
}

void write_curve_csv(std::ostream& out, const ArcLengthCurve<double>& curve) {
  char line[96];
  std::snprintf(line, sizeof line, "# L=%.17g n=%d\n", curve.total_length(),
                curve.rotation_number());
  out << line;
  for (Index j = 0; j < curve.node_count(); ++j) {
    std::snprintf(line, sizeof line, "%.17g,%.17g\n", curve[j].real(), curve[j].imag());
    out << line;
  }
}

ArcLengthCurve<double> read_curve_csv(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) {
    throw CurveflowError(ErrorCode::ConfigError, "empty curve file");
  }
  double length = 0;
  int rotation = 0;
  if (std::sscanf(header.c_str(), "# L=%lf n=%d", &length, &rotation) != 2) {
    throw CurveflowError(ErrorCode::ConfigError, "curve header must read '# L=<value> n=<value>'");
  }
  std::vector<Complex<double>> pts;
  std::string row;
  int line_no = 1;
  while (std::getline(in, row)) {
    ++line_no;
    if (row.empty()) continue;
    double x = 0, y = 0;
    if (std::sscanf(row.c_str(), "%lf,%lf", &x, &y) != 2) {
      throw CurveflowError(ErrorCode::ConfigError,
                           "line " + std::to_string(line_no) + ": expected 'x,y'");
    }
    pts.emplace_back(x, y);
  }
  ComplexVector<double> z(static_cast<Index>(pts.size()));
  for (Index j = 0; j < z.size(); ++j) z(j) = pts[static_cast<std::size_t>(j)];
  return ArcLengthCurve<double>(std::move(z), length, rotation);
}

#define CURVEFLOW_INSTANTIATE_CURVE(S)                                                       \
  template S tangent_winding<S>(const ComplexVector<S>&);                          \
  template ArcLengthCurve<S> resample_to_arclength<S>(const ComplexVector<S>&, Index,        \
                                                      Closure, const ResampleTolerances&);   \
  template FrenetData<S> frenet_data<S>(const ArcLengthCurve<S>&);                           \
  template LengthAreaRotation<S> length_area_rotation<S>(const ArcLengthCurve<S>&);          \
  template ComplexVector<S> sample_parametric<S>(const CurveFamily&, Index);                 \
  template ArcLengthCurve<S> make_test_curve<S>(const CurveSpec&);                           \
  template InvariantReport<S> check_invariants<S>(const ArcLengthCurve<S>&);

CURVEFLOW_INSTANTIATE_CURVE(double)
CURVEFLOW_INSTANTIATE_CURVE(long double)

#undef CURVEFLOW_INSTANTIATE_CURVE

}  // namespace curveflow
