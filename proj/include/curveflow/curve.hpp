#pragma once

// Closed immersed plane curves in arc-length parametrization.
//
// A curve is stored as N complex samples z_j = f(s_j) = f1 + i f2 at the
// uniform arc-length nodes s_j = j L / N, together with the total length L
// and the rotation number n. All operations are pure functions of immutable
// values.

#include "curveflow/errors.hpp"
#include "curveflow/spectral.hpp"

#include <cstdint>
#include <iosfwd>
#include <variant>
#include <vector>

namespace curveflow {

template <typename Scalar>
class ArcLengthCurve {
 public:
  ArcLengthCurve() = default;
  ArcLengthCurve(ComplexVector<Scalar> points, Scalar total_length, int rotation_number)
      : points_(std::move(points)), length_(total_length), rotation_(rotation_number) {}

  const ComplexVector<Scalar>& points() const { return points_; }
  Complex<Scalar> operator[](Index j) const { return points_(j); }
  Point2<Scalar> point(Index j) const { return {points_(j).real(), points_(j).imag()}; }

  Scalar total_length() const { return length_; }
  int rotation_number() const { return rotation_; }
  Index node_count() const { return points_.size(); }
  Scalar spacing() const { return length_ / Scalar(points_.size()); }

  /// Image under x -> lambda x + shift; still arc-length parametrized.
  ArcLengthCurve transformed(Scalar lambda, Complex<Scalar> shift = {}) const {
    return ArcLengthCurve((lambda * points_.array() + shift).matrix(), lambda * length_,
                          rotation_);
  }

 private:
  ComplexVector<Scalar> points_;
  Scalar length_ = 0;
  int rotation_ = 0;
};

// ---------------------------------------------------------------------------
// Test-curve families. Each produces samples of a periodic parametrization
// u in [0, 1) -> C, which resample_to_arclength then normalizes.

struct Circle {
  double radius = 1.0;
  int rotation = 1;
  double center_x = 0.0;
  double center_y = 0.0;
};

struct Ellipse {
  double a = 2.0;
  double b = 1.0;
};

struct Perturbation {
  int mode = 0;
  double amplitude = 0.0;  // relative to the radius
  double phase = 0.0;
};

/// r (exp(2 pi i n u) + sum_m eps_m exp(i phi_m) exp(2 pi i k_m u)).
struct PerturbedCircle {
  double radius = 1.0;
  int rotation = 1;
  std::vector<Perturbation> perturbations;
};

/// Polar limacon r(theta) = b + a cos(theta); an inner loop when a > b.
struct Limacon {
  double a = 1.5;
  double b = 1.0;
};

/// Dominant n-mode plus Gaussian complex modes |k| <= max_mode with
/// amplitudes scale * 2^{-|k|}; non-immersions are rejected and redrawn.
struct RandomBandLimited {
  int rotation = 1;
  std::uint64_t seed = 0;
  int max_mode = 8;
  double scale = 0.25;
};

using CurveFamily = std::variant<Circle, Ellipse, PerturbedCircle, Limacon, RandomBandLimited>;

struct CurveSpec {
  CurveFamily family;
  Index node_count = 512;
};

inline CurveSpec perturbed_n_circle(double radius, int n, int mode, double eps,
                                    double phase = 0.0, Index nodes = 512) {
  return {PerturbedCircle{radius, n, {{mode, eps, phase}}}, nodes};
}

// ---------------------------------------------------------------------------

enum class Closure {
  Periodic,          ///< samples of a periodic map, no repeated endpoint
  RepeatedEndpoint,  ///< closed polyline whose last point repeats the first
};

struct ResampleTolerances {
  double closure = 1e-6;     ///< endpoint gap relative to the diameter
  double unit_speed = 1e-6;  ///< max | |d_s f| - 1 | after reparametrization
  double min_speed = 1e-10;  ///< parameter speed relative to its mean
};

/// Reparametrizes samples f(u_j), u_j = j / M, by arc length onto N nodes.
/// Cumulative length comes from spectral quadrature of the speed on a 4x
/// oversampled grid; it is inverted by monotone cubic interpolation followed
/// by Newton refinement, and positions are read off the band-limited
/// interpolant. Node 0 stays at u = 0.
template <typename Scalar>
ArcLengthCurve<Scalar> resample_to_arclength(const ComplexVector<Scalar>& raw, Index node_count,
                                             Closure closure = Closure::Periodic,
                                             const ResampleTolerances& tol = {});

template <typename Scalar>
struct FrenetData {
  ComplexVector<Scalar> tangent;
  ComplexVector<Scalar> normal;  ///< tangent rotated by +pi/2
  RealVector<Scalar> curvature;
};

template <typename Scalar>
FrenetData<Scalar> frenet_data(const ArcLengthCurve<Scalar>& curve);

template <typename Scalar>
struct LengthAreaRotation {
  Scalar length;
  Scalar area;  ///< -1/2 oint f . nu ds, counts multiplicity
  int rotation_number;
};

/// Throws RotationResidual when |(1/2 pi) oint kappa ds - n| >= 0.1.
template <typename Scalar>
LengthAreaRotation<Scalar> length_area_rotation(const ArcLengthCurve<Scalar>& curve);

/// Winding of the tangent angle, unwrapped node to node with jump threshold pi.
template <typename Scalar>
Scalar tangent_winding(const ComplexVector<Scalar>& tangent);

template <typename Scalar>
ComplexVector<Scalar> sample_parametric(const CurveFamily& family, Index samples);

template <typename Scalar>
ArcLengthCurve<Scalar> make_test_curve(const CurveSpec& spec);

template <typename Scalar>
struct InvariantReport {
  Scalar seam_jump;         ///< relative to L
  Scalar max_speed_defect;  ///< max_j | |d_s f(s_j)| - 1 |
  Scalar rotation_residual;
  bool ok;
};

template <typename Scalar>
InvariantReport<Scalar> check_invariants(const ArcLengthCurve<Scalar>& curve);

// CSV exchange: "# L=<value> n=<value>" then "x,y" rows in arc-length order.
void write_curve_csv(std::ostream& out, const ArcLengthCurve<double>& curve);
ArcLengthCurve<double> read_curve_csv(std::istream& in);

}  // namespace curveflow
