#pragma once

// Brute-force reference computations on plain polylines: chord lengths,
// trapezoid sums and centred finite differences in the sample index. Nothing
// here calls the FFT path; the duplicated formulas are deliberate.

#include "curveflow/flow.hpp"

namespace curveflow::oracle {

/// Periodic closed polyline z_0..z_{M-1} (no repeated endpoint) and its time.
template <typename Scalar>
struct PolylineState {
  ComplexVector<Scalar> points;
  Scalar t = 0;
};

template <typename Scalar>
PolylineState<Scalar> from_flow_state(const FlowState<Scalar>& state) {
  return {state.curve.points(), state.t};
}

/// Diagnostics of a dense polyline. Each quantity is computed on the full
/// polyline and on every `refinement`-th point and Richardson-extrapolated
/// at order 2. Throws TooCoarse if the coarse level has fewer than 1024
/// points.
template <typename Scalar>
Diagnostics<Scalar> oracle_functionals(const ComplexVector<Scalar>& points, int refinement,
                                       FlowKind flow);

/// Forward Euler step of d_t z = (kappa - (R + g) / L) nu with difference
/// curvature and trapezoid non-local terms. Throws StabilityViolation when
/// dt > min(1e-5 rho_min^2, h_min^2 / 4), rho_min the smallest curvature
/// radius and h_min the shortest chord.
template <typename Scalar>
PolylineState<Scalar> oracle_step_explicit(const PolylineState<Scalar>& state, FlowKind flow,
                                           Scalar dt);

/// Largest dt accepted by oracle_step_explicit.
template <typename Scalar>
Scalar oracle_stable_dt(const ComplexVector<Scalar>& points);

}  // namespace curveflow::oracle
