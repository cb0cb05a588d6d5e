#pragma once

// Time stepping of d_t f = (kappa~ - g / L) nu.
//
// The stepper works on the parameter u in [0, 1) of the current arc-length
// curve, with L0 its length at the start of the step, and integrates
//
//   f_t = f_uu / L0^2 + nu [kappa (1 - |f_u|^2 / L0^2) - (R + g) / L],
//
// which has the same normal velocity as the flow and differs from it only by
// a tangential field. The linear part is diagonal in Fourier space and is
// integrated exactly; the remainder is explicit. After each step the curve is
// resampled by arc length.

#include "curveflow/curve.hpp"
#include "curveflow/functionals.hpp"

#include <optional>
#include <string>
#include <vector>

namespace curveflow {

template <typename Scalar>
struct FlowState {
  ArcLengthCurve<Scalar> curve;
  Scalar t = 0;
  long step_index = 0;
  Scalar dt_last = 0;
};

enum class TimeScheme {
  ETDRK4,     ///< exponential time differencing, fourth order
  IMEXEuler,  ///< implicit diffusion, explicit remainder, first order
};

struct StepOptions {
  TimeScheme scheme = TimeScheme::ETDRK4;
  bool filter = false;  ///< exponential filter exp(-36 (|k| / (N/2))^36)
  ResampleTolerances remesh{};
};

/// One step of size dt. Throws RemeshFailed when the stepped curve cannot be
/// reparametrized; the caller rejects the step and retries with dt / 2.
template <typename Scalar>
FlowState<Scalar> step(const FlowState<Scalar>& state, Scalar dt, FlowKind flow,
                       const StepOptions& options = {});

struct DtPolicy {
  double c_cfl = 0.2;
  double growth = 1.5;
  double dt_max = 0.01;
  std::optional<double> fixed;  ///< overrides the adaptive rule
};

/// min(c_cfl / (1 + kappa_max^2), growth * dt_last, dt_max).
template <typename Scalar>
Scalar adaptive_dt(const FlowState<Scalar>& state, Scalar kappa_max, const DtPolicy& policy);

struct StoppingPolicy {
  double t_max = 1.0;
  double dt_min = 1e-10;
  double W_max = 1e6;
  long max_steps = 2'000'000;
};

/// Node-count control. When kappa_max L / N exceeds refine_kh the grid is
/// doubled; at max_nodes a value above blowup_kh declares numerical blow-up.
struct ResolutionPolicy {
  Index max_nodes = 8192;
  double refine_kh = 0.1;
  double blowup_kh = 0.2;
};

struct EvolveOptions {
  StoppingPolicy stop{};
  DtPolicy dt{};
  ResolutionPolicy resolution{};
  StepOptions step{};
  long sample_every = 10;
  /// Keep a copy of the curve every this many samples (0: first and last only).
  long snapshot_every = 0;
};

struct Sample {
  double t = 0;
  double dt = 0;
  Index nodes = 0;
  Diagnostics<double> d;
  CircleFit<double> fit;  ///< remainder vector dropped; NaN fields if undefined
};

enum class TerminationKind { ReachedTmax, BlowUpDeclared, StepLimit };

std::string to_string(TerminationKind kind);

struct Termination {
  TerminationKind kind = TerminationKind::ReachedTmax;
  double t_num = 0;
  std::string cause;  ///< dt_min, W_max, resolution, rotation for blow-up
  long steps = 0;
  long rejected_steps = 0;
  Index final_nodes = 0;
};

struct Trajectory {
  FlowKind flow = FlowKind::AP;
  std::vector<Sample> samples;
  Termination termination;
  std::vector<std::pair<double, ArcLengthCurve<double>>> snapshots;
  FlowState<double> final_state;
  std::string config_echo;
};

/// Steps with adaptive dt until the stopping policy fires. Samples are taken
/// at t = 0, every sample_every accepted steps, and at the final state.
/// Throws NonPositiveArea if A(0) <= 0.
Trajectory evolve(const FlowState<double>& initial, FlowKind flow, const EvolveOptions& options);

/// max over lambda in {0.5, 2} of |g(lambda C) - g(C)| / (1 + |g(C)|).
template <typename Scalar>
Scalar scale_invariance_check(const ArcLengthCurve<Scalar>& curve, FlowKind flow);

}  // namespace curveflow
