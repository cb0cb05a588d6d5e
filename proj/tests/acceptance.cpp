// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Artifacts of the harness runs go to argv[1] (default: a
// directory under the system temp path).

#include "curveflow/harness.hpp"
#include "curveflow/oracle.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>

using namespace curveflow;
using namespace curveflow::harness;
namespace fs = std::filesystem;

namespace {

fs::path g_root;
int g_failed = 0;

struct Outcome {
  bool pass;
  std::string detail;
};

void criterion(int number, const char* title, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("threw: ") + e.what()};
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!o.pass) ++g_failed;
  std::printf("%s %d %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", number, title,
              o.detail.c_str(), seconds);
  std::fflush(stdout);
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// Runs a configuration into the acceptance root and lists the failed checks.
RunResult run_into(ExperimentConfig c, const std::string& dir) {
  c.output_dir = (g_root / dir).string();
  return run(c);
}

std::string failures(const RunResult& r) {
  std::ostringstream os;
  for (const auto& c : r.checks) {
    if (!c.pass) os << "; failed '" << c.name << "' value " << c.value << " bound " << c.bound;
  }
  return os.str();
}

Outcome all_checks(const RunResult& r, std::string detail) {
  std::size_t passed = 0;
  for (const auto& c : r.checks) passed += c.pass;
  return {r.all_pass() && !r.checks.empty(),
          std::to_string(passed) + "/" + std::to_string(r.checks.size()) + " checks" +
              (detail.empty() ? "" : ", " + detail) + failures(r)};
}

const Check* find_check(const RunResult& r, const std::string& prefix) {
  for (const auto& c : r.checks) {
    if (c.name.rfind(prefix, 0) == 0) return &c;
  }
  return nullptr;
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

ExperimentConfig only(const std::string& preset_name, std::vector<CheckKind> checks) {
  ExperimentConfig c = preset(preset_name);
  c.checks = std::move(checks);
  return c;
}

const char* flow_name(FlowKind f) { return f == FlowKind::AP ? "AP" : f == FlowKind::LP ? "LP" : "JP"; }

// ---------------------------------------------------------------------------

Outcome identities() {
  const RunResult r = run_into(preset("identities"), "identities");
  double worst = 0;
  for (const auto& c : r.checks) {
    if (c.name.rfind("identity ", 0) == 0 && c.name.find("runtime") == std::string::npos) {
      worst = std::max(worst, c.value);
    }
  }
  const Check* t = find_check(r, "identity ensemble runtime");
  return all_checks(r, "max residual " + fmt(worst) + ", runtime " +
                           fmt(t ? t->value : NAN) + " s");
}

Outcome inequalities() {
  const RunResult r = run_into(preset("inequalities"), "inequalities");
  double slack = INFINITY;
  for (const auto& c : r.checks) {
    if (c.name.rfind("inequality ", 0) == 0) slack = std::min(slack, c.value);
  }
  return all_checks(r, "min slack " + fmt(slack));
}

Outcome conservation() {
  bool pass = true;
  std::string detail;
  for (FlowKind f : {FlowKind::AP, FlowKind::LP, FlowKind::JP}) {
    const auto start = std::chrono::steady_clock::now();
    EvolveOptions o;
    o.stop.t_max = 1.0;
    o.sample_every = 1;
    const Trajectory tr =
        evolve(FlowState<double>{make_test_curve<double>({Ellipse{2.0, 1.0}, 512})}, f, o);
    const double seconds = seconds_since(start);
    const AuditReport a = audit_monotonicity(tr);
    double value = 0, bound = 0;
    switch (f) {
      case FlowKind::AP: value = a.area_drift, bound = 1e-6; break;
      case FlowKind::LP: value = a.length_drift, bound = 1e-6; break;
      case FlowKind::JP: value = a.max_ratio_increase, bound = 1e-8; break;
    }
    const bool ok = tr.termination.kind == TerminationKind::ReachedTmax && value <= bound &&
                    seconds <= 60;
    pass = pass && ok;
    detail += std::string(detail.empty() ? "" : "; ") + flow_name(f) + " " + fmt(value) +
              " <= " + fmt(bound) + " in " + fmt(seconds) + " s";
  }
  return {pass, detail};
}

Outcome flow_identities() {
  bool pass = true;
  std::string detail;
  for (FlowKind f : {FlowKind::AP, FlowKind::LP, FlowKind::JP}) {
    ExperimentConfig c;
    c.name = std::string("identities-by-differences-") + flow_name(f);
    c.flow = f;
    c.curve = {Ellipse{2.0, 1.0}, 512};
    c.checks = {CheckKind::Audit};
    c.audit.dt = 1e-3;
    c.audit.horizon = 1.0;
    c.audit.levels = 3;
    const RunResult r = run_into(c, c.name);
    double order = INFINITY;
    for (const auto& k : r.checks) order = std::min(order, k.value);
    pass = pass && r.all_pass();
    detail += std::string(detail.empty() ? "" : "; ") + flow_name(f) + " min order " +
              fmt(order) + failures(r);
  }
  return {pass, detail};
}

Outcome blow_up_time() {
  bool pass = true;
  std::string detail;
  for (const char* name : {"ap-blowup-n2", "lp-blowup-n2", "jp-blowup-n2"}) {
    const RunResult r = run_into(only(name, {CheckKind::BlowUp}), name);
    const double eps = r.verdict.at("summary").value("epsilon", std::nan(""));
    const Check* t = find_check(r, "t_num <= T_bound");
    const bool ok = r.all_pass() && eps >= 0.01 && eps <= 0.05 + 1e-12 && t;
    pass = pass && ok;
    detail += std::string(detail.empty() ? "" : "; ") + name + " eps " + fmt(eps) + " t_num " +
              fmt(t ? t->value : NAN) + " <= " + fmt(t ? t->bound : NAN) + failures(r);
  }
  return {pass, detail};
}

Outcome blow_up_rates() {
  const RunResult r = run_into(only("rates-blowup", {CheckKind::Rates}), "rates-blowup");
  const Check* w = find_check(r, "W exponent");
  const Check* k = find_check(r, "fraction with kappa_max");
  const bool in_band = w && w->value >= -0.65 && w->value <= -0.35;
  return {r.all_pass() && in_band && k,
          "W exponent " + fmt(w ? w->value : NAN) + " in [-0.65, -0.35], kappa_max bound at " +
              fmt(k ? 100 * k->value : NAN) + "% of samples" + failures(r)};
}

Outcome decay() {
  const ExperimentConfig c = only("lp-decay-n2", {CheckKind::Decay});
  const CurveSpec spec =
      c.target_I_m1 ? calibrate_perturbation(c.curve, *c.target_I_m1) : c.curve;
  const double I_m1 = functionals(make_test_curve<double>(spec), c.flow).I_m1;
  const RunResult r = run_into(c, "decay");
  const Check* rate = find_check(r, "decay rate of L^2 I_{-1}");
  const Check* i0 = find_check(r, "decay rate of I0");
  const Check* term = find_check(r, "terminal |4 pi n A / L^2 - 1|");
  const bool ok = r.all_pass() && I_m1 > 0 && c.stop.t_max == 5.0 && rate && i0 && term;
  return {ok, "I_{-1}(0) " + fmt(I_m1) + ", rate " + fmt(rate ? rate->value : NAN) +
                  " >= " + fmt(rate ? rate->bound : NAN) + ", I0 rate " +
                  fmt(i0 ? i0->value : NAN) + ", terminal defect " +
                  fmt(term ? term->value : NAN) + failures(r)};
}

Outcome convergence() {
  const RunResult r = run_into(only("lp-decay-n2", {CheckKind::Convergence}), "convergence");
  std::string detail;
  for (const auto& k : r.checks) {
    detail += std::string(detail.empty() ? "" : ", ") + k.name + " " + fmt(k.value);
  }
  return all_checks(r, detail);
}

Outcome oracle_equivalence() {
  const std::vector<CurveSpec> family{
      {Circle{1.0, 1}, 512},
      {Circle{0.7, 3}, 512},
      {Ellipse{2.0, 1.0}, 512},
      perturbed_n_circle(1.0, 2, 1, 0.1),
      perturbed_n_circle(1.0, 2, 3, 0.1),
      perturbed_n_circle(1.0, 2, 5, 0.05),
      {Limacon{1.5, 1.0}, 1024},
      {RandomBandLimited{1, 11, 8, 0.25}, 512},
      {RandomBandLimited{2, 12, 8, 0.25}, 512},
      {RandomBandLimited{3, 13, 8, 0.25}, 512},
  };
  double worst = 0;
  for (const auto& spec : family) {
    for (FlowKind f : {FlowKind::AP, FlowKind::LP, FlowKind::JP}) {
      const auto s = functionals(make_test_curve<double>(spec), f);
      const auto o = oracle::oracle_functionals<double>(sample_parametric<double>(spec.family, 8192),
                                                        2, f);
      if (o.n != s.n) return {false, "rotation numbers differ"};
      for (auto field : {&Diagnostics<double>::L, &Diagnostics<double>::A,
                         &Diagnostics<double>::R, &Diagnostics<double>::W,
                         &Diagnostics<double>::I_m1, &Diagnostics<double>::I0,
                         &Diagnostics<double>::tilde_I_m1, &Diagnostics<double>::g}) {
        worst = std::max(worst, std::abs(o.*field - s.*field) / std::max(1.0, std::abs(s.*field)));
      }
    }
  }
  const bool diag_ok = worst <= 1e-6;

  // Stepper against forward Euler on a dense polyline. Differences of the
  // signed distances between successive dt levels cancel the fixed spatial
  // error of the polyline.
  const double horizon = 1e-3;
  const auto z0 = sample_parametric<double>(Ellipse{2.0, 1.0}, 2048);
  bool step_ok = true;
  std::string steps;
  for (FlowKind f : {FlowKind::AP, FlowKind::LP, FlowKind::JP}) {
    EvolveOptions o;
    o.stop.t_max = horizon;
    o.dt.fixed = 1e-5;
    o.sample_every = 100;
    const Trajectory tr =
        evolve(FlowState<double>{make_test_curve<double>({Ellipse{2.0, 1.0}, 512})}, f, o);
    std::vector<RealVector<double>> d;
    for (double dt : {1e-6, 5e-7, 2.5e-7}) {
      oracle::PolylineState<double> s{z0, 0.0};
      const long count = std::lround(horizon / dt);
      for (long i = 0; i < count; ++i) s = oracle::oracle_step_explicit(s, f, dt);
      d.push_back(signed_normal_distance(s.points, tr.final_state.curve));
    }
    const double e1 = (d[0] - d[1]).cwiseAbs().maxCoeff();
    const double e2 = (d[1] - d[2]).cwiseAbs().maxCoeff();
    const double order = std::log2(e1 / e2);
    step_ok = step_ok && order >= 1 && d[2].cwiseAbs().maxCoeff() <= 1e-6;
    steps += std::string(", ") + flow_name(f) + " order " + std::to_string(order) + " gap " +
             fmt(d[2].cwiseAbs().maxCoeff());
  }
  return {diag_ok && step_ok, "max diagnostic mismatch " + fmt(worst) + steps};
}

Outcome stationarity() {
  const RunResult r = run_into(preset("stationary"), "stationary");
  double drift = 0;
  for (const auto& c : r.checks) {
    if (c.name.find("drift") != std::string::npos) drift = std::max(drift, c.value);
  }
  return all_checks(r, "max drift " + fmt(drift));
}

}  // namespace

int main(int argc, char** argv) {
  g_root = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "curveflow-acceptance";
  fs::create_directories(g_root);

  criterion(1, "identity suite", identities);
  criterion(2, "inequality suite", inequalities);
  criterion(3, "conservation on the ellipse", conservation);
  criterion(4, "flow identities by finite differences", flow_identities);
  criterion(5, "blow-up time bound", blow_up_time);
  criterion(6, "blow-up rates", blow_up_rates);
  criterion(7, "decay of the global solution", decay);
  criterion(8, "convergence decomposition", convergence);
  criterion(9, "oracle equivalence", oracle_equivalence);
  criterion(10, "stationarity of n-fold circles", stationarity);

  std::printf("%d of 10 criteria failed\n", g_failed);
  return g_failed == 0 ? 0 : 1;
}
