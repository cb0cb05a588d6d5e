#include "curveflow/harness.hpp"
#include "curveflow/oracle.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>

namespace curveflow::harness {

using nlohmann::json;

namespace {

constexpr double kPiD = kPi<double>;
constexpr double kInf = std::numeric_limits<double>::infinity();

struct Context {
  Context(const ExperimentConfig& c, std::filesystem::path d, std::ostream* l)
      : config(c), dir(std::move(d)), log(l) {}

  const ExperimentConfig& config;
  std::filesystem::path dir;
  std::ostream* log;
  std::vector<Check> checks;
  json summary = json::object();
  std::optional<Trajectory> trajectory;
  CurveSpec spec;

  void add(std::string name, const char* ref, double value, double bound, bool pass) {
    checks.push_back({std::move(name), ref, value, bound, pass});
  }
  void at_most(std::string name, const char* ref, double value, double bound) {
    add(std::move(name), ref, value, bound, value <= bound);
  }
  void at_least(std::string name, const char* ref, double value, double bound) {
    add(std::move(name), ref, value, bound, value >= bound);
  }
  void note(const std::string& line) const {
    if (log) *log << "[" << config.name << "] " << line << "\n";
  }
  void write_json(const char* file, const json& j) const {
    std::ofstream(dir / file) << j.dump(2) << "\n";
  }
};

EvolveOptions evolve_options(const ExperimentConfig& c) {
  EvolveOptions o;
  o.stop = c.stop;
  o.dt = c.dt;
  o.resolution = c.resolution;
  o.step = c.step;
  o.sample_every = c.sample_every;
  return o;
}

const char* identity_ref(const std::string& name) {
  if (name.rfind("moment_", 0) == 0) return "Fourier moment identities";
  if (name.rfind("balance", 0) == 0) return "mode balance identity";
  if (name.rfind("I0_", 0) == 0) return "lemma on I_0";
  if (name.rfind("Im1_", 0) == 0) return "lemma on I_{-1}";
  return "proposition on tilde I_{-1}";
}

const char* inequality_ref(const std::string& name) {
  if (name == "isoperimetric") return "isoperimetric lemma";
  if (name == "schwarz") return "Schwarz estimate for I_0";
  return "Wirtinger-type lemmas";
}

CurveSpec ensemble_member(const ExperimentConfig& c, int i) {
  const auto& e = c.ensemble;
  const int n = e.rotations[std::size_t(i) % e.rotations.size()];
  return {RandomBandLimited{n, c.seed + std::uint64_t(i), e.max_mode, e.scale}, e.nodes};
}

// Ensemble checks ------------------------------------------------------------

void check_identities(Context& ctx) {
  const auto start = std::chrono::steady_clock::now();
  std::map<std::string, double> worst;
  std::vector<std::string> order;
  json members = json::array();
  for (int i = 0; i < ctx.config.ensemble.count; ++i) {
    const CurveSpec spec = ensemble_member(ctx.config, i);
    const auto report = verify_identities(make_test_curve<double>(spec));
    for (const auto& r : report.records) {
      if (!worst.count(r.name)) order.push_back(r.name);
      worst[r.name] = std::max(worst[r.name], r.residual);
    }
    members.push_back({{"seed", std::get<RandomBandLimited>(spec.family).seed},
                       {"rotation", std::get<RandomBandLimited>(spec.family).rotation},
                       {"records", to_json(report)}});
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  for (const auto& name : order) {
    ctx.at_most("identity " + name, identity_ref(name), worst[name], 1e-7);
  }
  ctx.at_most("identity ensemble runtime [s]", "runtime budget", seconds, 30.0);
  ctx.write_json("identities.json", members);
}

void check_inequalities(Context& ctx) {
  std::map<std::string, double> worst;
  std::vector<std::string> order;
  std::map<std::pair<int, int>, double> ratio_max;
  std::map<std::pair<int, int>, bool> ratio_finite;
  double unrooted = kInf;
  json members = json::array();
  for (int i = 0; i < ctx.config.ensemble.count; ++i) {
    const CurveSpec spec = ensemble_member(ctx.config, i);
    const auto report = check_inequalities(make_test_curve<double>(spec));
    for (const auto& r : report.records) {
      if (!worst.count(r.name)) {
        order.push_back(r.name);
        worst[r.name] = kInf;
      }
      worst[r.name] = std::min(worst[r.name], r.slack);
    }
    for (const auto& q : report.ratios) {
      const auto key = std::make_pair(q.j, q.ell);
      if (!ratio_finite.count(key)) {
        ratio_finite[key] = true;
        ratio_max[key] = 0;
      }
      if (q.degenerate) continue;
      ratio_finite[key] = ratio_finite[key] && std::isfinite(q.ratio);
      ratio_max[key] = std::max(ratio_max[key], q.ratio);
    }
    unrooted = std::min(unrooted, report.schwarz_unrooted_slack);
    members.push_back({{"seed", std::get<RandomBandLimited>(spec.family).seed},
                       {"rotation", std::get<RandomBandLimited>(spec.family).rotation},
                       {"report", to_json(report)}});
  }
  for (const auto& name : order) {
    ctx.at_least("inequality " + name + " slack", inequality_ref(name), worst[name], -1e-10);
  }
  for (const auto& [key, value] : ratio_max) {
    ctx.add("interpolation ratio max (j=" + std::to_string(key.first) +
                ", l=" + std::to_string(key.second) + ")",
            "interpolation theorem", value, kInf, ratio_finite[key] && std::isfinite(value));
  }
  ctx.summary["schwarz_unrooted_min_slack"] = unrooted;
  ctx.write_json("inequalities.json", members);
}

// Trajectory checks ----------------------------------------------------------

void check_conservation(Context& ctx) {
  const Trajectory& tr = *ctx.trajectory;
  const AuditReport a = audit_monotonicity(tr);
  const char* ref = "basic properties of the flows";
  switch (tr.flow) {
    case FlowKind::AP: ctx.at_most("area drift |A - A0| / A0", ref, a.area_drift, 1e-6); break;
    case FlowKind::LP: ctx.at_most("length drift |L - L0| / L0", ref, a.length_drift, 1e-6); break;
    case FlowKind::JP:
      ctx.at_most("max per-sample increase of L^2/A", ref, a.max_ratio_increase, 1e-8);
      break;
  }
  ctx.at_most("max per-sample increase of I_{-1}", ref, a.max_I_m1_increase, 1e-8);
  ctx.at_most("lower bound 1 - n <= I_{-1} (violation)", ref, a.I_m1_lower_violation, 1e-8);
  ctx.at_most("L^2/A <= L0^2/A0 (violation)", ref, a.ratio_upper_violation, 1e-8);
  ctx.at_most("L^2/A >= 4 pi (violation)", ref, a.ratio_lower_violation, 1e-8);
  ctx.add("rotation number constant", "rotation number is independent of t",
          a.rotation_constant ? 1 : 0, 1, a.rotation_constant);
}

void check_audit(Context& ctx) {
  // Residuals of centred differences shrink with the sample spacing, so every
  // level samples each step and halves dt.
  const AuditStudy& study = ctx.config.audit;
  struct Series {
    const char* name;
    const char* ref;
    double AuditReport::*field;
  };
  const Series series[] = {
      {"d(L^2 I_{-1})/dt = -2 I0", "evolution of L^2 I_{-1}", &AuditReport::energy_identity},
      {"dA/dt = g", "flow identities", &AuditReport::area_identity},
      {"dL^2/dt + 2 I0 = 4 pi n g", "flow identities", &AuditReport::length_identity},
      {"dW/dt formula", "lemma on dW/dt", &AuditReport::elastic_identity},
  };
  const FlowState<double> s0{make_test_curve<double>(ctx.spec)};
  std::vector<AuditReport> reports;
  json levels = json::array();
  double dt = study.dt;
  for (int level = 0; level < study.levels; ++level, dt /= 2) {
    EvolveOptions o = evolve_options(ctx.config);
    o.stop.t_max = std::min(study.horizon, ctx.config.stop.t_max);
    o.dt.fixed = dt;
    o.sample_every = 1;
    reports.push_back(audit_monotonicity(evolve(s0, ctx.trajectory->flow, o)));
    const AuditReport& a = reports.back();
    levels.push_back({{"dt", dt},
                      {"energy_identity", a.energy_identity},
                      {"area_identity", a.area_identity},
                      {"length_identity", a.length_identity},
                      {"elastic_identity", a.elastic_identity},
                      {"samples", a.samples}});
  }
  for (const Series& s : series) {
    double order = kInf;
    for (std::size_t i = 1; i < reports.size(); ++i) {
      const double coarse = reports[i - 1].*s.field;
      const double fine = reports[i].*s.field;
      order = std::min(order, std::log2(coarse / fine));
    }
    const double finest = reports.back().*s.field;
    const bool pass = order >= 1 || finest <= study.floor;
    ctx.add(std::string("order of residual ") + s.name, s.ref, order, 1, pass);
    ctx.summary[std::string("audit finest residual ") + s.name] = finest;
  }
  ctx.write_json("audit.json", {{"floor", study.floor}, {"levels", levels}});
}

void check_blowup(Context& ctx) {
  const Trajectory& tr = *ctx.trajectory;
  const auto& d0 = tr.samples.front().d;
  // The oracle measures I_{-1}(0) on the analytic parametrization.
  const auto z = sample_parametric<double>(ctx.spec.family, 8192);
  const auto orc = oracle::oracle_functionals<double>(z, 2, tr.flow);
  ctx.at_most("oracle vs spectral I_{-1}(0)", "blow-up theorem",
              std::abs(orc.I_m1 - d0.I_m1) / (1 + std::abs(d0.I_m1)), 1e-6);
  const BlowUpBoundReport r = check_blow_up_time(tr);
  ctx.add("blow-up declared", "blow-up theorem",
          tr.termination.kind == TerminationKind::BlowUpDeclared ? 1 : 0, 1,
          tr.termination.kind == TerminationKind::BlowUpDeclared);
  ctx.add("t_num <= T_bound (1 + 1e-2)", "blow-up theorem", r.t_num, r.T_bound * 1.01, r.pass);
  ctx.summary["epsilon"] = -orc.I_m1;
  ctx.summary["T_bound"] = r.T_bound;
  ctx.summary["t_num"] = r.t_num;
  ctx.write_json("blowup.json", {{"flow", std::string(to_string(r.flow))},
                                 {"T_bound", r.T_bound},
                                 {"t_num", r.t_num},
                                 {"L0", r.L0},
                                 {"A0", r.A0},
                                 {"I_m1_0", r.I_m1_0},
                                 {"I_m1_0_oracle", orc.I_m1},
                                 {"n", r.n},
                                 {"cause", tr.termination.cause},
                                 {"pass", r.pass}});
}

void check_scaling(Context& ctx) {
  const Trajectory& base = *ctx.trajectory;
  const double t0 = base.termination.t_num;
  const double T0 = blow_up_bound(base.samples.front().d, base.flow).T_bound;
  json runs = json::array();
  for (double lambda : ctx.config.scaling_factors) {
    const FlowState<double> s{make_test_curve<double>(ctx.spec).transformed(lambda)};
    EvolveOptions o = evolve_options(ctx.config);
    o.stop.t_max *= lambda * lambda;
    o.sample_every = 1000;
    const Trajectory tr = evolve(s, base.flow, o);
    const double T = blow_up_bound(tr.samples.front().d, base.flow).T_bound;
    const double ratio_t = tr.termination.t_num / (lambda * lambda * t0);
    const double ratio_T = T / (lambda * lambda * T0);
    const std::string tag = "lambda=" + json(lambda).dump();
    ctx.at_most("t_num scales as lambda^2 (" + tag + ")", "parabolic scaling",
                std::abs(ratio_t - 1), 0.05);
    ctx.at_most("T_bound scales as lambda^2 (" + tag + ")", "parabolic scaling",
                std::abs(ratio_T - 1), 0.05);
    runs.push_back({{"lambda", lambda}, {"t_num", tr.termination.t_num}, {"T_bound", T}});
    ctx.note("scaling " + tag + ": t_num " + json(tr.termination.t_num).dump());
  }
  ctx.write_json("scaling.json", runs);
}

json rate_fit_json(const RateFit& f) {
  return {{"quantity", f.quantity}, {"t_a", f.t_a},           {"t_b", f.t_b},
          {"samples", f.samples},   {"T", f.T},               {"T_free", f.T_free},
          {"exponent", f.exponent}, {"prefactor", f.prefactor}, {"residual", f.residual},
          {"reference_exponent", f.reference_exponent},        {"reported", f.reported}};
}

void check_rates(Context& ctx) {
  const Trajectory& tr = *ctx.trajectory;
  BlowUpRates r;
  try {
    r = fit_blow_up_rates(tr);
  } catch (const CurveflowError& e) {
    ctx.add(std::string("rate fit: ") + e.what(), "W blow-up theorem", 0, 30, false);
    return;
  }
  const char* ref_W = "W blow-up theorem";
  for (const auto& f : r.fits) {
    if (f.quantity != "W" || !f.T_free) continue;
    ctx.add("W exponent, T free (|p + 1/2| <= 0.15)", ref_W, f.exponent, -0.5,
            f.reported && std::abs(f.exponent + 0.5) <= 0.15);
  }
  if (r.max_side) {
    ctx.at_least("fraction with kappa_max >= 1/sqrt(2(t_num - t))", "max-curvature rate theorem",
                 r.kappa_max_bound_fraction, 0.95);
  } else {
    ctx.at_least("fraction with -kappa_min above its lower bound", "min-curvature rate theorem",
                 r.kappa_min_bound_fraction, 0.95);
  }
  json fits = json::array();
  for (const auto& f : r.fits) fits.push_back(rate_fit_json(f));
  ctx.write_json("rates.json", {{"max_side", r.max_side},
                                {"delta", r.delta},
                                {"window", {30 * r.delta, 300 * r.delta}},
                                {"kappa_max_bound_fraction", r.kappa_max_bound_fraction},
                                {"kappa_min_bound_fraction", r.kappa_min_bound_fraction},
                                {"T_star", r.T_star},
                                {"C_star", r.C_star},
                                {"fits", fits}});
}

void check_decay(Context& ctx) {
  const Trajectory& tr = *ctx.trajectory;
  const auto& d0 = tr.samples.front().d;
  if (d0.I_m1 <= 1e-12 && d0.I0 <= 1e-12) {
    ctx.add("decay (n-fold circle, nothing to decay)", "I_{-1} decay lemma", d0.I_m1, 1e-12,
            true);
    return;
  }
  DecayReport r;
  try {
    r = fit_decay(tr);
  } catch (const CurveflowError& e) {
    ctx.add(std::string("decay fit: ") + e.what(), "I_{-1} decay lemma", 0, 1e-8, false);
    return;
  }
  const int n = d0.n;
  const double bound = 0.9 * 8 * kPiD * kPiD * n / (r.L_bar * r.L_bar);
  ctx.add("decay rate of L^2 I_{-1} >= 0.9 * 8 pi^2 n / Lbar^2", "I_{-1} decay lemma",
          r.energy.rate, bound, r.energy.samples >= 3 && r.energy.rate >= bound);
  ctx.add("decay rate of I0 > 0", "I_0 decay lemma", r.I0.rate, 0.0,
          r.I0.samples >= 3 && r.I0.rate > 0);
  ctx.at_most("terminal |4 pi n A / L^2 - 1|", "L_inf and A_inf corollary",
              r.isoperimetric_defect, 1e-4);
  ctx.at_least("min I_{-1} on a global run", "blow-up theorem", r.min_I_m1, -1e-8);
  if (tr.flow == FlowKind::AP) {
    const double target = 4 * kPiD * n * d0.A;
    ctx.at_most("|L_inf^2 - 4 pi n A(0)| / (4 pi n A(0))", "L_inf and A_inf corollary",
                std::abs(r.L_inf * r.L_inf - target) / target, 1e-4);
  }
  auto fit_json = [](const ExponentialFit& f) {
    return json{{"rate", f.rate}, {"log_prefactor", f.log_prefactor}, {"samples", f.samples}};
  };
  ctx.write_json("decay.json", {{"energy", fit_json(r.energy)},
                                {"I0", fit_json(r.I0)},
                                {"L_bar", r.L_bar},
                                {"rate_bound", r.rate_bound},
                                {"L_inf", r.L_inf},
                                {"A_inf", r.A_inf},
                                {"L_inf_error", r.L_inf_error},
                                {"A_inf_error", r.A_inf_error},
                                {"isoperimetric_defect", r.isoperimetric_defect},
                                {"min_I_m1", r.min_I_m1},
                                {"max_I_m1_increase", r.max_I_m1_increase}});
}

void check_convergence(Context& ctx) {
  const Trajectory& tr = *ctx.trajectory;
  if (tr.samples.front().d.I0 <= 1e-12) {
    ctx.add("convergence (n-fold circle, remainder already zero)", "convergence theorem",
            tr.samples.front().fit.rho_C0, 1e-12, true);
    return;
  }
  const ConvergenceReport r = convergence_report(tr);
  const char* ref = "convergence theorem";
  ctx.add("decay rate of |rho|_C0 > 0", ref, r.rho_C0.rate, 0.0,
          r.rho_C0.samples >= 3 && r.rho_C0.rate > 0);
  ctx.add("decay rate of |rho|_C1 > 0", ref, r.rho_C1.rate, 0.0,
          r.rho_C1.samples >= 3 && r.rho_C1.rate > 0);
  ctx.at_most("centre variation over the final half", ref, r.centre_variation, 1e-5);
  ctx.at_most("radius variation over the final half", ref, r.radius_variation, 1e-5);
  ctx.at_most("sigma/L variation over the final half", ref, r.phase_variation, 1e-5);
  ctx.write_json("convergence.json", {{"rho_C0_rate", r.rho_C0.rate},
                                      {"rho_C1_rate", r.rho_C1.rate},
                                      {"rho_L2_rate", r.rho_L2.rate},
                                      {"centre_variation", r.centre_variation},
                                      {"radius_variation", r.radius_variation},
                                      {"phase_variation", r.phase_variation}});
}

void check_stationary(Context& ctx) {
  const ExperimentConfig& c = ctx.config;
  const char* ref = "stationary solutions corollary";
  json runs = json::array();
  for (FlowKind flow : c.sweep_flows) {
    for (int n : c.sweep_rotations) {
      CurveSpec spec = c.curve;
      if (auto* circle = std::get_if<Circle>(&spec.family)) {
        circle->rotation = n;
      } else {
        spec.family = Circle{1.0, n};
      }
      const FlowState<double> s0{make_test_curve<double>(spec)};
      EvolveOptions o = evolve_options(c);
      o.stop.t_max = 1e30;
      o.stop.max_steps = c.stationary_steps;
      o.sample_every = c.stationary_steps;
      const Trajectory tr = evolve(s0, flow, o);
      const auto& z1 = tr.final_state.curve.points();
      const double drift = z1.size() == s0.curve.points().size()
                               ? (z1 - s0.curve.points()).cwiseAbs().maxCoeff()
                               : kInf;
      const std::string tag = std::string(to_string(flow)) + ", n=" + std::to_string(n);
      ctx.at_most("sup drift over " + std::to_string(tr.termination.steps) + " steps (" + tag +
                      ")",
                  ref, drift, 1e-9);
      const StationaryReport cls = stationary_classifier(s0.curve, flow);
      ctx.add("classifier: circle stationary (" + tag + ")", ref, cls.velocity_sup, 1e-9,
              cls.stationary && cls.consistent);
      runs.push_back({{"flow", std::string(to_string(flow))},
                      {"n", n},
                      {"steps", tr.termination.steps},
                      {"t", tr.final_state.t},
                      {"drift", drift},
                      {"velocity_sup", cls.velocity_sup},
                      {"tilde_I_m1", cls.tilde_I_m1}});
    }
  }
  struct Negative {
    const char* label;
    CurveSpec spec;
  };
  const Negative negatives[] = {{"ellipse", {Ellipse{2.0, 1.0}, 512}},
                                {"balanced double circle with I_{-1} = 0",
                                 balanced_double_circle()}};
  for (const auto& neg : negatives) {
    const auto curve = make_test_curve<double>(neg.spec);
    for (FlowKind flow : c.sweep_flows) {
      const StationaryReport cls = stationary_classifier(curve, flow);
      const std::string tag = std::string(neg.label) + ", " + std::string(to_string(flow));
      ctx.add("classifier: not stationary (" + tag + ")", ref, cls.velocity_sup, 1e-9,
              !cls.stationary && cls.consistent);
      runs.push_back({{"curve", neg.label},
                      {"flow", std::string(to_string(flow))},
                      {"velocity_sup", cls.velocity_sup},
                      {"tilde_I_m1", cls.tilde_I_m1},
                      {"I_m1", functionals(curve, flow).I_m1}});
    }
  }
  ctx.write_json("stationary.json", runs);
}

bool needs_trajectory(CheckKind k) {
  return k != CheckKind::Identities && k != CheckKind::Inequalities &&
         k != CheckKind::Stationary;
}

}  // namespace

bool RunResult::all_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

RunResult run(const ExperimentConfig& config, std::ostream* log) {
  const auto start = std::chrono::steady_clock::now();
  Context ctx{config, resolve_output_dir(config), log};
  std::filesystem::create_directories(ctx.dir);
  ctx.write_json("config.json", to_json(config));
  ctx.spec = config.curve;
  if (config.target_I_m1) ctx.spec = calibrate_perturbation(config.curve, *config.target_I_m1);
  ctx.summary["name"] = config.name;
  ctx.summary["flow"] = std::string(to_string(config.flow));

  if (std::any_of(config.checks.begin(), config.checks.end(), needs_trajectory)) {
    const FlowState<double> s0{make_test_curve<double>(ctx.spec)};
    fourier_coefficients(s0.curve, config.bandwidth);  // throws if K under-resolves
    ctx.note("evolving " + std::string(to_string(config.flow)) + " from " +
             std::to_string(s0.curve.node_count()) + " nodes");
    Trajectory tr = evolve(s0, config.flow, evolve_options(config));
    tr.config_echo = to_json(config).dump();
    {
      std::ofstream csv(ctx.dir / "trajectory.csv");
      write_trajectory_csv(csv, tr);
    }
    ctx.write_json("termination.json", termination_json(tr));
    {
      std::ofstream a(ctx.dir / "curve_initial.csv");
      write_curve_csv(a, s0.curve);
      std::ofstream b(ctx.dir / "curve_final.csv");
      write_curve_csv(b, tr.final_state.curve);
    }
    ctx.summary["termination"] = termination_json(tr);
    ctx.summary["samples"] = tr.samples.size();
    ctx.note("terminated: " + to_string(tr.termination.kind) + " at t = " +
             json(tr.termination.t_num).dump() + " after " +
             std::to_string(tr.termination.steps) + " steps");
    ctx.trajectory = std::move(tr);
  }

  for (CheckKind kind : config.checks) {
    ctx.note("check " + to_string(kind));
    switch (kind) {
      case CheckKind::Identities: check_identities(ctx); break;
      case CheckKind::Inequalities: check_inequalities(ctx); break;
      case CheckKind::Conservation: check_conservation(ctx); break;
      case CheckKind::Audit: check_audit(ctx); break;
      case CheckKind::BlowUp: check_blowup(ctx); break;
      case CheckKind::Scaling: check_scaling(ctx); break;
      case CheckKind::Rates: check_rates(ctx); break;
      case CheckKind::Decay: check_decay(ctx); break;
      case CheckKind::Convergence: check_convergence(ctx); break;
      case CheckKind::Stationary: check_stationary(ctx); break;
    }
  }

  ctx.summary["runtime_s"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  RunResult result{ctx.checks, ctx.dir, verdict_json(ctx.checks, ctx.summary)};
  ctx.write_json("verdict.json", result.verdict);
  std::ofstream(ctx.dir / "summary.txt") << format_verdict(result.verdict);
  return result;
}

}  // namespace curveflow::harness
