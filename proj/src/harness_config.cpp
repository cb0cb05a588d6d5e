#include "curveflow/harness.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace curveflow::harness {

using nlohmann::json;

namespace {

struct CheckName {
  CheckKind kind;
  const char* name;
};

constexpr CheckName kCheckNames[] = {
    {CheckKind::Identities, "identities"},   {CheckKind::Inequalities, "inequalities"},
    {CheckKind::Conservation, "conservation"}, {CheckKind::Audit, "audit"},
    {CheckKind::BlowUp, "blowup"},           {CheckKind::Scaling, "scaling"},
    {CheckKind::Rates, "rates"},             {CheckKind::Decay, "decay"},
    {CheckKind::Convergence, "convergence"}, {CheckKind::Stationary, "stationary"},
};

[[noreturn]] void config_error(const std::string& what) {
  throw CurveflowError(ErrorCode::ConfigError, what);
}

/// Line of the first occurrence of "key" at or after `from`, 0 if absent.
std::pair<int, std::size_t> locate_key(std::string_view text, const std::string& key,
                                       std::size_t from) {
  const std::string quoted = "\"" + key + "\"";
  std::size_t pos = text.find(quoted, from);
  if (pos == std::string_view::npos) return {0, from};
  const int line = 1 + static_cast<int>(std::count(text.begin(), text.begin() + long(pos), '\n'));
  return {line, pos};
}

// Typed access to one JSON object with unknown-key detection and errors that
// name the field and its line.
class Fields {
 public:
  Fields(const json& obj, std::string path, std::string_view text, std::size_t anchor)
      : obj_(obj), path_(std::move(path)), text_(text), anchor_(anchor) {
    if (!obj_.is_object()) fail("", "expected an object");
  }

  [[noreturn]] void fail(const std::string& key, const std::string& message) const {
    const std::string field = key.empty() ? path_ : qualified(key);
    const auto [line, pos] = locate_key(text_, key.empty() ? path_ : key, anchor_);
    std::ostringstream os;
    if (line > 0) os << "line " << line << ": ";
    os << "field '" << (field.empty() ? "<root>" : field) << "': " << message;
    config_error(os.str());
  }

  bool has(const char* key) {
    seen_.insert(key);
    return obj_.contains(key);
  }

  template <typename T>
  bool read(const char* key, T& out) {
    if (!has(key)) return false;
    const json& v = obj_.at(key);
    try {
      if constexpr (std::is_same_v<T, double>) {
        if (!v.is_number()) fail(key, "expected a number");
      } else if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
        if (!v.is_number_integer()) fail(key, "expected an integer");
      } else if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) fail(key, "expected true or false");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) fail(key, "expected a string");
      }
      out = v.get<T>();
    } catch (const json::exception& e) {
      fail(key, e.what());
    }
    return true;
  }

  template <typename T, typename Pred>
  bool read(const char* key, T& out, Pred valid, const char* requirement) {
    if (!read(key, out)) return false;
    if (!valid(out)) fail(key, requirement);
    return true;
  }

  Fields child(const char* key) {
    seen_.insert(key);
    const auto [line, pos] = locate_key(text_, key, anchor_);
    (void)line;
    return Fields(obj_.at(key), qualified(key), text_, pos);
  }

  const json& raw(const char* key) {
    seen_.insert(key);
    return obj_.at(key);
  }

  void finish() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it) {
      if (!seen_.count(it.key())) fail(it.key(), "unknown field");
    }
  }

  std::size_t anchor() const { return anchor_; }
  std::string_view text() const { return text_; }
  std::string qualified(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

 private:
  const json& obj_;
  std::string path_;
  std::string_view text_;
  std::size_t anchor_;
  std::set<std::string> seen_;
};

auto positive = [](auto x) { return x > 0; };

FlowKind read_flow(Fields& f, const std::string& key, const std::string& text) {
  const auto kind = parse_flow_kind(text);
  if (!kind) f.fail(key, "unknown flow '" + text + "' (AP, LP or JP)");
  return *kind;
}

CurveSpec read_curve(Fields f) {
  std::string kind;
  if (!f.read("kind", kind)) f.fail("kind", "missing curve kind");
  CurveSpec spec;
  spec.node_count = 512;
  f.read("nodes", spec.node_count,
         [](Index n) { return n >= 64 && is_power_of_two(n); },
         "must be a power of two >= 64");
  if (kind == "circle") {
    Circle c;
    f.read("radius", c.radius, positive, "must be positive");
    f.read("rotation", c.rotation);
    if (f.has("center")) {
      const json& v = f.raw("center");
      if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
        f.fail("center", "expected [x, y]");
      }
      c.center_x = v[0].get<double>();
      c.center_y = v[1].get<double>();
    }
    spec.family = c;
  } else if (kind == "ellipse") {
    Ellipse e;
    f.read("a", e.a, positive, "must be positive");
    f.read("b", e.b, positive, "must be positive");
    spec.family = e;
  } else if (kind == "perturbed_circle") {
    PerturbedCircle p;
    f.read("radius", p.radius, positive, "must be positive");
    f.read("rotation", p.rotation, positive, "must be positive");
    if (f.has("perturbations")) {
      const json& list = f.raw("perturbations");
      if (!list.is_array()) f.fail("perturbations", "expected a list");
      for (const json& item : list) {
        Fields pf(item, f.qualified("perturbations"), f.text(), f.anchor());
        Perturbation q;
        pf.read("mode", q.mode);
        pf.read("amplitude", q.amplitude);
        pf.read("phase", q.phase);
        pf.finish();
        p.perturbations.push_back(q);
      }
    }
    spec.family = p;
  } else if (kind == "limacon") {
    Limacon l;
    f.read("a", l.a, positive, "must be positive");
    f.read("b", l.b, positive, "must be positive");
    spec.family = l;
  } else if (kind == "random") {
    RandomBandLimited r;
    f.read("rotation", r.rotation, positive, "must be positive");
    f.read("seed", r.seed);
    f.read("max_mode", r.max_mode, positive, "must be positive");
    f.read("scale", r.scale, positive, "must be positive");
    spec.family = r;
  } else {
    f.fail("kind", "unknown curve kind '" + kind +
                       "' (circle, ellipse, perturbed_circle, limacon, random)");
  }
  f.finish();
  return spec;
}

json curve_json(const CurveSpec& spec) {
  json j = std::visit(
      [](const auto& c) -> json {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, Circle>) {
          return {{"kind", "circle"}, {"radius", c.radius}, {"rotation", c.rotation},
                  {"center", {c.center_x, c.center_y}}};
        } else if constexpr (std::is_same_v<T, Ellipse>) {
          return {{"kind", "ellipse"}, {"a", c.a}, {"b", c.b}};
        } else if constexpr (std::is_same_v<T, PerturbedCircle>) {
          json list = json::array();
          for (const auto& p : c.perturbations) {
            list.push_back({{"mode", p.mode}, {"amplitude", p.amplitude}, {"phase", p.phase}});
          }
          return {{"kind", "perturbed_circle"}, {"radius", c.radius}, {"rotation", c.rotation},
                  {"perturbations", list}};
        } else if constexpr (std::is_same_v<T, Limacon>) {
          return {{"kind", "limacon"}, {"a", c.a}, {"b", c.b}};
        } else {
          return {{"kind", "random"}, {"rotation", c.rotation}, {"seed", c.seed},
                  {"max_mode", c.max_mode}, {"scale", c.scale}};
        }
      },
      spec.family);
  j["nodes"] = spec.node_count;
  return j;
}

std::vector<int> read_int_list(Fields& f, const char* key) {
  const json& v = f.raw(key);
  if (!v.is_array() || v.empty()) f.fail(key, "expected a non-empty list of integers");
  std::vector<int> out;
  for (const json& x : v) {
    if (!x.is_number_integer() || x.get<int>() < 1) f.fail(key, "entries must be integers >= 1");
    out.push_back(x.get<int>());
  }
  return out;
}

// Presets ------------------------------------------------------------------

ExperimentConfig blowup_preset(const char* name, FlowKind flow, double t_max) {
  ExperimentConfig c;
  c.name = name;
  c.flow = flow;
  c.curve = perturbed_n_circle(1.0, 2, 1, 0.2);
  c.target_I_m1 = -0.05;
  c.stop.t_max = t_max;
  c.dt.c_cfl = 0.02;
  c.sample_every = 1;
  c.checks = {CheckKind::BlowUp};
  return c;
}

ExperimentConfig decay_preset(const char* name, FlowKind flow, CurveSpec curve) {
  ExperimentConfig c;
  c.name = name;
  c.flow = flow;
  c.curve = std::move(curve);
  c.stop.t_max = 5.0;
  c.sample_every = 5;
  c.checks = {CheckKind::Conservation, CheckKind::Audit, CheckKind::Decay,
              CheckKind::Convergence};
  return c;
}

}  // namespace

std::string to_string(CheckKind kind) {
  for (const auto& c : kCheckNames) {
    if (c.kind == kind) return c.name;
  }
  return "unknown";
}

std::optional<CheckKind> parse_check_kind(std::string_view text) {
  for (const auto& c : kCheckNames) {
    if (text == c.name) return c.kind;
  }
  return std::nullopt;
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{
      "identities",  "inequalities", "ap-blowup-n2", "lp-blowup-n2", "jp-blowup-n2", "ap-decay-n1",
      "ap-decay-n2", "lp-decay-n2",  "jp-decay-n2",  "stationary",   "rates-blowup"};
  return names;
}

ExperimentConfig preset(std::string_view name) {
  if (name == "identities" || name == "inequalities") {
    ExperimentConfig c;
    c.name = std::string(name);
    c.checks = {name == "identities" ? CheckKind::Identities : CheckKind::Inequalities};
    return c;
  }
  if (name == "ap-blowup-n2") {
    ExperimentConfig c = blowup_preset("ap-blowup-n2", FlowKind::AP, 12.0);
    c.checks.push_back(CheckKind::Scaling);
    return c;
  }
  if (name == "lp-blowup-n2") return blowup_preset("lp-blowup-n2", FlowKind::LP, 24.0);
  if (name == "jp-blowup-n2") return blowup_preset("jp-blowup-n2", FlowKind::JP, 24.0);
  if (name == "rates-blowup") {
    ExperimentConfig c = blowup_preset("rates-blowup", FlowKind::AP, 12.0);
    c.checks.push_back(CheckKind::Rates);
    return c;
  }
  if (name == "ap-decay-n1") {
    return decay_preset("ap-decay-n1", FlowKind::AP, perturbed_n_circle(1.0, 1, 3, 0.1));
  }
  if (name == "ap-decay-n2") {
    return decay_preset("ap-decay-n2", FlowKind::AP, perturbed_n_circle(1.0, 2, 5, 0.05));
  }
  if (name == "lp-decay-n2") {
    return decay_preset("lp-decay-n2", FlowKind::LP, perturbed_n_circle(1.0, 2, 5, 0.05));
  }
  if (name == "jp-decay-n2") {
    return decay_preset("jp-decay-n2", FlowKind::JP, perturbed_n_circle(1.0, 2, 5, 0.05));
  }
  if (name == "stationary") {
    ExperimentConfig c;
    c.name = "stationary";
    c.curve = {Circle{1.0, 1}, 256};
    c.bandwidth = 128;
    c.checks = {CheckKind::Stationary};
    return c;
  }
  throw CurveflowError(ErrorCode::UnknownPreset, "no preset named '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------

ExperimentConfig parse_config(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    config_error(e.what());
  }
  Fields root(doc, "", text, 0);

  ExperimentConfig c;
  std::string s;
  if (root.read("preset", s)) {
    try {
      c = preset(s);
    } catch (const CurveflowError&) {
      root.fail("preset", "unknown preset '" + s + "'");
    }
  }
  root.read("name", c.name, [](const std::string& x) { return !x.empty(); },
            "must not be empty");
  if (root.read("flow", s)) c.flow = read_flow(root, "flow", s);
  if (root.has("curve")) {
    c.curve = read_curve(root.child("curve"));
    if (!root.has("target_I_m1")) c.target_I_m1.reset();
  }
  if (root.has("target_I_m1")) {
    if (root.raw("target_I_m1").is_null()) {
      c.target_I_m1.reset();
    } else {
      double v = 0;
      root.read("target_I_m1", v);
      c.target_I_m1 = v;
    }
  }
  root.read("bandwidth", c.bandwidth, positive, "must be positive");
  if (root.has("stop")) {
    Fields f = root.child("stop");
    f.read("t_max", c.stop.t_max, positive, "must be positive");
    f.read("dt_min", c.stop.dt_min, positive, "must be positive");
    f.read("W_max", c.stop.W_max, positive, "must be positive");
    f.read("max_steps", c.stop.max_steps, positive, "must be positive");
    f.finish();
  }
  if (root.has("dt")) {
    Fields f = root.child("dt");
    f.read("c_cfl", c.dt.c_cfl, positive, "must be positive");
    f.read("growth", c.dt.growth, [](double g) { return g >= 1; }, "must be >= 1");
    f.read("dt_max", c.dt.dt_max, positive, "must be positive");
    double fixed = 0;
    if (f.read("fixed", fixed, positive, "must be positive")) c.dt.fixed = fixed;
    f.finish();
  }
  if (root.has("resolution")) {
    Fields f = root.child("resolution");
    f.read("max_nodes", c.resolution.max_nodes,
           [](Index n) { return n >= 64 && is_power_of_two(n); },
           "must be a power of two >= 64");
    f.read("refine_kh", c.resolution.refine_kh, positive, "must be positive");
    f.read("blowup_kh", c.resolution.blowup_kh, positive, "must be positive");
    f.finish();
  }
  if (root.read("scheme", s)) {
    if (s == "etdrk4") {
      c.step.scheme = TimeScheme::ETDRK4;
    } else if (s == "imex-euler") {
      c.step.scheme = TimeScheme::IMEXEuler;
    } else {
      root.fail("scheme", "unknown scheme '" + s + "' (etdrk4 or imex-euler)");
    }
  }
  root.read("filter", c.step.filter);
  root.read("sample_every", c.sample_every, positive, "must be positive");
  root.read("output", c.output_dir);
  root.read("seed", c.seed);
  if (root.has("checks")) {
    const json& list = root.raw("checks");
    if (!list.is_array() || list.empty()) root.fail("checks", "expected a non-empty list");
    c.checks.clear();
    for (const json& item : list) {
      const auto kind = item.is_string() ? parse_check_kind(item.get<std::string>()) : std::nullopt;
      if (!kind) root.fail("checks", "unknown check " + item.dump());
      c.checks.push_back(*kind);
    }
  }
  if (root.has("ensemble")) {
    Fields f = root.child("ensemble");
    f.read("count", c.ensemble.count, positive, "must be positive");
    if (f.has("rotations")) c.ensemble.rotations = read_int_list(f, "rotations");
    f.read("max_mode", c.ensemble.max_mode, positive, "must be positive");
    f.read("scale", c.ensemble.scale, positive, "must be positive");
    f.read("nodes", c.ensemble.nodes,
           [](Index n) { return n >= 64 && is_power_of_two(n); },
           "must be a power of two >= 64");
    f.finish();
  }
  if (root.has("sweep")) {
    Fields f = root.child("sweep");
    if (f.has("flows")) {
      const json& list = f.raw("flows");
      if (!list.is_array() || list.empty()) f.fail("flows", "expected a non-empty list");
      c.sweep_flows.clear();
      for (const json& item : list) {
        const auto kind =
            item.is_string() ? parse_flow_kind(item.get<std::string>()) : std::nullopt;
        if (!kind) f.fail("flows", "unknown flow " + item.dump());
        c.sweep_flows.push_back(*kind);
      }
    }
    if (f.has("rotations")) c.sweep_rotations = read_int_list(f, "rotations");
    f.read("steps", c.stationary_steps, positive, "must be positive");
    f.finish();
  }
  if (root.has("audit")) {
    Fields f = root.child("audit");
    f.read("dt", c.audit.dt, positive, "must be positive");
    f.read("horizon", c.audit.horizon, positive, "must be positive");
    f.read("levels", c.audit.levels, [](int n) { return n >= 2; }, "must be at least 2");
    f.read("floor", c.audit.floor, positive, "must be positive");
    f.finish();
  }
  if (root.has("scaling_factors")) {
    const json& list = root.raw("scaling_factors");
    if (!list.is_array() || list.empty()) root.fail("scaling_factors", "expected a list");
    c.scaling_factors.clear();
    for (const json& x : list) {
      if (!x.is_number() || x.get<double>() <= 0) {
        root.fail("scaling_factors", "entries must be positive numbers");
      }
      c.scaling_factors.push_back(x.get<double>());
    }
  }
  root.finish();

  if (c.checks.empty()) root.fail("checks", "no checks selected");
  if (2 * c.bandwidth > c.curve.node_count) {
    root.fail("bandwidth", "exceeds half the node count " + std::to_string(c.curve.node_count));
  }
  if (c.target_I_m1 && !std::holds_alternative<PerturbedCircle>(c.curve.family)) {
    root.fail("target_I_m1", "requires a perturbed_circle curve");
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) config_error("cannot read " + file.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_config(buffer.str());
  } catch (const CurveflowError& e) {
    config_error(file.string() + ": " + std::string(e.what()).substr(sizeof("ConfigError: ") - 1));
  }
}

json to_json(const ExperimentConfig& c) {
  json checks = json::array();
  for (auto k : c.checks) checks.push_back(to_string(k));
  json flows = json::array();
  for (auto f : c.sweep_flows) flows.push_back(std::string(to_string(f)));
  json dt = {{"c_cfl", c.dt.c_cfl}, {"growth", c.dt.growth}, {"dt_max", c.dt.dt_max}};
  if (c.dt.fixed) dt["fixed"] = *c.dt.fixed;
  return {
      {"name", c.name},
      {"flow", std::string(to_string(c.flow))},
      {"curve", curve_json(c.curve)},
      {"target_I_m1", c.target_I_m1 ? json(*c.target_I_m1) : json(nullptr)},
      {"bandwidth", c.bandwidth},
      {"stop",
       {{"t_max", c.stop.t_max},
        {"dt_min", c.stop.dt_min},
        {"W_max", c.stop.W_max},
        {"max_steps", c.stop.max_steps}}},
      {"dt", dt},
      {"resolution",
       {{"max_nodes", c.resolution.max_nodes},
        {"refine_kh", c.resolution.refine_kh},
        {"blowup_kh", c.resolution.blowup_kh}}},
      {"scheme", c.step.scheme == TimeScheme::ETDRK4 ? "etdrk4" : "imex-euler"},
      {"filter", c.step.filter},
      {"sample_every", c.sample_every},
      {"output", c.output_dir},
      {"seed", c.seed},
      {"checks", checks},
      {"ensemble",
       {{"count", c.ensemble.count},
        {"rotations", c.ensemble.rotations},
        {"max_mode", c.ensemble.max_mode},
        {"scale", c.ensemble.scale},
        {"nodes", c.ensemble.nodes}}},
      {"sweep", {{"flows", flows}, {"rotations", c.sweep_rotations}, {"steps", c.stationary_steps}}},
      {"audit",
       {{"dt", c.audit.dt},
        {"horizon", c.audit.horizon},
        {"levels", c.audit.levels},
        {"floor", c.audit.floor}}},
      {"scaling_factors", c.scaling_factors},
  };
}

std::filesystem::path output_root() {
  if (const char* env = std::getenv("CURVEFLOW_OUT"); env && *env) return env;
  return "curveflow-out";
}

std::filesystem::path resolve_output_dir(const ExperimentConfig& config) {
  if (!config.output_dir.empty()) return config.output_dir;
  return output_root() / config.name;
}

// ---------------------------------------------------------------------------

CurveSpec calibrate_perturbation(const CurveSpec& spec, double target_I_m1) {
  const auto* base = std::get_if<PerturbedCircle>(&spec.family);
  if (!base || base->perturbations.empty()) {
    config_error("target_I_m1 needs a perturbed circle with at least one perturbation");
  }
  auto with = [&](double a) {
    CurveSpec s = spec;
    std::get<PerturbedCircle>(s.family).perturbations.front().amplitude = a;
    return s;
  };
  auto excess = [&](double a) {
    return functionals(make_test_curve<double>(with(a)), FlowKind::AP).I_m1 - target_I_m1;
  };
  double lo = 1e-6, hi = 0.45;
  const double f_lo = excess(lo), f_hi = excess(hi);
  if ((f_lo > 0) == (f_hi > 0)) {
    config_error("target_I_m1 = " + std::to_string(target_I_m1) +
                 " is not reached for amplitudes in (0, 0.45]");
  }
  for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
    const double mid = 0.5 * (lo + hi);
    if ((excess(mid) > 0) == (f_lo > 0)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return with(0.5 * (lo + hi));
}

CurveSpec balanced_double_circle(double mode5_amplitude) {
  CurveSpec spec{PerturbedCircle{1.0, 2, {{1, 0.1, 0.0}, {5, mode5_amplitude, 0.0}}}, 512};
  return calibrate_perturbation(spec, 0.0);
}

std::string_view module_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonImmersed:
    case ErrorCode::NotClosed:
    case ErrorCode::RotationResidual: return "curve_geometry";
    case ErrorCode::BandwidthTooLow:
    case ErrorCode::PhaseUndefined: return "spectral_functionals";
    case ErrorCode::RemeshFailed:
    case ErrorCode::NonPositiveArea: return "flow_engine";
    case ErrorCode::NotApplicable:
    case ErrorCode::InsufficientResolution:
    case ErrorCode::NotDecaying: return "theorem_suite";
    case ErrorCode::TooCoarse:
    case ErrorCode::StabilityViolation: return "reference_oracle";
    case ErrorCode::UnknownPreset:
    case ErrorCode::ConfigError: return "cli_harness";
  }
  return "unknown";
}

}  // namespace curveflow::harness
