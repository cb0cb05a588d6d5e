#include "curveflow/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

namespace curveflow::harness {

using nlohmann::json;

const char* const kTrajectoryColumns =
    "t,dt,L,A,n,R,W,I_m1,I0,I1,tildeI_m1,J3,J4,g,kappa_max,kappa_min,c_x,c_y,r,sigma_over_L,"
    "rho_L2,rho_C0";

namespace {

void put(std::ostream& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out << buf;
}

}  // namespace

void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory) {
  out << kTrajectoryColumns << "\n";
  for (const Sample& s : trajectory.samples) {
    const auto& d = s.d;
    const double row[] = {s.t,         s.dt,          d.L,         d.A,
                          double(d.n), d.R,           d.W,         d.I_m1,
                          d.I0,        d.I1,          d.tilde_I_m1, d.J3,
                          d.J4,        d.g,           d.kappa_max, d.kappa_min,
                          s.fit.centre.real(), s.fit.centre.imag(), s.fit.radius,
                          s.fit.sigma_over_L, s.fit.rho_L2, s.fit.rho_C0};
    for (std::size_t i = 0; i < std::size(row); ++i) {
      if (i) out << ',';
      if (i == 4) {
        out << d.n;
      } else {
        put(out, row[i]);
      }
    }
    out << "\n";
  }
}

json termination_json(const Trajectory& trajectory) {
  const Termination& t = trajectory.termination;
  return {{"kind", to_string(t.kind)},   {"t_num", t.t_num},
          {"cause", t.cause},            {"steps", t.steps},
          {"rejected_steps", t.rejected_steps}, {"final_nodes", t.final_nodes},
          {"flow", std::string(to_string(trajectory.flow))}};
}

json to_json(const IdentityReport& report) {
  json out = json::array();
  for (const auto& r : report.records) {
    out.push_back({{"name", r.name},
                   {"lhs", r.lhs},
                   {"rhs", r.rhs},
                   {"residual_or_slack", r.residual},
                   {"pass", r.pass}});
  }
  return out;
}

json to_json(const InequalityReport& report) {
  json records = json::array();
  for (const auto& r : report.records) {
    records.push_back({{"name", r.name},
                       {"lhs", r.lhs},
                       {"rhs", r.rhs},
                       {"residual_or_slack", r.slack},
                       {"pass", r.pass}});
  }
  json ratios = json::array();
  for (const auto& q : report.ratios) {
    ratios.push_back({{"j", q.j}, {"l", q.ell}, {"ratio", q.ratio}, {"degenerate", q.degenerate}});
  }
  return {{"records", records},
          {"interpolation_ratios", ratios},
          {"schwarz_unrooted_slack", report.schwarz_unrooted_slack}};
}

json to_json(const Check& check) {
  // Infinite bounds serialize as strings; JSON has no infinity.
  auto number = [](double v) -> json {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
  };
  return {{"name", check.name},
          {"paper_ref", check.paper_ref},
          {"value", number(check.value)},
          {"bound", number(check.bound)},
          {"pass", check.pass}};
}

json verdict_json(const std::vector<Check>& checks, json summary) {
  json list = json::array();
  std::size_t passed = 0;
  for (const auto& c : checks) {
    list.push_back(to_json(c));
    passed += c.pass ? 1 : 0;
  }
  summary["checks_total"] = checks.size();
  summary["checks_passed"] = passed;
  summary["pass"] = passed == checks.size();
  return {{"checks", list}, {"summary", summary}};
}

std::string format_verdict(const json& verdict) {
  std::ostringstream os;
  const json& summary = verdict.at("summary");
  os << "run " << summary.value("name", "?") << " (" << summary.value("flow", "?") << ")\n";
  if (summary.contains("termination")) {
    const json& t = summary["termination"];
    os << "termination: " << t.value("kind", "?");
    if (!t.value("cause", std::string()).empty()) os << " (" << t["cause"].get<std::string>() << ")";
    os << " at t = " << t.at("t_num").dump() << " after " << t.at("steps").dump() << " steps\n";
  }
  for (const json& c : verdict.at("checks")) {
    os << (c.at("pass").get<bool>() ? "PASS " : "FAIL ") << c.at("name").get<std::string>()
       << ": value " << c.at("value").dump() << ", bound " << c.at("bound").dump() << "  ["
       << c.at("paper_ref").get<std::string>() << "]\n";
  }
  os << summary.at("checks_passed").dump() << "/" << summary.at("checks_total").dump()
     << " checks passed";
  if (summary.contains("runtime_s")) {
    os << " in " << std::fixed << std::setprecision(1) << summary["runtime_s"].get<double>()
       << " s";
  }
  os << "\n";
  return os.str();
}

int report(const std::filesystem::path& dir, std::ostream& out) {
  std::ifstream in(dir / "verdict.json");
  if (!in) {
    out << "no verdict.json in " << dir.string() << "\n";
    return 2;
  }
  json verdict;
  try {
    verdict = json::parse(in);
    out << format_verdict(verdict);
    return verdict.at("summary").at("pass").get<bool>() ? 0 : 1;
  } catch (const json::exception& e) {
    out << "unreadable verdict in " << dir.string() << ": " << e.what() << "\n";
    return 2;
  }
}

// ---------------------------------------------------------------------------
// SVG plots.

namespace {

using Table = std::map<std::string, std::vector<double>>;

Table read_csv(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw CurveflowError(ErrorCode::ConfigError, "cannot read " + file.string());
  std::string line;
  std::getline(in, line);
  std::vector<std::string> names;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) names.push_back(cell);
  }
  Table table;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string cell;
    for (std::size_t i = 0; i < names.size() && std::getline(ss, cell, ','); ++i) {
      table[names[i]].push_back(std::strtod(cell.c_str(), nullptr));
    }
  }
  return table;
}

struct Series {
  std::string label;
  std::vector<double> y;
  const char* colour;
};

class Svg {
 public:
  Svg(double width, double height) : width_(width), height_(height) {}

  void panel(double x0, double y0, double w, double h, const std::string& title,
             const std::vector<double>& t, const std::vector<Series>& series, bool log_y) {
    double ymin = HUGE_VAL, ymax = -HUGE_VAL;
    for (const auto& s : series) {
      for (double v : s.y) {
        if (!std::isfinite(v) || (log_y && v <= 0)) continue;
        const double y = log_y ? std::log10(v) : v;
        ymin = std::min(ymin, y);
        ymax = std::max(ymax, y);
      }
    }
    const double tmin = t.empty() ? 0 : t.front(), tmax = t.empty() ? 1 : t.back();
    if (!(ymax > ymin)) {
      ymin -= 1;
      ymax += 1;
    }
    const double pad = 40;
    body_ << "<rect x='" << x0 + pad << "' y='" << y0 + 20 << "' width='" << w - pad - 10
          << "' height='" << h - 50 << "' fill='none' stroke='#999'/>\n";
    body_ << "<text x='" << x0 + pad << "' y='" << y0 + 14 << "' font-size='12'>" << title
          << (log_y ? " (log10)" : "") << "</text>\n";
    body_ << "<text x='" << x0 + 2 << "' y='" << y0 + 30 << "' font-size='9'>" << fmt(ymax)
          << "</text>\n<text x='" << x0 + 2 << "' y='" << y0 + h - 30 << "' font-size='9'>"
          << fmt(ymin) << "</text>\n";
    body_ << "<text x='" << x0 + pad << "' y='" << y0 + h - 16 << "' font-size='9'>t = "
          << fmt(tmin) << "</text>\n<text x='" << x0 + w - 70 << "' y='" << y0 + h - 16
          << "' font-size='9'>t = " << fmt(tmax) << "</text>\n";
    auto px = [&](double tv) {
      return x0 + pad + (w - pad - 10) * (tmax > tmin ? (tv - tmin) / (tmax - tmin) : 0.5);
    };
    auto py = [&](double v) { return y0 + 20 + (h - 50) * (ymax - v) / (ymax - ymin); };
    double legend_y = y0 + 34;
    for (const auto& s : series) {
      body_ << "<polyline fill='none' stroke='" << s.colour << "' stroke-width='1.2' points='";
      for (std::size_t i = 0; i < s.y.size() && i < t.size(); ++i) {
        const double v = s.y[i];
        if (!std::isfinite(v) || (log_y && v <= 0)) continue;
        body_ << px(t[i]) << ',' << py(log_y ? std::log10(v) : v) << ' ';
      }
      body_ << "'/>\n<text x='" << x0 + w - 120 << "' y='" << legend_y << "' font-size='10' fill='"
            << s.colour << "'>" << s.label << "</text>\n";
      legend_y += 12;
    }
  }

  void curves(const std::vector<std::pair<ComplexVector<double>, const char*>>& curves) {
    double xmin = HUGE_VAL, xmax = -HUGE_VAL, ymin = HUGE_VAL, ymax = -HUGE_VAL;
    for (const auto& [z, colour] : curves) {
      for (Index j = 0; j < z.size(); ++j) {
        xmin = std::min(xmin, z(j).real());
        xmax = std::max(xmax, z(j).real());
        ymin = std::min(ymin, z(j).imag());
        ymax = std::max(ymax, z(j).imag());
      }
    }
    const double span = std::max(xmax - xmin, ymax - ymin) * 1.1;
    const double cx = 0.5 * (xmin + xmax), cy = 0.5 * (ymin + ymax);
    const double scale = std::min(width_, height_) / span;
    for (const auto& [z, colour] : curves) {
      body_ << "<polygon fill='none' stroke='" << colour << "' stroke-width='1.2' points='";
      for (Index j = 0; j < z.size(); ++j) {
        body_ << width_ / 2 + scale * (z(j).real() - cx) << ','
              << height_ / 2 - scale * (z(j).imag() - cy) << ' ';
      }
      body_ << "'/>\n";
    }
  }

  void write(const std::filesystem::path& file) const {
    std::ofstream out(file);
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width_ << "' height='" << height_
        << "' font-family='sans-serif'>\n<rect width='100%' height='100%' fill='white'/>\n"
        << body_.str() << "</svg>\n";
  }

 private:
  static std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
  }

  double width_, height_;
  std::ostringstream body_;
};

}  // namespace

std::vector<std::filesystem::path> plot(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> written;
  const Table tab = read_csv(dir / "trajectory.csv");
  const auto& t = tab.at("t");
  std::vector<double> minus_kmin;
  for (double v : tab.at("kappa_min")) minus_kmin.push_back(-v);

  Svg svg(1000, 640);
  svg.panel(0, 0, 500, 320, "isoperimetric quantities", t,
            {{"I_m1", tab.at("I_m1"), "#1f77b4"}, {"tildeI_m1", tab.at("tildeI_m1"), "#ff7f0e"}},
            false);
  svg.panel(500, 0, 500, 320, "W and I0", t,
            {{"W", tab.at("W"), "#2ca02c"}, {"I0", tab.at("I0"), "#d62728"}}, true);
  svg.panel(0, 320, 500, 320, "curvature extremes", t,
            {{"kappa_max", tab.at("kappa_max"), "#9467bd"}, {"-kappa_min", minus_kmin, "#8c564b"}},
            true);
  svg.panel(500, 320, 500, 320, "circle remainder", t,
            {{"rho_C0", tab.at("rho_C0"), "#e377c2"}, {"rho_L2", tab.at("rho_L2"), "#7f7f7f"}},
            true);
  svg.write(dir / "trajectory.svg");
  written.push_back(dir / "trajectory.svg");

  std::ifstream a(dir / "curve_initial.csv"), b(dir / "curve_final.csv");
  if (a && b) {
    const auto c0 = read_curve_csv(a);
    const auto c1 = read_curve_csv(b);
    Svg shapes(600, 600);
    shapes.curves({{c0.points(), "#1f77b4"}, {c1.points(), "#d62728"}});
    shapes.write(dir / "curves.svg");
    written.push_back(dir / "curves.svg");
  }
  return written;
}

}  // namespace curveflow::harness
