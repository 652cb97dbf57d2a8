#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "carleman/bench.hpp"
#include "carleman/io.hpp"
#include "carleman/metrics.hpp"

namespace carleman {

struct SummaryRow {
  std::string method;
  unsigned lift_degree = 0;
  std::size_t n_eval = 0;
  std::optional<ErrorReport> report;

  std::string label() const {
    return method == "lifted" ? "lifted_Q" + std::to_string(lift_degree) : method;
  }
};

inline std::vector<SummaryRow> parse_summary(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "method,degZ,n_eval,dt,max_error,frob_error")
    throw UsageError("summary.csv: unexpected header");
  std::vector<SummaryRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::string item;
    std::istringstream ls(line);
    while (std::getline(ls, item, ',')) f.push_back(item);
    if (f.size() != 6) throw UsageError("summary.csv line " + std::to_string(lineno) + ": expected 6 fields");
    SummaryRow row;
    try {
      row.method = f[0];
      row.lift_degree = static_cast<unsigned>(std::stoul(f[1]));
      row.n_eval = std::stoul(f[2]);
      if (f[3] != "FAILED") {
        ErrorReport r;
        r.dt = std::stod(f[3]);
        r.max_error = std::stod(f[4]);
        r.frob_error = std::stod(f[5]);
        r.n_steps = row.n_eval - 1;
        row.report = r;
      }
    } catch (const std::logic_error&) {
      throw UsageError("summary.csv line " + std::to_string(lineno) + ": malformed number");
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

// Reports grouped by method label, in file order.
inline std::map<std::string, std::vector<ErrorReport>> group_reports(const std::vector<SummaryRow>& rows) {
  std::map<std::string, std::vector<ErrorReport>> out;
  for (const auto& r : rows)
    if (r.report) out[r.label()].push_back(*r.report);
  return out;
}

inline std::string fmt_opt(const std::optional<double>& v) {
  if (!v) return "n/a";
  std::ostringstream s;
  s.precision(6);
  s << *v;
  return s.str();
}

// Plain-text report: E vs dt per method, dt_max per tolerance, R(e) for each
// lifted degree against the Jacobian baseline, and convergence slopes.
inline std::string render_report(const std::vector<SummaryRow>& rows, const std::vector<double>& tolerances) {
  const auto groups = group_reports(rows);
  std::ostringstream out;
  out.precision(6);

  out << "# Error vs step size\n";
  out << "method        n_eval  dt            max_error     frob_error\n";
  for (const auto& r : rows) {
    out << r.label();
    for (std::size_t pad = r.label().size(); pad < 14; ++pad) out << ' ';
    out << r.n_eval;
    for (std::size_t pad = std::to_string(r.n_eval).size(); pad < 8; ++pad) out << ' ';
    if (r.report)
      out << std::scientific << r.report->dt << "  " << r.report->max_error << "  " << r.report->frob_error
          << std::defaultfloat << '\n';
    else
      out << "FAILED\n";
  }

  out << "\n# dt_max(e)\n";
  out << "e";
  for (const auto& [label, _] : groups) out << ',' << label;
  out << '\n';
  for (double e : tolerances) {
    out << e;
    for (const auto& [label, reps] : groups) out << ',' << fmt_opt(dt_max(reps, e));
    out << '\n';
  }

  out << "\n# R(e) = dt_max(lifted) / dt_max(jacobian)\n";
  const auto jac = groups.find("jacobian");
  out << "e";
  for (const auto& [label, _] : groups)
    if (label != "jacobian") out << ',' << label;
  out << '\n';
  for (double e : tolerances) {
    out << e;
    for (const auto& [label, reps] : groups) {
      if (label == "jacobian") continue;
      out << ',' << (jac == groups.end() ? "n/a" : fmt_opt(gain(reps, jac->second, e)));
    }
    out << '\n';
  }

  out << "\n# Convergence slopes (log E vs log dt)\n";
  for (const auto& [label, reps] : groups) {
    std::vector<double> dts, errs;
    for (const auto& r : reps) dts.push_back(r.dt), errs.push_back(r.max_error);
    out << label << ',' << fmt_opt(loglog_slope(dts, errs)) << '\n';
  }
  return out.str();
}

// Log-log polylines of E against the number of steps, one per method.
inline std::string render_svg(const std::vector<SummaryRow>& rows, const std::string& title) {
  const auto groups = group_reports(rows);
  double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
  for (const auto& [_, reps] : groups)
    for (const auto& r : reps) {
      if (r.max_error <= 0.0 || r.n_steps == 0) continue;
      xmin = std::min(xmin, std::log10(static_cast<double>(r.n_steps)));
      xmax = std::max(xmax, std::log10(static_cast<double>(r.n_steps)));
      ymin = std::min(ymin, std::log10(r.max_error));
      ymax = std::max(ymax, std::log10(r.max_error));
    }
  if (!(xmax > xmin)) xmin -= 0.5, xmax += 0.5;
  if (!(ymax > ymin)) ymin -= 0.5, ymax += 0.5;

  constexpr double W = 640, H = 480, L = 70, R = 160, T = 40, B = 50;
  auto px = [&](double lx) { return L + (lx - xmin) / (xmax - xmin) * (W - L - R); };
  auto py = [&](double ly) { return H - B - (ly - ymin) / (ymax - ymin) * (H - T - B); };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

  std::ostringstream s;
  s.precision(6);
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" << title << "</text>\n";
  s << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
    << "\" stroke=\"black\"/>\n";
  s << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  for (int d = static_cast<int>(std::ceil(xmin)); d <= static_cast<int>(std::floor(xmax)); ++d)
    s << "<text x=\"" << px(d) << "\" y=\"" << H - B + 18 << "\" text-anchor=\"middle\" font-size=\"12\">1e"
      << d << "</text>\n";
  for (int d = static_cast<int>(std::ceil(ymin)); d <= static_cast<int>(std::floor(ymax)); ++d)
    s << "<text x=\"" << L - 6 << "\" y=\"" << py(d) + 4 << "\" text-anchor=\"end\" font-size=\"12\">1e" << d
      << "</text>\n";
  s << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\" font-size=\"13\">"
    << "number of steps</text>\n";
  s << "<text x=\"16\" y=\"" << (T + H - B) / 2 << "\" transform=\"rotate(-90 16 " << (T + H - B) / 2
    << ")\" text-anchor=\"middle\" font-size=\"13\">max error</text>\n";

  std::size_t idx = 0;
  for (const auto& [label, reps] : groups) {
    const char* color = colors[idx % 6];
    s << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (const auto& r : reps)
      if (r.max_error > 0.0 && r.n_steps > 0)
        s << px(std::log10(static_cast<double>(r.n_steps))) << ',' << py(std::log10(r.max_error)) << ' ';
    s << "\"/>\n";
    const double ly = T + 20 + 20 * static_cast<double>(idx);
    s << "<line x1=\"" << W - R + 10 << "\" y1=\"" << ly << "\" x2=\"" << W - R + 30 << "\" y2=\"" << ly
      << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    s << "<text x=\"" << W - R + 36 << "\" y=\"" << ly + 4 << "\" font-size=\"12\">" << label << "</text>\n";
    ++idx;
  }
  s << "</svg>\n";
  return s.str();
}

}  // namespace carleman
