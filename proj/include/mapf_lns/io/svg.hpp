#pragma once

#include <algorithm>
#include <array>
#include <cstdio>
#include <ostream>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "../errors.hpp"
#include "../metrics.hpp"

namespace mapf_lns {

struct MeanPoint {
  double time = 0.0;
  double delay = 0.0;
};

struct PlotSeries {
  std::string label;
  std::vector<Trajectory> runs;
  double limit = 0.0;
};

// Best-so-far delay averaged across runs, as a step function over the union
// of all breakpoints up to `limit`.
inline std::vector<MeanPoint> mean_step_curve(const std::vector<Trajectory>& runs, double limit) {
  if (runs.empty()) throw std::invalid_argument("no runs to average");
  std::set<double> times{0.0};
  for (const auto& r : runs) {
    check_trajectory(r);
    for (const auto& p : r)
      if (p.time <= limit) times.insert(p.time);
  }
  auto level = [](const Trajectory& r, double t) {
    auto it = std::upper_bound(r.begin(), r.end(), t, [](double x, const TrajectoryPoint& p) { return x < p.time; });
    return (it - 1)->delay;
  };
  std::vector<MeanPoint> out;
  for (double t : times) {
    double sum = 0.0;
    for (const auto& r : runs) sum += static_cast<double>(level(r, t));
    out.push_back({t, sum / static_cast<double>(runs.size())});
  }
  return out;
}

namespace detail {

inline std::string fmt2(double x) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  return buf;
}

inline std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace detail

inline std::string render_svg_plot(const std::vector<PlotSeries>& series, const std::string& x_label = "core time (s)",
                                   const std::string& title = "Delay vs. time") {
  if (series.empty()) throw std::invalid_argument("nothing to plot");
  static constexpr std::array<const char*, 8> kColors{"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                                      "#9467bd", "#8c564b", "#e377c2", "#17becf"};
  constexpr double W = 640, H = 420, left = 70, right = 170, top = 40, bottom = 50;
  const double pw = W - left - right, ph = H - top - bottom;

  std::vector<std::vector<MeanPoint>> curves;
  double xmax = 0.0, ymax = 0.0;
  for (const auto& s : series) {
    curves.push_back(mean_step_curve(s.runs, s.limit));
    xmax = std::max(xmax, s.limit);
    for (const auto& p : curves.back()) ymax = std::max(ymax, p.delay);
  }
  if (xmax <= 0.0) xmax = 1.0;
  if (ymax <= 0.0) ymax = 1.0;
  auto sx = [&](double t) { return left + pw * t / xmax; };
  auto sy = [&](double d) { return top + ph * (1.0 - d / ymax); };

  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + detail::fmt2(W) + "\" height=\"" + detail::fmt2(H) +
         "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out += "<text x=\"" + detail::fmt2(left) + "\" y=\"24\" font-size=\"14\">" + detail::xml_escape(title) + "</text>\n";
  out += "<line x1=\"" + detail::fmt2(left) + "\" y1=\"" + detail::fmt2(top + ph) + "\" x2=\"" +
         detail::fmt2(left + pw) + "\" y2=\"" + detail::fmt2(top + ph) + "\" stroke=\"black\"/>\n";
  out += "<line x1=\"" + detail::fmt2(left) + "\" y1=\"" + detail::fmt2(top) + "\" x2=\"" + detail::fmt2(left) +
         "\" y2=\"" + detail::fmt2(top + ph) + "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = xmax * i / 4.0, yv = ymax * i / 4.0;
    out += "<text x=\"" + detail::fmt2(sx(xv)) + "\" y=\"" + detail::fmt2(top + ph + 16) +
           "\" text-anchor=\"middle\">" + detail::fmt2(xv) + "</text>\n";
    out += "<text x=\"" + detail::fmt2(left - 6) + "\" y=\"" + detail::fmt2(sy(yv) + 4) + "\" text-anchor=\"end\">" +
           detail::fmt2(yv) + "</text>\n";
  }
  out += "<text x=\"" + detail::fmt2(left + pw / 2) + "\" y=\"" + detail::fmt2(H - 12) +
         "\" text-anchor=\"middle\">" + detail::xml_escape(x_label) + "</text>\n";
  out += "<text transform=\"translate(16," + detail::fmt2(top + ph / 2) +
         ") rotate(-90)\" text-anchor=\"middle\">sum of delays</text>\n";

  for (std::size_t i = 0; i < series.size(); ++i) {
    const char* color = kColors[i % kColors.size()];
    const auto& c = curves[i];
    std::string pts;
    for (std::size_t k = 0; k < c.size(); ++k) {
      const double y = sy(c[k].delay);
      const double x_end = k + 1 < c.size() ? c[k + 1].time : series[i].limit;
      pts += detail::fmt2(sx(c[k].time)) + ',' + detail::fmt2(y) + ' ';
      pts += detail::fmt2(sx(x_end)) + ',' + detail::fmt2(y) + ' ';
    }
    pts.pop_back();
    out += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"1.5\" points=\"" + pts +
           "\"/>\n";
    const double ly = top + 10 + 18.0 * i;
    out += "<line x1=\"" + detail::fmt2(left + pw + 12) + "\" y1=\"" + detail::fmt2(ly) + "\" x2=\"" +
           detail::fmt2(left + pw + 32) + "\" y2=\"" + detail::fmt2(ly) + "\" stroke=\"" + color +
           "\" stroke-width=\"2\"/>\n";
    out += "<text x=\"" + detail::fmt2(left + pw + 38) + "\" y=\"" + detail::fmt2(ly + 4) + "\">" +
           detail::xml_escape(series[i].label) + "</text>\n";
  }
  out += "</svg>\n";
  return out;
}

inline void emit_svg_plot(const std::vector<PlotSeries>& series, std::ostream& out,
                          const std::string& x_label = "core time (s)") {
  out << render_svg_plot(series, x_label);
  if (!out) throw IoError("failed writing SVG");
}

}  // namespace mapf_lns
