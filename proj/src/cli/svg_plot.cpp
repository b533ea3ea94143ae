#include "easl/cli/svg_plot.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <string>

#include "easl/errors.hpp"

namespace easl::cli {

namespace {

constexpr double kWidth = 720;
constexpr double kHeight = 400;
constexpr double kLeft = 64;
constexpr double kRight = 150;
constexpr double kTop = 40;
constexpr double kBottom = 50;

const char* const kRegionFill[] = {"#dbe9f6", "#fde9d4", "#e3f1dc", "#eeeeee"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

std::string phase_name(int phase) { return phase == 0 ? std::string("joint") : "phase " + std::to_string(phase); }

struct Range {
  double lo, hi;
};

// Zero-width ranges are widened so a single point still lands mid-plot.
Range padded(double lo, double hi) {
  if (!(hi > lo)) return {lo - 0.5, hi + 0.5};
  return {lo, hi};
}

}  // namespace

std::string render_svg(const PlotSpec& spec) {
  const std::size_t n = spec.x.size();
  if (n == 0) throw ContractError("render_svg: no points");
  if (!spec.phase.empty() && spec.phase.size() != n) throw DimensionError("render_svg: phase labels vs x length");
  for (const auto& s : spec.series) {
    if (s.y.size() != n) throw DimensionError("render_svg: series '" + s.name + "' length differs from x");
  }

  double ylo = std::numeric_limits<double>::infinity(), yhi = -ylo;
  for (const auto& s : spec.series)
    for (double v : s.y) {
      ylo = std::min(ylo, v);
      yhi = std::max(yhi, v);
    }
  if (spec.series.empty()) ylo = yhi = 0.0;
  const Range xr =
      padded(*std::min_element(spec.x.begin(), spec.x.end()), *std::max_element(spec.x.begin(), spec.x.end()));
  const Range yr = padded(ylo, yhi);
  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - xr.lo) / (xr.hi - xr.lo) * pw; };
  auto py = [&](double y) { return kTop + (yr.hi - y) / (yr.hi - yr.lo) * ph; };

  std::string o;
  o += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" + num(kHeight) +
       "\" viewBox=\"0 0 " + num(kWidth) + " " + num(kHeight) + "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  o += "<rect x=\"0\" y=\"0\" width=\"" + num(kWidth) + "\" height=\"" + num(kHeight) + "\" fill=\"white\"/>\n";
  o += "<text x=\"" + num(kWidth / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" + escape(spec.title) +
       "</text>\n";

  // Phase regions: each run of equal labels spans from the previous boundary to its last epoch.
  std::vector<double> boundaries;
  if (!spec.phase.empty()) {
    std::size_t start = 0, region = 0;
    double left = spec.x.front();
    while (start < n) {
      std::size_t end = start;
      while (end + 1 < n && spec.phase[end + 1] == spec.phase[start]) ++end;
      const double right = spec.x[end];
      const double x0 = px(left), x1 = end + 1 < n ? px(right) : kLeft + pw;
      const double xs = region == 0 ? kLeft : x0;
      o += "<rect class=\"phase-region\" x=\"" + num(xs) + "\" y=\"" + num(kTop) + "\" width=\"" +
           num(std::max(0.0, x1 - xs)) + "\" height=\"" + num(ph) + "\" fill=\"" + kRegionFill[region % 4] +
           "\" fill-opacity=\"0.7\"/>\n";
      o += "<text x=\"" + num((xs + x1) / 2) + "\" y=\"" + num(kTop + 14) + "\" text-anchor=\"middle\" fill=\"#555\">" +
           phase_name(spec.phase[start]) + "</text>\n";
      if (end + 1 < n) boundaries.push_back(right);
      left = right;
      start = end + 1;
      ++region;
    }
  }
  for (double b : boundaries) {
    o += "<line class=\"phase-boundary\" x1=\"" + num(px(b)) + "\" y1=\"" + num(kTop) + "\" x2=\"" + num(px(b)) +
         "\" y2=\"" + num(kTop + ph) + "\" stroke=\"#444\" stroke-dasharray=\"4 3\"/>\n";
  }

  // Axes and ticks.
  o += "<rect x=\"" + num(kLeft) + "\" y=\"" + num(kTop) + "\" width=\"" + num(pw) + "\" height=\"" + num(ph) +
       "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double v = yr.lo + (yr.hi - yr.lo) * i / 4.0;
    o +=
        "<text x=\"" + num(kLeft - 6) + "\" y=\"" + num(py(v) + 4) + "\" text-anchor=\"end\">" + label(v) + "</text>\n";
  }
  std::vector<double> xticks{spec.x.front(), spec.x.back()};
  xticks.insert(xticks.end(), boundaries.begin(), boundaries.end());
  std::sort(xticks.begin(), xticks.end());
  xticks.erase(std::unique(xticks.begin(), xticks.end()), xticks.end());
  for (double v : xticks) {
    o += "<text x=\"" + num(px(v)) + "\" y=\"" + num(kTop + ph + 16) + "\" text-anchor=\"middle\">" + label(v) +
         "</text>\n";
  }
  o += "<text x=\"" + num(kLeft + pw / 2) + "\" y=\"" + num(kHeight - 12) + "\" text-anchor=\"middle\">epoch</text>\n";
  o += "<text x=\"16\" y=\"" + num(kTop + ph / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
       num(kTop + ph / 2) + ")\">" + escape(spec.y_label) + "</text>\n";

  // Curves and legend.
  for (std::size_t k = 0; k < spec.series.size(); ++k) {
    const Series& s = spec.series[k];
    o += "<polyline class=\"series\" fill=\"none\" stroke=\"" + s.color + "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < n; ++i) o += (i ? " " : "") + num(px(spec.x[i])) + "," + num(py(s.y[i]));
    o += "\"/>\n";
    if (n == 1) {
      o += "<circle cx=\"" + num(px(spec.x[0])) + "\" cy=\"" + num(py(s.y[0])) + "\" r=\"3\" fill=\"" + s.color +
           "\"/>\n";
    }
    const double ly = kTop + 10 + 18.0 * static_cast<double>(k);
    const double lx = kLeft + pw + 12;
    o += "<line x1=\"" + num(lx) + "\" y1=\"" + num(ly) + "\" x2=\"" + num(lx + 18) + "\" y2=\"" + num(ly) +
         "\" stroke=\"" + s.color + "\" stroke-width=\"2\"/>\n";
    o += "<text x=\"" + num(lx + 24) + "\" y=\"" + num(ly + 4) + "\">" + escape(s.name) + "</text>\n";
  }
  o += "</svg>\n";
  return o;
}

namespace {

PlotSpec base_plot(const std::vector<training::EpochRecord>& history, std::string title, std::string y_label) {
  PlotSpec p;
  p.title = std::move(title);
  p.y_label = std::move(y_label);
  for (const auto& r : history) {
    p.x.push_back(static_cast<double>(r.epoch));
    p.phase.push_back(r.phase);
  }
  return p;
}

Series column(const std::vector<training::EpochRecord>& history, std::string name, std::string color,
              double training::EpochRecord::* field) {
  Series s{std::move(name), std::move(color), {}};
  for (const auto& r : history) s.y.push_back(r.*field);
  return s;
}

}  // namespace

PlotSpec similarity_plot(const std::vector<training::EpochRecord>& history) {
  PlotSpec p = base_plot(history, "Representation similarity by epoch", "normalized rho");
  p.series.push_back(column(history, "rho_sem", "#1f77b4", &training::EpochRecord::rho_sem));
  p.series.push_back(column(history, "rho_emo", "#d62728", &training::EpochRecord::rho_emo));
  p.series.push_back(column(history, "rho_cross", "#2ca02c", &training::EpochRecord::rho_cross));
  return p;
}

PlotSpec loss_plot(const std::vector<training::EpochRecord>& history) {
  PlotSpec p = base_plot(history, "Training losses by epoch", "MAE");
  p.series.push_back(column(history, "loss_pose", "#1f77b4", &training::EpochRecord::loss_pose));
  p.series.push_back(column(history, "loss_emo", "#d62728", &training::EpochRecord::loss_emo));
  p.series.push_back(column(history, "loss_total", "#7f7f7f", &training::EpochRecord::loss_total));
  return p;
}

}  // namespace easl::cli
