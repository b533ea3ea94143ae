#pragma once

// Minimal line-plot SVG writer. Output depends only on the inputs, so equal
// histories give byte-identical files.

#include <string>
#include <vector>

#include "easl/training.hpp"

namespace easl::cli {

struct Series {
  std::string name;
  std::string color;
  std::vector<double> y;
};

struct PlotSpec {
  std::string title;
  std::string y_label;
  std::vector<double> x;
  std::vector<int> phase;  // per point; runs of equal labels become shaded regions
  std::vector<Series> series;
};

std::string render_svg(const PlotSpec& spec);

PlotSpec similarity_plot(const std::vector<training::EpochRecord>& history);
PlotSpec loss_plot(const std::vector<training::EpochRecord>& history);

}  // namespace easl::cli
