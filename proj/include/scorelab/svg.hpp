#pragma once

#include <string>
#include <vector>

namespace scorelab::svg {

struct Series {
  std::string label;
  std::vector<double> x, y;
  std::string color = "#1f77b4";
  bool scatter = false;  // circles instead of a polyline
};

// Vertical marker line with a label (e.g. an onset step).
struct VLine {
  double x = 0.0;
  std::string label;
  std::string color = "#d62728";
};

// Horizontal reference line (e.g. the smoothness constant).
struct HLine {
  double y = 0.0;
  std::string label;
  std::string color = "#7f7f7f";
};

struct Figure {
  std::string title;
  std::string xlabel, ylabel;
  std::vector<Series> series;
  std::vector<VLine> vlines;
  std::vector<HLine> hlines;
  std::string comment;  // embedded verbatim as an XML comment (config dump)
};

// Hand-emitted polyline plot; byte-deterministic for identical inputs.
std::string render(const Figure& fig);

void write_file(const std::string& path, const std::string& content);

}  // namespace scorelab::svg
