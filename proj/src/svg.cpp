#include "scorelab/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace scorelab::svg {

namespace {

constexpr double kWidth = 840, kHeight = 520;
constexpr double kLeft = 70, kRight = 20, kTop = 40, kBottom = 50;

std::string num(double v, const char* fmt = "%.6g") {
  char buf[40];
  std::snprintf(buf, sizeof(buf), fmt, v);
  return buf;
}

std::string escape_comment(std::string s) {
  // "--" may not appear inside an XML comment.
  std::size_t pos = 0;
  while ((pos = s.find("--", pos)) != std::string::npos) s.replace(pos, 2, "- -");
  return s;
}

std::string escape_text(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '&') out += "&amp;";
    else if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else out += c;
  }
  return out;
}

}  // namespace

std::string render(const Figure& fig) {
  double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo;
  double ylo = xlo, yhi = -xlo;
  for (const auto& s : fig.series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      xlo = std::min(xlo, s.x[i]);
      xhi = std::max(xhi, s.x[i]);
      ylo = std::min(ylo, s.y[i]);
      yhi = std::max(yhi, s.y[i]);
    }
  for (const auto& h : fig.hlines) {
    ylo = std::min(ylo, h.y);
    yhi = std::max(yhi, h.y);
  }
  if (!(xhi > xlo)) {
    xlo -= 0.5;
    xhi += 0.5;
  }
  if (!(yhi > ylo)) {
    ylo -= 0.5;
    yhi += 0.5;
  }
  const double ypad = 0.05 * (yhi - ylo);
  ylo -= ypad;
  yhi += ypad;

  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  const auto px = [&](double x) { return kLeft + (x - xlo) / (xhi - xlo) * pw; };
  const auto py = [&](double y) { return kTop + (1.0 - (y - ylo) / (yhi - ylo)) * ph; };

  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" +
       num(kHeight) + "\" viewBox=\"0 0 " + num(kWidth) + " " + num(kHeight) + "\">\n";
  if (!fig.comment.empty()) s += "<!-- " + escape_comment(fig.comment) + " -->\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "<text x=\"" + num(kWidth / 2) + "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">" +
       escape_text(fig.title) + "</text>\n";

  // frame and ticks
  s += "<rect x=\"" + num(kLeft) + "\" y=\"" + num(kTop) + "\" width=\"" + num(pw) + "\" height=\"" +
       num(ph) + "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double tx = xlo + i * (xhi - xlo) / 5;
    const double ty = ylo + i * (yhi - ylo) / 5;
    s += "<line x1=\"" + num(px(tx)) + "\" y1=\"" + num(kTop + ph) + "\" x2=\"" + num(px(tx)) +
         "\" y2=\"" + num(kTop + ph + 5) + "\" stroke=\"black\"/>\n";
    s += "<text x=\"" + num(px(tx)) + "\" y=\"" + num(kTop + ph + 18) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" + num(tx, "%.4g") +
         "</text>\n";
    s += "<line x1=\"" + num(kLeft - 5) + "\" y1=\"" + num(py(ty)) + "\" x2=\"" + num(kLeft) +
         "\" y2=\"" + num(py(ty)) + "\" stroke=\"black\"/>\n";
    s += "<text x=\"" + num(kLeft - 8) + "\" y=\"" + num(py(ty) + 4) +
         "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" + num(ty, "%.4g") +
         "</text>\n";
  }
  s += "<text x=\"" + num(kLeft + pw / 2) + "\" y=\"" + num(kHeight - 10) +
       "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" +
       escape_text(fig.xlabel) + "</text>\n";
  s += "<text x=\"16\" y=\"" + num(kTop + ph / 2) +
       "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" transform=\"rotate(-90 16 " +
       num(kTop + ph / 2) + ")\">" + escape_text(fig.ylabel) + "</text>\n";

  for (const auto& h : fig.hlines) {
    s += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(py(h.y)) + "\" x2=\"" + num(kLeft + pw) +
         "\" y2=\"" + num(py(h.y)) + "\" stroke=\"" + h.color + "\" stroke-dasharray=\"6 4\"/>\n";
    if (!h.label.empty())
      s += "<text x=\"" + num(kLeft + 6) + "\" y=\"" + num(py(h.y) - 5) +
           "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"" + h.color + "\">" +
           escape_text(h.label) + "</text>\n";
  }
  for (const auto& v : fig.vlines) {
    s += "<line x1=\"" + num(px(v.x)) + "\" y1=\"" + num(kTop) + "\" x2=\"" + num(px(v.x)) +
         "\" y2=\"" + num(kTop + ph) + "\" stroke=\"" + v.color + "\" stroke-dasharray=\"4 4\"/>\n";
    if (!v.label.empty())
      s += "<text x=\"" + num(px(v.x) + 4) + "\" y=\"" + num(kTop + 14) +
           "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"" + v.color + "\">" +
           escape_text(v.label) + "</text>\n";
  }

  for (const auto& series : fig.series) {
    if (series.scatter) {
      for (std::size_t i = 0; i < series.x.size(); ++i)
        s += "<circle cx=\"" + num(px(series.x[i])) + "\" cy=\"" + num(py(series.y[i])) +
             "\" r=\"4\" fill=\"" + series.color + "\"/>\n";
      continue;
    }
    s += "<polyline fill=\"none\" stroke=\"" + series.color + "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < series.x.size(); ++i) {
      if (i) s += ' ';
      s += num(px(series.x[i])) + "," + num(py(series.y[i]));
    }
    s += "\"/>\n";
  }

  double ly = kTop + 14;
  for (const auto& series : fig.series) {
    const double lx = kLeft + pw - 170;
    s += "<line x1=\"" + num(lx) + "\" y1=\"" + num(ly - 4) + "\" x2=\"" + num(lx + 24) +
         "\" y2=\"" + num(ly - 4) + "\" stroke=\"" + series.color + "\" stroke-width=\"2\"/>\n";
    s += "<text x=\"" + num(lx + 30) + "\" y=\"" + num(ly) +
         "\" font-family=\"sans-serif\" font-size=\"12\">" + escape_text(series.label) + "</text>\n";
    ly += 16;
  }

  s += "</svg>\n";
  return s;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f << content;
}

}  // namespace scorelab::svg
