#include "cli/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "ehap/error.hpp"

namespace ehap::cli {

namespace {

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string escape(const std::string& s) {
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

double nice_step(double range) {
  const double raw = range / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double r = raw / mag;
  return mag * (r < 1.5 ? 1.0 : r < 3.5 ? 2.0 : r < 7.5 ? 5.0 : 10.0);
}

struct Axis {
  double lo, hi, step;
};

Axis make_axis(double lo, double hi) {
  if (!(hi > lo)) {
    const double pad = lo == 0.0 ? 1.0 : 0.1 * std::abs(lo);
    lo -= pad;
    hi += pad;
  }
  const double step = nice_step(hi - lo);
  return {std::floor(lo / step) * step, std::ceil(hi / step) * step, step};
}

}  // namespace

std::vector<std::size_t> decimate(std::size_t n, std::size_t max_points) {
  std::vector<std::size_t> idx;
  if (n == 0) return idx;
  const std::size_t stride = max_points < 2 ? n : (n + max_points - 2) / (max_points - 1);
  for (std::size_t i = 0; i < n; i += std::max<std::size_t>(stride, 1)) idx.push_back(i);
  if (idx.back() != n - 1) idx.push_back(n - 1);
  return idx;
}

std::string render_svg(const LinePlot& plot) {
  double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo, ylo = xlo, yhi = -xlo;
  for (const auto& s : plot.series) {
    if (s.x.size() != s.y.size()) throw ValidationError("plot series '" + s.label + "' has mismatched x/y");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) {
        throw NumericError("plot series '" + s.label + "' contains non-finite values");
      }
      xlo = std::min(xlo, s.x[i]);
      xhi = std::max(xhi, s.x[i]);
      ylo = std::min(ylo, s.y[i]);
      yhi = std::max(yhi, s.y[i]);
    }
  }
  if (!std::isfinite(xlo)) throw ValidationError("plot has no data");
  const Axis ax = make_axis(xlo, xhi), ay = make_axis(ylo, yhi);

  const double left = 75, right = 20, top = 40, bottom = 55;
  const double pw = plot.width - left - right, ph = plot.height - top - bottom;
  auto px = [&](double x) { return left + (x - ax.lo) / (ax.hi - ax.lo) * pw; };
  auto py = [&](double y) { return top + (ay.hi - y) / (ay.hi - ay.lo) * ph; };

  std::ostringstream o;
  o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
    << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << plot.width
    << "\" height=\"" << plot.height << "\" viewBox=\"0 0 " << plot.width << ' ' << plot.height
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
    << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    << "<text x=\"" << plot.width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
    << escape(plot.title) << "</text>\n";

  o << "<g stroke=\"#dddddd\" stroke-width=\"1\">\n";
  for (double x = ax.lo; x <= ax.hi + 1e-9 * ax.step; x += ax.step) {
    o << "<line x1=\"" << fmt("%.2f", px(x)) << "\" y1=\"" << top << "\" x2=\"" << fmt("%.2f", px(x))
      << "\" y2=\"" << top + ph << "\"/>\n";
  }
  for (double y = ay.lo; y <= ay.hi + 1e-9 * ay.step; y += ay.step) {
    o << "<line x1=\"" << left << "\" y1=\"" << fmt("%.2f", py(y)) << "\" x2=\"" << left + pw
      << "\" y2=\"" << fmt("%.2f", py(y)) << "\"/>\n";
  }
  o << "</g>\n";
  o << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double x = ax.lo; x <= ax.hi + 1e-9 * ax.step; x += ax.step) {
    o << "<text x=\"" << fmt("%.2f", px(x)) << "\" y=\"" << top + ph + 18
      << "\" text-anchor=\"middle\">" << fmt("%g", std::abs(x) < 1e-12 * ax.step ? 0.0 : x)
      << "</text>\n";
  }
  for (double y = ay.lo; y <= ay.hi + 1e-9 * ay.step; y += ay.step) {
    o << "<text x=\"" << left - 8 << "\" y=\"" << fmt("%.2f", py(y) + 4)
      << "\" text-anchor=\"end\">" << fmt("%g", std::abs(y) < 1e-12 * ay.step ? 0.0 : y)
      << "</text>\n";
  }
  o << "<text x=\"" << left + pw / 2 << "\" y=\"" << plot.height - 12 << "\" text-anchor=\"middle\">"
    << escape(plot.x_label) << "</text>\n"
    << "<text x=\"18\" y=\"" << top + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
    << top + ph / 2 << ")\">" << escape(plot.y_label) << "</text>\n";

  for (const auto& s : plot.series) {
    o << "<polyline fill=\"none\" stroke=\"" << escape(s.color) << "\" stroke-width=\"1.5\""
      << (s.dashed ? " stroke-dasharray=\"6 4\"" : "") << " points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      o << (i ? " " : "") << fmt("%.2f", px(s.x[i])) << ',' << fmt("%.2f", py(s.y[i]));
    }
    o << "\"/>\n";
  }
  double ly = top + 16;
  for (const auto& s : plot.series) {
    const double lx = left + pw - 190;
    o << "<line x1=\"" << lx << "\" y1=\"" << ly - 4 << "\" x2=\"" << lx + 30 << "\" y2=\"" << ly - 4
      << "\" stroke=\"" << escape(s.color) << "\" stroke-width=\"2\""
      << (s.dashed ? " stroke-dasharray=\"6 4\"" : "") << "/>\n"
      << "<text x=\"" << lx + 38 << "\" y=\"" << ly << "\">" << escape(s.label) << "</text>\n";
    ly += 18;
  }
  o << "</svg>\n";
  return o.str();
}

}  // namespace ehap::cli
