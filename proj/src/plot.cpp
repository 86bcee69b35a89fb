#include "dpps/plot.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace dpps {

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"};

std::string escape_xml(const std::string& s) {
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

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

double nice_step(double span) {
  if (!(span > 0.0)) return 1.0;
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (m * mag >= raw) return m * mag;
  return 10.0 * mag;
}

// Maps data coordinates into the plotting rectangle.
struct Frame {
  double x0, x1, y0, y1;
  double left = 70, right = 20, top = 40, bottom = 55;
  int width = 800;
  int height = 500;

  double px(double x) const { return left + (x - x0) / (x1 - x0) * (width - left - right); }
  double py(double y) const { return height - bottom - (y - y0) / (y1 - y0) * (height - top - bottom); }
};

void axes(std::ostringstream& os, const Frame& f, const PlotStyle& style) {
  os << "<rect x=\"" << f.left << "\" y=\"" << f.top << "\" width=\"" << (f.width - f.left - f.right)
     << "\" height=\"" << (f.height - f.top - f.bottom) << "\" fill=\"none\" stroke=\"#333\"/>\n";
  const double ystep = nice_step(f.y1 - f.y0);
  os << "<g class=\"y-axis\" font-size=\"11\" text-anchor=\"end\">\n";
  for (double y = f.y0; y <= f.y1 + 1e-9 * ystep; y += ystep) {
    os << "<line x1=\"" << f.left - 4 << "\" x2=\"" << f.width - f.right << "\" y1=\"" << fmt(f.py(y))
       << "\" y2=\"" << fmt(f.py(y)) << "\" stroke=\"#ddd\"/>";
    os << "<text x=\"" << f.left - 6 << "\" y=\"" << fmt(f.py(y) + 4) << "\">" << fmt(y) << "</text>\n";
  }
  os << "</g>\n";
  const double xstep = nice_step(f.x1 - f.x0);
  os << "<g class=\"x-axis\" font-size=\"11\" text-anchor=\"middle\">\n";
  for (double x = std::ceil(f.x0 / xstep) * xstep; x <= f.x1 + 1e-9 * xstep; x += xstep)
    os << "<text x=\"" << fmt(f.px(x)) << "\" y=\"" << f.height - f.bottom + 16 << "\">" << fmt(x) << "</text>\n";
  os << "</g>\n";
  if (!style.title.empty())
    os << "<text x=\"" << f.width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
       << escape_xml(style.title) << "</text>\n";
  if (!style.x_label.empty())
    os << "<text x=\"" << (f.left + f.width - f.right) / 2 << "\" y=\"" << f.height - 12
       << "\" text-anchor=\"middle\" font-size=\"12\">" << escape_xml(style.x_label) << "</text>\n";
  if (!style.y_label.empty())
    os << "<text transform=\"translate(16," << (f.top + f.height - f.bottom) / 2
       << ") rotate(-90)\" text-anchor=\"middle\" font-size=\"12\">" << escape_xml(style.y_label) << "</text>\n";
}

std::string polyline(const Frame& f, std::span<const double> xs, std::span<const double> ys) {
  std::ostringstream os;
  for (std::size_t i = 0; i < xs.size(); ++i) os << (i ? " L" : "M") << fmt(f.px(xs[i])) << ',' << fmt(f.py(ys[i]));
  return os.str();
}

std::string band(const Frame& f, std::span<const double> xs, std::span<const double> lo, std::span<const double> hi) {
  std::ostringstream os;
  os << polyline(f, xs, hi);
  for (std::size_t i = xs.size(); i-- > 0;) os << " L" << fmt(f.px(xs[i])) << ',' << fmt(f.py(lo[i]));
  os << " Z";
  return os.str();
}

void open_svg(std::ostringstream& os, const Frame& f) {
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << f.width << "\" height=\"" << f.height
     << "\" viewBox=\"0 0 " << f.width << ' ' << f.height << "\" font-family=\"sans-serif\" data-x-max=\""
     << fmt(f.x1) << "\" data-y-max=\"" << fmt(f.y1) << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

}  // namespace

double nice_axis_max(double value) {
  if (!(value > 0.0)) return 1.0;
  const double step = nice_step(value);
  return std::ceil(value / step - 1e-12) * step;
}

std::string render_regret_svg(const std::vector<AgentSummary>& summaries, const PlotStyle& style) {
  if (summaries.empty()) throw std::invalid_argument("nothing to plot: summary has no agents");
  double x_max = 1.0;
  double y_top = 0.0;
  for (const auto& s : summaries) {
    if (s.t.empty() || s.mean.size() != s.t.size() || s.q_lo.size() != s.t.size() || s.q_hi.size() != s.t.size())
      throw std::invalid_argument("agent '" + s.name + "' has inconsistent summary arrays");
    x_max = std::max(x_max, static_cast<double>(s.t.back()));
    for (std::size_t i = 0; i < s.t.size(); ++i) y_top = std::max({y_top, s.q_hi[i], s.mean[i]});
  }
  Frame f{0.0, x_max, 0.0, nice_axis_max(y_top)};
  f.width = style.width;
  f.height = style.height;
  PlotStyle st = style;
  if (st.x_label.empty()) st.x_label = "round t";
  if (st.y_label.empty()) st.y_label = "cumulative regret";

  std::ostringstream os;
  open_svg(os, f);
  axes(os, f, st);
  for (std::size_t a = 0; a < summaries.size(); ++a) {
    const auto& s = summaries[a];
    const char* color = kPalette[a % std::size(kPalette)];
    std::vector<double> xs(s.t.begin(), s.t.end());
    os << "<g class=\"agent\" data-agent=\"" << escape_xml(s.name) << "\">\n";
    os << "<path class=\"band\" d=\"" << band(f, xs, s.q_lo, s.q_hi) << "\" fill=\"" << color
       << "\" fill-opacity=\"0.18\" stroke=\"none\"/>\n";
    os << "<path class=\"mean\" d=\"" << polyline(f, xs, s.mean) << "\" fill=\"none\" stroke=\"" << color
       << "\" stroke-width=\"2\"/>\n";
    os << "</g>\n";
  }
  os << "<g class=\"legend\" font-size=\"12\">\n";
  for (std::size_t a = 0; a < summaries.size(); ++a) {
    const double y = f.top + 14 + 18.0 * static_cast<double>(a);
    const char* color = kPalette[a % std::size(kPalette)];
    os << "<rect x=\"" << f.left + 12 << "\" y=\"" << y - 9 << "\" width=\"14\" height=\"10\" fill=\"" << color
       << "\"/><text class=\"legend-entry\" x=\"" << f.left + 32 << "\" y=\"" << y << "\">"
       << escape_xml(summaries[a].name) << "</text>\n";
  }
  os << "</g>\n</svg>\n";
  return os.str();
}

std::string render_cdf_svg(const CdfEnvelopeSeries& series, const PlotStyle& style) {
  const std::size_t n = series.grid.size();
  if (n < 2) throw std::invalid_argument("CDF plot needs at least two grid points");
  if (series.lower.size() != n || series.median.size() != n || series.upper.size() != n)
    throw std::invalid_argument("CDF plot arrays differ in length");
  Frame f{series.grid.front(), series.grid.back(), 0.0, 1.0};
  if (!(f.x1 > f.x0)) f.x1 = f.x0 + 1.0;
  f.width = style.width;
  f.height = style.height;
  PlotStyle st = style;
  if (st.x_label.empty()) st.x_label = "x";
  if (st.y_label.empty()) st.y_label = "F(x)";

  std::ostringstream os;
  open_svg(os, f);
  axes(os, f, st);
  os << "<path class=\"band\" d=\"" << band(f, series.grid, series.lower, series.upper)
     << "\" fill=\"#1f77b4\" fill-opacity=\"0.25\" stroke=\"none\"/>\n";
  os << "<path class=\"median\" d=\"" << polyline(f, series.grid, series.median)
     << "\" fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\"/>\n";
  if (!series.observations.empty()) {
    os << "<g class=\"rug\" stroke=\"#333\" stroke-opacity=\"0.5\">\n";
    const double base = f.height - f.bottom;
    for (double x : series.observations) {
      if (x < f.x0 || x > f.x1) continue;
      os << "<line x1=\"" << fmt(f.px(x)) << "\" x2=\"" << fmt(f.px(x)) << "\" y1=\"" << base << "\" y2=\""
         << base - 8 << "\"/>\n";
    }
    os << "</g>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace dpps
