#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "acbench/analysis.hpp"
#include "acbench/cli.hpp"

namespace acbench {

namespace {

constexpr double kWidth = 760, kHeight = 460;
constexpr double kLeft = 80, kRight = 190, kTop = 44, kBottom = 56;
const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

std::string fmt(double v, int digits = 2) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string tick_label(double v) {
  char buf[64];
  if (v != 0.0 && (std::abs(v) >= 1e5 || std::abs(v) < 1e-2)) {
    std::snprintf(buf, sizeof buf, "%.0e", v);
  } else {
    std::snprintf(buf, sizeof buf, "%g", v);
  }
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

struct Axis {
  double lo, hi;
  bool log;
  double pixel_lo, pixel_hi;

  double map(double v) const {
    const double a = log ? std::log10(lo) : lo, b = log ? std::log10(hi) : hi;
    const double x = log ? std::log10(v) : v;
    const double f = b > a ? (x - a) / (b - a) : 0.5;
    return pixel_lo + f * (pixel_hi - pixel_lo);
  }

  std::vector<double> ticks() const {
    std::vector<double> out;
    if (log) {
      for (double p = std::floor(std::log10(lo)); p <= std::ceil(std::log10(hi)); p += 1.0) {
        const double v = std::pow(10.0, p);
        if (v >= lo * (1 - 1e-9) && v <= hi * (1 + 1e-9)) out.push_back(v);
      }
      if (out.empty()) out = {lo, hi};
      return out;
    }
    const double span = hi - lo;
    if (!(span > 0)) return {lo};
    const double raw = span / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0})
      if (raw <= m * mag) {
        step = m * mag;
        break;
      }
    for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * step; v += step) out.push_back(v);
    return out;
  }
};

bool usable(double v, bool log) { return std::isfinite(v) && (!log || v > 0.0); }

}  // namespace

std::string render_svg(const std::vector<PlotSeries>& series, const PlotOptions& options) {
  if (series.empty()) throw std::invalid_argument("plot: no series");
  double x_lo = std::numeric_limits<double>::infinity(), x_hi = -x_lo;
  double y_lo = x_lo, y_hi = -x_lo;
  for (const auto& s : series) {
    if (s.t.empty() || s.t.size() != s.mean.size())
      throw std::invalid_argument("plot: series '" + s.label + "' is empty or ragged");
    for (std::size_t i = 0; i < s.t.size(); ++i) {
      if (!usable(s.t[i], options.loglog)) continue;
      x_lo = std::min(x_lo, s.t[i]);
      x_hi = std::max(x_hi, s.t[i]);
      for (double v : {s.mean[i], s.lo.empty() ? s.mean[i] : s.lo[i], s.hi.empty() ? s.mean[i] : s.hi[i]}) {
        if (!usable(v, options.loglog)) continue;
        y_lo = std::min(y_lo, v);
        y_hi = std::max(y_hi, v);
      }
    }
  }
  if (!std::isfinite(x_lo) || !std::isfinite(y_lo))
    throw std::invalid_argument("plot: nothing drawable (log axes need positive values)");
  if (y_hi == y_lo) {
    const double pad = y_lo == 0.0 ? 1.0 : std::abs(y_lo) * 0.1;
    y_hi += pad;
    if (!options.loglog) y_lo -= pad;
  }
  if (x_hi == x_lo) x_hi = x_lo + 1.0;

  const Axis xa{x_lo, x_hi, options.loglog, kLeft, kWidth - kRight};
  const Axis ya{y_lo, y_hi, options.loglog, kHeight - kBottom, kTop};

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
    << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << fmt(kWidth / 2) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">"
    << escape(options.title) << "</text>\n";

  // Frame, grid and ticks.
  o << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << kWidth - kLeft - kRight
    << "\" height=\"" << kHeight - kTop - kBottom << "\" fill=\"none\" stroke=\"#333\"/>\n";
  for (double v : xa.ticks()) {
    const double x = xa.map(v);
    o << "<line x1=\"" << fmt(x) << "\" y1=\"" << kTop << "\" x2=\"" << fmt(x) << "\" y2=\""
      << kHeight - kBottom << "\" stroke=\"#ddd\"/>\n";
    o << "<text x=\"" << fmt(x) << "\" y=\"" << kHeight - kBottom + 16
      << "\" text-anchor=\"middle\">" << tick_label(v) << "</text>\n";
  }
  for (double v : ya.ticks()) {
    const double y = ya.map(v);
    o << "<line x1=\"" << kLeft << "\" y1=\"" << fmt(y) << "\" x2=\"" << kWidth - kRight
      << "\" y2=\"" << fmt(y) << "\" stroke=\"#ddd\"/>\n";
    o << "<text x=\"" << kLeft - 6 << "\" y=\"" << fmt(y + 4) << "\" text-anchor=\"end\">"
      << tick_label(v) << "</text>\n";
  }
  o << "<text x=\"" << fmt((kLeft + kWidth - kRight) / 2) << "\" y=\"" << kHeight - 14
    << "\" text-anchor=\"middle\">episode" << (options.loglog ? " (log)" : "") << "</text>\n";
  o << "<text transform=\"translate(18," << fmt((kTop + kHeight - kBottom) / 2)
    << ") rotate(-90)\" text-anchor=\"middle\">" << escape(options.y_label)
    << (options.loglog ? " (log)" : "") << "</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = kPalette[k % std::size(kPalette)];
    if (!s.lo.empty() && !s.hi.empty()) {
      std::ostringstream pts;
      std::size_t n = 0;
      for (std::size_t i = 0; i < s.t.size(); ++i) {
        if (!usable(s.t[i], options.loglog) || !usable(s.hi[i], options.loglog)) continue;
        pts << fmt(xa.map(s.t[i])) << ',' << fmt(ya.map(s.hi[i])) << ' ';
        ++n;
      }
      for (std::size_t i = s.t.size(); i-- > 0;) {
        if (!usable(s.t[i], options.loglog) || !usable(s.lo[i], options.loglog)) continue;
        pts << fmt(xa.map(s.t[i])) << ',' << fmt(ya.map(s.lo[i])) << ' ';
        ++n;
      }
      if (n > 2)
        o << "<polygon points=\"" << pts.str() << "\" fill=\"" << color
          << "\" fill-opacity=\"0.15\" stroke=\"none\"/>\n";
    }
    o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.8\" points=\"";
    for (std::size_t i = 0; i < s.t.size(); ++i) {
      if (!usable(s.t[i], options.loglog) || !usable(s.mean[i], options.loglog)) continue;
      o << fmt(xa.map(s.t[i])) << ',' << fmt(ya.map(s.mean[i])) << ' ';
    }
    o << "\"/>\n";

    std::string label = s.label;
    if (options.annotate_slope) {
      const ExponentFit fit = exponent_fit(s.mean);
      label += fit.flagged ? " (slope n/a)" : " (slope " + fmt(fit.slope) + ")";
    }
    const double ly = kTop + 14 + 20 * static_cast<double>(k);
    const double lx = kWidth - kRight + 14;
    o << "<line x1=\"" << fmt(lx) << "\" y1=\"" << fmt(ly - 4) << "\" x2=\"" << fmt(lx + 22)
      << "\" y2=\"" << fmt(ly - 4) << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    o << "<text x=\"" << fmt(lx + 28) << "\" y=\"" << fmt(ly) << "\">" << escape(label) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

}  // namespace acbench
