#include "svg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace shockgp::svg {

namespace {

constexpr double kW = 420, kH = 300, kPad = 48;

struct Box {
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  void add(double x, double y) {
    if (!std::isfinite(x) || !std::isfinite(y)) return;
    x0 = std::min(x0, x);
    x1 = std::max(x1, x);
    y0 = std::min(y0, y);
    y1 = std::max(y1, y);
  }
  void pad() {
    if (!(x1 > x0)) { x0 -= 1; x1 += 1; }
    if (!(y1 > y0)) { y0 -= 1; y1 += 1; }
    const double dy = 0.05 * (y1 - y0);
    y0 -= dy;
    y1 += dy;
  }
};

std::string esc(const std::string& s) {
  std::string o;
  for (char c : s) {
    if (c == '<') o += "&lt;";
    else if (c == '>') o += "&gt;";
    else if (c == '&') o += "&amp;";
    else o += c;
  }
  return o;
}

void panel(std::ostringstream& os, const Panel& p, double ox, double oy) {
  Box b;
  for (const auto& s : p.series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      b.add(s.x[i], s.y[i]);
      if (!s.lo.empty()) {
        b.add(s.x[i], s.lo[i]);
        b.add(s.x[i], s.hi[i]);
      }
    }
  for (const auto& e : p.ellipses) {
    const double r = std::max(e.rx, e.ry);
    b.add(e.cx - r, e.cy - r);
    b.add(e.cx + r, e.cy + r);
  }
  b.pad();
  const double pw = kW - 2 * kPad, ph = kH - 2 * kPad;
  auto X = [&](double x) { return ox + kPad + (x - b.x0) / (b.x1 - b.x0) * pw; };
  auto Y = [&](double y) { return oy + kPad + (b.y1 - y) / (b.y1 - b.y0) * ph; };

  os << "<rect x='" << ox + kPad << "' y='" << oy + kPad << "' width='" << pw << "' height='" << ph
     << "' fill='none' stroke='#444'/>\n";
  os << "<text x='" << ox + kW / 2 << "' y='" << oy + kPad - 14 << "' text-anchor='middle' font-size='13'>"
     << esc(p.title) << "</text>\n";
  os << "<text x='" << ox + kW / 2 << "' y='" << oy + kH - 10 << "' text-anchor='middle' font-size='11'>"
     << esc(p.xlabel) << "</text>\n";
  os << "<text x='" << ox + 12 << "' y='" << oy + kH / 2 << "' font-size='11' transform='rotate(-90 "
     << ox + 12 << ' ' << oy + kH / 2 << ")' text-anchor='middle'>" << esc(p.ylabel) << "</text>\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = b.x0 + (b.x1 - b.x0) * k / 4.0, yv = b.y0 + (b.y1 - b.y0) * k / 4.0;
    os << "<text x='" << X(xv) << "' y='" << oy + kPad + ph + 14 << "' font-size='9' text-anchor='middle'>"
       << xv << "</text>\n";
    os << "<text x='" << ox + kPad - 4 << "' y='" << Y(yv) + 3 << "' font-size='9' text-anchor='end'>"
       << yv << "</text>\n";
  }

  for (const auto& s : p.series) {
    if (s.x.empty()) continue;
    if (!s.lo.empty()) {
      os << "<polygon fill='" << s.color << "' fill-opacity='0.2' stroke='none' points='";
      for (std::size_t i = 0; i < s.x.size(); ++i) os << X(s.x[i]) << ',' << Y(s.hi[i]) << ' ';
      for (std::size_t i = s.x.size(); i-- > 0;) os << X(s.x[i]) << ',' << Y(s.lo[i]) << ' ';
      os << "'/>\n";
    }
    os << "<polyline fill='none' stroke='" << s.color << "' stroke-width='1.5' points='";
    for (std::size_t i = 0; i < s.x.size(); ++i) os << X(s.x[i]) << ',' << Y(s.y[i]) << ' ';
    os << "'/>\n";
  }
  const double sx = pw / (b.x1 - b.x0), sy = ph / (b.y1 - b.y0);
  for (const auto& e : p.ellipses) {
    // Sample the contour; axis scales differ so a native <ellipse> would be wrong.
    os << "<polygon fill='none' stroke='" << e.color << "' stroke-width='1' points='";
    for (int k = 0; k < 48; ++k) {
      const double t = 2 * std::numbers::pi * k / 48;
      const double ux = e.rx * std::cos(t), uy = e.ry * std::sin(t);
      const double x = e.cx + ux * std::cos(e.angle_rad) - uy * std::sin(e.angle_rad);
      const double y = e.cy + ux * std::sin(e.angle_rad) + uy * std::cos(e.angle_rad);
      os << X(x) << ',' << Y(y) << ' ';
    }
    os << "'/>\n";
  }
  (void)sx;
  (void)sy;

  double ly = oy + kPad + 12;
  for (const auto& s : p.series) {
    if (s.label.empty()) continue;
    os << "<text x='" << ox + kPad + 6 << "' y='" << ly << "' font-size='10' fill='" << s.color << "'>"
       << esc(s.label) << "</text>\n";
    ly += 12;
  }
}

}  // namespace

std::string render(const std::vector<Panel>& panels, int cols) {
  cols = std::max(1, cols);
  const int rows = (static_cast<int>(panels.size()) + cols - 1) / cols;
  std::ostringstream os;
  os.precision(4);
  os << "<svg xmlns='http://www.w3.org/2000/svg' width='" << kW * cols << "' height='" << kH * rows
     << "' font-family='sans-serif'>\n<rect width='100%' height='100%' fill='white'/>\n";
  for (std::size_t i = 0; i < panels.size(); ++i) {
    panel(os, panels[i], kW * static_cast<double>(i % cols), kH * static_cast<double>(i / cols));
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace shockgp::svg
