#include "dset/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <limits>

namespace dset::svg {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 400.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 20.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 50.0;

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void pad() {
    if (!(lo <= hi)) {
      lo = 0.0;
      hi = 1.0;
    }
    if (hi == lo) {
      lo -= 0.5;
      hi += 0.5;
    }
    const double m = 0.05 * (hi - lo);
    lo -= m;
    hi += m;
  }
};

class Canvas {
 public:
  Canvas(const std::string& title, Range x, Range y) : x_(x), y_(y) {
    out_ = fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0f}\" height=\"{:.0f}\" viewBox=\"0 0 {:.0f} {:.0f}\">\n",
        kWidth, kHeight, kWidth, kHeight);
    out_ += fmt::format("<rect x=\"0\" y=\"0\" width=\"{:.0f}\" height=\"{:.0f}\" fill=\"white\"/>\n", kWidth, kHeight);
    out_ += fmt::format("<text x=\"{:.1f}\" y=\"24\" font-family=\"sans-serif\" font-size=\"15\" text-anchor=\"middle\">{}</text>\n",
                        kWidth / 2, escape(title));
  }

  double px(double x) const { return kLeft + (x - x_.lo) / (x_.hi - x_.lo) * (kWidth - kLeft - kRight); }
  double py(double y) const { return kHeight - kBottom - (y - y_.lo) / (y_.hi - y_.lo) * (kHeight - kTop - kBottom); }

  void axes(const std::string& x_label, const std::string& y_label, bool x_ticks = true) {
    const double x0 = kLeft, x1 = kWidth - kRight, y0 = kHeight - kBottom, y1 = kTop;
    out_ += fmt::format("<rect x=\"{:.1f}\" y=\"{:.1f}\" width=\"{:.1f}\" height=\"{:.1f}\" fill=\"none\" stroke=\"black\"/>\n",
                        x0, y1, x1 - x0, y0 - y1);
    for (int k = 0; k <= 4; ++k) {
      const double fy = y_.lo + (y_.hi - y_.lo) * k / 4.0;
      const double yy = py(fy);
      out_ += fmt::format("<line x1=\"{:.1f}\" y1=\"{:.1f}\" x2=\"{:.1f}\" y2=\"{:.1f}\" stroke=\"black\"/>\n", x0 - 4, yy, x0, yy);
      text(x0 - 6, yy + 4, fmt::format("{:.3g}", fy), "end", 11);
      if (x_ticks) {
        const double fx = x_.lo + (x_.hi - x_.lo) * k / 4.0;
        const double xx = px(fx);
        out_ += fmt::format("<line x1=\"{:.1f}\" y1=\"{:.1f}\" x2=\"{:.1f}\" y2=\"{:.1f}\" stroke=\"black\"/>\n", xx, y0, xx, y0 + 4);
        text(xx, y0 + 17, fmt::format("{:.3g}", fx), "middle", 11);
      }
    }
    text((x0 + x1) / 2, kHeight - 10, x_label, "middle", 12);
    out_ += fmt::format(
        "<text x=\"16\" y=\"{:.1f}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\" "
        "transform=\"rotate(-90 16 {:.1f})\">{}</text>\n",
        (y0 + y1) / 2, (y0 + y1) / 2, escape(y_label));
  }

  void text(double x, double y, const std::string& s, const char* anchor, int size) {
    out_ += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" font-family=\"sans-serif\" font-size=\"{}\" text-anchor=\"{}\">{}</text>\n",
                        x, y, size, anchor, escape(s));
  }

  void line(double x1, double y1, double x2, double y2, const char* color, double width = 1.0) {
    out_ += fmt::format("<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"{}\" stroke-width=\"{:.1f}\"/>\n",
                        px(x1), py(y1), px(x2), py(y2), color, width);
  }

  void polyline(const std::vector<double>& xs, const std::vector<double>& ys, const char* color) {
    out_ += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"0.8\" points=\"", color);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (!std::isfinite(ys[i])) continue;
      out_ += fmt::format("{}{:.2f},{:.2f}", i ? " " : "", px(xs[i]), py(ys[i]));
    }
    out_ += "\"/>\n";
  }

  void dot(double x, double y, const char* color, double r = 1.5) {
    out_ += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"{:.1f}\" fill=\"{}\" fill-opacity=\"0.5\"/>\n", px(x), py(y), r,
                        color);
  }

  void ellipse(double cx, double cy, double r, const char* color) {
    const double rx = std::abs(px(cx + r) - px(cx));
    const double ry = std::abs(py(cy + r) - py(cy));
    out_ += fmt::format("<ellipse cx=\"{:.2f}\" cy=\"{:.2f}\" rx=\"{:.2f}\" ry=\"{:.2f}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"/>\n",
                        px(cx), py(cy), rx, ry, color);
  }

  std::string finish() { return out_ + "</svg>\n"; }

 private:
  Range x_;
  Range y_;
  std::string out_;
};

}  // namespace

std::string trace_plot(const std::vector<std::vector<double>>& chains, const std::string& title,
                       const std::string& y_label) {
  Range x, y;
  std::size_t n = 0;
  for (const auto& c : chains) {
    n = std::max(n, c.size());
    for (double v : c) y.add(v);
  }
  x.lo = 0.0;
  x.hi = static_cast<double>(std::max<std::size_t>(n, 2) - 1);
  y.pad();
  Canvas canvas(title, x, y);
  canvas.axes("iteration", y_label);
  for (std::size_t k = 0; k < chains.size(); ++k) {
    std::vector<double> xs(chains[k].size());
    for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = static_cast<double>(i);
    canvas.polyline(xs, chains[k], kPalette[k % 6]);
  }
  return canvas.finish();
}

std::string acf_plot(const std::vector<double>& acf, const std::string& title) {
  Range x, y;
  x.lo = -0.5;
  x.hi = static_cast<double>(acf.size()) - 0.5;
  y.lo = -0.2;
  y.hi = 1.0;
  for (double v : acf) y.add(v);
  Canvas canvas(title, x, y);
  canvas.axes("lag", "autocorrelation");
  canvas.line(x.lo, 0.0, x.hi, 0.0, "gray");
  for (std::size_t k = 0; k < acf.size(); ++k) {
    const double lag = static_cast<double>(k);
    canvas.line(lag, 0.0, lag, acf[k], kPalette[0], 3.0);
  }
  return canvas.finish();
}

std::string scatter_plot(const std::vector<std::array<double, 2>>& points, const std::string& title,
                         const std::string& x_label, const std::string& y_label, const std::optional<Circle>& boundary) {
  Range x, y;
  for (const auto& p : points) {
    x.add(p[0]);
    y.add(p[1]);
  }
  if (boundary) {
    x.add(boundary->cx - boundary->r);
    x.add(boundary->cx + boundary->r);
    y.add(boundary->cy - boundary->r);
    y.add(boundary->cy + boundary->r);
  }
  x.pad();
  y.pad();
  Canvas canvas(title, x, y);
  canvas.axes(x_label, y_label);
  for (const auto& p : points) canvas.dot(p[0], p[1], kPalette[0]);
  if (boundary) canvas.ellipse(boundary->cx, boundary->cy, boundary->r, kPalette[1]);
  return canvas.finish();
}

std::string interval_ladder(const std::vector<Interval>& rows, const std::string& title) {
  Range x, y;
  for (const auto& r : rows) {
    x.add(r.lower);
    x.add(r.upper);
  }
  x.pad();
  y.lo = -0.5;
  y.hi = static_cast<double>(rows.size()) - 0.5;
  if (rows.empty()) y.hi = 0.5;
  Canvas canvas(title, x, y);
  canvas.axes("value", "", true);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const double level = static_cast<double>(rows.size() - 1 - k);
    canvas.line(rows[k].lower, level, rows[k].upper, level, kPalette[0], 2.0);
    canvas.dot(rows[k].middle, level, kPalette[1], 3.0);
    canvas.text(canvas.px(x.lo) + 4, canvas.py(level) - 5, rows[k].label, "start", 10);
  }
  return canvas.finish();
}

}  // namespace dset::svg
