#include "skelchaos/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include <fmt/format.h>

#include "skelchaos/errors.hpp"

namespace skelchaos {

namespace {

constexpr double width = 640.0;
constexpr double height = 480.0;
constexpr double margin_left = 70.0;
constexpr double margin_right = 20.0;
constexpr double margin_top = 40.0;
constexpr double margin_bottom = 50.0;

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

}  // namespace

SvgPlot::SvgPlot(std::string title, std::string x_label, std::string y_label)
    : title_(std::move(title)), x_label_(std::move(x_label)), y_label_(std::move(y_label)) {}

void SvgPlot::add_line(std::span<const double> xs, std::span<const double> ys, std::string color) {
  if (xs.size() != ys.size()) throw InputError("svg: x and y lengths differ");
  series_.push_back({{xs.begin(), xs.end()}, {ys.begin(), ys.end()}, std::move(color), false, 1.0});
}

void SvgPlot::add_scatter(std::span<const double> xs, std::span<const double> ys, std::string color, double radius) {
  if (xs.size() != ys.size()) throw InputError("svg: x and y lengths differ");
  series_.push_back({{xs.begin(), xs.end()}, {ys.begin(), ys.end()}, std::move(color), true, radius});
}

std::string SvgPlot::render() const {
  auto ty = [&](double y) { return log_y_ ? (y > 0.0 ? std::log10(y) : std::numeric_limits<double>::quiet_NaN()) : y; };

  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series_) {
    for (std::size_t i = 0; i < s.xs.size(); ++i) {
      const double y = ty(s.ys[i]);
      if (!std::isfinite(s.xs[i]) || !std::isfinite(y)) continue;
      x0 = std::min(x0, s.xs[i]);
      x1 = std::max(x1, s.xs[i]);
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    }
  }
  if (!std::isfinite(x0)) x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;
  if (x1 - x0 <= 0.0) x0 -= 0.5, x1 += 0.5;
  if (y1 - y0 <= 0.0) y0 -= 0.5, y1 += 0.5;
  const double padx = 0.03 * (x1 - x0), pady = 0.05 * (y1 - y0);
  x0 -= padx, x1 += padx, y0 -= pady, y1 += pady;

  const double pw = width - margin_left - margin_right;
  const double ph = height - margin_top - margin_bottom;
  auto px = [&](double x) { return margin_left + (x - x0) / (x1 - x0) * pw; };
  auto py = [&](double y) { return margin_top + (y1 - y) / (y1 - y0) * ph; };

  std::string out = fmt::format(
      "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\">\n"
      "<rect x=\"0\" y=\"0\" width=\"{0}\" height=\"{1}\" fill=\"white\"/>\n"
      "<rect x=\"{2}\" y=\"{3}\" width=\"{4}\" height=\"{5}\" fill=\"none\" stroke=\"black\"/>\n",
      width, height, margin_left, margin_top, pw, ph);
  out += fmt::format("<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">{}</text>\n", width / 2,
                     escape(title_));
  out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"13\">{}</text>\n",
                     margin_left + pw / 2, height - 10, escape(x_label_));
  out += fmt::format(
      "<text x=\"16\" y=\"{0}\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 16 {0})\">{1}</text>\n",
      margin_top + ph / 2, escape(log_y_ ? "log10 " + y_label_ : y_label_));
  for (int i = 0; i <= 4; ++i) {
    const double fx = x0 + (x1 - x0) * i / 4.0;
    const double fy = y0 + (y1 - y0) * i / 4.0;
    out += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\" font-size=\"10\">{:.4g}</text>\n", px(fx),
                       margin_top + ph + 14, fx);
    out += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"end\" font-size=\"10\">{:.4g}</text>\n",
                       margin_left - 4, py(fy) + 3, fy);
  }

  for (const auto& s : series_) {
    if (s.scatter) {
      out += fmt::format("<g fill=\"{}\">\n", escape(s.color));
      for (std::size_t i = 0; i < s.xs.size(); ++i) {
        const double y = ty(s.ys[i]);
        if (!std::isfinite(s.xs[i]) || !std::isfinite(y)) continue;
        out += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"{}\"/>\n", px(s.xs[i]), py(y), s.radius);
      }
      out += "</g>\n";
    } else {
      out += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1\" points=\"", escape(s.color));
      bool first = true;
      for (std::size_t i = 0; i < s.xs.size(); ++i) {
        const double y = ty(s.ys[i]);
        if (!std::isfinite(s.xs[i]) || !std::isfinite(y)) continue;
        out += fmt::format("{}{:.2f},{:.2f}", first ? "" : " ", px(s.xs[i]), py(y));
        first = false;
      }
      out += "\"/>\n";
    }
  }
  out += "</svg>\n";
  return out;
}

void SvgPlot::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw InputError(fmt::format("cannot write {}", path.string()));
  out << render();
}

}  // namespace skelchaos
