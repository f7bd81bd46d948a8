#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace skelchaos {

/// Static line/scatter plot. The viewport is the bounding box of all series
/// with a small margin; nothing is interactive.
class SvgPlot {
 public:
  SvgPlot(std::string title, std::string x_label, std::string y_label);

  /// One <polyline> per call.
  void add_line(std::span<const double> xs, std::span<const double> ys, std::string color = "#1f77b4");
  /// One <circle> per point, grouped in a <g>.
  void add_scatter(std::span<const double> xs, std::span<const double> ys, std::string color = "#d62728",
                   double radius = 1.0);
  /// Plot log10(y); non-positive values are dropped.
  void set_log_y(bool on) { log_y_ = on; }

  std::string render() const;
  void save(const std::filesystem::path& path) const;

 private:
  struct Series {
    std::vector<double> xs, ys;
    std::string color;
    bool scatter = false;
    double radius = 1.0;
  };
  std::string title_, x_label_, y_label_;
  std::vector<Series> series_;
  bool log_y_ = false;
};

}  // namespace skelchaos
