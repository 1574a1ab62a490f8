#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace dset::svg {

/// Line series per chain against iteration.
std::string trace_plot(const std::vector<std::vector<double>>& chains, const std::string& title,
                       const std::string& y_label);

/// Bars at lags 0..acf.size()-1.
std::string acf_plot(const std::vector<double>& acf, const std::string& title);

struct Circle {
  double cx = 0.0;
  double cy = 0.0;
  double r = 1.0;
};

/// 2-D point cloud with an optional circular constraint boundary.
std::string scatter_plot(const std::vector<std::array<double, 2>>& points, const std::string& title,
                         const std::string& x_label, const std::string& y_label,
                         const std::optional<Circle>& boundary = std::nullopt);

struct Interval {
  std::string label;
  double lower = 0.0;
  double middle = 0.0;
  double upper = 0.0;
};

/// One horizontal interval per row with a marker at `middle`.
std::string interval_ladder(const std::vector<Interval>& rows, const std::string& title);

}  // namespace dset::svg
