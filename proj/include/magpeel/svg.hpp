#pragma once

#include <string>
#include <vector>

#include "magpeel/metric.hpp"
#include "magpeel/paths.hpp"

namespace magpeel::svg {

/// Classical multidimensional scaling to two dimensions.
Matrix<double> classical_mds(const MetricMatrix<double>& d);

/// Points in black; peel weights drawn as red circles with radius
/// proportional to the weight. `layer_of` (optional) colors later layers.
std::string peel_scatter(const Matrix<double>& xy, const std::vector<double>& weights,
                         const std::vector<int>& layer_of, const std::string& comment);

/// Line plot of y against log10(x).
std::string log_line_plot(const std::vector<double>& x, const std::vector<double>& y, const std::string& x_label,
                          const std::string& y_label, const std::string& comment);

/// Node positions and weighted path polylines (opacity = relative weight).
std::string path_map(const paths::NodeTable& nodes, const std::vector<std::vector<std::size_t>>& routes,
                     const std::vector<double>& relative, const std::string& comment);

}  // namespace magpeel::svg
