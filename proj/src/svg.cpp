#include "magpeel/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace magpeel::svg {

namespace {

constexpr double kWidth = 640, kHeight = 640, kPad = 40;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '-': out += (out.empty() || out.back() != '-') ? "-" : " -"; break;  // no "--" inside comments
      default: out += c;
    }
  }
  return out;
}

std::string header(const std::string& comment) {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" + num(kHeight) +
         "\" viewBox=\"0 0 " + num(kWidth) + " " + num(kHeight) + "\">\n<!-- " + escape(comment) +
         " -->\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

struct Frame {
  double x0, x1, y0, y1;
  double sx(double x) const { return kPad + (x - x0) / std::max(x1 - x0, 1e-300) * (kWidth - 2 * kPad); }
  double sy(double y) const { return kHeight - kPad - (y - y0) / std::max(y1 - y0, 1e-300) * (kHeight - 2 * kPad); }
};

Frame frame_of(const std::vector<double>& xs, const std::vector<double>& ys, bool equal_aspect) {
  Frame f{*std::min_element(xs.begin(), xs.end()), *std::max_element(xs.begin(), xs.end()),
          *std::min_element(ys.begin(), ys.end()), *std::max_element(ys.begin(), ys.end())};
  if (f.x1 == f.x0) { f.x0 -= 1; f.x1 += 1; }
  if (f.y1 == f.y0) { f.y0 -= 1; f.y1 += 1; }
  if (equal_aspect) {
    const double span = std::max(f.x1 - f.x0, f.y1 - f.y0);
    const double cx = (f.x0 + f.x1) / 2, cy = (f.y0 + f.y1) / 2;
    f = {cx - span / 2, cx + span / 2, cy - span / 2, cy + span / 2};
  }
  return f;
}

}  // namespace

Matrix<double> classical_mds(const MetricMatrix<double>& d) {
  const Index n = d.size();
  Matrix<double> xy = Matrix<double>::Zero(n, 2);
  if (n < 2) return xy;
  const Matrix<double> sq = d.matrix().array().square().matrix();
  const Matrix<double> centering = Matrix<double>::Identity(n, n) - Matrix<double>::Constant(n, n, 1.0 / n);
  const Matrix<double> b = -0.5 * centering * sq * centering;
  Eigen::SelfAdjointEigenSolver<Matrix<double>> es(b);
  for (int c = 0; c < 2 && c < n; ++c) {
    const Index k = n - 1 - c;
    xy.col(c) = es.eigenvectors().col(k) * std::sqrt(std::max(es.eigenvalues()(k), 0.0));
  }
  return xy;
}

std::string peel_scatter(const Matrix<double>& xy, const std::vector<double>& weights,
                         const std::vector<int>& layer_of, const std::string& comment) {
  static const char* palette[] = {"#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
  std::vector<double> xs(xy.rows()), ys(xy.rows());
  for (Index i = 0; i < xy.rows(); ++i) {
    xs[static_cast<std::size_t>(i)] = xy(i, 0);
    ys[static_cast<std::size_t>(i)] = xy.cols() > 1 ? xy(i, 1) : 0.0;
  }
  const Frame f = frame_of(xs, ys, true);
  const double wmax = weights.empty() ? 1.0 : std::max(*std::max_element(weights.begin(), weights.end()), 1e-300);
  std::string out = header(comment);
  for (std::size_t i = 0; i < xs.size(); ++i)
    out += "<circle cx=\"" + num(f.sx(xs[i])) + "\" cy=\"" + num(f.sy(ys[i])) + "\" r=\"1.5\" fill=\"black\"/>\n";
  for (std::size_t i = 0; i < xs.size() && i < weights.size(); ++i) {
    if (weights[i] <= 0) continue;
    const int layer = layer_of.empty() ? 0 : std::max(layer_of[i], 0);
    out += "<circle cx=\"" + num(f.sx(xs[i])) + "\" cy=\"" + num(f.sy(ys[i])) + "\" r=\"" +
           num(2 + 18 * weights[i] / wmax) + "\" fill=\"none\" stroke=\"" + palette[layer % 6] + "\"/>\n";
  }
  return out + "</svg>\n";
}

std::string log_line_plot(const std::vector<double>& x, const std::vector<double>& y, const std::string& x_label,
                          const std::string& y_label, const std::string& comment) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
    if (x[i] > 0 && std::isfinite(y[i])) {
      lx.push_back(std::log10(x[i]));
      ly.push_back(y[i]);
    }
  }
  std::string out = header(comment);
  if (lx.empty()) return out + "</svg>\n";
  std::vector<double> ly_axis = ly;
  ly_axis.push_back(0);
  const Frame f = frame_of(lx, ly_axis, false);
  out += "<line x1=\"" + num(kPad) + "\" y1=\"" + num(kHeight - kPad) + "\" x2=\"" + num(kWidth - kPad) + "\" y2=\"" +
         num(kHeight - kPad) + "\" stroke=\"black\"/>\n";
  out += "<line x1=\"" + num(kPad) + "\" y1=\"" + num(kPad) + "\" x2=\"" + num(kPad) + "\" y2=\"" +
         num(kHeight - kPad) + "\" stroke=\"black\"/>\n";
  out += "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\" points=\"";
  for (std::size_t i = 0; i < lx.size(); ++i) out += (i ? " " : "") + num(f.sx(lx[i])) + "," + num(f.sy(ly[i]));
  out += "\"/>\n";
  out += "<text x=\"" + num(kWidth / 2) + "\" y=\"" + num(kHeight - 8) + "\" text-anchor=\"middle\">" +
         escape(x_label) + "</text>\n";
  out += "<text x=\"12\" y=\"" + num(kHeight / 2) + "\" transform=\"rotate(-90 12 " + num(kHeight / 2) +
         ")\" text-anchor=\"middle\">" + escape(y_label) + "</text>\n";
  out += "<text x=\"" + num(kPad + 4) + "\" y=\"" + num(f.sy(f.y1) + 12) + "\">max " + num(f.y1) + "</text>\n";
  return out + "</svg>\n";
}

std::string path_map(const paths::NodeTable& nodes, const std::vector<std::vector<std::size_t>>& routes,
                     const std::vector<double>& relative, const std::string& comment) {
  std::vector<double> xs, ys;
  for (const auto& n : nodes.nodes()) {
    xs.push_back(n.lon);
    ys.push_back(n.lat);
  }
  const Frame f = frame_of(xs, ys, true);
  std::string out = header(comment);
  for (std::size_t r = 0; r < routes.size(); ++r) {
    out += "<polyline fill=\"none\" stroke=\"#d62728\" stroke-width=\"2\" stroke-opacity=\"" +
           num(r < relative.size() ? relative[r] : 1.0) + "\" points=\"";
    for (std::size_t i = 0; i < routes[r].size(); ++i) {
      const auto& n = nodes.node(routes[r][i]);
      out += (i ? " " : "") + num(f.sx(n.lon)) + "," + num(f.sy(n.lat));
    }
    out += "\"/>\n";
  }
  for (const auto& n : nodes.nodes()) {
    out += "<circle cx=\"" + num(f.sx(n.lon)) + "\" cy=\"" + num(f.sy(n.lat)) + "\" r=\"3\" fill=\"black\"><title>" +
           escape(n.label) + "</title></circle>\n";
  }
  return out + "</svg>\n";
}

}  // namespace magpeel::svg
