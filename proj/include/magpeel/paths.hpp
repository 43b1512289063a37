#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "magpeel/metric.hpp"
#include "magpeel/peeling.hpp"

namespace magpeel::paths {

struct Node {
  std::string id;
  std::string label;
  double lon = 0;
  double lat = 0;
};

/// Geolocated nodes with row-aligned feature vectors.
class NodeTable {
 public:
  NodeTable() = default;
  NodeTable(std::vector<Node> nodes, Matrix<double> features);

  std::size_t size() const { return nodes_.size(); }
  const std::vector<Node>& nodes() const { return nodes_; }
  const Node& node(std::size_t i) const { return nodes_.at(i); }
  const Matrix<double>& features() const { return features_; }
  std::size_t index_of(const std::string& id) const;

 private:
  std::vector<Node> nodes_;
  Matrix<double> features_;
};

/// Forward DAG: arc (v, w) iff <c(w) - c(v), c(target) - c(source)> > 0,
/// restricted to nodes on some source -> target path.
struct Dag {
  std::size_t source = 0;
  std::size_t target = 0;
  std::vector<std::size_t> kept;                 // node-table indices, in projection order
  std::vector<std::vector<std::size_t>> out_arcs;  // indexed by node-table index
  std::size_t arc_count = 0;

  bool has_arc(std::size_t v, std::size_t w) const;
};

Dag build_directional_dag(const NodeTable& nodes, const std::string& source, const std::string& target);

struct PathCandidate {
  std::vector<std::size_t> nodes;  // node-table indices, source ... target
  double geo_length = 0;
  std::vector<std::size_t> intermediates() const {
    return nodes.size() < 2 ? std::vector<std::size_t>{}
                            : std::vector<std::size_t>(nodes.begin() + 1, nodes.end() - 1);
  }
};

double leg_length(const Node& a, const Node& b);

/// The K shortest source -> target paths with exactly `stops` intermediate
/// nodes. Ties in length break lexicographically on the node-id sequence.
std::vector<PathCandidate> k_shortest_fixed_stops(const Dag& dag, const NodeTable& nodes, int stops,
                                                  std::size_t k);

/// Metric on projected paths (intermediate stops only).
struct PathMetric {
  MetricMatrix<double> metric;                // over distinct projected tuples
  std::vector<std::vector<std::size_t>> groups;  // path indices per tuple
  std::vector<std::vector<Index>> tuples;        // feature-class tuple per row
  bool antipodes_present = false;
  std::size_t merged_duplicates = 0;
  NegativeTypeClass classification;
};

struct PathMetricOptions {
  double p_exponent = 2;
  double antipode_tol = kDefaultAntipodeTol;
  double tol_eig = kDefaultTolEig;
  bool classify = true;
};

PathMetric path_feature_metric(const std::vector<PathCandidate>& paths, const NodeTable& nodes,
                               const PathMetricOptions& opt = {});

struct PeelRow {
  std::vector<std::size_t> paths;  // candidate indices sharing this projection
  double weight = 0;
  double relative = 0;  // weight / max weight
};

struct PathPeel {
  std::vector<PeelRow> rows;  // descending weight
  PeelLayer<double> layer;
  bool heuristic = false;
};

PathPeel peel_paths(const PathMetric& metric, const PeelOptions& opt = {});

/// Seeded 80-node dataset in a continental-US-like box: "NY" in the east,
/// "LA" in the west, unit features clustered into 5 climate groups.
struct SyntheticDataset {
  NodeTable table;
  std::string source;
  std::string target;
};

SyntheticDataset synthetic_dataset(std::uint64_t seed = 2025, std::size_t node_count = 80,
                                   Index feature_dim = 16);

}  // namespace magpeel::paths
