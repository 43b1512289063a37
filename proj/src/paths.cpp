#include "magpeel/paths.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <unordered_map>

#include "magpeel/product.hpp"

namespace magpeel::paths {

NodeTable::NodeTable(std::vector<Node> nodes, Matrix<double> features)
    : nodes_(std::move(nodes)), features_(std::move(features)) {
  if (static_cast<Index>(nodes_.size()) != features_.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "feature rows do not match node count");
  }
  std::set<std::string> seen;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& n = nodes_[i];
    if (!seen.insert(n.id).second) throw Error(ErrorCode::InvalidArgument, "duplicate node id " + n.id);
    if (!std::isfinite(n.lon) || !std::isfinite(n.lat)) {
      throw Error(ErrorCode::NonFiniteEntry, "node " + n.id + " has non-finite coordinates");
    }
    if (!features_.row(static_cast<Index>(i)).allFinite()) {
      throw Error(ErrorCode::NonFiniteEntry, "node " + n.id + " has non-finite features");
    }
    if (features_.row(static_cast<Index>(i)).norm() == 0) {
      throw Error(ErrorCode::ZeroVector, "node " + n.id + " has a zero feature vector");
    }
  }
}

std::size_t NodeTable::index_of(const std::string& id) const {
  for (std::size_t i = 0; i < nodes_.size(); ++i)
    if (nodes_[i].id == id) return i;
  throw Error(ErrorCode::UnknownNode, "no node with id " + id);
}

bool Dag::has_arc(std::size_t v, std::size_t w) const {
  if (v >= out_arcs.size()) return false;
  const auto& a = out_arcs[v];
  return std::binary_search(a.begin(), a.end(), w);
}

double leg_length(const Node& a, const Node& b) { return std::hypot(b.lon - a.lon, b.lat - a.lat); }

Dag build_directional_dag(const NodeTable& nodes, const std::string& source, const std::string& target) {
  if (source == target) throw Error(ErrorCode::SourceTargetCoincide, "source and target are the same node");
  Dag dag;
  dag.source = nodes.index_of(source);
  dag.target = nodes.index_of(target);
  const Node& s = nodes.node(dag.source);
  const Node& t = nodes.node(dag.target);
  const double dx = t.lon - s.lon, dy = t.lat - s.lat;
  if (dx == 0 && dy == 0) {
    throw Error(ErrorCode::DisconnectedSourceTarget, "source and target share coordinates, so no arc points forward");
  }

  const std::size_t n = nodes.size();
  std::vector<double> proj(n);
  for (std::size_t i = 0; i < n; ++i) proj[i] = nodes.node(i).lon * dx + nodes.node(i).lat * dy;
  auto forward = [&](std::size_t v, std::size_t w) {
    const Node& a = nodes.node(v);
    const Node& b = nodes.node(w);
    return (b.lon - a.lon) * dx + (b.lat - a.lat) * dy > 0;
  };

  // Reachability from the source and co-reachability to the target. Because
  // arcs strictly increase the linear functional, a node lies on a
  // source -> target path iff it is forward of the source and behind the target.
  std::vector<bool> keep(n, false);
  for (std::size_t v = 0; v < n; ++v) {
    keep[v] = v == dag.source || v == dag.target || (forward(dag.source, v) && forward(v, dag.target));
  }
  dag.out_arcs.assign(n, {});
  for (std::size_t v = 0; v < n; ++v) {
    if (!keep[v]) continue;
    for (std::size_t w = 0; w < n; ++w) {
      if (keep[w] && w != v && forward(v, w)) {
        dag.out_arcs[v].push_back(w);
        ++dag.arc_count;
      }
    }
  }
  for (std::size_t v = 0; v < n; ++v)
    if (keep[v]) dag.kept.push_back(v);
  std::stable_sort(dag.kept.begin(), dag.kept.end(),
                   [&](std::size_t a, std::size_t b) { return proj[a] < proj[b]; });
  return dag;
}

namespace {

struct Partial {
  std::vector<std::size_t> nodes;
  double length = 0;
};

bool id_less(const NodeTable& t, const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(),
                                      [&](std::size_t x, std::size_t y) { return t.node(x).id < t.node(y).id; });
}

}  // namespace

std::vector<PathCandidate> k_shortest_fixed_stops(const Dag& dag, const NodeTable& nodes, int stops,
                                                  std::size_t k) {
  if (stops < 0) throw Error(ErrorCode::InvalidArgument, "stops must be >= 0");
  if (k == 0) throw Error(ErrorCode::InvalidArgument, "K must be >= 1");
  const std::size_t n = nodes.size();
  auto better = [&](const Partial& a, const Partial& b) {
    if (a.length != b.length) return a.length < b.length;
    return id_less(nodes, a.nodes, b.nodes);
  };

  // best[v]: up to k best source -> v prefixes with the current arc count.
  std::vector<std::vector<Partial>> best(n);
  best[dag.source].push_back({{dag.source}, 0.0});
  for (int hop = 0; hop < stops; ++hop) {
    std::vector<std::vector<Partial>> next(n);
    for (std::size_t v : dag.kept) {
      for (const Partial& pre : best[v]) {
        for (std::size_t w : dag.out_arcs[v]) {
          if (w == dag.target) continue;
          Partial ext{pre.nodes, pre.length + leg_length(nodes.node(v), nodes.node(w))};
          ext.nodes.push_back(w);
          next[w].push_back(std::move(ext));
        }
      }
    }
    for (auto& list : next) {
      std::sort(list.begin(), list.end(), better);
      if (list.size() > k) list.resize(k);
    }
    best = std::move(next);
  }

  std::vector<Partial> done;
  for (std::size_t v : dag.kept) {
    if (!dag.has_arc(v, dag.target)) continue;
    for (const Partial& pre : best[v]) {
      Partial ext{pre.nodes, pre.length + leg_length(nodes.node(v), nodes.node(dag.target))};
      ext.nodes.push_back(dag.target);
      done.push_back(std::move(ext));
    }
  }
  if (done.empty()) {
    throw Error(ErrorCode::NoPathsWithStops, "no source -> target path with " + std::to_string(stops) + " stops");
  }
  std::sort(done.begin(), done.end(), better);
  if (done.size() > k) done.resize(k);
  std::vector<PathCandidate> out;
  out.reserve(done.size());
  for (auto& p : done) out.push_back({std::move(p.nodes), p.length});
  return out;
}

PathMetric path_feature_metric(const std::vector<PathCandidate>& paths, const NodeTable& nodes,
                               const PathMetricOptions& opt) {
  if (!(opt.p_exponent > 1) || !std::isfinite(opt.p_exponent)) {
    throw Error(ErrorCode::InvalidExponent, "path metric needs a finite p > 1 for strict negative type");
  }
  if (paths.empty()) throw Error(ErrorCode::InvalidArgument, "no paths");
  const std::size_t len = paths.front().nodes.size();
  for (const auto& p : paths) {
    if (p.nodes.size() != len || p.nodes.front() != paths.front().nodes.front() ||
        p.nodes.back() != paths.front().nodes.back()) {
      throw Error(ErrorCode::DimensionMismatch, "paths must share source, target and length");
    }
  }

  // Nodes used as stops, collapsed into feature classes (identical directions).
  std::vector<std::size_t> used;
  for (const auto& p : paths)
    for (std::size_t v : p.intermediates()) used.push_back(v);
  std::sort(used.begin(), used.end());
  used.erase(std::unique(used.begin(), used.end()), used.end());

  Matrix<double> unit(static_cast<Index>(used.size()), nodes.features().cols());
  for (std::size_t a = 0; a < used.size(); ++a) {
    const auto row = nodes.features().row(static_cast<Index>(used[a]));
    unit.row(static_cast<Index>(a)) = row / row.norm();
  }
  std::vector<Index> cls_of_used(used.size(), -1);
  std::vector<Index> reps;
  for (std::size_t a = 0; a < used.size(); ++a) {
    if (cls_of_used[a] >= 0) continue;
    cls_of_used[a] = static_cast<Index>(reps.size());
    for (std::size_t b = a + 1; b < used.size(); ++b)
      if (cls_of_used[b] < 0 && unit.row(static_cast<Index>(a)) == unit.row(static_cast<Index>(b)))
        cls_of_used[b] = cls_of_used[a];
    reps.push_back(static_cast<Index>(a));
  }
  std::unordered_map<std::size_t, Index> cls_of_node;
  for (std::size_t a = 0; a < used.size(); ++a) cls_of_node[used[a]] = cls_of_used[a];

  PathMetric out;
  Matrix<double> rep_vectors(static_cast<Index>(reps.size()), unit.cols());
  for (std::size_t c = 0; c < reps.size(); ++c) rep_vectors.row(static_cast<Index>(c)) = unit.row(reps[c]);
  Matrix<double> node_d = Matrix<double>::Zero(1, 1);
  if (reps.size() >= 2) {
    auto sph = spherical_distance_matrix(rep_vectors, opt.antipode_tol);
    out.antipodes_present = sph.antipodes_present;
    node_d = sph.metric.matrix();
  }

  std::map<std::vector<Index>, std::size_t> row_of;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    std::vector<Index> tuple;
    for (std::size_t v : paths[i].intermediates()) tuple.push_back(cls_of_node.at(v));
    auto [it, inserted] = row_of.emplace(tuple, out.tuples.size());
    if (inserted) {
      out.tuples.push_back(tuple);
      out.groups.push_back({i});
    } else {
      out.groups[it->second].push_back(i);
      ++out.merged_duplicates;
    }
  }

  const Index m = static_cast<Index>(out.tuples.size());
  Matrix<double> d = Matrix<double>::Zero(m, m);
  std::vector<double> parts(len >= 2 ? len - 2 : 0);
  for (Index b = 0; b < m; ++b) {
    for (Index a = b + 1; a < m; ++a) {
      for (std::size_t l = 0; l < parts.size(); ++l)
        parts[l] = node_d(out.tuples[static_cast<std::size_t>(a)][l], out.tuples[static_cast<std::size_t>(b)][l]);
      d(a, b) = d(b, a) = detail::lp_combine<double>(parts, opt.p_exponent);
    }
  }
  out.metric = MetricMatrix<double>::unchecked(std::move(d));
  if (opt.classify && m >= 2) out.classification = classify_negative_type(out.metric, opt.tol_eig);
  else out.classification.kind = NegativeType::StrictNegativeType;
  return out;
}

PathPeel peel_paths(const PathMetric& metric, const PeelOptions& opt) {
  PathPeel out;
  PeelOptions o = opt;
  if (metric.antipodes_present) {
    // Strictness cannot be certified; run as a heuristic.
    o.skip_certify = true;
    o.assume_heuristic = true;
    out.heuristic = true;
  }
  out.layer = certified_peel(metric.metric, o);
  out.heuristic = out.heuristic || out.layer.heuristic;
  double top = 0;
  for (Index j : out.layer.support) top = std::max(top, out.layer.p_star(j));
  for (Index j : out.layer.support) {
    PeelRow row;
    row.paths = metric.groups[static_cast<std::size_t>(j)];
    row.weight = out.layer.p_star(j);
    row.relative = row.weight / top;
    out.rows.push_back(std::move(row));
  }
  std::stable_sort(out.rows.begin(), out.rows.end(),
                   [](const PeelRow& a, const PeelRow& b) { return a.weight > b.weight; });
  return out;
}

namespace {

// Portable uniform [0, 1) from a 64-bit engine; the standard distributions
// are not reproducible across library implementations.
double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double gaussian(std::mt19937_64& rng) {
  double u1 = uniform01(rng);
  while (u1 <= 0) u1 = uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace

SyntheticDataset synthetic_dataset(std::uint64_t seed, std::size_t node_count, Index feature_dim) {
  if (node_count < 4) throw Error(ErrorCode::InvalidArgument, "synthetic dataset needs >= 4 nodes");
  std::mt19937_64 rng(seed);
  constexpr double lon_lo = -124.0, lon_hi = -70.0, lat_lo = 26.0, lat_hi = 48.5;

  std::vector<Node> nodes;
  nodes.push_back({"NY", "New York", -74.006, 40.713});
  nodes.push_back({"LA", "Los Angeles", -118.244, 34.052});
  for (std::size_t i = nodes.size(); i < node_count; ++i) {
    char id[16];
    std::snprintf(id, sizeof id, "C%02zu", i);
    const double lon = lon_lo + (lon_hi - lon_lo) * uniform01(rng);
    const double lat = lat_lo + (lat_hi - lat_lo) * uniform01(rng);
    nodes.push_back({id, std::string("City ") + (id + 1), lon, lat});
  }

  // Five climate prototypes; a node's group follows a coarse geographic rule.
  constexpr int groups = 5;
  Matrix<double> proto(groups, feature_dim);
  for (int g = 0; g < groups; ++g)
    for (Index c = 0; c < feature_dim; ++c) proto(g, c) = gaussian(rng);
  auto climate = [&](const Node& n) {
    if (n.lon < -110) return n.lat < 38 ? 0 : 1;     // arid southwest, mountain/northwest
    if (n.lon < -95) return n.lat < 36 ? 2 : 3;      // southern plains, northern plains
    return n.lat < 36 ? 2 : 4;                       // humid south, humid continental east
  };
  Matrix<double> features(static_cast<Index>(nodes.size()), feature_dim);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const int g = climate(nodes[i]);
    for (Index c = 0; c < feature_dim; ++c)
      features(static_cast<Index>(i), c) = proto(g, c) + 0.35 * gaussian(rng);
    features.row(static_cast<Index>(i)).normalize();
  }
  return {NodeTable(std::move(nodes), std::move(features)), "NY", "LA"};
}

}  // namespace magpeel::paths
