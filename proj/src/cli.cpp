#include "magpeel/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "magpeel/diversity.hpp"
#include "magpeel/io.hpp"
#include "magpeel/magnitude.hpp"
#include "magpeel/metric.hpp"
#include "magpeel/paths.hpp"
#include "magpeel/peeling.hpp"
#include "magpeel/product.hpp"
#include "magpeel/svg.hpp"

namespace magpeel::cli {

using nlohmann::json;

namespace {

const std::pair<Command, const char*> kCommandNames[] = {
    {Command::Validate, "validate"}, {Command::Classify, "classify"}, {Command::MagnitudeProfile, "magnitude-profile"},
    {Command::Diversity, "diversity"}, {Command::Peel, "peel"},       {Command::Product, "product"},
    {Command::Paths, "paths"},
};

json number_or_inf(double v) {
  if (std::isinf(v)) return v > 0 ? json("inf") : json("-inf");
  if (std::isnan(v)) return json(nullptr);
  return json(v);
}

json vec_json(const Vector<double>& v) {
  json a = json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

template <typename T>
json list_json(const std::vector<T>& v) {
  json a = json::array();
  for (const auto& x : v) a.push_back(x);
  return a;
}

json classification_json(const NegativeTypeClass& c, double tol_eig) {
  return {{"class", std::string(to_string(c.kind))},
          {"min_eigenvalue", c.min_eigenvalue},
          {"max_abs_eigenvalue", c.max_abs_eigenvalue},
          {"k_used", c.k_used},
          {"tol_eig", tol_eig}};
}

std::vector<double> parse_double_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    if (item == "inf" || item == "Inf" || item == "infinity") {
      out.push_back(std::numeric_limits<double>::infinity());
      continue;
    }
    char* end = nullptr;
    const double v = std::strtod(item.c_str(), &end);
    if (end != item.c_str() + item.size()) throw Error(ErrorCode::InvalidArgument, "cannot parse number '" + item + "'");
    out.push_back(v);
  }
  return out;
}

std::vector<double> parse_t_grid(const std::string& s) {
  if (s.find(':') != std::string::npos) {
    std::vector<double> parts;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(std::strtod(item.c_str(), nullptr));
    if (parts.size() != 3 || !(parts[0] > 0) || !(parts[1] >= parts[0]) || parts[2] < 1) {
      throw Error(ErrorCode::InvalidArgument, "t grid must be lo:hi:count with 0 < lo <= hi");
    }
    const int count = static_cast<int>(parts[2]);
    std::vector<double> grid;
    for (int i = 0; i < count; ++i) {
      const double f = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
      grid.push_back(std::exp(std::log(parts[0]) + f * (std::log(parts[1]) - std::log(parts[0]))));
    }
    return grid;
  }
  return parse_double_list(s);
}

struct LoadedMetric {
  MetricMatrix<double> metric;
  std::optional<Matrix<double>> points;  // when the input was a point cloud
  std::vector<Index> multiplicity;       // when duplicates were merged
  bool antipodes_present = false;
  ValidationReport report;
};

LoadedMetric load_metric(const RunConfig& c, const std::string& path) {
  io::Table t = io::read_table(path, io::format_from_string(c.format));
  LoadedMetric out;
  if (c.merge_duplicates) {
    Matrix<double> probe;
    if (c.kind == "points") {
      const Index m = t.values.rows();
      probe = Matrix<double>::Ones(m, m);
      for (Index j = 0; j < m; ++j)
        for (Index k = 0; k < m; ++k) probe(j, k) = t.values.row(j) == t.values.row(k) ? 0.0 : 1.0;
    } else {
      probe = t.values;
    }
    const DuplicateMerge groups = find_duplicate_groups(probe);
    if (groups.representatives.size() < static_cast<std::size_t>(t.values.rows())) {
      Matrix<double> kept = c.kind == "points" ? Matrix<double>(t.values(groups.representatives, Eigen::all))
                                               : Matrix<double>(t.values(groups.representatives, groups.representatives));
      std::vector<std::string> labels;
      if (!t.labels.empty() && c.kind != "points")
        for (Index r : groups.representatives) labels.push_back(t.labels[static_cast<std::size_t>(r)]);
      t.values = std::move(kept);
      t.labels = std::move(labels);
    }
    out.multiplicity = groups.multiplicity;
  }
  if (c.kind == "points") {
    if (c.metric == "spherical") {
      auto sph = spherical_distance_matrix(t.values, c.antipode_tol);
      out.metric = std::move(sph.metric);
      out.antipodes_present = sph.antipodes_present;
    } else if (c.metric == "euclidean") {
      out.metric = euclidean_distance_matrix(t.values, c.norm_p);
    } else {
      throw Error(ErrorCode::InvalidArgument, "unknown point metric " + c.metric);
    }
    out.points = t.values;
  } else if (c.kind == "matrix") {
    out.metric = validate_metric(t.values, c.tol.tri, t.labels, &out.report);
  } else {
    throw Error(ErrorCode::InvalidArgument, "unknown input kind " + c.kind);
  }
  return out;
}

json base_json(const RunConfig& c) {
  return {{"tool", kToolName}, {"version", kToolVersion}, {"command", to_string(c.command)},
          {"config", c.to_json()}, {"seed", c.seed}};
}

std::string artifact_comment(const RunConfig& c) {
  return std::string(kToolName) + " " + kToolVersion + " config " + c.to_json().dump();
}

Matrix<double> plot_coordinates(const LoadedMetric& lm) {
  if (lm.points && lm.points->cols() == 2 && lm.points->rows() == lm.metric.size()) return *lm.points;
  return svg::classical_mds(lm.metric);
}

void require_input(const RunConfig& c, std::size_t count = 1) {
  if (c.inputs.size() < count) {
    throw Error(ErrorCode::InvalidArgument, "command needs " + std::to_string(count) + " --input file(s)");
  }
}

json loaded_json(const LoadedMetric& lm) {
  json j = {{"n", lm.metric.size()}, {"antipodes_present", lm.antipodes_present}};
  if (!lm.multiplicity.empty()) j["multiplicity"] = list_json(lm.multiplicity);
  if (!lm.metric.labels().empty()) j["labels"] = list_json(lm.metric.labels());
  return j;
}

void cmd_validate(const RunConfig& c, RunResult& r) {
  require_input(c);
  const LoadedMetric lm = load_metric(c, c.inputs.front());
  r.result["metric"] = loaded_json(lm);
  r.result["valid"] = true;
  r.result["max_asymmetry"] = lm.report.max_asymmetry;
  r.result["max_triangle_violation"] = lm.report.max_triangle_violation;
}

void cmd_classify(const RunConfig& c, RunResult& r) {
  require_input(c);
  const LoadedMetric lm = load_metric(c, c.inputs.front());
  r.result["metric"] = loaded_json(lm);
  if (lm.metric.size() < 2) throw Error(ErrorCode::InvalidArgument, "classification needs at least two points");
  r.result["classification"] = classification_json(classify_negative_type(lm.metric, c.tol.eig), c.tol.eig);
}

void cmd_magnitude_profile(const RunConfig& c, RunResult& r) {
  require_input(c);
  const LoadedMetric lm = load_metric(c, c.inputs.front());
  const std::vector<double> grid = c.t_grid.empty() ? default_t_grid(lm.metric) : parse_t_grid(c.t_grid);
  const auto profile = magnitude_profile(lm.metric, grid, c.tol.res);
  json rows = json::array();
  std::vector<double> ts, mags;
  Matrix<double> table(static_cast<Index>(profile.size()), lm.metric.size() + 2);
  table.setConstant(std::numeric_limits<double>::quiet_NaN());
  for (std::size_t i = 0; i < profile.size(); ++i) {
    const auto& pt = profile[i];
    json row = {{"t", pt.t}, {"ok", pt.weighting.has_value()}};
    table(static_cast<Index>(i), 0) = pt.t;
    if (pt.weighting) {
      row["magnitude"] = pt.weighting->magnitude;
      row["weighting"] = vec_json(pt.weighting->w);
      row["residual"] = pt.weighting->residual;
      row["solve_path"] = std::string(to_string(pt.weighting->path));
      ts.push_back(pt.t);
      mags.push_back(pt.weighting->magnitude);
      table.row(static_cast<Index>(i)).segment(1, lm.metric.size()) = pt.weighting->w.transpose();
      table(static_cast<Index>(i), lm.metric.size() + 1) = pt.weighting->magnitude;
    } else {
      row["error"] = pt.error;
    }
    rows.push_back(std::move(row));
  }
  r.result["metric"] = loaded_json(lm);
  r.result["profile"] = std::move(rows);
  if (c.csv) {
    std::vector<std::string> header{"t"};
    for (Index j = 0; j < lm.metric.size(); ++j) header.push_back("w_" + std::to_string(j + 1));
    header.push_back("magnitude");
    r.artifacts["magnitude_profile.csv"] = io::matrix_to_csv(table, header, artifact_comment(c));
  }
  if (c.svg) r.artifacts["magnitude_profile.svg"] = svg::log_line_plot(ts, mags, "log10 t", "magnitude", artifact_comment(c));
}

void cmd_diversity(const RunConfig& c, RunResult& r) {
  require_input(c);
  if (!c.t) throw Error(ErrorCode::InvalidArgument, "diversity needs --t");
  const LoadedMetric lm = load_metric(c, c.inputs.front());
  const Index n = lm.metric.size();
  const SimplexVector<double> p =
      c.p_vector == "uniform" ? SimplexVector<double>::uniform(n) : SimplexVector<double>(io::read_vector(c.p_vector));
  if (p.size() != n) throw Error(ErrorCode::DimensionMismatch, "p has the wrong length");
  const auto z = similarity_matrix(lm.metric, *c.t);
  json results = json::array();
  for (double q : c.q) {
    results.push_back({{"q", number_or_inf(q)}, {"diversity", diversity_order_q(z, p, q)}});
  }
  r.result["metric"] = loaded_json(lm);
  r.result["t"] = *c.t;
  r.result["p"] = vec_json(p.vector());
  r.result["diversity"] = std::move(results);
  r.result["quadratic_entropy"] = quadratic_entropy(lm.metric, p);
  r.result["small_scale_log_diversity"] = small_scale_log_diversity(lm.metric, p, *c.t);
  r.result["log_diversity_order_one"] = std::log(diversity_order_one(z, p));
  json maxdiv;
  try {
    const auto w = weighting(z, c.tol.res);
    maxdiv["magnitude"] = w.magnitude;
    maxdiv["p"] = vec_json(max_diversity_from_weighting(z).vector());
    maxdiv["ok"] = true;
  } catch (const Error& e) {
    maxdiv["ok"] = false;
    maxdiv["error"] = e.what();
  }
  r.result["max_diversity"] = std::move(maxdiv);
}

json layer_json(const std::vector<Index>& indices, const std::vector<double>& weights, const PeelLayer<double>& L) {
  json j = {{"indices", list_json(indices)},
            {"weights", list_json(weights)},
            {"entropy", L.entropy},
            {"kkt_residual", L.kkt_residual},
            {"iterations", L.iterations},
            {"completion_passes", L.completion_passes},
            {"qp_iterations", L.qp_iterations},
            {"heuristic", L.heuristic}};
  if (L.ratio_bound) j["ratio_bound"] = *L.ratio_bound;
  return j;
}

void cmd_peel(const RunConfig& c, RunResult& r) {
  require_input(c);
  const LoadedMetric lm = load_metric(c, c.inputs.front());
  const auto& d = lm.metric;
  PeelOptions opt{c.tol.neg, c.tol.eig, c.skip_certify};
  r.result["metric"] = loaded_json(lm);

  std::optional<NegativeTypeClass> cls;
  bool heuristic = false;
  if (!c.skip_certify && d.size() >= 2) {
    cls = classify_negative_type(d, c.tol.eig);
    r.result["classification"] = classification_json(*cls, c.tol.eig);
    if (cls->kind == NegativeType::NotNegativeType) {
      throw Error(ErrorCode::NotNegativeType,
                  "metric is not negative type (min eigenvalue " + std::to_string(cls->min_eigenvalue) + ")");
    }
    heuristic = cls->kind == NegativeType::NegativeTypeOnly;
  }

  json layers = json::array();
  std::vector<double> first_weights(static_cast<std::size_t>(d.size()), 0.0);
  std::vector<int> layer_of(static_cast<std::size_t>(d.size()), -1);
  if (c.iterate) {
    const auto dec = iterated_peeling(d, c.max_layers, c.tol.neg, heuristic);
    for (std::size_t l = 0; l < dec.layers.size(); ++l) {
      const auto& L = dec.layers[l];
      layers.push_back(layer_json(L.indices, L.weights, L.peel));
      for (std::size_t a = 0; a < L.indices.size(); ++a) {
        first_weights[static_cast<std::size_t>(L.indices[a])] = L.weights[a];
        layer_of[static_cast<std::size_t>(L.indices[a])] = static_cast<int>(l);
      }
    }
    r.result["residual_order"] = list_json(dec.residual_order);
  } else {
    PeelOptions o = opt;
    o.skip_certify = true;  // already certified above
    o.assume_heuristic = heuristic;
    const PeelLayer<double> L = certified_peel(d, o);
    std::vector<double> w;
    for (Index j : L.support) {
      w.push_back(L.p_star(j));
      first_weights[static_cast<std::size_t>(j)] = L.p_star(j);
      layer_of[static_cast<std::size_t>(j)] = 0;
    }
    layers.push_back(layer_json(L.support, w, L));
  }
  r.result["layers"] = std::move(layers);
  r.result["heuristic"] = heuristic;

  const MedoidResult med = medoid(d);
  r.result["medoid"] = {{"index", med.index}, {"tied", list_json(med.tied)}};

  json bounds;
  try {
    const auto aff = affine_extremum(d);
    bounds["affine_value"] = aff.value;
    bounds["ones_dinv_ones"] = aff.ones_dinv_ones;
    bounds["p_aff_nonnegative"] = aff.p_aff.minCoeff() >= 0;
    Vector<double> p0 = Vector<double>::Zero(d.size());
    for (std::size_t j = 0; j < first_weights.size(); ++j)
      if (layer_of[j] == 0) p0(static_cast<Index>(j)) = first_weights[j];
    bounds["ratio_bound"] = quadratic_entropy(d, SimplexVector<double>(p0)) * aff.ones_dinv_ones;
    bounds["ok"] = true;
  } catch (const Error& e) {
    bounds["ok"] = false;
    bounds["error"] = e.what();
  }
  r.result["bounds"] = std::move(bounds);

  if (c.svg) {
    r.artifacts["peel.svg"] = svg::peel_scatter(plot_coordinates(lm), first_weights, layer_of, artifact_comment(c));
  }
}

void cmd_product(const RunConfig& c, RunResult& r) {
  require_input(c, 2);
  std::vector<MetricMatrix<double>> factors;
  json sizes = json::array();
  for (const auto& path : c.inputs) {
    factors.push_back(load_metric(c, path).metric);
    sizes.push_back(factors.back().size());
  }
  const auto prod = lp_product_many(factors, c.p_exponent);
  r.result["p_exponent"] = c.p_exponent;
  r.result["shape"] = std::move(sizes);
  r.result["n"] = prod.result.size();
  if (prod.result.size() >= 2) {
    r.result["classification"] = classification_json(classify_negative_type(prod.result, c.tol.eig), c.tol.eig);
  }
  const std::string csv = io::matrix_to_csv(prod.result.matrix(), {}, artifact_comment(c));
  if (c.out_dir.empty()) {
    json m = json::array();
    for (Index i = 0; i < prod.result.size(); ++i) m.push_back(vec_json(prod.result.matrix().row(i).transpose()));
    r.result["matrix"] = std::move(m);
  } else {
    r.result["matrix_file"] = "product.csv";
    r.artifacts["product.csv"] = csv;
  }
}

void apply_paths_config(RunConfig& c) {
  if (c.config_file.empty()) return;
  json j;
  try {
    j = json::parse(io::read_file(c.config_file));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  try {
    if (j.contains("source")) c.source = j["source"].get<std::string>();
    if (j.contains("target")) c.target = j["target"].get<std::string>();
    if (j.contains("stops")) c.stops = j["stops"].get<int>();
    if (j.contains("K")) c.k = j["K"].get<std::size_t>();
    if (j.contains("p_exponent")) c.p_exponent = j["p_exponent"].get<double>();
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    const auto base = std::filesystem::path(c.config_file).parent_path();
    auto resolve = [&](const std::string& p) {
      const std::filesystem::path fp(p);
      return (fp.is_relative() ? base / fp : fp).string();
    };
    if (j.contains("nodes")) c.nodes = resolve(j["nodes"].get<std::string>());
    if (j.contains("features")) c.features = resolve(j["features"].get<std::string>());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("bad config field: ") + e.what());
  }
}

void cmd_paths(const RunConfig& config, RunResult& r) {
  RunConfig c = config;
  apply_paths_config(c);
  r.result["config"] = c.to_json();

  paths::NodeTable table;
  if (c.synthetic || (c.nodes.empty() && c.features.empty())) {
    auto ds = paths::synthetic_dataset(c.seed);
    table = std::move(ds.table);
    if (c.source.empty()) c.source = ds.source;
    if (c.target.empty()) c.target = ds.target;
    r.result["dataset"] = {{"synthetic", true}, {"nodes", table.size()}};
    if (c.csv) {
      r.artifacts["synthetic_nodes.csv"] = io::nodes_to_csv(table);
      r.artifacts["synthetic_features.csv"] = io::features_to_csv(table);
    }
  } else {
    if (c.nodes.empty() || c.features.empty()) throw Error(ErrorCode::InvalidArgument, "paths needs --nodes and --features");
    table = io::read_node_table(c.nodes, c.features);
    r.result["dataset"] = {{"synthetic", false}, {"nodes", table.size()}};
  }
  if (c.source.empty() || c.target.empty()) throw Error(ErrorCode::InvalidArgument, "paths needs a source and target");

  const auto dag = paths::build_directional_dag(table, c.source, c.target);
  const auto candidates = paths::k_shortest_fixed_stops(dag, table, c.stops, c.k);
  paths::PathMetricOptions mopt;
  mopt.p_exponent = c.p_exponent;
  mopt.antipode_tol = c.antipode_tol;
  mopt.tol_eig = c.tol.eig;
  mopt.classify = !c.skip_certify;
  const auto pm = paths::path_feature_metric(candidates, table, mopt);
  if (mopt.classify && pm.metric.size() >= 2 && pm.classification.kind == NegativeType::NotNegativeType) {
    throw Error(ErrorCode::NotNegativeType, "projected path metric is not negative type");
  }
  PeelOptions popt{c.tol.neg, c.tol.eig, true};
  paths::PathPeel peel = paths::peel_paths(pm, popt);
  const bool heuristic = pm.antipodes_present || (mopt.classify && !pm.classification.strict());

  json rows = json::array();
  std::vector<std::vector<std::size_t>> routes;
  std::vector<double> rel;
  for (std::size_t i = 0; i < peel.rows.size(); ++i) {
    const auto& row = peel.rows[i];
    const auto& path = candidates[row.paths.front()];
    json stops = json::array(), ids = json::array();
    for (std::size_t v : path.intermediates()) stops.push_back(table.node(v).label);
    for (std::size_t v : path.nodes) ids.push_back(table.node(v).id);
    rows.push_back({{"rank", i + 1},
                    {"stops", std::move(stops)},
                    {"path_ids", std::move(ids)},
                    {"weight", row.weight},
                    {"relative_weighting", row.relative},
                    {"geo_length", path.geo_length},
                    {"paths_merged", row.paths.size()}});
    routes.push_back(path.nodes);
    rel.push_back(row.relative);
  }
  r.result["dag"] = {{"nodes", dag.kept.size()}, {"arcs", dag.arc_count}};
  r.result["candidates"] = candidates.size();
  r.result["distinct_projections"] = pm.metric.size();
  r.result["merged_duplicates"] = pm.merged_duplicates;
  r.result["antipodes_present"] = pm.antipodes_present;
  if (mopt.classify && pm.metric.size() >= 2) r.result["classification"] = classification_json(pm.classification, c.tol.eig);
  r.result["heuristic"] = heuristic;
  r.result["peel_size"] = peel.rows.size();
  r.result["kkt_residual"] = peel.layer.kkt_residual;
  r.result["table"] = std::move(rows);

  json features = json::array();
  for (std::size_t i = 0; i < routes.size(); ++i) {
    json coords = json::array();
    for (std::size_t v : routes[i]) coords.push_back({table.node(v).lon, table.node(v).lat});
    features.push_back({{"type", "Feature"},
                        {"geometry", {{"type", "LineString"}, {"coordinates", std::move(coords)}}},
                        {"properties", {{"rank", i + 1}, {"weight", peel.rows[i].weight}, {"relative_weighting", rel[i]}}}});
  }
  json geo = {{"type", "FeatureCollection"}, {"features", std::move(features)},
              {"properties", {{"tool", kToolName}, {"version", kToolVersion}, {"config", c.to_json()}}}};
  r.artifacts["paths.geojson"] = geo.dump(2) + "\n";
  r.artifacts["paths_metric.csv"] = io::matrix_to_csv(pm.metric.matrix(), {}, artifact_comment(c));
  if (c.svg) r.artifacts["paths.svg"] = svg::path_map(table, routes, rel, artifact_comment(c));
}

}  // namespace

std::string to_string(Command c) {
  for (const auto& [cmd, name] : kCommandNames)
    if (cmd == c) return name;
  return "unknown";
}

Command command_from_string(const std::string& s) {
  for (const auto& [cmd, name] : kCommandNames)
    if (s == name) return cmd;
  throw Error(ErrorCode::InvalidArgument, "unknown command " + s);
}

json RunConfig::to_json() const {
  json q_list = json::array();
  for (double v : q) q_list.push_back(number_or_inf(v));
  json j = {{"command", cli::to_string(command)},
            {"inputs", inputs},
            {"format", format},
            {"kind", kind},
            {"metric", metric},
            {"norm_p", norm_p},
            {"antipode_tol", antipode_tol},
            {"merge_duplicates", merge_duplicates},
            {"tolerances", {{"tri", tol.tri}, {"eig", tol.eig}, {"neg", tol.neg}, {"kkt", tol.kkt}}},
            {"q", std::move(q_list)},
            {"p_vector", p_vector},
            {"p_exponent", p_exponent},
            {"stops", stops},
            {"k", k},
            {"seed", seed},
            {"skip_certify", skip_certify},
            {"iterate", iterate},
            {"svg", svg},
            {"csv", csv}};
  if (tol.res) j["tolerances"]["res"] = *tol.res;
  if (t) j["t"] = *t;
  if (!t_grid.empty()) j["t_grid"] = t_grid;
  if (max_layers) j["max_layers"] = *max_layers;
  if (!nodes.empty()) j["nodes"] = nodes;
  if (!features.empty()) j["features"] = features;
  if (!config_file.empty()) j["config_file"] = config_file;
  if (!source.empty()) j["source"] = source;
  if (!target.empty()) j["target"] = target;
  if (synthetic) j["synthetic"] = true;
  return j;
}

RunResult run(const RunConfig& c) {
  RunResult r;
  r.result = base_json(c);
  try {
    for (double v : {c.tol.tri, c.tol.eig, c.tol.neg, c.tol.kkt})
      if (!(v > 0)) throw Error(ErrorCode::InvalidArgument, "tolerances must be positive");
    if (c.tol.res && !(*c.tol.res > 0)) throw Error(ErrorCode::InvalidArgument, "tolerances must be positive");
    switch (c.command) {
      case Command::Validate: cmd_validate(c, r); break;
      case Command::Classify: cmd_classify(c, r); break;
      case Command::MagnitudeProfile: cmd_magnitude_profile(c, r); break;
      case Command::Diversity: cmd_diversity(c, r); break;
      case Command::Peel: cmd_peel(c, r); break;
      case Command::Product: cmd_product(c, r); break;
      case Command::Paths: cmd_paths(c, r); break;
    }
    r.result["status"] = "ok";
    r.exit_code = 0;
  } catch (const Error& e) {
    r.artifacts.clear();
    r.exit_code = static_cast<int>(e.error_class());
    json err = base_json(c);
    err["status"] = "error";
    err["error"] = {{"code", std::string(to_string(e.code()))},
                    {"class", e.error_class() == ErrorClass::Input       ? "input"
                              : e.error_class() == ErrorClass::Numerical ? "numerical"
                                                                         : "certification"},
                    {"message", e.what()},
                    {"exit_code", r.exit_code}};
    r.result = std::move(err);
  } catch (const std::exception& e) {
    r.artifacts.clear();
    r.exit_code = static_cast<int>(ErrorClass::Input);
    json err = base_json(c);
    err["status"] = "error";
    err["error"] = {{"code", "IoError"}, {"class", "input"}, {"message", e.what()}, {"exit_code", r.exit_code}};
    r.result = std::move(err);
  }
  return r;
}

std::optional<RunConfig> parse_args(int argc, const char* const* argv, int& exit_code) {
  CLI::App app{"Weightings, magnitude, diversity and maximum-diversity peels of finite metric spaces"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);
  RunConfig c;
  std::string q_list;
  std::optional<double> t_opt;
  std::optional<int> max_layers;
  std::optional<double> tol_res;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--input,-i", c.inputs, "Input file(s): distance matrix or points (CSV or JSON)");
    sub->add_option("--format", c.format, "Input format")->check(CLI::IsMember({"auto", "csv", "json"}));
    sub->add_option("--kind", c.kind, "Input kind")->check(CLI::IsMember({"matrix", "points"}));
    sub->add_option("--metric", c.metric, "Metric for point input")->check(CLI::IsMember({"euclidean", "spherical"}));
    sub->add_option("--norm-p", c.norm_p, "l^p norm for Euclidean point input");
    sub->add_option("--antipode-tol", c.antipode_tol, "Antipode flag tolerance (radians)");
    sub->add_flag("--merge-duplicates", c.merge_duplicates, "Merge coincident points and report multiplicities");
    sub->add_option("--tol-tri", c.tol.tri, "Relative symmetry / triangle tolerance");
    sub->add_option("--tol-eig", c.tol.eig, "Relative eigenvalue tolerance for classification");
    sub->add_option("--tol-neg", c.tol.neg, "Negativity threshold in the peel loop");
    sub->add_option("--tol-kkt", c.tol.kkt, "KKT residual tolerance");
    sub->add_option("--tol-res", tol_res, "Weighting residual tolerance (default 1e-8 n)");
    sub->add_option("--seed", c.seed, "Seed recorded in outputs (and used by synthetic data)");
    sub->add_option("--out,-o", c.out_dir, "Output directory (default $" + std::string(kOutDirEnv) + ", else stdout)");
    sub->add_flag("--svg", c.svg, "Also write an SVG figure");
    sub->add_flag("--csv", c.csv, "Also write CSV tables");
    sub->add_flag("--skip-certify", c.skip_certify, "Do not classify negative type before peeling");
  };

  std::map<CLI::App*, Command> subs;
  auto* s_validate = app.add_subcommand("validate", "Validate a distance matrix");
  auto* s_classify = app.add_subcommand("classify", "Classify (strict) negative type");
  auto* s_profile = app.add_subcommand("magnitude-profile", "Weightings and magnitude across scales");
  auto* s_div = app.add_subcommand("diversity", "Diversity of order q at scale t");
  auto* s_peel = app.add_subcommand("peel", "Maximum quadratic entropy peel");
  auto* s_prod = app.add_subcommand("product", "L^p product of metrics");
  auto* s_paths = app.add_subcommand("paths", "Diverse fixed-stop path selection");
  subs = {{s_validate, Command::Validate}, {s_classify, Command::Classify}, {s_profile, Command::MagnitudeProfile},
          {s_div, Command::Diversity},     {s_peel, Command::Peel},         {s_prod, Command::Product},
          {s_paths, Command::Paths}};
  for (auto& [sub, cmd] : subs) add_common(sub);

  s_profile->add_option("--t-grid", c.t_grid, "lo:hi:count (log-spaced) or comma list");
  s_div->add_option("--t", t_opt, "Scale t > 0")->required();
  s_div->add_option("--q", q_list, "Comma list of orders (inf allowed)");
  s_div->add_option("--p", c.p_vector, "Distribution file or 'uniform'");
  s_peel->add_flag("--iterate", c.iterate, "Peel repeatedly until exhausted");
  s_peel->add_option("--max-layers", max_layers, "Stop iterating after this many layers");
  s_prod->add_option("--p-exponent", c.p_exponent, "Product exponent p >= 1");
  s_paths->add_option("--p-exponent", c.p_exponent, "Product exponent p > 1");
  s_paths->add_option("--stops", c.stops, "Intermediate stops per path");
  s_paths->add_option("--k", c.k, "Number of shortest candidate paths");
  s_paths->add_option("--nodes", c.nodes, "Node CSV (id,label,lon,lat)");
  s_paths->add_option("--features", c.features, "Feature vectors (CSV or JSON), aligned by id");
  s_paths->add_option("--config", c.config_file, "JSON config {source,target,stops,K,p_exponent,seed}");
  s_paths->add_option("--source", c.source, "Source node id");
  s_paths->add_option("--target", c.target, "Target node id");
  s_paths->add_flag("--synthetic", c.synthetic, "Use the bundled seeded synthetic dataset");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    exit_code = app.exit(e);
    if (exit_code != 0) exit_code = static_cast<int>(ErrorClass::Input);
    return std::nullopt;
  }
  for (auto& [sub, cmd] : subs)
    if (sub->parsed()) c.command = cmd;
  c.t = t_opt;
  c.max_layers = max_layers;
  c.tol.res = tol_res;
  try {
    if (!q_list.empty()) c.q = parse_double_list(q_list);
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    exit_code = static_cast<int>(ErrorClass::Input);
    return std::nullopt;
  }
  if (c.out_dir.empty()) {
    if (const char* env = std::getenv(kOutDirEnv)) c.out_dir = env;
  }
  exit_code = 0;
  return c;
}

int emit(const RunConfig& config, const RunResult& result) {
  const std::string text = result.result.dump(2) + "\n";
  if (config.out_dir.empty()) {
    (result.exit_code == 0 ? std::cout : std::cerr) << text;
    return result.exit_code;
  }
  try {
    const std::filesystem::path dir(config.out_dir);
    const std::string name = result.exit_code == 0 ? to_string(config.command) + ".json" : "error.json";
    io::atomic_write(dir / name, text);
    for (const auto& [file, content] : result.artifacts) io::atomic_write(dir / file, content);
    if (result.exit_code != 0) std::cerr << text;
    else std::cout << (dir / name).string() << "\n";
  } catch (const std::exception& e) {
    std::cerr << "{\"status\":\"error\",\"error\":{\"code\":\"IoError\",\"message\":" << json(e.what()).dump() << "}}\n";
    return static_cast<int>(ErrorClass::Input);
  }
  return result.exit_code;
}

}  // namespace magpeel::cli
