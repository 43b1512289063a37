#include "magpeel/io.hpp"

#include <cerrno>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

namespace magpeel::io {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  bool quoted = false;
  for (char c : line) {
    if (c == '"') {
      quoted = !quoted;
    } else if (c == ',' && !quoted) {
      cells.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  cells.push_back(trim(cur));
  return cells;
}

bool parse_number(const std::string& s, double& out) {
  if (s.empty()) return false;
  const char* b = s.c_str();
  char* e = nullptr;
  errno = 0;
  out = std::strtod(b, &e);
  return e == b + s.size() && errno != ERANGE;
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    rows.push_back(split_csv_line(t));
  }
  return rows;
}

Matrix<double> json_to_matrix(const nlohmann::json& j) {
  if (!j.is_array()) throw Error(ErrorCode::ParseError, "expected an array of rows");
  const Index rows = static_cast<Index>(j.size());
  Index cols = -1;
  Matrix<double> m;
  for (Index r = 0; r < rows; ++r) {
    const auto& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array()) throw Error(ErrorCode::ParseError, "row " + std::to_string(r) + " is not an array");
    if (cols < 0) {
      cols = static_cast<Index>(row.size());
      m.resize(rows, cols);
    }
    if (static_cast<Index>(row.size()) != cols) throw Error(ErrorCode::ParseError, "ragged rows");
    for (Index c = 0; c < cols; ++c) {
      const auto& v = row[static_cast<std::size_t>(c)];
      if (!v.is_number()) throw Error(ErrorCode::ParseError, "non-numeric entry");
      m(r, c) = v.get<double>();
    }
  }
  if (rows == 0) throw Error(ErrorCode::ParseError, "empty matrix");
  return m;
}

}  // namespace

Format format_from_string(const std::string& s) {
  if (s.empty() || s == "auto") return Format::Auto;
  if (s == "csv") return Format::Csv;
  if (s == "json") return Format::Json;
  throw Error(ErrorCode::InvalidArgument, "unknown format " + s);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Table parse_csv_table(const std::string& text) {
  auto rows = csv_rows(text);
  Table t;
  if (rows.empty()) throw Error(ErrorCode::ParseError, "CSV has no rows");
  double probe = 0;
  bool header = false;
  for (const auto& cell : rows.front())
    if (!parse_number(cell, probe)) header = true;
  if (header) {
    t.labels = rows.front();
    rows.erase(rows.begin());
  }
  if (rows.empty()) throw Error(ErrorCode::ParseError, "CSV has a header but no data");
  const std::size_t cols = rows.front().size();
  if (header && t.labels.size() != cols) throw Error(ErrorCode::ParseError, "header width differs from data");
  t.values.resize(static_cast<Index>(rows.size()), static_cast<Index>(cols));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != cols) {
      throw Error(ErrorCode::ParseError, "row " + std::to_string(r + 1) + " has " + std::to_string(rows[r].size()) +
                                             " cells, expected " + std::to_string(cols));
    }
    for (std::size_t c = 0; c < cols; ++c) {
      double v = 0;
      if (!parse_number(rows[r][c], v)) {
        throw Error(ErrorCode::ParseError, "cannot parse '" + rows[r][c] + "' at row " + std::to_string(r + 1));
      }
      t.values(static_cast<Index>(r), static_cast<Index>(c)) = v;
    }
  }
  return t;
}

Table parse_json_table(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  Table t;
  if (j.is_array()) {
    t.values = json_to_matrix(j);
    return t;
  }
  if (!j.is_object()) throw Error(ErrorCode::ParseError, "expected an object or array");
  if (j.contains("matrix")) t.values = json_to_matrix(j["matrix"]);
  else if (j.contains("points")) t.values = json_to_matrix(j["points"]);
  else throw Error(ErrorCode::ParseError, "JSON input needs a 'matrix' or 'points' field");
  if (j.contains("labels")) {
    for (const auto& l : j["labels"]) t.labels.push_back(l.is_string() ? l.get<std::string>() : l.dump());
    if (static_cast<Index>(t.labels.size()) != t.values.rows()) {
      throw Error(ErrorCode::ParseError, "label count differs from row count");
    }
  }
  return t;
}

Table read_table(const std::filesystem::path& path, Format format) {
  if (format == Format::Auto) format = path.extension() == ".json" ? Format::Json : Format::Csv;
  const std::string text = read_file(path);
  return format == Format::Json ? parse_json_table(text) : parse_csv_table(text);
}

Vector<double> read_vector(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  if (path.extension() == ".json") {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::ParseError, e.what());
    }
    if (j.is_object() && j.contains("p")) j = j["p"];
    if (!j.is_array()) throw Error(ErrorCode::ParseError, "expected an array of probabilities");
    Vector<double> v(static_cast<Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
      if (!j[i].is_number()) throw Error(ErrorCode::ParseError, "non-numeric probability");
      v(static_cast<Index>(i)) = j[i].get<double>();
    }
    return v;
  }
  const Table t = parse_csv_table(text);
  if (t.values.rows() == 1) return t.values.row(0).transpose();
  if (t.values.cols() == 1) return t.values.col(0);
  throw Error(ErrorCode::ParseError, "vector CSV must have one row or one column");
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string matrix_to_csv(const Matrix<double>& m, const std::vector<std::string>& labels,
                          const std::string& comment) {
  std::string out;
  if (!comment.empty()) out += "# " + comment + "\n";
  if (!labels.empty()) {
    for (std::size_t i = 0; i < labels.size(); ++i) out += (i ? "," : "") + labels[i];
    out += "\n";
  }
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) {
      if (c) out += ',';
      out += format_double(m(r, c));
    }
    out += '\n';
  }
  return out;
}

paths::NodeTable read_node_table(const std::filesystem::path& nodes_path,
                                 const std::filesystem::path& features_path) {
  auto rows = csv_rows(read_file(nodes_path));
  if (rows.empty()) throw Error(ErrorCode::ParseError, "node file is empty");
  double probe = 0;
  if (rows.front().size() >= 4 && !parse_number(rows.front()[2], probe)) rows.erase(rows.begin());
  std::vector<paths::Node> nodes;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() != 4) throw Error(ErrorCode::ParseError, "node rows need id,label,lon,lat");
    paths::Node n{row[0], row[1], 0, 0};
    if (!parse_number(row[2], n.lon) || !parse_number(row[3], n.lat)) {
      throw Error(ErrorCode::ParseError, "bad coordinates for node " + row[0]);
    }
    nodes.push_back(std::move(n));
  }

  std::map<std::string, std::vector<double>> by_id;
  if (features_path.extension() == ".json") {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(read_file(features_path));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::ParseError, e.what());
    }
    if (!j.is_object()) throw Error(ErrorCode::ParseError, "feature JSON must map id -> vector");
    for (auto it = j.begin(); it != j.end(); ++it) by_id[it.key()] = it.value().get<std::vector<double>>();
  } else {
    auto frows = csv_rows(read_file(features_path));
    if (!frows.empty() && frows.front().size() > 1 && !parse_number(frows.front()[1], probe)) frows.erase(frows.begin());
    for (const auto& row : frows) {
      std::vector<double> v;
      for (std::size_t c = 1; c < row.size(); ++c) {
        double x = 0;
        if (!parse_number(row[c], x)) throw Error(ErrorCode::ParseError, "bad feature value for " + row[0]);
        v.push_back(x);
      }
      by_id[row[0]] = std::move(v);
    }
  }
  if (nodes.empty()) throw Error(ErrorCode::ParseError, "no nodes");
  const auto first = by_id.find(nodes.front().id);
  if (first == by_id.end()) throw Error(ErrorCode::ParseError, "no features for node " + nodes.front().id);
  const Index dim = static_cast<Index>(first->second.size());
  Matrix<double> features(static_cast<Index>(nodes.size()), dim);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto it = by_id.find(nodes[i].id);
    if (it == by_id.end()) throw Error(ErrorCode::ParseError, "no features for node " + nodes[i].id);
    if (static_cast<Index>(it->second.size()) != dim) throw Error(ErrorCode::ParseError, "feature width differs");
    for (Index c = 0; c < dim; ++c) features(static_cast<Index>(i), c) = it->second[static_cast<std::size_t>(c)];
  }
  return paths::NodeTable(std::move(nodes), std::move(features));
}

std::string nodes_to_csv(const paths::NodeTable& t) {
  std::string out = "id,label,lon,lat\n";
  for (const auto& n : t.nodes()) out += n.id + "," + n.label + "," + format_double(n.lon) + "," + format_double(n.lat) + "\n";
  return out;
}

std::string features_to_csv(const paths::NodeTable& t) {
  std::string out = "id";
  for (Index c = 0; c < t.features().cols(); ++c) out += ",f" + std::to_string(c + 1);
  out += "\n";
  for (std::size_t i = 0; i < t.size(); ++i) {
    out += t.node(i).id;
    for (Index c = 0; c < t.features().cols(); ++c) out += "," + format_double(t.features()(static_cast<Index>(i), c));
    out += "\n";
  }
  return out;
}

void atomic_write(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + tmp.string());
    out << content;
    if (!out) throw Error(ErrorCode::InvalidArgument, "write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace magpeel::io
