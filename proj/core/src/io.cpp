#include "kdeforge/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "kdeforge/error.hpp"

namespace kdeforge::io {

namespace {

using nlohmann::json;

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view line, char delimiter) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(delimiter, start);
    cells.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return cells;
}

std::optional<double> parse_number(std::string_view cell) {
  if (cell.empty()) return std::nullopt;
  if (cell.front() == '+') cell.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) return std::nullopt;
  return value;
}

json point_json(const PointMatrix& points, Eigen::Index row) {
  if (points.cols() == 1) return points(row, 0);
  json p = json::array();
  for (Eigen::Index c = 0; c < points.cols(); ++c) p.push_back(points(row, c));
  return p;
}

json interval_body(const IntervalResult& r) {
  json grid = json::array();
  for (Eigen::Index i = 0; i < r.points.rows(); ++i) grid.push_back(point_json(r.points, i));
  json j;
  j["schema"] = kSchemaVersion;
  j["grid"] = std::move(grid);
  j["center"] = r.center;
  j["lower"] = r.lower;
  j["upper"] = r.upper;
  j["alpha"] = r.alpha;
  j["method"] = std::string(to_string(r.method));
  j["target"] = std::string(to_string(r.target));
  if (std::any_of(r.degenerate.begin(), r.degenerate.end(), [](bool b) { return b; })) {
    std::vector<int> flags(r.degenerate.begin(), r.degenerate.end());
    j["degenerate"] = flags;
  }
  j["warnings"] = r.warnings;
  return j;
}

void write_coords_header(std::ostream& out, int dim) {
  for (int c = 0; c < dim; ++c) out << (c ? "," : "") << 'x' << (c + 1);
}

void write_coords(std::ostream& out, const Point& p) {
  for (Eigen::Index c = 0; c < p.size(); ++c) out << (c ? "," : "") << format_number(p[c]);
}

}  // namespace

Dataset parse_csv(std::istream& in, const CsvOptions& options) {
  Dataset data;
  std::vector<double> flat;
  std::size_t width = 0;
  std::optional<std::size_t> group_index;
  bool first_row = true;
  std::size_t rows = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto cells = split(line, options.delimiter);
    if (first_row) {
      first_row = false;
      bool numeric = true;
      for (auto c : cells) numeric = numeric && parse_number(c).has_value();
      if (options.group_column || !numeric) {
        for (auto c : cells) data.columns.emplace_back(c);
        if (options.group_column) {
          const auto it = std::find(data.columns.begin(), data.columns.end(), *options.group_column);
          if (it == data.columns.end())
            throw DataError("group column '" + *options.group_column + "' not in header", line_no);
          group_index = static_cast<std::size_t>(it - data.columns.begin());
          data.columns.erase(it);
        }
        width = cells.size();
        continue;
      }
      width = cells.size();
    }
    if (cells.size() != width)
      throw DataError("expected " + std::to_string(width) + " fields, found " + std::to_string(cells.size()),
                      line_no);
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (group_index && c == *group_index) {
        data.labels.emplace_back(cells[c]);
        continue;
      }
      const auto v = parse_number(cells[c]);
      if (!v) throw DataError("non-numeric value '" + std::string(cells[c]) + "'", line_no);
      if (!std::isfinite(*v)) throw DataError("non-finite value '" + std::string(cells[c]) + "'", line_no);
      flat.push_back(*v);
    }
    ++rows;
  }
  if (rows == 0) throw DataError("no data rows");
  const std::size_t cols = width - (group_index ? 1 : 0);
  if (cols == 0) throw DataError("no numeric columns");
  data.values = Eigen::Map<const PointMatrix>(flat.data(), static_cast<Eigen::Index>(rows),
                                              static_cast<Eigen::Index>(cols));
  return data;
}

Dataset parse_csv_string(std::string_view text, const CsvOptions& options) {
  std::istringstream in{std::string(text)};
  return parse_csv(in, options);
}

Dataset read_csv(const std::string& path, const CsvOptions& options) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  return parse_csv(in, options);
}

Sample to_sample(const Dataset& data) { return Sample(data.values); }

Groups split_groups(const Dataset& data) {
  if (data.labels.size() != static_cast<std::size_t>(data.values.rows()))
    throw DataError("dataset has no group labels");
  Groups groups;
  std::map<std::string, std::size_t> index;
  std::vector<std::vector<Eigen::Index>> rows;
  for (std::size_t i = 0; i < data.labels.size(); ++i) {
    auto [it, inserted] = index.try_emplace(data.labels[i], groups.labels.size());
    if (inserted) {
      groups.labels.push_back(data.labels[i]);
      rows.emplace_back();
    }
    rows[it->second].push_back(static_cast<Eigen::Index>(i));
  }
  for (const auto& r : rows) {
    PointMatrix m(static_cast<Eigen::Index>(r.size()), data.values.cols());
    for (std::size_t k = 0; k < r.size(); ++k) m.row(static_cast<Eigen::Index>(k)) = data.values.row(r[k]);
    groups.samples.emplace_back(std::move(m));
  }
  return groups;
}

std::string format_number(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ec == std::errc() ? ptr : buf);
}

void write_grid_csv(std::ostream& out, const EvalGrid& grid, std::string_view value_name) {
  write_coords_header(out, grid.dim());
  out << ',' << value_name << '\n';
  for (std::size_t i = 0; i < grid.size(); ++i) {
    write_coords(out, grid.point(i));
    out << ',' << format_number(grid.value(i)) << '\n';
  }
}

void write_interval_json(std::ostream& out, const IntervalResult& result) {
  out << interval_body(result).dump(1) << '\n';
}

void write_band_json(std::ostream& out, const BandResult& band) {
  json j = interval_body(band);
  j["critical_value"] = band.critical_value;
  j["constant_width"] = band.constant_width;
  if (!band.display_center.empty()) j["display_center"] = band.display_center;
  out << j.dump(1) << '\n';
}

void write_bandwidth_json(std::ostream& out, BandwidthMethod method, double bandwidth,
                          const std::optional<LscvResult>& lscv) {
  json j;
  j["schema"] = kSchemaVersion;
  j["method"] = std::string(to_string(method));
  j["bandwidth"] = bandwidth;
  if (lscv) {
    j["candidates"] = lscv->candidates;
    j["criterion"] = lscv->criterion;
  }
  out << j.dump(1) << '\n';
}

void write_modes_csv(std::ostream& out, const ModeSet& modes) {
  write_coords_header(out, static_cast<int>(modes.modes.cols()));
  out << ",density\n";
  for (std::size_t k = 0; k < modes.count(); ++k) {
    write_coords(out, modes.modes.row(static_cast<Eigen::Index>(k)).transpose());
    out << ',' << format_number(modes.densities[k]) << '\n';
  }
}

void write_level_set_csv(std::ostream& out, const EvalGrid& grid, const LevelSet& set) {
  write_coords_header(out, grid.dim());
  out << ",density,in_set,component\n";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    write_coords(out, grid.point(i));
    out << ',' << format_number(grid.value(i)) << ',' << int(set.mask[i]) << ',' << set.labels[i] << '\n';
  }
}

void write_ridge_csv(std::ostream& out, const RidgeSet& ridge) {
  write_coords_header(out, static_cast<int>(ridge.points.cols()));
  out << ",projected_gradient_norm,lambda2,start\n";
  for (std::size_t k = 0; k < ridge.size(); ++k) {
    write_coords(out, ridge.points.row(static_cast<Eigen::Index>(k)).transpose());
    out << ',' << format_number(ridge.projected_gradient_norms[k]) << ','
        << format_number(ridge.lambda2[k]) << ',' << ridge.start_index[k] << '\n';
  }
}

void write_partition_csv(std::ostream& out, const EvalGrid& grid, const MorseSmalePartition& partition) {
  write_coords_header(out, grid.dim());
  out << ",density,ascent,descent,cell\n";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    write_coords(out, grid.point(i));
    out << ',' << format_number(grid.value(i)) << ',' << partition.ascent[i] << ','
        << partition.descent[i] << ',' << partition.cell[i] << '\n';
  }
}

void write_tree_json(std::ostream& out, const EvalGrid& grid, const ClusterTree& tree) {
  std::function<json(int)> node = [&](int id) {
    const auto& n = tree.nodes[static_cast<std::size_t>(id)];
    const Point p = grid.point(n.representative);
    json j;
    j["id"] = n.id;
    j["birth"] = n.birth;
    j["death"] = n.death;
    j["representative"] = p.size() == 1 ? json(p[0]) : json(std::vector<double>(p.begin(), p.end()));
    json children = json::array();
    for (int c : n.children) children.push_back(node(c));
    j["children"] = std::move(children);
    return j;
  };
  json j;
  j["schema"] = kSchemaVersion;
  j["leaves"] = tree.leaf_count();
  j["root"] = tree.root >= 0 ? node(tree.root) : json(nullptr);
  out << j.dump(1) << '\n';
}

void write_diagram_csv(std::ostream& out, const PersistenceDiagram& diagram) {
  out << "birth,death\n";
  for (const auto& p : diagram.pairs) out << format_number(p.birth) << ',' << format_number(p.death) << '\n';
}

void write_cdf_csv(std::ostream& out, std::span<const double> xs, std::span<const double> values) {
  if (xs.size() != values.size()) throw InvalidArgument("cdf output: size mismatch");
  out << "x,cdf\n";
  for (std::size_t i = 0; i < xs.size(); ++i) out << format_number(xs[i]) << ',' << format_number(values[i]) << '\n';
}

void write_roc_csv(std::ostream& out, const RocCurve& curve, const BandResult* band) {
  out << "t,roc,lower,upper\n";
  for (std::size_t k = 0; k < curve.t.size(); ++k) {
    out << format_number(curve.t[k]) << ',' << format_number(curve.roc[k]) << ',';
    if (band)
      out << format_number(band->lower[k]) << ',' << format_number(band->upper[k]);
    else
      out << ',';
    out << '\n';
  }
}

}  // namespace kdeforge::io
