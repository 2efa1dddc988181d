#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kdeforge/bandwidth.hpp"
#include "kdeforge/distfunc.hpp"
#include "kdeforge/estimator.hpp"
#include "kdeforge/geometry.hpp"
#include "kdeforge/inference.hpp"
#include "kdeforge/sample.hpp"
#include "kdeforge/topology.hpp"

namespace kdeforge::io {

inline constexpr int kSchemaVersion = 1;

struct CsvOptions {
  /// Name of a label column. Requires a header row.
  std::optional<std::string> group_column;
  char delimiter = ',';
};

/// Parsed CSV: numeric columns plus optional labels.
struct Dataset {
  std::vector<std::string> columns;  ///< empty when the input had no header
  PointMatrix values;
  std::vector<std::string> labels;   ///< one per row when a group column was given
};

/// Reads comma-separated numeric rows. The first row is treated as a header
/// when any of its cells is not a number (or always, with a group column).
/// Blank lines are skipped. Errors carry the 1-based line number.
Dataset parse_csv(std::istream& in, const CsvOptions& options = {});
Dataset parse_csv_string(std::string_view text, const CsvOptions& options = {});
Dataset read_csv(const std::string& path, const CsvOptions& options = {});

Sample to_sample(const Dataset& data);

struct Groups {
  std::vector<std::string> labels;  ///< in order of first appearance
  std::vector<Sample> samples;
};

Groups split_groups(const Dataset& data);

/// Shortest representation that round-trips, independent of locale.
std::string format_number(double value);

void write_grid_csv(std::ostream& out, const EvalGrid& grid, std::string_view value_name = "density");
void write_interval_json(std::ostream& out, const IntervalResult& result);
void write_band_json(std::ostream& out, const BandResult& band);
void write_bandwidth_json(std::ostream& out, BandwidthMethod method, double bandwidth,
                          const std::optional<LscvResult>& lscv);
void write_modes_csv(std::ostream& out, const ModeSet& modes);
void write_level_set_csv(std::ostream& out, const EvalGrid& grid, const LevelSet& set);
void write_ridge_csv(std::ostream& out, const RidgeSet& ridge);
void write_partition_csv(std::ostream& out, const EvalGrid& grid, const MorseSmalePartition& partition);
void write_tree_json(std::ostream& out, const EvalGrid& grid, const ClusterTree& tree);
void write_diagram_csv(std::ostream& out, const PersistenceDiagram& diagram);
void write_cdf_csv(std::ostream& out, std::span<const double> xs, std::span<const double> values);
void write_roc_csv(std::ostream& out, const RocCurve& curve, const BandResult* band = nullptr);

}  // namespace kdeforge::io
