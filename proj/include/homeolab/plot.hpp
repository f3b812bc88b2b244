#pragma once

#include <optional>
#include <string>
#include <vector>

namespace homeolab {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::optional<std::size_t> column(const std::string& name) const;
  bool numeric(std::size_t col) const;
};

// Plain comma-separated table with a header line; no quoting.
Table read_csv(const std::string& path);
Table parse_csv(const std::string& text);

enum class PlotKind { line, heatmap };
PlotKind plot_kind_from_string(const std::string& s);

struct PlotOptions {
  PlotKind kind = PlotKind::line;
  std::string x;      // column names; empty picks a default
  std::string y;
  std::string value;  // heatmap colour
  std::string group;  // line series
  std::string title;
};

// Self-contained SVG; identical input gives identical bytes.
std::string render_svg(const Table& t, const PlotOptions& opt);

// Reads the table, renders it and writes the SVG atomically.
void emit_plot(const std::string& csv_path, const PlotOptions& opt, const std::string& out_path);

// Writes through a temporary file in the same directory and renames it.
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace homeolab
