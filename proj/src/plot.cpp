#include "homeolab/plot.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include <fmt/format.h>

#include "homeolab/errors.hpp"

namespace homeolab {

namespace {

std::optional<double> to_number(const std::string& s) {
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string num(double v) { return fmt::format("{:.2f}", v); }

std::string tick_label(double v) {
  if (v != 0.0 && (std::abs(v) >= 1e5 || std::abs(v) < 1e-3)) return fmt::format("{:.2e}", v);
  return fmt::format("{:.4g}", v);
}

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

// viridis-like ramp through five anchors
std::string ramp(double t) {
  static const double anchors[5][3] = {
      {68, 1, 84}, {59, 82, 139}, {33, 145, 140}, {94, 201, 98}, {253, 231, 37}};
  t = std::clamp(t, 0.0, 1.0) * 4.0;
  const int i = std::min(3, static_cast<int>(t));
  const double f = t - i;
  int rgb[3];
  for (int c = 0; c < 3; ++c) rgb[c] = static_cast<int>(std::lround(anchors[i][c] + f * (anchors[i + 1][c] - anchors[i][c])));
  return fmt::format("#{:02x}{:02x}{:02x}", rgb[0], rgb[1], rgb[2]);
}

struct Axis {
  double lo = 0.0;
  double hi = 1.0;
  bool log = false;
  double map(double v, double p0, double p1) const {
    const double a = log ? std::log10(lo) : lo;
    const double b = log ? std::log10(hi) : hi;
    const double x = log ? std::log10(v) : v;
    return p0 + (b == a ? 0.5 : (x - a) / (b - a)) * (p1 - p0);
  }
};

Axis make_axis(const std::vector<double>& vals) {
  Axis ax;
  ax.lo = *std::min_element(vals.begin(), vals.end());
  ax.hi = *std::max_element(vals.begin(), vals.end());
  ax.log = ax.lo > 0.0 && ax.hi / ax.lo >= 16.0;
  if (!ax.log && ax.lo == ax.hi) {
    ax.lo -= 0.5;
    ax.hi += 0.5;
  }
  return ax;
}

std::size_t pick_numeric(const Table& t, const std::string& name, const std::vector<std::size_t>& avoid, bool last) {
  if (!name.empty()) {
    auto c = t.column(name);
    if (!c) throw ParameterError(fmt::format("column '{}' not found", name));
    if (!t.numeric(*c)) throw ParameterError(fmt::format("column '{}' is not numeric", name));
    return *c;
  }
  std::vector<std::size_t> cand;
  for (std::size_t c = 0; c < t.header.size(); ++c) {
    if (t.numeric(c) && std::find(avoid.begin(), avoid.end(), c) == avoid.end()) cand.push_back(c);
  }
  if (cand.empty()) throw ParameterError("table has no usable numeric column");
  return last ? cand.back() : cand.front();
}

constexpr double kW = 640.0;
constexpr double kH = 420.0;
constexpr double kL = 80.0;
constexpr double kR = 150.0;
constexpr double kT = 40.0;
constexpr double kB = 60.0;

void frame(std::ostringstream& os, const std::string& title, const std::string& xl, const std::string& yl,
           const Axis& xa, const Axis& ya) {
  os << fmt::format("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">\n",
                    kW, kH, kW, kH);
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << fmt::format("<text x=\"{}\" y=\"22\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\">{}</text>\n",
                    num(kW / 2), escape(title));
  os << fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n", num(kL),
                    num(kT), num(kW - kL - kR), num(kH - kT - kB));
  for (int i = 0; i <= 4; ++i) {
    const double fx = i / 4.0;
    const double vx = xa.log ? std::pow(10.0, std::log10(xa.lo) + fx * (std::log10(xa.hi) - std::log10(xa.lo)))
                             : xa.lo + fx * (xa.hi - xa.lo);
    const double px = kL + fx * (kW - kL - kR);
    os << fmt::format("<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">{}</text>\n",
                      num(px), num(kH - kB + 16), tick_label(vx));
    const double vy = ya.log ? std::pow(10.0, std::log10(ya.lo) + fx * (std::log10(ya.hi) - std::log10(ya.lo)))
                             : ya.lo + fx * (ya.hi - ya.lo);
    const double py = kH - kB - fx * (kH - kT - kB);
    os << fmt::format("<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">{}</text>\n",
                      num(kL - 6), num(py + 4), tick_label(vy));
  }
  os << fmt::format("<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">{}{}</text>\n",
                    num(kL + (kW - kL - kR) / 2), num(kH - 18), escape(xl), xa.log ? " (log)" : "");
  os << fmt::format("<text x=\"18\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\" "
                    "transform=\"rotate(-90 18 {})\">{}{}</text>\n",
                    num(kT + (kH - kT - kB) / 2), num(kT + (kH - kT - kB) / 2), escape(yl), ya.log ? " (log)" : "");
}

std::string line_plot(const Table& t, const PlotOptions& opt) {
  const std::size_t xc = pick_numeric(t, opt.x, {}, false);
  const std::size_t yc = pick_numeric(t, opt.y, {xc}, true);
  std::optional<std::size_t> gc;
  if (!opt.group.empty()) {
    gc = t.column(opt.group);
    if (!gc) throw ParameterError(fmt::format("column '{}' not found", opt.group));
  } else {
    for (std::size_t c = 0; c < t.header.size(); ++c) {
      if (!t.numeric(c)) {
        gc = c;
        break;
      }
    }
  }
  // series -> x -> values; several values at one x are drawn as points around their median
  std::map<std::string, std::map<double, std::vector<double>>> series;
  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& row : t.rows) {
    const double x = *to_number(row[xc]);
    const double y = *to_number(row[yc]);
    series[gc ? row[*gc] : t.header[yc]][x].push_back(y);
    xs.push_back(x);
    ys.push_back(y);
  }
  const Axis xa = make_axis(xs);
  Axis ya = make_axis(ys);
  std::ostringstream os;
  frame(os, opt.title.empty() ? t.header[yc] + " vs " + t.header[xc] : opt.title, t.header[xc], t.header[yc], xa, ya);
  const double x0 = kL, x1 = kW - kR, y0 = kH - kB, y1 = kT;
  std::size_t s = 0;
  for (const auto& [name, pts] : series) {
    const char* colour = kPalette[s % std::size(kPalette)];
    std::string path;
    for (const auto& [x, vals] : pts) {
      std::vector<double> v = vals;
      std::sort(v.begin(), v.end());
      const double med = v.size() % 2 ? v[v.size() / 2] : 0.5 * (v[v.size() / 2 - 1] + v[v.size() / 2]);
      path += fmt::format("{}{},{} ", path.empty() ? "M" : "L", num(xa.map(x, x0, x1)), num(ya.map(med, y0, y1)));
      for (double y : v) {
        os << fmt::format("<circle cx=\"{}\" cy=\"{}\" r=\"2.5\" fill=\"{}\" fill-opacity=\"0.5\"/>\n",
                          num(xa.map(x, x0, x1)), num(ya.map(y, y0, y1)), colour);
      }
    }
    os << fmt::format("<path d=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.8\"/>\n", path, colour);
    const double ly = kT + 14.0 + 18.0 * static_cast<double>(s);
    os << fmt::format("<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{}\" stroke-width=\"2\"/>\n", num(kW - kR + 10),
                      num(ly), num(kW - kR + 30), num(ly), colour);
    os << fmt::format("<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\">{}</text>\n",
                      num(kW - kR + 35), num(ly + 4), escape(name));
    ++s;
  }
  os << "</svg>\n";
  return os.str();
}

std::string heatmap(const Table& t, const PlotOptions& opt) {
  auto named = [&](const std::string& given, const char* fallback) -> std::string {
    if (!given.empty()) return given;
    return t.column(fallback) ? std::string(fallback) : std::string();
  };
  const std::size_t xc = pick_numeric(t, named(opt.x, "k"), {}, false);
  const std::size_t yc = pick_numeric(t, named(opt.y, "j"), {xc}, false);
  const std::size_t vc = pick_numeric(t, opt.value, {xc, yc}, true);
  std::vector<double> xs, ys, vs;
  for (const auto& row : t.rows) {
    xs.push_back(*to_number(row[xc]));
    ys.push_back(*to_number(row[yc]));
    vs.push_back(*to_number(row[vc]));
  }
  std::vector<double> ux = xs, uy = ys;
  std::sort(ux.begin(), ux.end());
  ux.erase(std::unique(ux.begin(), ux.end()), ux.end());
  std::sort(uy.begin(), uy.end());
  uy.erase(std::unique(uy.begin(), uy.end()), uy.end());
  const double vlo = *std::min_element(vs.begin(), vs.end());
  const double vhi = *std::max_element(vs.begin(), vs.end());
  Axis xa{ux.front(), ux.back(), false};
  Axis ya{uy.front(), uy.back(), false};
  if (xa.lo == xa.hi) xa.hi = xa.lo + 1.0;
  if (ya.lo == ya.hi) ya.hi = ya.lo + 1.0;
  std::ostringstream os;
  frame(os, opt.title.empty() ? t.header[vc] : opt.title, t.header[xc], t.header[yc], xa, ya);
  const double pw = (kW - kL - kR) / static_cast<double>(ux.size());
  const double ph = (kH - kT - kB) / static_cast<double>(uy.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const auto xi = static_cast<double>(std::lower_bound(ux.begin(), ux.end(), xs[i]) - ux.begin());
    const auto yi = static_cast<double>(std::lower_bound(uy.begin(), uy.end(), ys[i]) - uy.begin());
    const double tv = vhi == vlo ? 0.5 : (vs[i] - vlo) / (vhi - vlo);
    os << fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\"/>\n", num(kL + xi * pw),
                      num(kH - kB - (yi + 1.0) * ph), num(pw + 0.05), num(ph + 0.05), ramp(tv));
  }
  for (int i = 0; i <= 10; ++i) {
    const double f = i / 10.0;
    os << fmt::format("<rect x=\"{}\" y=\"{}\" width=\"16\" height=\"{}\" fill=\"{}\"/>\n", num(kW - kR + 20),
                      num(kH - kB - (f + 0.1) * (kH - kT - kB) / 1.1), num((kH - kT - kB) / 11.0 + 0.5), ramp(f));
  }
  os << fmt::format("<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\">{}</text>\n", num(kW - kR + 40),
                    num(kT + 12), tick_label(vhi));
  os << fmt::format("<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\">{}</text>\n", num(kW - kR + 40),
                    num(kH - kB), tick_label(vlo));
  os << "</svg>\n";
  return os.str();
}

}  // namespace

std::optional<std::size_t> Table::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  return std::nullopt;
}

bool Table::numeric(std::size_t col) const {
  if (rows.empty()) return false;
  return std::all_of(rows.begin(), rows.end(), [&](const auto& r) { return to_number(r[col]).has_value(); });
}

Table parse_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  Table t;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    auto cells = split(line);
    if (t.header.empty()) {
      t.header = std::move(cells);
      continue;
    }
    if (cells.size() != t.header.size()) {
      throw ParameterError(
          fmt::format("malformed table: line {} has {} cells, header has {}", lineno, cells.size(), t.header.size()));
    }
    t.rows.push_back(std::move(cells));
  }
  if (t.header.empty()) throw ParameterError("malformed table: no header line");
  return t;
}

Table read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParameterError(fmt::format("cannot open table '{}'", path));
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str());
}

PlotKind plot_kind_from_string(const std::string& s) {
  if (s == "line") return PlotKind::line;
  if (s == "heatmap") return PlotKind::heatmap;
  throw ConfigError(fmt::format("unknown plot kind '{}' (valid: line, heatmap)", s));
}

std::string render_svg(const Table& t, const PlotOptions& opt) {
  if (t.rows.empty()) throw ParameterError("table is empty; nothing to plot");
  return opt.kind == PlotKind::line ? line_plot(t, opt) : heatmap(t, opt);
}

void emit_plot(const std::string& csv_path, const PlotOptions& opt, const std::string& out_path) {
  const std::string svg = render_svg(read_csv(csv_path), opt);
  write_file_atomic(out_path, svg);
}

void write_file_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", tmp.string()));
    out << content;
    out.flush();
    if (!out) throw std::runtime_error(fmt::format("write to '{}' failed", tmp.string()));
  }
  fs::rename(tmp, target);
}

}  // namespace homeolab
