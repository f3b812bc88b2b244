#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <doctest.h>

#include "homeolab/errors.hpp"
#include "homeolab/experiments.hpp"
#include "homeolab/plot.hpp"

using namespace homeolab;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("homeolab_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_CASE("config parsing") {
  CHECK_THROWS_AS(parse_experiment_config(nlohmann::json::array()), ConfigError);
  CHECK_THROWS_AS(parse_experiment_config({{"experiment", "kernel-decay"}, {"bogus", 1}}), ConfigError);
  CHECK_THROWS_AS(parse_experiment_config({{"params", {}}}), ConfigError);
  try {
    parse_experiment_config({{"experiment", "nope"}});
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("derand-full") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_experiment_config({{"experiment", "df-stats"}, {"formats", {"pdf"}}}), ConfigError);
  CHECK_THROWS_AS(parse_experiment_config({{"experiment", "df-stats"}, {"solver", {{"block", 1}}}}), ConfigError);
  CHECK_THROWS_AS(parse_experiment_config({{"experiment", "df-stats"}, {"corpus", {{"kind", "nope"}}}}), ConfigError);

  const auto c = parse_experiment_config({{"experiment", "df-stats"}, {"output_dir", "x"}, {"solver", {{"block", 4}}}});
  CHECK(c.output_dir == "x");
  CHECK(c.derand.solver.block == 4);
  CHECK_FALSE(c.corpus_given);
  CHECK(experiment_names().size() == 8);
}

TEST_CASE("kernel-decay at n=64 writes n^2 rows and a constant") {
  const fs::path dir = scratch("kernel");
  auto cfg = parse_experiment_config(
      {{"experiment", "kernel-decay"}, {"output_dir", dir.string()}, {"params", {{"n_list", {64}}}}});
  const auto rep = run_experiment(cfg);
  CHECK(rep.pass);
  CHECK(rep.summary.at("C").get<double>() <= 4.0);
  const std::string csv = slurp(dir / "kernel_decay.csv");
  CHECK(count_lines(csv) == 64 * 64 + 1);
  CHECK(fs::exists(dir / "config.json"));
  CHECK(fs::exists(dir / "report.json"));
  CHECK(slurp(dir / "VERSION") == version_string() + "\n");
  // same configuration, same bytes
  const auto again = run_experiment(cfg);
  CHECK(slurp(dir / "kernel_decay.csv") == csv);
  fs::remove_all(dir);
}

TEST_CASE("experiment outputs are reproducible") {
  const fs::path a = scratch("df_a");
  const fs::path b = scratch("df_b");
  nlohmann::json j = {{"experiment", "df-stats"}, {"params", {{"samples", 500}, {"ks_bound", 0.1}, {"coupling_seeds", 5}}}};
  j["output_dir"] = a.string();
  run_experiment(parse_experiment_config(j));
  j["output_dir"] = b.string();
  run_experiment(parse_experiment_config(j));
  CHECK(slurp(a / "df_stats.csv") == slurp(b / "df_stats.csv"));
  CHECK_FALSE(slurp(a / "df_stats.csv").empty());
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("csv parsing") {
  const Table t = parse_csv("n,solver,value\n1,iid,2.5\n2,iid,3\n");
  CHECK(t.header.size() == 3);
  CHECK(t.rows.size() == 2);
  CHECK(t.column("value") == std::optional<std::size_t>(2));
  CHECK_FALSE(t.column("x").has_value());
  CHECK(t.numeric(0));
  CHECK_FALSE(t.numeric(1));
  CHECK_THROWS_AS(parse_csv("a,b\n1\n"), ParameterError);
  CHECK_THROWS_AS(parse_csv(""), ParameterError);
}

TEST_CASE("plots are deterministic") {
  const Table t = parse_csv("n,solver,discrepancy\n64,iid,2.7\n512,iid,3.6\n4096,iid,4.2\n64,hier,0.38\n512,hier,0.39\n4096,hier,0.39\n");
  PlotOptions o;
  o.group = "solver";
  o.title = "trend";
  const std::string svg = render_svg(t, o);
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("trend") != std::string::npos);
  CHECK(svg == render_svg(t, o));
  const Table h = parse_csv("k,j,w\n0,0,1\n0,1,0.5\n1,0,0.5\n1,1,1\n");
  PlotOptions ho;
  ho.kind = PlotKind::heatmap;
  CHECK(render_svg(h, ho) == render_svg(h, ho));
  CHECK_THROWS_AS(plot_kind_from_string("pie"), ConfigError);
}

TEST_CASE("plotting an empty table fails without writing") {
  const fs::path dir = scratch("plot");
  fs::create_directories(dir);
  {
    std::ofstream(dir / "empty.csv") << "n,value\n";
  }
  const fs::path out = dir / "empty.svg";
  CHECK_THROWS_AS(emit_plot((dir / "empty.csv").string(), PlotOptions{}, out.string()), ParameterError);
  CHECK_FALSE(fs::exists(out));
  CHECK_THROWS_AS(emit_plot((dir / "missing.csv").string(), PlotOptions{}, out.string()), ParameterError);
  fs::remove_all(dir);
}

TEST_CASE("atomic writes") {
  const fs::path dir = scratch("atomic");
  const fs::path p = dir / "sub" / "file.txt";
  write_file_atomic(p.string(), "one");
  write_file_atomic(p.string(), "two");
  CHECK(slurp(p) == "two");
  CHECK_FALSE(fs::exists(p.string() + ".tmp"));
  fs::remove_all(dir);
}
