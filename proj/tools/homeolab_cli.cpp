// homeolab command-line runner.
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "homeolab/corpus.hpp"
#include "homeolab/errors.hpp"
#include "homeolab/experiments.hpp"
#include "homeolab/plot.hpp"

namespace {

constexpr int kExitPass = 0;
constexpr int kExitThreshold = 1;
constexpr int kExitConfig = 2;

nlohmann::json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw homeolab::ConfigError(fmt::format("cannot open '{}'", path));
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw homeolab::ConfigError(fmt::format("'{}' is not valid JSON: {}", path, e.what()));
  }
}

int cmd_run(const std::string& config_path, const std::string& out_override) {
  nlohmann::json j = load_json(config_path);
  if (!out_override.empty() && j.is_object()) j["output_dir"] = out_override;
  const auto cfg = homeolab::parse_experiment_config(j);
  const auto rep = homeolab::run_experiment(cfg);
  std::cout << nlohmann::json{{"experiment", rep.experiment}, {"pass", rep.pass}, {"summary", rep.summary}}.dump(2)
            << "\n";
  for (const auto& f : rep.files) std::cerr << "wrote " << f << "\n";
  return rep.pass ? kExitPass : kExitThreshold;
}

int cmd_corpus(const std::string& spec_path, const std::string& kind, const std::string& out) {
  homeolab::CorpusSpec spec;
  if (!spec_path.empty()) {
    spec = load_json(spec_path).get<homeolab::CorpusSpec>();
  } else if (!kind.empty()) {
    spec = nlohmann::json{{"kind", kind}}.get<homeolab::CorpusSpec>();
  }
  const auto f = homeolab::generate(spec);
  const std::string body = nlohmann::json{{"corpus", spec}, {"function", f}}.dump() + "\n";
  if (out.empty()) {
    std::cout << body;
  } else {
    homeolab::write_file_atomic(out, body);
  }
  return kExitPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fourier change-of-variable laboratory"};
  app.require_subcommand(1);
  app.set_version_flag("--version", homeolab::version_string());

  auto* run = app.add_subcommand("run", "run the experiment described by a JSON config");
  std::string config_path;
  std::string out_dir;
  run->add_option("config", config_path, "config file")->required();
  run->add_option("--out", out_dir, fmt::format("output directory (default ${}/<experiment>)", homeolab::kOutputDirEnv));

  auto* list = app.add_subcommand("list", "list experiment names");

  auto* plot = app.add_subcommand("plot", "render a CSV table as SVG");
  std::string csv_path;
  std::string kind = "line";
  std::string plot_out;
  homeolab::PlotOptions po;
  plot->add_option("csv", csv_path, "input table")->required();
  plot->add_option("--kind", kind, "line or heatmap");
  plot->add_option("--out", plot_out, "output file (default: table path with .svg)");
  plot->add_option("--x", po.x, "x column");
  plot->add_option("--y", po.y, "y column");
  plot->add_option("--value", po.value, "heatmap value column");
  plot->add_option("--group", po.group, "series column for line plots");
  plot->add_option("--title", po.title, "plot title");

  auto* corpus = app.add_subcommand("corpus", "sample a corpus function to JSON");
  std::string spec_path;
  std::string corpus_kind;
  std::string corpus_out;
  corpus->add_option("--spec", spec_path, "corpus spec JSON file");
  corpus->add_option("--kind", corpus_kind, "corpus kind with default parameters");
  corpus->add_option("--out", corpus_out, "output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitPass : kExitConfig;
  }

  try {
    if (*run) return cmd_run(config_path, out_dir);
    if (*list) {
      for (const auto& n : homeolab::experiment_names()) std::cout << n << "\n";
      return kExitPass;
    }
    if (*plot) {
      po.kind = homeolab::plot_kind_from_string(kind);
      if (plot_out.empty()) {
        plot_out = csv_path;
        const auto dot = plot_out.rfind('.');
        if (dot != std::string::npos && plot_out.find('/', dot) == std::string::npos) plot_out.resize(dot);
        plot_out += ".svg";
      }
      homeolab::emit_plot(csv_path, po, plot_out);
      std::cerr << "wrote " << plot_out << "\n";
      return kExitPass;
    }
    if (*corpus) return cmd_corpus(spec_path, corpus_kind, corpus_out);
  } catch (const homeolab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const homeolab::ParameterError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const homeolab::NumericalAlarm& e) {
    std::cerr << "numerical alarm: " << e.what() << "\n";
    return kExitThreshold;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}
