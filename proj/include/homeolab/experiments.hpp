#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "homeolab/corpus.hpp"
#include "homeolab/derand.hpp"
#include "homeolab/signs.hpp"

namespace homeolab {

inline constexpr const char* kOutputDirEnv = "HOMEOLAB_OUT";

struct ExperimentConfig {
  std::string experiment;
  CorpusSpec corpus;
  bool corpus_given = false;
  HierarchicalConfig solver;
  DerandConfig derand;
  std::vector<std::uint64_t> seeds;
  std::string output_dir;
  std::vector<std::string> formats{"csv", "json"};
  nlohmann::json params = nlohmann::json::object();  // experiment-specific knobs
};

std::vector<std::string> experiment_names();

// Validates and fills defaults; throws ConfigError.
ExperimentConfig parse_experiment_config(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& c);

struct ExperimentReport {
  std::string experiment;
  bool pass = false;
  nlohmann::json summary;
  std::vector<std::string> files;
};

/// Runs one named experiment and writes its outputs (CSV, JSON, optional
/// SVG), the effective configuration and a version stamp into the output
/// directory.
ExperimentReport run_experiment(const ExperimentConfig& cfg);

std::string version_string();

}  // namespace homeolab
