#pragma once

#include <optional>
#include <string>
#include <vector>

#include "continuum/fedsec.hpp"
#include "continuum/pipeline.hpp"
#include "continuum/stgnn.hpp"

namespace continuum {

struct ValidationError : std::runtime_error {
  explicit ValidationError(const std::string& what)
      : std::runtime_error(what) {}
};

struct IngestSection {
  std::string format = "streamspot";
  std::vector<std::string> inputs;
  std::string labels;
  std::string out;
};

struct SnapshotSection {
  uint32_t n = 3;
  std::string in;
  std::string out;
  std::string report;
};

struct DetectSection {
  uint32_t k = 5;
  double benign_train_frac = 0.7;
  double attack_val_frac = 0.5;
  std::string level = "graph";
};

struct FederationSection {
  uint32_t clients = 3;
  uint32_t threshold = 2;
  uint32_t rounds = 2;
  uint32_t local_epochs = 2;
};

// Declarative run configuration; every consumed field is validated before a
// stage runs and unknown keys are rejected.
struct RunConfig {
  uint64_t seed = 0;
  unsigned jobs = 1;
  bool serial = true;
  IngestSection ingest;
  SnapshotSection snapshot;
  ModelConfig model;  // d_node/d_edge filled from vocabularies at run time
  DetectSection detect;
  FederationSection federation;

  void validate() const;
};

RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::string& path);

std::string model_config_to_json(const ModelConfig& cfg);
ModelConfig model_config_from_json(const std::string& text);

}  // namespace continuum
