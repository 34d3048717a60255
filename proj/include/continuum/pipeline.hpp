#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "continuum/detect.hpp"
#include "continuum/ingest.hpp"
#include "continuum/snapshot.hpp"
#include "continuum/stgnn.hpp"

namespace continuum {

// Snapshot stage: reads an ingest directory, writes per-graph snapshot JSON
// files plus the compression report.
//   <out>/vocab_nodes.txt, vocab_edges.txt, labels.json,
//   <out>/graphs/<gid>/snap_00000.json ...
CompressionReport run_snapshot_stage(const std::string& ingest_dir, uint32_t n,
                                     const std::string& out_dir,
                                     const std::string& report_csv = "");

std::vector<GraphSequence> load_sequences(const std::string& snapshot_dir);

// graph_id -> malicious node ids (dense), for node-level datasets.
using NodeLabels = std::map<std::string, std::set<uint64_t>>;
NodeLabels load_node_labels(const std::string& path);
void save_node_labels(const NodeLabels& labels, const std::string& path);

struct SplitConfig {
  double benign_train = 0.7;  // remainder of benign splits evenly val/test
  double attack_val = 0.5;    // attacks split val/test
  uint64_t seed = 0;
};

struct DatasetSplit {
  std::vector<GraphSequence> train_benign;
  std::vector<GraphSequence> val;
  std::vector<GraphSequence> test;
};

DatasetSplit split_dataset(std::vector<GraphSequence> all,
                           const SplitConfig& cfg);

// Mean-pooled encoder embeddings, one row per graph (evaluation mode).
std::vector<std::vector<double>> embed_graphs(
    const Autoencoder& model, const std::vector<GraphSequence>& graphs);

// Encoder node embeddings for one graph (evaluation mode).
std::vector<std::vector<double>> embed_nodes(const Autoencoder& model,
                                             const GraphSequence& graph);

AnomalyReport evaluate_graph_level(const Autoencoder& model,
                                   const BenignIndex& index,
                                   const std::vector<GraphSequence>& test,
                                   double threshold);

AnomalyReport evaluate_node_level(const Autoencoder& model,
                                  const BenignIndex& index,
                                  const std::vector<GraphSequence>& test,
                                  const NodeLabels& malicious_nodes,
                                  double threshold);

// Scores for threshold selection, same item order as the matching evaluate_*.
std::vector<double> score_graphs(const Autoencoder& model,
                                 const BenignIndex& index,
                                 const std::vector<GraphSequence>& graphs);
std::vector<bool> attack_flags(const std::vector<GraphSequence>& graphs);

}  // namespace continuum
