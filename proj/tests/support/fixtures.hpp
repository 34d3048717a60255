#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "continuum/ingest.hpp"
#include "continuum/pipeline.hpp"
#include "continuum/provgraph.hpp"
#include "continuum/stgnn.hpp"

namespace continuum::fixtures {

// Synthetic datasets shaped like the published benchmarks: multi-scenario
// host logs with heavy parallel-edge redundancy, one behavioral family per
// scenario, attacks structurally distinct from all benign families.

struct InMemoryDataset {
  TypeVocabulary node_vocab{TypeVocabulary::Kind::node};
  TypeVocabulary edge_vocab{TypeVocabulary::Kind::edge};
  std::vector<ProvenanceGraph> graphs;
  std::map<std::string, Label> labels;
  NodeLabels node_labels;  // node-level datasets only
};

// StreamSpot-shaped: 6 scenarios (5 benign, 1 attack), tab-separated
// single-char types, no timestamps.
InMemoryDataset streamspot_like(uint32_t graphs_per_scenario, uint64_t seed);

// Wget-shaped: one canonical-format graph per run, explicit timestamps,
// attacks carry a late-interval payload-execution phase.
InMemoryDataset wget_like(uint32_t benign, uint32_t attack, uint64_t seed);

// Node-level: benign service graphs; test graphs contain injected
// high-fanout nodes with out-of-family interactions, listed in node_labels.
InMemoryDataset node_level(uint32_t benign_graphs, uint32_t test_graphs,
                           uint64_t seed);

// Segment + compress every graph into n snapshots.
std::vector<GraphSequence> to_sequences(const InMemoryDataset& ds,
                                        uint32_t n_snapshots);

// Writes ds in StreamSpot edge-list format (one TSV) plus labels.json.
struct WrittenFixture {
  std::vector<std::string> input_paths;
  std::string labels_path;
};
WrittenFixture write_streamspot_file(const InMemoryDataset& ds,
                                     const std::string& dir);
// Writes each graph as a canonical TSV file plus labels.json.
WrittenFixture write_canonical_files(const InMemoryDataset& ds,
                                     const std::string& dir);

// 4-node, 2-snapshot instance for gradient checks.
std::vector<Snapshot> tiny_two_snapshots(uint32_t d_node, uint32_t d_edge);

// Random connected snapshot for property tests.
Snapshot random_snapshot(uint32_t n_nodes, uint32_t n_edges, uint32_t d_node,
                         uint32_t d_edge, std::mt19937_64& rng);

std::string temp_dir(const std::string& tag);

}  // namespace continuum::fixtures
