#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "continuum/provgraph.hpp"

namespace continuum {

struct EmptyGraph : std::runtime_error {
  EmptyGraph() : std::runtime_error("graph has no edges") {}
};

struct CompressedEdge {
  uint64_t src = 0;
  uint64_t dst = 0;
  std::vector<uint32_t> counts;  // length d_edge, element-wise event sum
};

// One time-interval's subgraph. Every node of the parent graph appears in
// every snapshot so row indices align across the sequence.
struct Snapshot {
  uint32_t index = 0;
  uint64_t t_lo = 0;
  uint64_t t_hi = 0;  // half-open [t_lo, t_hi)
  uint32_t d_node = 0;
  uint32_t d_edge = 0;
  std::vector<uint32_t> node_types;  // node id -> type, one-hot source
  std::vector<CompressedEdge> edges;

  size_t num_nodes() const { return node_types.size(); }

  // |V| x d_node one-hot matrix, row-major.
  std::vector<double> node_features() const;
};

// Splits g into exactly n snapshots with interval length
// ceil((max_ts + 1) / n); every event lands in one snapshot. Edges are raw:
// one entry per event with a one-hot counts vector.
std::vector<Snapshot> make_snapshots(const ProvenanceGraph& g, uint32_t n,
                                     uint32_t d_node, uint32_t d_edge);

// Merges same (src,dst) edges by summing their counts vectors. Edge order is
// first-seen order of the pair.
Snapshot compress(const Snapshot& s);

struct CompressionRow {
  std::string graph_id;
  uint64_t before_edges = 0;
  uint64_t after_edges = 0;
  double reduction_pct = 0.0;
};

struct CompressionReport {
  std::vector<CompressionRow> rows;
  uint64_t total_before = 0;
  uint64_t total_after = 0;
  double total_reduction_pct = 0.0;
};

// before = raw event count, after = distinct (src,dst) pairs per snapshot,
// summed over each graph's snapshots.
CompressionReport compression_report(
    const std::vector<ProvenanceGraph>& graphs, uint32_t n, uint32_t d_node,
    uint32_t d_edge);

void save_compression_csv(const CompressionReport& report,
                          const std::string& path);

// One JSON document per snapshot:
// {index, t_lo, t_hi, num_nodes, node_type: [u32...],
//  edges: [[src,dst,[counts...]],...]}
void save_snapshot(const Snapshot& s, const std::string& path);
Snapshot load_snapshot(const std::string& path);

}  // namespace continuum
