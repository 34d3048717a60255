#pragma once

#include <istream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "continuum/provgraph.hpp"

namespace continuum {

struct MalformedLine : std::runtime_error {
  size_t line_no;
  explicit MalformedLine(size_t line)
      : std::runtime_error("malformed line " + std::to_string(line)),
        line_no(line) {}
};

struct TypeConflict : std::runtime_error {
  std::string node_id;
  explicit TypeConflict(std::string id)
      : std::runtime_error("node " + id + " reappears with a different type"),
        node_id(std::move(id)) {}
};

struct BadTimestamp : std::runtime_error {
  size_t line_no;
  explicit BadTimestamp(size_t line)
      : std::runtime_error("bad timestamp on line " + std::to_string(line)),
        line_no(line) {}
};

enum class Label { benign, attack };

struct DatasetManifest {
  enum class Format { streamspot, canonical };
  Format format = Format::streamspot;
  std::vector<std::string> paths;
  std::map<std::string, Label> labels;
  // node-level datasets: graph_id -> file listing malicious node ids
  std::map<std::string, std::string> node_label_paths;
};

// StreamSpot edge list: src_id, src_type, dst_id, dst_type, edge_type,
// graph_id, tab-separated. Lines carry no timestamp, so the 0-based line
// ordinal within each graph is assigned as one.
std::vector<ProvenanceGraph> parse_streamspot(std::istream& in,
                                              TypeVocabulary& node_vocab,
                                              TypeVocabulary& edge_vocab);

// Canonical TSV: header `#continuum-v1`, then
// src_id TAB src_type TAB dst_id TAB dst_type TAB edge_type TAB timestamp.
ProvenanceGraph parse_canonical(std::istream& in, TypeVocabulary& node_vocab,
                                TypeVocabulary& edge_vocab,
                                const std::string& graph_id);

// On-disk layout produced by the ingest stage:
//   <dir>/vocab_nodes.txt, <dir>/vocab_edges.txt, <dir>/labels.json,
//   <dir>/graphs/<graph_id>.tsv, <dir>/graphs/<graph_id>.nodes.json
void save_graph(const ProvenanceGraph& g, const TypeVocabulary& node_vocab,
                const TypeVocabulary& edge_vocab, const std::string& dir);
ProvenanceGraph load_graph(const std::string& dir,
                           const std::string& graph_id,
                           TypeVocabulary& node_vocab,
                           TypeVocabulary& edge_vocab);

std::map<std::string, Label> load_labels(const std::string& path);
void save_labels(const std::map<std::string, Label>& labels,
                 const std::string& path);

struct IngestedDataset {
  TypeVocabulary node_vocab{TypeVocabulary::Kind::node};
  TypeVocabulary edge_vocab{TypeVocabulary::Kind::edge};
  std::vector<ProvenanceGraph> graphs;
  std::map<std::string, Label> labels;
};

// Parses every manifest file and writes the layout above. Files are parsed
// in parallel when jobs > 1; all workers intern through one locked
// vocabulary, so use jobs = 1 when vocabulary order must be reproducible.
IngestedDataset run_ingest(const DatasetManifest& manifest,
                           const std::string& out_dir, unsigned jobs = 1);

IngestedDataset load_ingested(const std::string& dir);

}  // namespace continuum
