#include "continuum/provgraph.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>
#include <unordered_set>

namespace continuum {

uint32_t TypeVocabulary::intern(const std::string& name) {
  if (name.empty()) throw std::invalid_argument("type name must be nonempty");
  auto it = index_.find(name);
  if (it != index_.end()) return it->second;
  uint32_t idx = static_cast<uint32_t>(names_.size());
  names_.push_back(name);
  index_.emplace(name, idx);
  return idx;
}

void TypeVocabulary::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write vocabulary: " + path);
  for (const auto& n : names_) out << n << '\n';
}

TypeVocabulary TypeVocabulary::load(const std::string& path, Kind kind) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open vocabulary: " + path);
  TypeVocabulary vocab(kind);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    vocab.intern(line);
  }
  return vocab;
}

uint64_t ProvenanceGraph::max_timestamp() const {
  uint64_t m = 0;
  for (const auto& e : edges) m = std::max(m, e.timestamp);
  return m;
}

std::vector<std::string> validate_graph(const ProvenanceGraph& g,
                                        const TypeVocabulary& node_vocab,
                                        const TypeVocabulary& edge_vocab) {
  std::vector<std::string> violations;
  const size_t n = g.num_nodes();

  for (size_t i = 0; i < n; ++i) {
    if (g.node_types[i] >= node_vocab.size())
      violations.push_back("node " + std::to_string(i) +
                           " has out-of-range type index " +
                           std::to_string(g.node_types[i]));
  }
  if (g.original_ids.size() == n) {
    std::unordered_set<std::string> seen;
    for (size_t i = 0; i < n; ++i) {
      if (!seen.insert(g.original_ids[i]).second)
        violations.push_back("duplicate node id " + g.original_ids[i]);
    }
  }
  for (size_t i = 0; i < g.edges.size(); ++i) {
    const auto& e = g.edges[i];
    if (e.src >= n)
      violations.push_back("dangling src " + std::to_string(e.src) +
                           " in edge " + std::to_string(i));
    if (e.dst >= n)
      violations.push_back("dangling dst " + std::to_string(e.dst) +
                           " in edge " + std::to_string(i));
    if (e.edge_type_index >= edge_vocab.size())
      violations.push_back("edge " + std::to_string(i) +
                           " has out-of-range type index " +
                           std::to_string(e.edge_type_index));
  }
  return violations;
}

}  // namespace continuum
