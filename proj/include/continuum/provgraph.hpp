#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace continuum {

// Dense type index table. Insertion order is first-seen order; once frozen
// the table is shared read-only across threads.
class TypeVocabulary {
 public:
  enum class Kind { node, edge };

  explicit TypeVocabulary(Kind kind) : kind_(kind) {}

  Kind kind() const { return kind_; }
  size_t size() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }
  const std::string& name(uint32_t index) const { return names_.at(index); }

  // Returns the existing index for `name`, or appends it at position len-1.
  uint32_t intern(const std::string& name);

  bool contains(const std::string& name) const {
    return index_.count(name) != 0;
  }
  uint32_t index_of(const std::string& name) const { return index_.at(name); }

  // One type name per line; the 0-based line number is the index.
  void save(const std::string& path) const;
  static TypeVocabulary load(const std::string& path, Kind kind);

 private:
  Kind kind_;
  std::vector<std::string> names_;
  std::unordered_map<std::string, uint32_t> index_;
};

struct RawEvent {
  uint64_t src = 0;
  uint64_t dst = 0;
  uint32_t edge_type_index = 0;
  uint64_t timestamp = 0;  // dataset-native units, monotone meaning only
};

// Directed multigraph parsed from one log. Node ids are dense per graph;
// original string ids live in `original_ids` for reporting.
struct ProvenanceGraph {
  std::string graph_id;
  std::vector<uint32_t> node_types;        // node id -> type index
  std::vector<std::string> original_ids;   // node id -> id as seen in the log
  std::vector<RawEvent> edges;

  size_t num_nodes() const { return node_types.size(); }
  size_t num_edges() const { return edges.size(); }
  uint64_t max_timestamp() const;
};

// Empty iff all graph invariants hold; violations are data, not failures.
std::vector<std::string> validate_graph(const ProvenanceGraph& g,
                                        const TypeVocabulary& node_vocab,
                                        const TypeVocabulary& edge_vocab);

}  // namespace continuum
