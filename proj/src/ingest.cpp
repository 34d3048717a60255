#include "continuum/ingest.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <atomic>
#include <mutex>
#include <sstream>
#include <thread>
#include <unordered_map>

#include "continuum/util.hpp"
#include "json.hpp"

namespace fs = std::filesystem;

namespace continuum {

namespace {

// Per-graph builder: remaps string node ids to dense indices in first-seen
// order and rejects type changes.
struct GraphBuilder {
  ProvenanceGraph graph;
  std::unordered_map<std::string, uint64_t> id_map;
  uint64_t next_ordinal = 0;

  uint64_t node(const std::string& orig_id, uint32_t type_index) {
    auto it = id_map.find(orig_id);
    if (it != id_map.end()) {
      if (graph.node_types[it->second] != type_index)
        throw TypeConflict(orig_id);
      return it->second;
    }
    uint64_t dense = graph.node_types.size();
    id_map.emplace(orig_id, dense);
    graph.node_types.push_back(type_index);
    graph.original_ids.push_back(orig_id);
    return dense;
  }
};

bool parse_u64(const std::string& s, uint64_t& out) {
  if (s.empty()) return false;
  uint64_t v = 0;
  for (char c : s) {
    if (c < '0' || c > '9') return false;
    v = v * 10 + static_cast<uint64_t>(c - '0');
  }
  out = v;
  return true;
}

}  // namespace

std::vector<ProvenanceGraph> parse_streamspot(std::istream& in,
                                              TypeVocabulary& node_vocab,
                                              TypeVocabulary& edge_vocab) {
  std::vector<std::string> order;
  std::unordered_map<std::string, GraphBuilder> builders;

  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split(line, '\t');
    if (fields.size() != 6) throw MalformedLine(line_no);

    const std::string& gid = fields[5];
    auto it = builders.find(gid);
    if (it == builders.end()) {
      it = builders.emplace(gid, GraphBuilder{}).first;
      it->second.graph.graph_id = gid;
      order.push_back(gid);
    }
    GraphBuilder& b = it->second;

    RawEvent e;
    e.src = b.node(fields[0], node_vocab.intern(fields[1]));
    e.dst = b.node(fields[2], node_vocab.intern(fields[3]));
    e.edge_type_index = edge_vocab.intern(fields[4]);
    e.timestamp = b.next_ordinal++;
    b.graph.edges.push_back(e);
  }

  std::vector<ProvenanceGraph> graphs;
  graphs.reserve(order.size());
  for (const auto& gid : order) graphs.push_back(std::move(builders.at(gid).graph));
  return graphs;
}

ProvenanceGraph parse_canonical(std::istream& in, TypeVocabulary& node_vocab,
                                TypeVocabulary& edge_vocab,
                                const std::string& graph_id) {
  std::string line;
  size_t line_no = 0;
  if (!std::getline(in, line)) throw MalformedLine(1);
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "#continuum-v1")
    throw std::runtime_error("missing #continuum-v1 header");

  GraphBuilder b;
  b.graph.graph_id = graph_id;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split(line, '\t');
    if (fields.size() != 6) throw MalformedLine(line_no);

    RawEvent e;
    e.src = b.node(fields[0], node_vocab.intern(fields[1]));
    e.dst = b.node(fields[2], node_vocab.intern(fields[3]));
    e.edge_type_index = edge_vocab.intern(fields[4]);
    if (!parse_u64(fields[5], e.timestamp)) throw BadTimestamp(line_no);
    b.graph.edges.push_back(e);
  }
  return std::move(b.graph);
}

void save_graph(const ProvenanceGraph& g, const TypeVocabulary& node_vocab,
                const TypeVocabulary& edge_vocab, const std::string& dir) {
  fs::create_directories(fs::path(dir) / "graphs");
  const fs::path base = fs::path(dir) / "graphs" / g.graph_id;

  std::ofstream tsv(base.string() + ".tsv");
  if (!tsv) throw std::runtime_error("cannot write " + base.string() + ".tsv");
  tsv << "#continuum-v1\n";
  for (const auto& e : g.edges) {
    tsv << e.src << '\t' << node_vocab.name(g.node_types[e.src]) << '\t'
        << e.dst << '\t' << node_vocab.name(g.node_types[e.dst]) << '\t'
        << edge_vocab.name(e.edge_type_index) << '\t' << e.timestamp << '\n';
  }

  nlohmann::json side;
  side["original_ids"] = g.original_ids;
  side["types"] = g.node_types;
  write_file(base.string() + ".nodes.json", side.dump());
}

ProvenanceGraph load_graph(const std::string& dir, const std::string& graph_id,
                           TypeVocabulary& node_vocab,
                           TypeVocabulary& edge_vocab) {
  const fs::path base = fs::path(dir) / "graphs" / graph_id;
  std::ifstream tsv(base.string() + ".tsv");
  if (!tsv) throw std::runtime_error("cannot open " + base.string() + ".tsv");
  ProvenanceGraph g = parse_canonical(tsv, node_vocab, edge_vocab, graph_id);

  // The side table is the authority for the node set: it preserves original
  // ids and nodes isolated in every interval.
  auto side = nlohmann::json::parse(read_file(base.string() + ".nodes.json"));
  auto ids = side.at("original_ids").get<std::vector<std::string>>();
  auto types = side.at("types").get<std::vector<uint32_t>>();
  if (ids.size() >= g.node_types.size()) {
    g.original_ids = std::move(ids);
    g.node_types = std::move(types);
  }
  return g;
}

std::map<std::string, Label> load_labels(const std::string& path) {
  auto j = nlohmann::json::parse(read_file(path));
  std::map<std::string, Label> labels;
  for (auto it = j.begin(); it != j.end(); ++it) {
    std::string v = it.value().get<std::string>();
    if (v == "benign")
      labels[it.key()] = Label::benign;
    else if (v == "attack")
      labels[it.key()] = Label::attack;
    else
      throw std::runtime_error("label for " + it.key() +
                               " must be benign or attack, got " + v);
  }
  return labels;
}

void save_labels(const std::map<std::string, Label>& labels,
                 const std::string& path) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [gid, label] : labels)
    j[gid] = label == Label::benign ? "benign" : "attack";
  write_file(path, j.dump(2));
}

IngestedDataset run_ingest(const DatasetManifest& manifest,
                           const std::string& out_dir, unsigned jobs) {
  for (const auto& p : manifest.paths)
    if (!fs::exists(p)) throw std::runtime_error("input does not exist: " + p);

  IngestedDataset ds;
  ds.labels = manifest.labels;

  std::mutex vocab_mu;
  std::mutex out_mu;

  auto parse_one = [&](const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open input: " + path);
    std::vector<ProvenanceGraph> graphs;
    if (manifest.format == DatasetManifest::Format::streamspot) {
      std::lock_guard<std::mutex> lock(vocab_mu);
      graphs = parse_streamspot(in, ds.node_vocab, ds.edge_vocab);
    } else {
      std::string gid = fs::path(path).stem().string();
      std::lock_guard<std::mutex> lock(vocab_mu);
      graphs.push_back(parse_canonical(in, ds.node_vocab, ds.edge_vocab, gid));
    }
    std::lock_guard<std::mutex> lock(out_mu);
    for (auto& g : graphs) ds.graphs.push_back(std::move(g));
  };

  if (jobs <= 1 || manifest.paths.size() <= 1) {
    for (const auto& p : manifest.paths) parse_one(p);
  } else {
    std::vector<std::thread> workers;
    std::atomic<size_t> next{0};
    unsigned n = std::min<unsigned>(jobs, manifest.paths.size());
    for (unsigned w = 0; w < n; ++w) {
      workers.emplace_back([&] {
        for (size_t i = next++; i < manifest.paths.size(); i = next++)
          parse_one(manifest.paths[i]);
      });
    }
    for (auto& t : workers) t.join();
  }

  for (const auto& g : ds.graphs) {
    if (!ds.labels.count(g.graph_id) && manifest.node_label_paths.empty())
      throw std::runtime_error("graph " + g.graph_id + " has no label");
  }

  fs::create_directories(out_dir);
  ds.node_vocab.save((fs::path(out_dir) / "vocab_nodes.txt").string());
  ds.edge_vocab.save((fs::path(out_dir) / "vocab_edges.txt").string());
  save_labels(ds.labels, (fs::path(out_dir) / "labels.json").string());
  for (const auto& g : ds.graphs)
    save_graph(g, ds.node_vocab, ds.edge_vocab, out_dir);
  return ds;
}

IngestedDataset load_ingested(const std::string& dir) {
  IngestedDataset ds;
  ds.node_vocab = TypeVocabulary::load(
      (fs::path(dir) / "vocab_nodes.txt").string(), TypeVocabulary::Kind::node);
  ds.edge_vocab = TypeVocabulary::load(
      (fs::path(dir) / "vocab_edges.txt").string(), TypeVocabulary::Kind::edge);
  ds.labels = load_labels((fs::path(dir) / "labels.json").string());

  std::vector<std::string> ids;
  for (const auto& entry : fs::directory_iterator(fs::path(dir) / "graphs")) {
    if (entry.path().extension() == ".tsv")
      ids.push_back(entry.path().stem().string());
  }
  std::sort(ids.begin(), ids.end());
  for (const auto& gid : ids)
    ds.graphs.push_back(load_graph(dir, gid, ds.node_vocab, ds.edge_vocab));
  return ds;
}

}  // namespace continuum
