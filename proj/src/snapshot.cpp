#include "continuum/snapshot.hpp"

#include <fstream>
#include <unordered_map>

#include "continuum/util.hpp"
#include "json.hpp"

namespace continuum {

std::vector<double> Snapshot::node_features() const {
  std::vector<double> feat(node_types.size() * d_node, 0.0);
  for (size_t i = 0; i < node_types.size(); ++i)
    feat[i * d_node + node_types[i]] = 1.0;
  return feat;
}

std::vector<Snapshot> make_snapshots(const ProvenanceGraph& g, uint32_t n,
                                     uint32_t d_node, uint32_t d_edge) {
  if (n < 1) throw std::invalid_argument("snapshot count must be >= 1");
  if (g.edges.empty()) throw EmptyGraph();

  const uint64_t max_ts = g.max_timestamp();
  const uint64_t delta = (max_ts + 1 + n - 1) / n;  // ceil((max_ts+1)/n)

  std::vector<Snapshot> snaps(n);
  for (uint32_t i = 0; i < n; ++i) {
    snaps[i].index = i;
    snaps[i].t_lo = static_cast<uint64_t>(i) * delta;
    snaps[i].t_hi = static_cast<uint64_t>(i + 1) * delta;
    snaps[i].d_node = d_node;
    snaps[i].d_edge = d_edge;
    snaps[i].node_types = g.node_types;
  }
  for (const auto& e : g.edges) {
    uint32_t idx = static_cast<uint32_t>(e.timestamp / delta);
    CompressedEdge ce;
    ce.src = e.src;
    ce.dst = e.dst;
    ce.counts.assign(d_edge, 0);
    ce.counts.at(e.edge_type_index) = 1;
    snaps[idx].edges.push_back(std::move(ce));
  }
  return snaps;
}

Snapshot compress(const Snapshot& s) {
  Snapshot out;
  out.index = s.index;
  out.t_lo = s.t_lo;
  out.t_hi = s.t_hi;
  out.d_node = s.d_node;
  out.d_edge = s.d_edge;
  out.node_types = s.node_types;

  std::unordered_map<uint64_t, size_t> slot;  // (src<<32|dst) -> edge index
  slot.reserve(s.edges.size());
  for (const auto& e : s.edges) {
    uint64_t key = (e.src << 32) | e.dst;
    auto it = slot.find(key);
    if (it == slot.end()) {
      slot.emplace(key, out.edges.size());
      out.edges.push_back(e);
    } else {
      auto& counts = out.edges[it->second].counts;
      for (size_t k = 0; k < counts.size(); ++k) counts[k] += e.counts[k];
    }
  }
  return out;
}

CompressionReport compression_report(
    const std::vector<ProvenanceGraph>& graphs, uint32_t n, uint32_t d_node,
    uint32_t d_edge) {
  CompressionReport report;
  for (const auto& g : graphs) {
    CompressionRow row;
    row.graph_id = g.graph_id;
    auto snaps = make_snapshots(g, n, d_node, d_edge);
    for (const auto& s : snaps) {
      row.before_edges += s.edges.size();
      row.after_edges += compress(s).edges.size();
    }
    row.reduction_pct =
        row.before_edges == 0
            ? 0.0
            : 100.0 * (1.0 - static_cast<double>(row.after_edges) /
                                 static_cast<double>(row.before_edges));
    report.total_before += row.before_edges;
    report.total_after += row.after_edges;
    report.rows.push_back(std::move(row));
  }
  report.total_reduction_pct =
      report.total_before == 0
          ? 0.0
          : 100.0 * (1.0 - static_cast<double>(report.total_after) /
                               static_cast<double>(report.total_before));
  return report;
}

void save_compression_csv(const CompressionReport& report,
                          const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write report: " + path);
  out << "graph_id,before_edges,after_edges,reduction_pct\n";
  char buf[64];
  for (const auto& row : report.rows) {
    snprintf(buf, sizeof(buf), "%.4f", row.reduction_pct);
    out << row.graph_id << ',' << row.before_edges << ',' << row.after_edges
        << ',' << buf << '\n';
  }
  snprintf(buf, sizeof(buf), "%.4f", report.total_reduction_pct);
  out << "TOTAL," << report.total_before << ',' << report.total_after << ','
      << buf << '\n';
}

void save_snapshot(const Snapshot& s, const std::string& path) {
  nlohmann::json j;
  j["index"] = s.index;
  j["t_lo"] = s.t_lo;
  j["t_hi"] = s.t_hi;
  j["num_nodes"] = s.node_types.size();
  j["d_node"] = s.d_node;
  j["d_edge"] = s.d_edge;
  j["node_type"] = s.node_types;
  auto edges = nlohmann::json::array();
  for (const auto& e : s.edges)
    edges.push_back(nlohmann::json::array({e.src, e.dst, e.counts}));
  j["edges"] = std::move(edges);
  write_file(path, j.dump());
}

Snapshot load_snapshot(const std::string& path) {
  auto j = nlohmann::json::parse(read_file(path));
  Snapshot s;
  s.index = j.at("index").get<uint32_t>();
  s.t_lo = j.at("t_lo").get<uint64_t>();
  s.t_hi = j.at("t_hi").get<uint64_t>();
  s.d_node = j.at("d_node").get<uint32_t>();
  s.d_edge = j.at("d_edge").get<uint32_t>();
  s.node_types = j.at("node_type").get<std::vector<uint32_t>>();
  if (s.node_types.size() != j.at("num_nodes").get<size_t>())
    throw std::runtime_error("snapshot " + path + ": num_nodes mismatch");
  for (const auto& e : j.at("edges")) {
    CompressedEdge ce;
    ce.src = e.at(0).get<uint64_t>();
    ce.dst = e.at(1).get<uint64_t>();
    ce.counts = e.at(2).get<std::vector<uint32_t>>();
    s.edges.push_back(std::move(ce));
  }
  return s;
}

}  // namespace continuum
