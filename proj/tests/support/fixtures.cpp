#include "support/fixtures.hpp"

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <random>

#include "continuum/snapshot.hpp"

namespace fs = std::filesystem;

namespace continuum::fixtures {

namespace {

// Builds one graph event by event; node ids are interned strings so the same
// builder also serializes to the on-disk formats.
class GraphWriter {
 public:
  GraphWriter(InMemoryDataset& ds, std::string graph_id, Label label)
      : ds_(ds) {
    graph_.graph_id = std::move(graph_id);
    label_ = label;
  }

  uint64_t node(const std::string& id, const std::string& type) {
    auto it = ids_.find(id);
    if (it != ids_.end()) return it->second;
    uint64_t dense = graph_.node_types.size();
    ids_.emplace(id, dense);
    graph_.node_types.push_back(ds_.node_vocab.intern(type));
    graph_.original_ids.push_back(id);
    return dense;
  }

  void event(uint64_t src, uint64_t dst, const std::string& etype) {
    RawEvent e;
    e.src = src;
    e.dst = dst;
    e.edge_type_index = ds_.edge_vocab.intern(etype);
    e.timestamp = next_ts_++;
    graph_.edges.push_back(e);
  }

  void event_at(uint64_t src, uint64_t dst, const std::string& etype,
                uint64_t ts) {
    RawEvent e;
    e.src = src;
    e.dst = dst;
    e.edge_type_index = ds_.edge_vocab.intern(etype);
    e.timestamp = ts;
    graph_.edges.push_back(e);
  }

  void finish() {
    ds_.labels[graph_.graph_id] = label_;
    ds_.graphs.push_back(std::move(graph_));
  }

  uint64_t num_nodes() const { return graph_.node_types.size(); }
  uint64_t now() const { return next_ts_; }

 private:
  InMemoryDataset& ds_;
  ProvenanceGraph graph_;
  Label label_;
  std::map<std::string, uint64_t> ids_;
  uint64_t next_ts_ = 0;
};

uint32_t randint(std::mt19937_64& rng, uint32_t lo, uint32_t hi) {
  return std::uniform_int_distribution<uint32_t>(lo, hi)(rng);
}

// Repeats one interaction; parallel edges like these are what compression
// folds away.
void burst(GraphWriter& g, uint64_t src, uint64_t dst, const std::string& et,
           uint32_t reps) {
  for (uint32_t i = 0; i < reps; ++i) g.event(src, dst, et);
}

void benign_scenario(GraphWriter& g, uint32_t scenario, std::mt19937_64& rng) {
  uint64_t root = g.node("p0", "a");
  const uint32_t n_procs = randint(rng, 6, 10);
  std::vector<uint64_t> procs;
  for (uint32_t p = 0; p < n_procs; ++p) {
    uint64_t proc = g.node("p" + std::to_string(p + 1), "a");
    g.event(root, proc, "k");
    procs.push_back(proc);
  }

  const uint32_t n_files = 10;
  std::vector<uint64_t> files, sockets, maps;
  for (uint32_t f = 0; f < n_files; ++f)
    files.push_back(g.node("f" + std::to_string(f), "c"));
  for (uint32_t s = 0; s < 4; ++s)
    sockets.push_back(g.node("s" + std::to_string(s), "e"));
  for (uint32_t m = 0; m < 4; ++m)
    maps.push_back(g.node("m" + std::to_string(m), "d"));

  uint32_t serial = 0;
  for (uint64_t proc : procs) {
    // startup one-shots: a worker thread and two config probes
    uint64_t thread = g.node("t" + std::to_string(serial), "b");
    g.event(proc, thread, "k");
    uint64_t cfg = g.node("cfg" + std::to_string(serial % 5), "c");
    g.event(thread, cfg, "r");
    g.event(proc, g.node("cfg" + std::to_string((serial + 2) % 5), "c"), "o");
    ++serial;
    switch (scenario) {
      case 0:  // file-heavy browsing
        for (int i = 0; i < 3; ++i) {
          uint64_t f = files[randint(rng, 0, n_files - 1)];
          g.event(proc, f, "o");
          burst(g, proc, f, "r", randint(rng, 12, 40));
        }
        burst(g, proc, files[randint(rng, 0, n_files - 1)], "w",
              randint(rng, 8, 24));
        break;
      case 1:  // bulk download
        burst(g, sockets[randint(rng, 0, 3)], proc, "v",
              randint(rng, 20, 50));
        burst(g, proc, files[randint(rng, 0, n_files - 1)], "w",
              randint(rng, 20, 50));
        burst(g, proc, files[randint(rng, 0, n_files - 1)], "r",
              randint(rng, 6, 16));
        break;
      case 2: {  // mail: chatty sockets, light files
        uint64_t s = sockets[randint(rng, 0, 3)];
        burst(g, proc, s, "s", randint(rng, 10, 30));
        burst(g, s, proc, "v", randint(rng, 10, 30));
        uint64_t f = files[randint(rng, 0, n_files - 1)];
        g.event(proc, f, "o");
        burst(g, proc, f, "r", randint(rng, 4, 10));
        break;
      }
      case 3:  // game: mapped memory and file reads
        for (int i = 0; i < 2; ++i) {
          uint64_t m = maps[randint(rng, 0, 3)];
          g.event(proc, m, "o");
          burst(g, proc, m, "m", randint(rng, 16, 40));
        }
        burst(g, proc, files[randint(rng, 0, n_files - 1)], "r",
              randint(rng, 10, 26));
        break;
      default:  // streaming: one long-lived socket, pipes
        burst(g, sockets[randint(rng, 0, 3)], proc, "v",
              randint(rng, 30, 70));
        burst(g, proc, maps[randint(rng, 0, 3)], "m", randint(rng, 8, 20));
        break;
    }
  }
}

void attack_scenario(GraphWriter& g) {
  // Lateral-movement chain: each stage pulls a payload, drops it, executes
  // it, spawns the next stage and cleans up behind itself. The chain is a
  // fixed script, the same way the benchmark attack scenarios are replays
  // of one scripted intrusion.
  uint64_t root = g.node("p0", "a");
  std::vector<uint64_t> files, sockets;
  for (uint32_t f = 0; f < 6; ++f)
    files.push_back(g.node("f" + std::to_string(f), "c"));
  for (uint32_t s = 0; s < 6; ++s)
    sockets.push_back(g.node("s" + std::to_string(s), "e"));

  uint64_t stage = root;
  for (uint32_t d = 0; d < 8; ++d) {
    uint64_t sock = sockets[d % 6];
    uint64_t drop = g.node("drop" + std::to_string(d), "c");
    burst(g, sock, stage, "v", 19);
    burst(g, stage, drop, "w", 17);
    uint64_t next = g.node("px" + std::to_string(d), "a");
    // payload executes into the next stage: a file acting as a source is
    // out of every benign family
    burst(g, drop, next, "x", 6);
    g.event(stage, next, "k");
    burst(g, next, sockets[(d + 3) % 6], "s", 14);
    g.event(next, drop, "u");
    burst(g, next, files[d % 6], "r", 6);
    stage = next;
  }
}

}  // namespace

InMemoryDataset streamspot_like(uint32_t graphs_per_scenario, uint64_t seed) {
  InMemoryDataset ds;
  std::mt19937_64 rng(seed);
  for (uint32_t scenario = 0; scenario < 6; ++scenario) {
    const bool is_attack = scenario == 5;
    for (uint32_t i = 0; i < graphs_per_scenario; ++i) {
      const std::string gid =
          std::to_string(scenario * graphs_per_scenario + i);
      GraphWriter g(ds, gid, is_attack ? Label::attack : Label::benign);
      if (is_attack)
        attack_scenario(g);
      else
        benign_scenario(g, scenario, rng);
      g.finish();
    }
  }
  return ds;
}

InMemoryDataset wget_like(uint32_t benign, uint32_t attack, uint64_t seed) {
  InMemoryDataset ds;
  std::mt19937_64 rng(seed);

  // Attack runs replay one fixed script; benign runs keep their natural
  // jitter.
  auto fetch_phase = [&](GraphWriter& g, uint64_t proc, uint64_t t0,
                         uint64_t t_step, bool scripted) {
    uint64_t t = t0;
    const uint32_t urls = scripted ? 7 : randint(rng, 5, 9);
    for (uint32_t u = 0; u < urls; ++u) {
      uint64_t sock = g.node("s" + std::to_string(u % 4), "e");
      uint64_t file = g.node("f" + std::to_string(u), "c");
      g.event_at(proc, sock, "o", t);
      const uint32_t reps = scripted ? 26 : randint(rng, 15, 40);
      for (uint32_t r = 0; r < reps; ++r) {
        g.event_at(sock, proc, "v", t + 1 + r / 8);
        g.event_at(proc, file, "w", t + 1 + r / 8);
      }
      t += t_step;
    }
    return t;
  };

  for (uint32_t i = 0; i < benign + attack; ++i) {
    const bool is_attack = i >= benign;
    GraphWriter g(ds, (is_attack ? "attack-" : "benign-") + std::to_string(i),
                  is_attack ? Label::attack : Label::benign);
    uint64_t proc = g.node("wget", "a");
    uint64_t cfg = g.node("cfg", "c");
    g.event_at(proc, cfg, "r", 0);
    uint64_t t_end = fetch_phase(g, proc, 2, 100, is_attack);

    if (is_attack) {
      // Payload executes late, re-beacons and spreads; the dropped file
      // feeding execution into the implant is the out-of-family tell.
      uint64_t payload = g.node("payload", "c");
      uint64_t t = t_end + 50;
      for (uint32_t r = 0; r < 20; ++r)
        g.event_at(proc, payload, "w", t + r / 6);
      uint64_t child = g.node("implant", "a");
      for (uint32_t r = 0; r < 8; ++r)
        g.event_at(payload, child, "x", t + 5 + r / 4);
      g.event_at(proc, child, "k", t + 6);
      uint64_t c2 = g.node("c2", "e");
      for (uint32_t r = 0; r < 30; ++r)
        g.event_at(child, c2, "s", t + 8 + r / 4);
      for (uint32_t f = 0; f < 4; ++f) {
        uint64_t target = g.node("f" + std::to_string(f), "c");
        for (uint32_t r = 0; r < 11; ++r)
          g.event_at(child, target, "r", t + 20 + r / 4);
      }
      g.event_at(child, payload, "u", t + 40);
    }
    g.finish();
  }
  return ds;
}

InMemoryDataset node_level(uint32_t benign_graphs, uint32_t test_graphs,
                           uint64_t seed) {
  InMemoryDataset ds;
  std::mt19937_64 rng(seed);

  auto service_graph = [&](GraphWriter& g) {
    const uint32_t n_workers = randint(rng, 6, 9);
    uint64_t super = g.node("svc", "a");
    for (uint32_t w = 0; w < n_workers; ++w) {
      uint64_t proc = g.node("w" + std::to_string(w), "a");
      g.event(super, proc, "k");
      uint64_t log = g.node("log" + std::to_string(w % 3), "c");
      uint64_t data = g.node("data" + std::to_string(w % 4), "c");
      burst(g, proc, log, "w", randint(rng, 10, 24));
      burst(g, proc, data, "r", randint(rng, 10, 24));
      uint64_t sock = g.node("s" + std::to_string(w % 2), "e");
      burst(g, sock, proc, "v", randint(rng, 8, 18));
      burst(g, proc, sock, "s", randint(rng, 8, 18));
    }
  };

  for (uint32_t i = 0; i < benign_graphs + test_graphs; ++i) {
    const bool is_test = i >= benign_graphs;
    const std::string gid =
        (is_test ? "test-" : "train-") + std::to_string(i);
    GraphWriter g(ds, gid, is_test ? Label::attack : Label::benign);
    service_graph(g);

    if (is_test) {
      std::set<uint64_t> bad;
      const uint64_t span = g.now();  // spread low-and-slow over the run
      uint64_t phase = 0;
      auto slow_burst = [&](uint64_t src, uint64_t dst, const char* et,
                            uint32_t reps) {
        for (uint32_t r = 0; r < reps; ++r)
          g.event_at(src, dst, et, (r * span) / reps + (phase % 7));
        ++phase;
      };

      const uint32_t n_bad = randint(rng, 2, 4);
      for (uint32_t b = 0; b < n_bad; ++b) {
        // An anomalous node is one whose in-neighborhood is out of family:
        // benign processes receive only clone/recv from processes and
        // sockets, never executable content from files. Only the injected
        // nodes gain new in-edges, so benign nodes stay on-manifold.
        uint64_t intruder = g.node("intruder" + std::to_string(b), "a");
        bad.insert(intruder);
        for (uint32_t f = 0; f < 4; ++f) {
          uint64_t data = g.node("data" + std::to_string(f % 4), "c");
          slow_burst(data, intruder, "x", randint(rng, 8, 16));
        }
        // exfiltration channel fed straight from data files; no process
        // edge here, or attention collapses onto it and the socket looks
        // benign again
        uint64_t exfil = g.node("exfil" + std::to_string(b), "e");
        bad.insert(exfil);
        for (uint32_t f = 0; f < 3; ++f) {
          uint64_t data = g.node("data" + std::to_string(f), "c");
          slow_burst(data, exfil, "w", randint(rng, 10, 18));
        }
      }
      ds.node_labels[gid] = std::move(bad);
    }
    g.finish();
  }
  return ds;
}

std::vector<GraphSequence> to_sequences(const InMemoryDataset& ds,
                                        uint32_t n_snapshots) {
  const uint32_t d_node = static_cast<uint32_t>(ds.node_vocab.size());
  const uint32_t d_edge = static_cast<uint32_t>(ds.edge_vocab.size());
  std::vector<GraphSequence> out;
  for (const auto& g : ds.graphs) {
    GraphSequence seq;
    seq.graph_id = g.graph_id;
    seq.label = ds.labels.at(g.graph_id);
    for (const auto& raw : make_snapshots(g, n_snapshots, d_node, d_edge))
      seq.snapshots.push_back(compress(raw));
    out.push_back(std::move(seq));
  }
  return out;
}

WrittenFixture write_streamspot_file(const InMemoryDataset& ds,
                                     const std::string& dir) {
  fs::create_directories(dir);
  WrittenFixture fx;
  const std::string tsv = (fs::path(dir) / "all.tsv").string();
  std::ofstream out(tsv);
  for (const auto& g : ds.graphs) {
    for (const auto& e : g.edges) {
      out << g.original_ids[e.src] << '\t'
          << ds.node_vocab.name(g.node_types[e.src]) << '\t'
          << g.original_ids[e.dst] << '\t'
          << ds.node_vocab.name(g.node_types[e.dst]) << '\t'
          << ds.edge_vocab.name(e.edge_type_index) << '\t' << g.graph_id
          << '\n';
    }
  }
  fx.input_paths.push_back(tsv);
  fx.labels_path = (fs::path(dir) / "labels.json").string();
  save_labels(ds.labels, fx.labels_path);
  return fx;
}

WrittenFixture write_canonical_files(const InMemoryDataset& ds,
                                     const std::string& dir) {
  fs::create_directories(dir);
  WrittenFixture fx;
  for (const auto& g : ds.graphs) {
    const std::string path = (fs::path(dir) / (g.graph_id + ".tsv")).string();
    std::ofstream out(path);
    out << "#continuum-v1\n";
    for (const auto& e : g.edges) {
      out << g.original_ids[e.src] << '\t'
          << ds.node_vocab.name(g.node_types[e.src]) << '\t'
          << g.original_ids[e.dst] << '\t'
          << ds.node_vocab.name(g.node_types[e.dst]) << '\t'
          << ds.edge_vocab.name(e.edge_type_index) << '\t' << e.timestamp
          << '\n';
    }
    fx.input_paths.push_back(path);
  }
  fx.labels_path = (fs::path(dir) / "labels.json").string();
  save_labels(ds.labels, fx.labels_path);
  return fx;
}

std::vector<Snapshot> tiny_two_snapshots(uint32_t d_node, uint32_t d_edge) {
  auto snap = [&](uint32_t index) {
    Snapshot s;
    s.index = index;
    s.t_lo = index * 10;
    s.t_hi = (index + 1) * 10;
    s.d_node = d_node;
    s.d_edge = d_edge;
    s.node_types = {0, 1, 2 % d_node, 1};
    return s;
  };
  Snapshot s0 = snap(0);
  auto edge = [&](Snapshot& s, uint64_t src, uint64_t dst,
                  std::vector<uint32_t> counts) {
    CompressedEdge e;
    e.src = src;
    e.dst = dst;
    counts.resize(d_edge, 0);
    e.counts = std::move(counts);
    s.edges.push_back(e);
  };
  edge(s0, 0, 1, {2, 1});
  edge(s0, 2, 1, {1});
  edge(s0, 1, 3, {0, 3});
  Snapshot s1 = snap(1);
  edge(s1, 3, 0, {1, 1});
  edge(s1, 2, 0, {4});
  edge(s1, 0, 1, {1});
  return {s0, s1};
}

Snapshot random_snapshot(uint32_t n_nodes, uint32_t n_edges, uint32_t d_node,
                         uint32_t d_edge, std::mt19937_64& rng) {
  Snapshot s;
  s.d_node = d_node;
  s.d_edge = d_edge;
  s.t_hi = 10;
  for (uint32_t v = 0; v < n_nodes; ++v)
    s.node_types.push_back(randint(rng, 0, d_node - 1));
  for (uint32_t e = 0; e < n_edges; ++e) {
    CompressedEdge ce;
    ce.src = randint(rng, 0, n_nodes - 1);
    ce.dst = randint(rng, 0, n_nodes - 1);
    ce.counts.assign(d_edge, 0);
    ce.counts[randint(rng, 0, d_edge - 1)] = randint(rng, 1, 5);
    s.edges.push_back(std::move(ce));
  }
  // make (src,dst) unique, as compress() guarantees
  std::map<std::pair<uint64_t, uint64_t>, size_t> seen;
  std::vector<CompressedEdge> dedup;
  for (auto& e : s.edges) {
    auto key = std::make_pair(e.src, e.dst);
    auto it = seen.find(key);
    if (it == seen.end()) {
      seen.emplace(key, dedup.size());
      dedup.push_back(std::move(e));
    } else {
      for (size_t k = 0; k < d_edge; ++k)
        dedup[it->second].counts[k] += e.counts[k];
    }
  }
  s.edges = std::move(dedup);
  return s;
}

std::string temp_dir(const std::string& tag) {
  static std::atomic<uint64_t> counter{0};
  auto path = fs::temp_directory_path() /
              ("continuum_" + tag + "_" + std::to_string(::getpid()) + "_" +
               std::to_string(counter++));
  fs::create_directories(path);
  return path.string();
}

}  // namespace continuum::fixtures
