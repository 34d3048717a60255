#include "continuum/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <random>

#include "continuum/util.hpp"
#include "json.hpp"

namespace fs = std::filesystem;

namespace continuum {

CompressionReport run_snapshot_stage(const std::string& ingest_dir, uint32_t n,
                                     const std::string& out_dir,
                                     const std::string& report_csv) {
  IngestedDataset ds = load_ingested(ingest_dir);
  const uint32_t d_node = static_cast<uint32_t>(ds.node_vocab.size());
  const uint32_t d_edge = static_cast<uint32_t>(ds.edge_vocab.size());

  fs::create_directories(fs::path(out_dir) / "graphs");
  ds.node_vocab.save((fs::path(out_dir) / "vocab_nodes.txt").string());
  ds.edge_vocab.save((fs::path(out_dir) / "vocab_edges.txt").string());
  save_labels(ds.labels, (fs::path(out_dir) / "labels.json").string());
  const fs::path node_labels_src = fs::path(ingest_dir) / "node_labels.json";
  if (fs::exists(node_labels_src))
    fs::copy_file(node_labels_src, fs::path(out_dir) / "node_labels.json",
                  fs::copy_options::overwrite_existing);

  CompressionReport report;
  for (const auto& g : ds.graphs) {
    CompressionRow row;
    row.graph_id = g.graph_id;
    const fs::path gdir = fs::path(out_dir) / "graphs" / g.graph_id;
    fs::create_directories(gdir);
    auto snaps = make_snapshots(g, n, d_node, d_edge);
    for (auto& s : snaps) {
      row.before_edges += s.edges.size();
      Snapshot compressed = compress(s);
      row.after_edges += compressed.edges.size();
      char name[32];
      snprintf(name, sizeof(name), "snap_%05u.json", compressed.index);
      save_snapshot(compressed, (gdir / name).string());
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
  if (!report_csv.empty()) save_compression_csv(report, report_csv);
  return report;
}

std::vector<GraphSequence> load_sequences(const std::string& snapshot_dir) {
  auto labels = load_labels((fs::path(snapshot_dir) / "labels.json").string());

  std::vector<std::string> gids;
  for (const auto& entry :
       fs::directory_iterator(fs::path(snapshot_dir) / "graphs"))
    if (entry.is_directory()) gids.push_back(entry.path().filename().string());
  std::sort(gids.begin(), gids.end());

  std::vector<GraphSequence> sequences;
  for (const auto& gid : gids) {
    GraphSequence seq;
    seq.graph_id = gid;
    auto it = labels.find(gid);
    if (it == labels.end())
      throw std::runtime_error("graph " + gid + " has no label");
    seq.label = it->second;

    std::vector<std::string> files;
    for (const auto& entry :
         fs::directory_iterator(fs::path(snapshot_dir) / "graphs" / gid))
      files.push_back(entry.path().string());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) seq.snapshots.push_back(load_snapshot(f));
    std::sort(seq.snapshots.begin(), seq.snapshots.end(),
              [](const Snapshot& a, const Snapshot& b) {
                return a.index < b.index;
              });
    sequences.push_back(std::move(seq));
  }
  return sequences;
}

NodeLabels load_node_labels(const std::string& path) {
  auto j = nlohmann::json::parse(read_file(path));
  NodeLabels labels;
  for (auto it = j.begin(); it != j.end(); ++it) {
    std::set<uint64_t> ids;
    for (const auto& v : it.value()) ids.insert(v.get<uint64_t>());
    labels[it.key()] = std::move(ids);
  }
  return labels;
}

void save_node_labels(const NodeLabels& labels, const std::string& path) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [gid, ids] : labels)
    j[gid] = std::vector<uint64_t>(ids.begin(), ids.end());
  write_file(path, j.dump());
}

DatasetSplit split_dataset(std::vector<GraphSequence> all,
                           const SplitConfig& cfg) {
  std::vector<GraphSequence> benign, attack;
  for (auto& g : all)
    (g.label == Label::benign ? benign : attack).push_back(std::move(g));

  std::mt19937_64 rng(derive_seed(cfg.seed, "split"));
  std::shuffle(benign.begin(), benign.end(), rng);
  std::shuffle(attack.begin(), attack.end(), rng);

  DatasetSplit split;
  const size_t n_train =
      static_cast<size_t>(benign.size() * cfg.benign_train + 0.5);
  const size_t n_val_benign = (benign.size() - n_train) / 2;
  for (size_t i = 0; i < benign.size(); ++i) {
    if (i < n_train)
      split.train_benign.push_back(std::move(benign[i]));
    else if (i < n_train + n_val_benign)
      split.val.push_back(std::move(benign[i]));
    else
      split.test.push_back(std::move(benign[i]));
  }
  const size_t n_val_attack =
      static_cast<size_t>(attack.size() * cfg.attack_val + 0.5);
  for (size_t i = 0; i < attack.size(); ++i) {
    if (i < n_val_attack)
      split.val.push_back(std::move(attack[i]));
    else
      split.test.push_back(std::move(attack[i]));
  }
  return split;
}

std::vector<std::vector<double>> embed_graphs(
    const Autoencoder& model, const std::vector<GraphSequence>& graphs) {
  std::mt19937_64 rng(0);  // evaluation mode, dropout off
  std::vector<std::vector<double>> out;
  out.reserve(graphs.size());
  for (const auto& g : graphs) {
    Tensor emb = model.encode(g.snapshots, false, rng);
    out.push_back(graph_embedding(emb));
  }
  return out;
}

std::vector<std::vector<double>> embed_nodes(const Autoencoder& model,
                                             const GraphSequence& graph) {
  std::mt19937_64 rng(0);
  Tensor emb = model.encode(graph.snapshots, false, rng);
  std::vector<std::vector<double>> out;
  out.reserve(emb.rows());
  for (size_t i = 0; i < emb.rows(); ++i) {
    std::vector<double> row(emb.cols());
    for (size_t j = 0; j < emb.cols(); ++j) row[j] = emb.at(i, j);
    out.push_back(std::move(row));
  }
  return out;
}

std::vector<double> score_graphs(const Autoencoder& model,
                                 const BenignIndex& index,
                                 const std::vector<GraphSequence>& graphs) {
  std::vector<double> scores;
  for (const auto& emb : embed_graphs(model, graphs))
    scores.push_back(index.score(emb));
  return scores;
}

std::vector<bool> attack_flags(const std::vector<GraphSequence>& graphs) {
  std::vector<bool> flags;
  for (const auto& g : graphs) flags.push_back(g.label == Label::attack);
  return flags;
}

AnomalyReport evaluate_graph_level(const Autoencoder& model,
                                   const BenignIndex& index,
                                   const std::vector<GraphSequence>& test,
                                   double threshold) {
  return metrics(score_graphs(model, index, test), attack_flags(test),
                 threshold);
}

AnomalyReport evaluate_node_level(const Autoencoder& model,
                                  const BenignIndex& index,
                                  const std::vector<GraphSequence>& test,
                                  const NodeLabels& malicious_nodes,
                                  double threshold) {
  std::vector<double> scores;
  std::vector<bool> labels;
  for (const auto& g : test) {
    const auto it = malicious_nodes.find(g.graph_id);
    const auto node_embs = embed_nodes(model, g);
    for (size_t v = 0; v < node_embs.size(); ++v) {
      scores.push_back(index.score(node_embs[v]));
      labels.push_back(it != malicious_nodes.end() && it->second.count(v));
    }
  }
  return metrics(scores, labels, threshold);
}

}  // namespace continuum
