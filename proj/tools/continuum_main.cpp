#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "continuum/config.hpp"
#include "continuum/detect.hpp"
#include "continuum/fedsec.hpp"
#include "continuum/pipeline.hpp"
#include "continuum/util.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace continuum;

namespace {

ModelConfig model_for_data(const RunConfig& cfg, const std::string& data_dir) {
  auto nv = TypeVocabulary::load((fs::path(data_dir) / "vocab_nodes.txt").string(),
                                 TypeVocabulary::Kind::node);
  auto ev = TypeVocabulary::load((fs::path(data_dir) / "vocab_edges.txt").string(),
                                 TypeVocabulary::Kind::edge);
  ModelConfig mc = cfg.model;
  mc.d_node = static_cast<uint32_t>(nv.size());
  mc.d_edge = static_cast<uint32_t>(ev.size());
  mc.seed = cfg.seed;
  return mc;
}

void save_model(const Autoencoder& model, const std::string& path) {
  model.params().save(path);
  write_file(path + ".meta.json", model_config_to_json(model.config()));
}

Autoencoder load_model(const std::string& path) {
  ModelConfig mc = model_config_from_json(read_file(path + ".meta.json"));
  Autoencoder model(mc);
  model.params().load(path);
  return model;
}

std::vector<GraphSequence> benign_only(std::vector<GraphSequence> all) {
  std::vector<GraphSequence> out;
  for (auto& g : all)
    if (g.label == Label::benign) out.push_back(std::move(g));
  return out;
}

int cmd_ingest(const RunConfig& cfg) {
  DatasetManifest manifest;
  manifest.format = cfg.ingest.format == "streamspot"
                        ? DatasetManifest::Format::streamspot
                        : DatasetManifest::Format::canonical;
  manifest.paths = cfg.ingest.inputs;
  manifest.labels = load_labels(cfg.ingest.labels);
  auto ds = run_ingest(manifest, cfg.ingest.out, cfg.serial ? 1 : cfg.jobs);
  std::cout << "ingested " << ds.graphs.size() << " graphs, "
            << ds.node_vocab.size() << " node types, " << ds.edge_vocab.size()
            << " edge types\n";
  return 0;
}

int cmd_snapshot(const RunConfig& cfg) {
  auto report = run_snapshot_stage(cfg.snapshot.in, cfg.snapshot.n,
                                   cfg.snapshot.out, cfg.snapshot.report);
  std::cout << "snapshots written: n=" << cfg.snapshot.n << ", edges "
            << report.total_before << " -> " << report.total_after << " ("
            << report.total_reduction_pct << "% reduction)\n";
  return 0;
}

int cmd_train(const RunConfig& cfg, const std::string& data,
              const std::string& out, const std::string& trace_csv) {
  ModelConfig mc = model_for_data(cfg, data);
  auto benign = benign_only(load_sequences(data));
  Autoencoder model(mc);
  TrainResult tr = train(model, benign);
  save_model(model, out);
  if (!trace_csv.empty()) {
    std::ofstream t(trace_csv);
    t << "epoch,loss\n";
    for (size_t e = 0; e < tr.epoch_losses.size(); ++e)
      t << e << ',' << tr.epoch_losses[e] << '\n';
  }
  std::cout << "trained on " << benign.size() << " benign graphs for "
            << mc.epochs << " epochs";
  if (!tr.epoch_losses.empty())
    std::cout << ", final loss " << tr.epoch_losses.back();
  std::cout << "\n";
  return 0;
}

int cmd_eval(const RunConfig& cfg, const std::string& model_path,
             const std::string& index_from, const std::string& test_dir,
             const std::string& val_dir, const std::string& level,
             const std::string& report_path) {
  Autoencoder model = load_model(model_path);
  auto index_graphs = benign_only(load_sequences(index_from));
  auto test = load_sequences(test_dir);

  AnomalyReport report;
  std::string threshold_source;
  if (level == "graph") {
    BenignIndex index(embed_graphs(model, index_graphs), cfg.detect.k);
    std::vector<GraphSequence> val =
        val_dir.empty() ? test : load_sequences(val_dir);
    threshold_source = val_dir.empty() ? "test" : "validation";
    double threshold =
        choose_threshold(score_graphs(model, index, val), attack_flags(val));
    report = evaluate_graph_level(model, index, test, threshold);
  } else {
    std::vector<std::vector<double>> benign_nodes;
    for (const auto& g : index_graphs)
      for (auto& row : embed_nodes(model, g))
        benign_nodes.push_back(std::move(row));
    BenignIndex index(std::move(benign_nodes), cfg.detect.k);

    NodeLabels node_labels;
    const fs::path labels_path = fs::path(test_dir) / "node_labels.json";
    if (fs::exists(labels_path))
      node_labels = load_node_labels(labels_path.string());

    std::vector<double> val_scores;
    std::vector<bool> val_flags;
    for (const auto& g : test) {
      const auto it = node_labels.find(g.graph_id);
      const auto embs = embed_nodes(model, g);
      for (size_t v = 0; v < embs.size(); ++v) {
        val_scores.push_back(index.score(embs[v]));
        val_flags.push_back(it != node_labels.end() && it->second.count(v));
      }
    }
    threshold_source = "test";
    double threshold = choose_threshold(val_scores, val_flags);
    report = evaluate_node_level(model, index, test, node_labels, threshold);
  }

  auto j = nlohmann::json::parse(report.to_json());
  j["level"] = level;
  j["k"] = cfg.detect.k;
  j["threshold_source"] = threshold_source;
  write_file(report_path, j.dump(2));
  std::cout << "precision " << report.precision << ", recall " << report.recall
            << ", f1 " << report.f1 << ", auc " << report.auc << "\n";
  return 0;
}

int cmd_fed_train(const RunConfig& cfg, const std::string& data,
                  const std::string& out, const std::string& log_path) {
  ModelConfig mc = model_for_data(cfg, data);
  auto benign = benign_only(load_sequences(data));
  if (benign.size() < cfg.federation.clients)
    throw ValidationError("fewer benign graphs than clients");

  std::vector<std::vector<GraphSequence>> shards(cfg.federation.clients);
  for (size_t i = 0; i < benign.size(); ++i)
    shards[i % cfg.federation.clients].push_back(std::move(benign[i]));

  FedConfig fed;
  fed.n_clients = cfg.federation.clients;
  fed.threshold = cfg.federation.threshold;
  fed.rounds = cfg.federation.rounds;
  fed.local_epochs = cfg.federation.local_epochs;
  fed.seed = cfg.seed;

  MessageBus bus;
  FederationResult result = run_federation(fed, mc, shards, &bus);
  if (!log_path.empty()) bus.save_jsonl(log_path);

  ModelConfig final_cfg = mc;
  final_cfg.epochs = fed.local_epochs;
  Autoencoder global(final_cfg);
  global.params().unflatten(result.global_params);
  save_model(global, out);

  std::cout << "federated training: " << fed.n_clients << " clients, "
            << fed.rounds << " rounds; per-client seconds:";
  for (double s : result.client_seconds) std::cout << ' ' << s;
  std::cout << "\n";
  return 0;
}

int cmd_report(const std::string& compression_csv,
               const std::string& metrics_json) {
  if (!compression_csv.empty()) {
    std::ifstream in(compression_csv);
    if (!in) throw std::runtime_error("cannot open " + compression_csv);
    std::string line;
    std::getline(in, line);  // header
    uint64_t before = 0, after = 0;
    uint64_t stored_before = 0, stored_after = 0;
    std::cout << "Edges per graph before and after compression\n";
    std::cout << "graph_id            before      after   reduction%\n";
    while (std::getline(in, line)) {
      auto f = split(line, ',');
      if (f.size() != 4) continue;
      if (f[0] == "TOTAL") {
        stored_before = std::stoull(f[1]);
        stored_after = std::stoull(f[2]);
        continue;
      }
      before += std::stoull(f[1]);
      after += std::stoull(f[2]);
      printf("%-18s %9s %10s %12s\n", f[0].c_str(), f[1].c_str(), f[2].c_str(),
             f[3].c_str());
    }
    const double pct =
        before == 0 ? 0.0 : 100.0 * (1.0 - double(after) / double(before));
    printf("%-18s %9llu %10llu %12.4f\n", "TOTAL",
           static_cast<unsigned long long>(before),
           static_cast<unsigned long long>(after), pct);
    if (before != stored_before || after != stored_after)
      throw std::runtime_error("stored totals disagree with recomputation");
  }
  if (!metrics_json.empty()) {
    AnomalyReport stored = AnomalyReport::from_json(read_file(metrics_json));
    AnomalyReport recomputed =
        metrics(stored.scores, stored.labels, stored.threshold);
    std::cout << "Detection metrics\n";
    printf("%-10s %-8s %-8s %-8s %-8s %-8s\n", "", "Precision", "Recall", "F1",
           "AUC", "FP%");
    printf("%-10s %-9.4f %-8.4f %-8.4f %-8.4f %-8.4f\n", "stored",
           stored.precision, stored.recall, stored.f1, stored.auc,
           100.0 * stored.fp_rate);
    printf("%-10s %-9.4f %-8.4f %-8.4f %-8.4f %-8.4f\n", "recomputed",
           recomputed.precision, recomputed.recall, recomputed.f1,
           recomputed.auc, 100.0 * recomputed.fp_rate);
    if (recomputed.tp != stored.tp || recomputed.tn != stored.tn ||
        recomputed.fp != stored.fp || recomputed.fn != stored.fn)
      throw std::runtime_error(
          "stored confusion counts disagree with recomputation");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"provenance-graph anomaly detection pipeline"};
  app.require_subcommand(1);

  std::string config_path;
  uint64_t seed = 0;
  unsigned jobs = 1;
  bool serial = false;
  app.add_option("--config", config_path, "run configuration (JSON)");
  auto* seed_opt = app.add_option("--seed", seed, "global seed");
  auto* jobs_opt = app.add_option("--jobs", jobs, "worker threads per stage");
  auto* serial_flag = app.add_flag("--serial", serial, "force serial mode");

  auto* ingest = app.add_subcommand("ingest", "parse datasets into graphs");
  std::string in_format;
  std::vector<std::string> in_inputs;
  std::string in_labels, in_out;
  ingest->add_option("--format", in_format, "streamspot|canonical");
  ingest->add_option("--input", in_inputs, "input files");
  ingest->add_option("--labels", in_labels, "labels JSON");
  ingest->add_option("--out", in_out, "output directory");

  auto* snapshot = app.add_subcommand("snapshot", "segment and compress");
  uint32_t sn_n = 0;
  std::string sn_in, sn_out, sn_report;
  snapshot->add_option("--n", sn_n, "snapshots per graph");
  snapshot->add_option("--in", sn_in, "ingested graph directory");
  snapshot->add_option("--out", sn_out, "snapshot output directory");
  snapshot->add_option("--report", sn_report, "compression report CSV");

  auto* train_cmd = app.add_subcommand("train", "train the autoencoder");
  std::string tr_data, tr_out, tr_trace;
  train_cmd->add_option("--data", tr_data, "snapshot directory")->required();
  train_cmd->add_option("--out", tr_out, "checkpoint path")->required();
  train_cmd->add_option("--loss-trace", tr_trace, "per-epoch loss CSV");

  auto* eval_cmd = app.add_subcommand("eval", "score and report");
  std::string ev_model, ev_index, ev_test, ev_val, ev_level = "graph",
              ev_report = "report.json";
  uint32_t ev_k = 0;
  eval_cmd->add_option("--model", ev_model, "checkpoint path")->required();
  eval_cmd->add_option("--index-from", ev_index, "benign snapshot dir")
      ->required();
  eval_cmd->add_option("--test", ev_test, "test snapshot dir")->required();
  eval_cmd->add_option("--val", ev_val, "validation snapshot dir");
  eval_cmd->add_option("--level", ev_level, "graph|node");
  eval_cmd->add_option("--k", ev_k, "neighbor count");
  eval_cmd->add_option("--report", ev_report, "report JSON path");

  auto* fed = app.add_subcommand("fed-train", "federated training simulation");
  uint32_t fd_clients = 0, fd_threshold = 0, fd_rounds = 0, fd_epochs = 0;
  std::string fd_data, fd_out, fd_log;
  fed->add_option("--clients", fd_clients, "client count");
  fed->add_option("--threshold", fd_threshold, "decryption threshold");
  fed->add_option("--rounds", fd_rounds, "federation rounds");
  fed->add_option("--local-epochs", fd_epochs, "client epochs per round");
  fed->add_option("--data", fd_data, "snapshot directory")->required();
  fed->add_option("--out", fd_out, "checkpoint path")->required();
  fed->add_option("--log", fd_log, "round log JSONL");

  auto* report_cmd = app.add_subcommand("report", "print stored artifacts");
  std::string rp_compression, rp_metrics;
  report_cmd->add_option("--compression", rp_compression, "compression CSV");
  report_cmd->add_option("--metrics", rp_metrics, "report JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    RunConfig cfg;
    if (!config_path.empty()) cfg = load_run_config(config_path);
    if (!seed_opt->empty()) cfg.seed = seed;
    if (!jobs_opt->empty()) cfg.jobs = jobs;
    if (!serial_flag->empty()) cfg.serial = serial;

    if (*ingest) {
      if (!in_format.empty()) cfg.ingest.format = in_format;
      if (!in_inputs.empty()) cfg.ingest.inputs = in_inputs;
      if (!in_labels.empty()) cfg.ingest.labels = in_labels;
      if (!in_out.empty()) cfg.ingest.out = in_out;
      cfg.validate();
      if (cfg.ingest.inputs.empty() || cfg.ingest.labels.empty() ||
          cfg.ingest.out.empty())
        throw ValidationError("ingest needs --input, --labels and --out");
      return cmd_ingest(cfg);
    }
    if (*snapshot) {
      if (sn_n > 0) cfg.snapshot.n = sn_n;
      if (!sn_in.empty()) cfg.snapshot.in = sn_in;
      if (!sn_out.empty()) cfg.snapshot.out = sn_out;
      if (!sn_report.empty()) cfg.snapshot.report = sn_report;
      cfg.validate();
      if (cfg.snapshot.in.empty() || cfg.snapshot.out.empty())
        throw ValidationError("snapshot needs --in and --out");
      return cmd_snapshot(cfg);
    }
    if (*train_cmd) {
      cfg.validate();
      return cmd_train(cfg, tr_data, tr_out, tr_trace);
    }
    if (*eval_cmd) {
      if (ev_k > 0) cfg.detect.k = ev_k;
      cfg.detect.level = ev_level;
      cfg.validate();
      return cmd_eval(cfg, ev_model, ev_index, ev_test, ev_val, ev_level,
                      ev_report);
    }
    if (*fed) {
      if (fd_clients > 0) cfg.federation.clients = fd_clients;
      if (fd_threshold > 0) cfg.federation.threshold = fd_threshold;
      if (fd_rounds > 0) cfg.federation.rounds = fd_rounds;
      if (fd_epochs > 0) cfg.federation.local_epochs = fd_epochs;
      cfg.validate();
      return cmd_fed_train(cfg, fd_data, fd_out, fd_log);
    }
    if (*report_cmd) {
      if (rp_compression.empty() && rp_metrics.empty())
        throw ValidationError("report needs --compression and/or --metrics");
      return cmd_report(rp_compression, rp_metrics);
    }
  } catch (const ValidationError& e) {
    std::cerr << "continuum: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "continuum: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "continuum: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
