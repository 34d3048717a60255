#include "continuum/config.hpp"

#include <set>

#include "continuum/util.hpp"
#include "json.hpp"

namespace continuum {

namespace {
using nlohmann::json;

void reject_unknown(const json& j, const std::string& where,
                    const std::set<std::string>& allowed) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key()))
      throw ValidationError("unknown key \"" + it.key() + "\" in " + where);
}

template <typename T>
void read_into(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}
}  // namespace

void RunConfig::validate() const {
  if (ingest.format != "streamspot" && ingest.format != "canonical")
    throw ValidationError("ingest.format must be streamspot or canonical");
  if (snapshot.n < 1) throw ValidationError("snapshot.n must be >= 1");
  if (detect.level != "graph" && detect.level != "node")
    throw ValidationError("detect.level must be graph or node");
  if (detect.k < 1) throw ValidationError("detect.k must be >= 1");
  if (detect.benign_train_frac <= 0.0 || detect.benign_train_frac >= 1.0)
    throw ValidationError("detect.benign_train_frac must be in (0,1)");
  if (detect.attack_val_frac < 0.0 || detect.attack_val_frac > 1.0)
    throw ValidationError("detect.attack_val_frac must be in [0,1]");
  if (model.d_hidden < 1 || model.n_gnn_layers < 1 || model.n_heads < 1)
    throw ValidationError("model dims must be >= 1");
  if (model.d_hidden % model.n_heads != 0)
    throw ValidationError("model.d_hidden must be divisible by model.n_heads");
  if (model.dropout_p < 0.0 || model.dropout_p >= 1.0)
    throw ValidationError("model.dropout must be in [0,1)");
  if (federation.threshold <= 1 ||
      federation.threshold > federation.clients)
    throw ValidationError("federation.threshold must satisfy 1 < t <= clients");
  if (federation.rounds < 1)
    throw ValidationError("federation.rounds must be >= 1");
}

RunConfig parse_run_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("config is not valid JSON: ") + e.what());
  }

  RunConfig cfg;
  reject_unknown(j, "config root",
                 {"seed", "jobs", "serial", "ingest", "snapshot", "model",
                  "detect", "federation"});
  read_into(j, "seed", cfg.seed);
  read_into(j, "jobs", cfg.jobs);
  read_into(j, "serial", cfg.serial);

  if (j.contains("ingest")) {
    const auto& s = j.at("ingest");
    reject_unknown(s, "ingest", {"format", "inputs", "labels", "out"});
    read_into(s, "format", cfg.ingest.format);
    read_into(s, "inputs", cfg.ingest.inputs);
    read_into(s, "labels", cfg.ingest.labels);
    read_into(s, "out", cfg.ingest.out);
  }
  if (j.contains("snapshot")) {
    const auto& s = j.at("snapshot");
    reject_unknown(s, "snapshot", {"n", "in", "out", "report"});
    read_into(s, "n", cfg.snapshot.n);
    read_into(s, "in", cfg.snapshot.in);
    read_into(s, "out", cfg.snapshot.out);
    read_into(s, "report", cfg.snapshot.report);
  }
  if (j.contains("model")) {
    const auto& s = j.at("model");
    reject_unknown(s, "model",
                   {"d_hidden", "n_gnn_layers", "n_heads", "dropout",
                    "use_edge_features", "epochs", "lr", "sce_a", "sce_b",
                    "leaky_slope"});
    read_into(s, "d_hidden", cfg.model.d_hidden);
    read_into(s, "n_gnn_layers", cfg.model.n_gnn_layers);
    read_into(s, "n_heads", cfg.model.n_heads);
    read_into(s, "dropout", cfg.model.dropout_p);
    read_into(s, "use_edge_features", cfg.model.use_edge_features);
    read_into(s, "epochs", cfg.model.epochs);
    read_into(s, "lr", cfg.model.lr);
    read_into(s, "sce_a", cfg.model.sce_a);
    read_into(s, "sce_b", cfg.model.sce_b);
    read_into(s, "leaky_slope", cfg.model.leaky_slope);
  }
  if (j.contains("detect")) {
    const auto& s = j.at("detect");
    reject_unknown(s, "detect",
                   {"k", "benign_train_frac", "attack_val_frac", "level"});
    read_into(s, "k", cfg.detect.k);
    read_into(s, "benign_train_frac", cfg.detect.benign_train_frac);
    read_into(s, "attack_val_frac", cfg.detect.attack_val_frac);
    read_into(s, "level", cfg.detect.level);
  }
  if (j.contains("federation")) {
    const auto& s = j.at("federation");
    reject_unknown(s, "federation",
                   {"clients", "threshold", "rounds", "local_epochs"});
    read_into(s, "clients", cfg.federation.clients);
    read_into(s, "threshold", cfg.federation.threshold);
    read_into(s, "rounds", cfg.federation.rounds);
    read_into(s, "local_epochs", cfg.federation.local_epochs);
  }
  cfg.validate();
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  return parse_run_config(read_file(path));
}

std::string model_config_to_json(const ModelConfig& cfg) {
  json j;
  j["d_node"] = cfg.d_node;
  j["d_edge"] = cfg.d_edge;
  j["d_hidden"] = cfg.d_hidden;
  j["n_gnn_layers"] = cfg.n_gnn_layers;
  j["n_heads"] = cfg.n_heads;
  j["dropout"] = cfg.dropout_p;
  j["use_edge_features"] = cfg.use_edge_features;
  j["epochs"] = cfg.epochs;
  j["lr"] = cfg.lr;
  j["seed"] = cfg.seed;
  j["sce_a"] = cfg.sce_a;
  j["sce_b"] = cfg.sce_b;
  j["leaky_slope"] = cfg.leaky_slope;
  return j.dump(2);
}

ModelConfig model_config_from_json(const std::string& text) {
  auto j = json::parse(text);
  ModelConfig cfg;
  cfg.d_node = j.at("d_node").get<uint32_t>();
  cfg.d_edge = j.at("d_edge").get<uint32_t>();
  cfg.d_hidden = j.at("d_hidden").get<uint32_t>();
  cfg.n_gnn_layers = j.at("n_gnn_layers").get<uint32_t>();
  cfg.n_heads = j.at("n_heads").get<uint32_t>();
  cfg.dropout_p = j.at("dropout").get<double>();
  cfg.use_edge_features = j.at("use_edge_features").get<bool>();
  cfg.epochs = j.at("epochs").get<uint32_t>();
  cfg.lr = j.at("lr").get<double>();
  cfg.seed = j.at("seed").get<uint64_t>();
  cfg.sce_a = j.at("sce_a").get<double>();
  cfg.sce_b = j.at("sce_b").get<double>();
  cfg.leaky_slope = j.at("leaky_slope").get<double>();
  return cfg;
}

}  // namespace continuum
