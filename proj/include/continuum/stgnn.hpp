#pragma once

#include <random>
#include <string>
#include <vector>

#include "continuum/ingest.hpp"
#include "continuum/optim.hpp"
#include "continuum/snapshot.hpp"
#include "continuum/tensor.hpp"

namespace continuum {

struct EmptyInput : std::runtime_error {
  explicit EmptyInput(const std::string& what) : std::runtime_error(what) {}
};

struct NonBenignInTraining : std::runtime_error {
  explicit NonBenignInTraining(const std::string& gid)
      : std::runtime_error("graph " + gid + " in training set is not benign") {}
};

struct ModelConfig {
  uint32_t d_node = 0;
  uint32_t d_edge = 0;
  uint32_t d_hidden = 64;
  uint32_t n_gnn_layers = 2;
  uint32_t n_heads = 4;
  double dropout_p = 0.1;
  bool use_edge_features = true;
  uint32_t epochs = 6;
  double lr = 1e-3;
  uint64_t seed = 0;
  double sce_a = 1.0;
  double sce_b = 1.0;
  double leaky_slope = 0.2;

  void validate() const;
};

// Attention coefficients captured per (head, snapshot, layer) group,
// pre-dropout; used by normalization checks and debugging.
struct AttentionTrace {
  struct Group {
    std::vector<double> alpha;     // one per edge, self-loops included
    std::vector<uint32_t> dst;     // edge -> destination node
    size_t n_nodes = 0;
  };
  std::vector<Group> groups;
};

// Edge-aware attention: per edge (i->j),
//   score = leaky_relu(a . [Wsrc h_i | Wedge e_ij | Wdst h_j])
//   alpha = dropout(softmax over j's incoming edges)
//   out_j = prelu(sum_i alpha_ij Wsrc h_i), heads concatenated.
// Nodes with no incoming edges get an implicit self-loop carrying a learned
// edge-feature vector, so softmax never sees an empty group.
class AttentionLayer {
 public:
  AttentionLayer(ParamStore& store, const std::string& prefix, uint32_t d_in,
                 uint32_t d_out, uint32_t d_edge, uint32_t n_heads,
                 bool use_edge_features, double leaky_slope, double dropout_p,
                 std::mt19937_64& rng);

  Tensor forward(const Snapshot& snap, const Tensor& node_states, bool train,
                 std::mt19937_64& rng, AttentionTrace* trace = nullptr) const;

  uint32_t d_out() const { return d_out_; }

 private:
  uint32_t d_in_, d_out_, d_head_, d_edge_, n_heads_;
  bool use_edge_features_;
  double leaky_slope_, dropout_p_;
  struct Head {
    Tensor w_src, w_dst, w_edge;
    Tensor a_src, a_dst, a_edge;  // attention vector, split by operand
  };
  std::vector<Head> heads_;
  Tensor self_edge_feat_;  // 1 x d_edge, learned
  Tensor prelu_slope_;
};

// Gated recurrent cell applied row-wise with weights shared across nodes.
class GruCell {
 public:
  GruCell(ParamStore& store, const std::string& prefix, uint32_t d_in,
          uint32_t d_hidden, std::mt19937_64& rng);

  Tensor forward(const Tensor& x, const Tensor& h_prev) const;

 private:
  Tensor w_z_, u_z_, b_z_;
  Tensor w_r_, u_r_, b_r_;
  Tensor w_n_, u_n_, b_n_;
};

// Symmetric binary cross-entropy between one-hot originals I and
// reconstructions R: mean(a*CE(I,R) + b*CE(R,I)); the reverse term clamps I
// to [eps, 1-eps], eps = 1e-4, to keep logs finite.
Tensor sce_loss(const Tensor& original, const Tensor& reconstructed,
                double a = 1.0, double b = 1.0);

// Mean pooling over node embeddings (one row per node).
std::vector<double> graph_embedding(const Tensor& node_embeddings);

// Encoder: stacked attention layers per snapshot feeding a GRU across
// snapshots. Decoder mirrors it with independent weights and reconstructs
// node features through a final sigmoid projection.
class Autoencoder {
 public:
  explicit Autoencoder(const ModelConfig& cfg);

  Tensor encode(const std::vector<Snapshot>& snapshots, bool train,
                std::mt19937_64& rng, AttentionTrace* trace = nullptr) const;
  Tensor decode(const Tensor& node_embeddings,
                const std::vector<Snapshot>& snapshots, bool train,
                std::mt19937_64& rng) const;

  const ModelConfig& config() const { return cfg_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }

  const std::vector<AttentionLayer>& encoder_layers() const {
    return enc_layers_;
  }
  const GruCell& encoder_gru() const { return *enc_gru_; }

 private:
  ModelConfig cfg_;
  ParamStore params_;
  std::vector<AttentionLayer> enc_layers_;
  std::vector<AttentionLayer> dec_layers_;
  std::unique_ptr<GruCell> enc_gru_;
  std::unique_ptr<GruCell> dec_gru_;
  Tensor out_w_, out_b_;
};

// One graph's ordered snapshot sequence plus its label.
struct GraphSequence {
  std::string graph_id;
  Label label = Label::benign;
  std::vector<Snapshot> snapshots;
};

struct TrainResult {
  std::vector<double> epoch_losses;  // mean reconstruction loss per epoch
};

// One benign graph per step: forward over its snapshot sequence, symmetric
// cross-entropy over all nodes at once, backward, Adam. Deterministic for a
// fixed config seed.
TrainResult train(Autoencoder& model,
                  const std::vector<GraphSequence>& benign_graphs);

}  // namespace continuum
