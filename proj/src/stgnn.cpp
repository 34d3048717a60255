#include "continuum/stgnn.hpp"

#include <cmath>
#include <limits>

#include "continuum/util.hpp"

namespace continuum {

void ModelConfig::validate() const {
  if (d_node < 1 || d_edge < 1 || d_hidden < 1 || n_gnn_layers < 1 ||
      n_heads < 1)
    throw std::invalid_argument("model dims must be >= 1");
  if (d_hidden % n_heads != 0)
    throw std::invalid_argument("d_hidden must be divisible by n_heads");
  if (dropout_p < 0.0 || dropout_p >= 1.0)
    throw std::invalid_argument("dropout_p must be in [0,1)");
}

namespace {
double xavier_bound(size_t fan_in, size_t fan_out) {
  return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

// Numerically stable softmax over variable-size incoming-edge groups. The
// per-group max is a detached constant, so gradients flow only through the
// scores themselves.
Tensor segment_softmax(const Tensor& scores, const std::vector<uint32_t>& seg,
                       size_t n_segments) {
  const size_t n_edges = scores.rows();
  std::vector<double> group_max(n_segments,
                                -std::numeric_limits<double>::infinity());
  for (size_t e = 0; e < n_edges; ++e)
    group_max[seg[e]] = std::max(group_max[seg[e]], scores.data()[e]);
  std::vector<double> gathered(n_edges);
  for (size_t e = 0; e < n_edges; ++e) gathered[e] = group_max[seg[e]];

  Tensor shifted = sub(scores, Tensor::from(n_edges, 1, std::move(gathered)));
  Tensor ex = exp_t(shifted);
  Tensor denom = segment_sum(ex, seg, n_segments);
  return div(ex, index_select(denom, seg));
}
}  // namespace

AttentionLayer::AttentionLayer(ParamStore& store, const std::string& prefix,
                               uint32_t d_in, uint32_t d_out, uint32_t d_edge,
                               uint32_t n_heads, bool use_edge_features,
                               double leaky_slope, double dropout_p,
                               std::mt19937_64& rng)
    : d_in_(d_in),
      d_out_(d_out),
      d_head_(d_out / n_heads),
      d_edge_(d_edge),
      n_heads_(n_heads),
      use_edge_features_(use_edge_features),
      leaky_slope_(leaky_slope),
      dropout_p_(dropout_p) {
  if (d_out % n_heads != 0)
    throw std::invalid_argument("attention width not divisible by heads");
  for (uint32_t h = 0; h < n_heads; ++h) {
    const std::string hp = prefix + ".h" + std::to_string(h);
    Head head;
    head.w_src = store.add(hp + ".w_src",
                           Tensor::uniform(d_in, d_head_,
                                           xavier_bound(d_in, d_head_), rng));
    head.w_dst = store.add(hp + ".w_dst",
                           Tensor::uniform(d_in, d_head_,
                                           xavier_bound(d_in, d_head_), rng));
    head.a_src = store.add(hp + ".a_src",
                           Tensor::uniform(d_head_, 1,
                                           xavier_bound(d_head_, 1), rng));
    head.a_dst = store.add(hp + ".a_dst",
                           Tensor::uniform(d_head_, 1,
                                           xavier_bound(d_head_, 1), rng));
    if (use_edge_features_) {
      head.w_edge = store.add(
          hp + ".w_edge",
          Tensor::uniform(d_edge, d_head_, xavier_bound(d_edge, d_head_), rng));
      head.a_edge = store.add(hp + ".a_edge",
                              Tensor::uniform(d_head_, 1,
                                              xavier_bound(d_head_, 1), rng));
    }
    heads_.push_back(std::move(head));
  }
  if (use_edge_features_)
    self_edge_feat_ =
        store.add(prefix + ".self_edge", Tensor::uniform(1, d_edge, 0.1, rng));
  prelu_slope_ = store.add(prefix + ".prelu", Tensor::from(1, 1, {0.25}));
}

Tensor AttentionLayer::forward(const Snapshot& snap, const Tensor& node_states,
                               bool train, std::mt19937_64& rng,
                               AttentionTrace* trace) const {
  const size_t n_nodes = snap.num_nodes();
  if (node_states.rows() != n_nodes || node_states.cols() != d_in_)
    throw ShapeMismatch("attention_forward", node_states.shape_str(),
                        std::to_string(n_nodes) + "x" + std::to_string(d_in_));
  if (snap.d_edge != d_edge_)
    throw ShapeMismatch("attention_forward",
                        "edge dim " + std::to_string(snap.d_edge),
                        std::to_string(d_edge_));

  const size_t n_real = snap.edges.size();
  std::vector<uint32_t> src_idx, dst_idx;
  src_idx.reserve(n_real);
  dst_idx.reserve(n_real);
  std::vector<double> feat_buf;
  feat_buf.reserve(n_real * d_edge_);
  std::vector<uint32_t> indeg(n_nodes, 0);
  for (const auto& e : snap.edges) {
    src_idx.push_back(static_cast<uint32_t>(e.src));
    dst_idx.push_back(static_cast<uint32_t>(e.dst));
    ++indeg[e.dst];
    if (e.counts.size() != d_edge_)
      throw ShapeMismatch("attention_forward",
                          "counts " + std::to_string(e.counts.size()),
                          std::to_string(d_edge_));
    for (uint32_t c : e.counts) feat_buf.push_back(static_cast<double>(c));
  }

  // Implicit self-loops for in-degree-zero nodes.
  size_t n_self = 0;
  for (uint32_t v = 0; v < n_nodes; ++v) {
    if (indeg[v] == 0) {
      src_idx.push_back(v);
      dst_idx.push_back(v);
      ++n_self;
    }
  }

  Tensor edge_feats;
  if (use_edge_features_) {
    std::vector<Tensor> parts;
    if (n_real > 0)
      parts.push_back(Tensor::from(n_real, d_edge_, std::move(feat_buf)));
    if (n_self > 0)
      parts.push_back(index_select(self_edge_feat_,
                                   std::vector<uint32_t>(n_self, 0)));
    edge_feats = parts.size() == 1 ? parts[0] : concat_rows(parts);
  }

  std::vector<Tensor> head_outs;
  head_outs.reserve(n_heads_);
  for (const auto& head : heads_) {
    Tensor proj_src = matmul(node_states, head.w_src);
    Tensor proj_dst = matmul(node_states, head.w_dst);
    Tensor score = add(index_select(matmul(proj_src, head.a_src), src_idx),
                       index_select(matmul(proj_dst, head.a_dst), dst_idx));
    if (use_edge_features_)
      score = add(score, matmul(matmul(edge_feats, head.w_edge), head.a_edge));
    score = leaky_relu(score, leaky_slope_);

    Tensor alpha = segment_softmax(score, dst_idx, n_nodes);
    if (trace != nullptr)
      trace->groups.push_back({alpha.data(), dst_idx, n_nodes});
    alpha = dropout(alpha, dropout_p_, train, rng);

    Tensor weighted = mul(index_select(proj_src, src_idx), alpha);
    head_outs.push_back(segment_sum(weighted, dst_idx, n_nodes));
  }
  Tensor combined = n_heads_ == 1 ? head_outs[0] : concat_cols(head_outs);
  return prelu(combined, prelu_slope_);
}

GruCell::GruCell(ParamStore& store, const std::string& prefix, uint32_t d_in,
                 uint32_t d_hidden, std::mt19937_64& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(d_hidden));
  auto weight = [&](const std::string& name, uint32_t r, uint32_t c) {
    return store.add(prefix + name, Tensor::uniform(r, c, bound, rng));
  };
  w_z_ = weight(".w_z", d_in, d_hidden);
  u_z_ = weight(".u_z", d_hidden, d_hidden);
  b_z_ = weight(".b_z", 1, d_hidden);
  w_r_ = weight(".w_r", d_in, d_hidden);
  u_r_ = weight(".u_r", d_hidden, d_hidden);
  b_r_ = weight(".b_r", 1, d_hidden);
  w_n_ = weight(".w_n", d_in, d_hidden);
  u_n_ = weight(".u_n", d_hidden, d_hidden);
  b_n_ = weight(".b_n", 1, d_hidden);
}

Tensor GruCell::forward(const Tensor& x, const Tensor& h_prev) const {
  Tensor z = sigmoid(add(add(matmul(x, w_z_), matmul(h_prev, u_z_)), b_z_));
  Tensor r = sigmoid(add(add(matmul(x, w_r_), matmul(h_prev, u_r_)), b_r_));
  Tensor n =
      tanh_t(add(add(matmul(x, w_n_), mul(r, matmul(h_prev, u_n_))), b_n_));
  // h' = (1-z) n + z h
  return add(sub(n, mul(z, n)), mul(z, h_prev));
}

Tensor sce_loss(const Tensor& original, const Tensor& reconstructed, double a,
                double b) {
  if (original.rows() != reconstructed.rows() ||
      original.cols() != reconstructed.cols())
    throw ShapeMismatch("sce_loss", original.shape_str(),
                        reconstructed.shape_str());
  constexpr double kEps = 1e-4;

  Tensor r = clamp(reconstructed, 1e-12, 1.0 - 1e-12);
  Tensor i_c = clamp(original, kEps, 1.0 - kEps);
  Tensor one_minus_i = add_scalar(scale(original, -1.0), 1.0);
  Tensor one_minus_r = add_scalar(scale(reconstructed, -1.0), 1.0);

  Tensor ce_fwd = scale(
      add(mul(original, log_t(r)),
          mul(one_minus_i, log_t(add_scalar(scale(r, -1.0), 1.0)))),
      -1.0);
  Tensor ce_rev = scale(
      add(mul(reconstructed, log_t(i_c)),
          mul(one_minus_r, log_t(add_scalar(scale(i_c, -1.0), 1.0)))),
      -1.0);
  return mean(add(scale(ce_fwd, a), scale(ce_rev, b)));
}

std::vector<double> graph_embedding(const Tensor& node_embeddings) {
  if (node_embeddings.rows() == 0)
    throw EmptyInput("graph_embedding: no nodes");
  const size_t n = node_embeddings.rows();
  const size_t d = node_embeddings.cols();
  std::vector<double> pooled(d, 0.0);
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < d; ++j) pooled[j] += node_embeddings.at(i, j);
  for (auto& v : pooled) v /= static_cast<double>(n);
  return pooled;
}

Autoencoder::Autoencoder(const ModelConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  std::mt19937_64 rng(derive_seed(cfg.seed, "model-init"));
  for (uint32_t l = 0; l < cfg.n_gnn_layers; ++l) {
    const uint32_t d_in = l == 0 ? cfg.d_node : cfg.d_hidden;
    enc_layers_.emplace_back(params_, "enc.gnn" + std::to_string(l), d_in,
                             cfg.d_hidden, cfg.d_edge, cfg.n_heads,
                             cfg.use_edge_features, cfg.leaky_slope,
                             cfg.dropout_p, rng);
  }
  enc_gru_ = std::make_unique<GruCell>(params_, "enc.gru", cfg.d_hidden,
                                       cfg.d_hidden, rng);
  for (uint32_t l = 0; l < cfg.n_gnn_layers; ++l) {
    dec_layers_.emplace_back(params_, "dec.gnn" + std::to_string(l),
                             cfg.d_hidden, cfg.d_hidden, cfg.d_edge,
                             cfg.n_heads, cfg.use_edge_features,
                             cfg.leaky_slope, cfg.dropout_p, rng);
  }
  dec_gru_ = std::make_unique<GruCell>(params_, "dec.gru", cfg.d_hidden,
                                       cfg.d_hidden, rng);
  out_w_ = params_.add("dec.out_w",
                       Tensor::uniform(cfg.d_hidden, cfg.d_node,
                                       xavier_bound(cfg.d_hidden, cfg.d_node),
                                       rng));
  out_b_ = params_.add("dec.out_b", Tensor::zeros(1, cfg.d_node));
}

Tensor Autoencoder::encode(const std::vector<Snapshot>& snapshots, bool train,
                           std::mt19937_64& rng, AttentionTrace* trace) const {
  if (snapshots.empty()) throw EmptyInput("encode: no snapshots");
  const size_t n_nodes = snapshots[0].num_nodes();
  for (const auto& s : snapshots) {
    if (s.num_nodes() != n_nodes)
      throw ShapeMismatch("encode", std::to_string(s.num_nodes()) + " nodes",
                          std::to_string(n_nodes) + " nodes");
    if (s.d_node != cfg_.d_node)
      throw ShapeMismatch("encode", "d_node " + std::to_string(s.d_node),
                          std::to_string(cfg_.d_node));
  }

  Tensor hidden = Tensor::zeros(n_nodes, cfg_.d_hidden);
  for (const auto& snap : snapshots) {
    Tensor x = Tensor::from(n_nodes, cfg_.d_node, snap.node_features());
    for (const auto& layer : enc_layers_)
      x = layer.forward(snap, x, train, rng, trace);
    hidden = enc_gru_->forward(x, hidden);
  }
  return hidden;
}

Tensor Autoencoder::decode(const Tensor& node_embeddings,
                           const std::vector<Snapshot>& snapshots, bool train,
                           std::mt19937_64& rng) const {
  if (snapshots.empty()) throw EmptyInput("decode: no snapshots");
  const size_t n_nodes = snapshots[0].num_nodes();
  if (node_embeddings.rows() != n_nodes ||
      node_embeddings.cols() != cfg_.d_hidden)
    throw ShapeMismatch("decode", node_embeddings.shape_str(),
                        std::to_string(n_nodes) + "x" +
                            std::to_string(cfg_.d_hidden));

  Tensor hidden = Tensor::zeros(n_nodes, cfg_.d_hidden);
  for (const auto& snap : snapshots) {
    Tensor x = node_embeddings;
    for (const auto& layer : dec_layers_)
      x = layer.forward(snap, x, train, rng, nullptr);
    hidden = dec_gru_->forward(x, hidden);
  }
  return sigmoid(add(matmul(hidden, out_w_), out_b_));
}

TrainResult train(Autoencoder& model,
                  const std::vector<GraphSequence>& benign_graphs) {
  for (const auto& g : benign_graphs)
    if (g.label != Label::benign) throw NonBenignInTraining(g.graph_id);

  const ModelConfig& cfg = model.config();
  std::mt19937_64 rng(derive_seed(cfg.seed, "train"));
  auto params = model.params().tensors();
  AdamState adam;
  adam.lr = cfg.lr;
  adam.init(params);

  TrainResult result;
  for (uint32_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    double total = 0.0;
    for (const auto& g : benign_graphs) {
      Tape tape;
      TapeScope scope(tape);
      Tensor emb = model.encode(g.snapshots, true, rng);
      Tensor rec = model.decode(emb, g.snapshots, true, rng);
      Tensor original = Tensor::from(g.snapshots[0].num_nodes(), cfg.d_node,
                                     g.snapshots[0].node_features());
      Tensor loss = sce_loss(original, rec, cfg.sce_a, cfg.sce_b);
      tape.backward(loss);
      adam_step(params, adam);
      zero_grads(params);
      total += loss.value();
    }
    result.epoch_losses.push_back(
        benign_graphs.empty() ? 0.0 : total / benign_graphs.size());
  }
  return result;
}

}  // namespace continuum
