#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "continuum/field.hpp"
#include "continuum/shamir.hpp"
#include "continuum/stgnn.hpp"

namespace continuum {

struct MissingClient : std::runtime_error {
  std::vector<uint32_t> ids;
  explicit MissingClient(std::vector<uint32_t> missing);
};

struct LengthMismatch : std::runtime_error {
  LengthMismatch(size_t a, size_t b)
      : std::runtime_error("payload lengths differ: " + std::to_string(a) +
                           " vs " + std::to_string(b)) {}
};

struct DivergedRound : std::runtime_error {
  DivergedRound(uint32_t round, uint32_t client)
      : std::runtime_error("client " + std::to_string(client) +
                           " diverged in round " + std::to_string(round)) {}
};

// One Shamir share of one client's quantized weight vector.
struct ShareBundle {
  uint32_t round = 0;
  uint32_t client_id = 0;
  uint32_t share_index = 0;  // evaluation point x, 1-based
  std::vector<uint64_t> payload;
};

struct FedConfig {
  uint32_t n_clients = 3;
  uint32_t threshold = 2;
  uint32_t rounds = 2;
  uint32_t local_epochs = 2;
  uint64_t seed = 0;
  // the subset of share indices doing collaborative decryption; defaults to
  // 1..threshold when empty
  std::vector<uint32_t> decrypt_subset;

  void validate() const;
};

// Splits a field vector into n bundles; any t of them reconstruct it.
std::vector<ShareBundle> share_vector(const std::vector<uint64_t>& secret,
                                      uint32_t n, uint32_t t, uint32_t round,
                                      uint32_t client_id,
                                      std::mt19937_64& rng);

// In-process message bus; the log is one canonical-JSON envelope per line:
// {round, from, to, kind, payload_b64}.
class MessageBus {
 public:
  struct Message {
    uint32_t round;
    std::string from;
    std::string to;
    std::string kind;  // params | shares | agg_shares | partial
    std::string payload_b64;
  };

  void send(uint32_t round, const std::string& from, const std::string& to,
            const std::string& kind, const std::vector<uint8_t>& payload);
  const std::vector<Message>& log() const { return log_; }
  void save_jsonl(const std::string& path) const;

 private:
  std::vector<Message> log_;
};

std::vector<uint8_t> field_vector_bytes(const std::vector<uint64_t>& v);
std::vector<uint8_t> f64_vector_bytes(const std::vector<double>& v);

// The server's whole surface: collect this round's bundles, add them
// share-index-wise. Linearity makes the sums valid shares of the summed
// weights, so nothing here ever needs (or has) a reconstruction path.
class AggregationServer {
 public:
  explicit AggregationServer(uint32_t n_clients) : n_clients_(n_clients) {}

  void submit(ShareBundle bundle);
  // One aggregated bundle per share index, all clients required.
  std::vector<ShareBundle> aggregate(uint32_t round);

 private:
  uint32_t n_clients_;
  std::vector<ShareBundle> inbox_;
};

// Client-side collaborative decryption.
std::vector<uint64_t> partial_decrypt(const ShareBundle& bundle,
                                      uint64_t lagrange_coeff);
std::vector<uint64_t> merge_partials(
    const std::vector<std::vector<uint64_t>>& partials);

// Lagrange basis for the participating subset; throws WrongSubsetSize unless
// exactly t members are declared.
std::vector<uint64_t> decryption_basis(const std::vector<uint32_t>& subset,
                                       uint32_t threshold);

struct FederationResult {
  std::vector<double> global_params;               // flattened, final round
  std::vector<std::vector<double>> client_losses;  // [round][client] mean loss
  std::vector<double> client_seconds;              // per-client compute time
};

// Algorithm: per round, broadcast global params; clients train locally,
// quantize, share, submit; the server adds shares; a t-subset of clients
// partially decrypts and merges; everyone divides by n and dequantizes.
FederationResult run_federation(
    const FedConfig& fed_cfg, const ModelConfig& model_cfg,
    const std::vector<std::vector<GraphSequence>>& client_shards,
    MessageBus* bus = nullptr);

}  // namespace continuum
