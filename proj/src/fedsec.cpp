#include "continuum/fedsec.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>

#include "continuum/util.hpp"
#include "json.hpp"

namespace continuum {

namespace {
std::string join_ids(const std::vector<uint32_t>& ids) {
  std::string s;
  for (size_t i = 0; i < ids.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(ids[i]);
  }
  return s;
}
}  // namespace

MissingClient::MissingClient(std::vector<uint32_t> missing)
    : std::runtime_error("missing clients: " + join_ids(missing)),
      ids(std::move(missing)) {}

void FedConfig::validate() const {
  if (threshold <= 1 || threshold > n_clients)
    throw BadThreshold(threshold, n_clients);
  if (rounds < 1) throw std::invalid_argument("need >= 1 round");
  if (!decrypt_subset.empty()) {
    if (decrypt_subset.size() != threshold)
      throw WrongSubsetSize(decrypt_subset.size(), threshold);
    std::set<uint32_t> seen;
    for (uint32_t x : decrypt_subset) {
      if (x < 1 || x > n_clients)
        throw std::invalid_argument("decrypt subset index out of range");
      if (!seen.insert(x).second)
        throw std::invalid_argument("decrypt subset has duplicates");
    }
  }
}

std::vector<ShareBundle> share_vector(const std::vector<uint64_t>& secret,
                                      uint32_t n, uint32_t t, uint32_t round,
                                      uint32_t client_id,
                                      std::mt19937_64& rng) {
  if (t <= 1 || t > n) throw BadThreshold(t, n);
  std::vector<ShareBundle> bundles(n);
  for (uint32_t j = 0; j < n; ++j) {
    bundles[j].round = round;
    bundles[j].client_id = client_id;
    bundles[j].share_index = j + 1;
    bundles[j].payload.resize(secret.size());
  }
  for (size_t e = 0; e < secret.size(); ++e) {
    auto shares = shamir::share_value<Fp61>(secret[e], n, t, rng);
    for (uint32_t j = 0; j < n; ++j) bundles[j].payload[e] = shares[j];
  }
  return bundles;
}

void MessageBus::send(uint32_t round, const std::string& from,
                      const std::string& to, const std::string& kind,
                      const std::vector<uint8_t>& payload) {
  log_.push_back(
      {round, from, to, kind, base64_encode(payload.data(), payload.size())});
}

void MessageBus::save_jsonl(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write round log: " + path);
  for (const auto& m : log_) {
    nlohmann::json j;
    j["round"] = m.round;
    j["from"] = m.from;
    j["to"] = m.to;
    j["kind"] = m.kind;
    j["payload_b64"] = m.payload_b64;
    out << j.dump() << '\n';
  }
}

std::vector<uint8_t> field_vector_bytes(const std::vector<uint64_t>& v) {
  std::vector<uint8_t> bytes(v.size() * 8);
  for (size_t i = 0; i < v.size(); ++i)
    for (int b = 0; b < 8; ++b)
      bytes[i * 8 + b] = static_cast<uint8_t>((v[i] >> (8 * b)) & 0xff);
  return bytes;
}

std::vector<uint8_t> f64_vector_bytes(const std::vector<double>& v) {
  std::vector<uint8_t> bytes(v.size() * 8);
  std::memcpy(bytes.data(), v.data(), bytes.size());
  return bytes;
}

void AggregationServer::submit(ShareBundle bundle) {
  inbox_.push_back(std::move(bundle));
}

std::vector<ShareBundle> AggregationServer::aggregate(uint32_t round) {
  std::map<uint32_t, std::vector<const ShareBundle*>> by_index;
  for (const auto& b : inbox_)
    if (b.round == round) by_index[b.share_index].push_back(&b);

  std::vector<ShareBundle> out;
  for (auto& [index, bundles] : by_index) {
    std::set<uint32_t> present;
    for (const auto* b : bundles) present.insert(b->client_id);
    std::vector<uint32_t> missing;
    for (uint32_t c = 0; c < n_clients_; ++c)
      if (!present.count(c)) missing.push_back(c);
    if (!missing.empty()) throw MissingClient(std::move(missing));

    ShareBundle agg;
    agg.round = round;
    agg.client_id = 0;  // aggregate carries no single owner
    agg.share_index = index;
    agg.payload.assign(bundles.front()->payload.size(), 0);
    for (const auto* b : bundles) {
      if (b->payload.size() != agg.payload.size())
        throw LengthMismatch(b->payload.size(), agg.payload.size());
      for (size_t e = 0; e < agg.payload.size(); ++e)
        agg.payload[e] = Fp61::add(agg.payload[e], b->payload[e]);
    }
    out.push_back(std::move(agg));
  }
  return out;
}

std::vector<uint64_t> partial_decrypt(const ShareBundle& bundle,
                                      uint64_t lagrange_coeff) {
  std::vector<uint64_t> out(bundle.payload.size());
  for (size_t i = 0; i < out.size(); ++i)
    out[i] = Fp61::mul(lagrange_coeff, bundle.payload[i]);
  return out;
}

std::vector<uint64_t> merge_partials(
    const std::vector<std::vector<uint64_t>>& partials) {
  if (partials.empty()) throw std::invalid_argument("no partials to merge");
  std::vector<uint64_t> out(partials[0].size(), 0);
  for (const auto& p : partials) {
    if (p.size() != out.size()) throw LengthMismatch(p.size(), out.size());
    for (size_t i = 0; i < out.size(); ++i) out[i] = Fp61::add(out[i], p[i]);
  }
  return out;
}

std::vector<uint64_t> decryption_basis(const std::vector<uint32_t>& subset,
                                       uint32_t threshold) {
  if (subset.size() != threshold)
    throw WrongSubsetSize(subset.size(), threshold);
  return shamir::lagrange_basis_at_zero<Fp61>(subset);
}

FederationResult run_federation(
    const FedConfig& fed_cfg, const ModelConfig& model_cfg,
    const std::vector<std::vector<GraphSequence>>& client_shards,
    MessageBus* bus) {
  fed_cfg.validate();
  if (client_shards.size() != fed_cfg.n_clients)
    throw std::invalid_argument("expected one shard per client");

  ModelConfig local_cfg = model_cfg;
  local_cfg.epochs = fed_cfg.local_epochs;

  Autoencoder init_model(local_cfg);
  std::vector<double> global = init_model.params().flatten();
  const FixedPointCodec codec(fed_cfg.n_clients);

  std::vector<uint32_t> subset = fed_cfg.decrypt_subset;
  if (subset.empty())
    for (uint32_t i = 1; i <= fed_cfg.threshold; ++i) subset.push_back(i);
  const auto basis = decryption_basis(subset, fed_cfg.threshold);

  FederationResult result;
  result.client_seconds.assign(fed_cfg.n_clients, 0.0);

  for (uint32_t round = 0; round < fed_cfg.rounds; ++round) {
    AggregationServer server(fed_cfg.n_clients);
    std::vector<double> round_losses(fed_cfg.n_clients, 0.0);

    for (uint32_t c = 0; c < fed_cfg.n_clients; ++c) {
      const std::string client_name = "client-" + std::to_string(c);
      if (bus)
        bus->send(round, "server", client_name, "params",
                  f64_vector_bytes(global));

      Autoencoder local(local_cfg);
      local.params().unflatten(global);
      const auto t0 = std::chrono::steady_clock::now();
      TrainResult tr = train(local, client_shards[c]);
      result.client_seconds[c] +=
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
              .count();

      for (double l : tr.epoch_losses)
        if (!std::isfinite(l)) throw DivergedRound(round, c);
      round_losses[c] =
          tr.epoch_losses.empty() ? 0.0 : tr.epoch_losses.back();

      auto encoded = codec.encode_vector(local.params().flatten());
      std::mt19937_64 share_rng(derive_seed(
          fed_cfg.seed, "share-r" + std::to_string(round) + "-c" +
                            std::to_string(c)));
      auto bundles = share_vector(encoded, fed_cfg.n_clients,
                                  fed_cfg.threshold, round, c, share_rng);
      for (auto& b : bundles) {
        if (bus)
          bus->send(round, client_name, "server", "shares",
                    field_vector_bytes(b.payload));
        server.submit(std::move(b));
      }
    }

    auto aggregated = server.aggregate(round);
    if (bus) {
      for (const auto& a : aggregated)
        bus->send(round, "server",
                  "client-" + std::to_string(a.share_index - 1), "agg_shares",
                  field_vector_bytes(a.payload));
    }

    // Exactly t clients participate in collaborative decryption.
    std::vector<std::vector<uint64_t>> partials;
    for (size_t s = 0; s < subset.size(); ++s) {
      const auto it = std::find_if(
          aggregated.begin(), aggregated.end(),
          [&](const ShareBundle& b) { return b.share_index == subset[s]; });
      if (it == aggregated.end())
        throw std::runtime_error("no aggregated share for index " +
                                 std::to_string(subset[s]));
      auto partial = partial_decrypt(*it, basis[s]);
      if (bus) {
        const std::string from = "client-" + std::to_string(subset[s] - 1);
        for (uint32_t other : subset)
          if (other != subset[s])
            bus->send(round, from, "client-" + std::to_string(other - 1),
                      "partial", field_vector_bytes(partial));
      }
      partials.push_back(std::move(partial));
    }

    auto summed = merge_partials(partials);
    auto decoded = codec.decode_vector(summed);
    for (auto& v : decoded) v /= static_cast<double>(fed_cfg.n_clients);
    global = std::move(decoded);
    result.client_losses.push_back(std::move(round_losses));
  }

  result.global_params = std::move(global);
  return result;
}

}  // namespace continuum
