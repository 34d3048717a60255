#include "continuum/optim.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "continuum/util.hpp"

namespace continuum {

void AdamState::init(const std::vector<Tensor>& params) {
  m.clear();
  v.clear();
  step = 0;
  for (const auto& p : params) {
    m.emplace_back(p.numel(), 0.0);
    v.emplace_back(p.numel(), 0.0);
  }
}

void adam_step(std::vector<Tensor>& params, AdamState& state) {
  if (state.m.size() != params.size()) state.init(params);
  ++state.step;
  const double bc1 = 1.0 - std::pow(state.beta1, state.step);
  const double bc2 = 1.0 - std::pow(state.beta2, state.step);
  for (size_t i = 0; i < params.size(); ++i) {
    auto& p = params[i];
    if (p.grad().size() != p.numel()) throw MissingGrad("#" + std::to_string(i));
    auto& data = p.data();
    const auto& grad = p.grad();
    auto& mi = state.m[i];
    auto& vi = state.v[i];
    for (size_t j = 0; j < data.size(); ++j) {
      const double g = grad[j];
      mi[j] = state.beta1 * mi[j] + (1.0 - state.beta1) * g;
      vi[j] = state.beta2 * vi[j] + (1.0 - state.beta2) * g * g;
      const double mhat = mi[j] / bc1;
      const double vhat = vi[j] / bc2;
      data[j] -= state.lr * mhat / (std::sqrt(vhat) + state.eps);
    }
  }
}

void zero_grads(std::vector<Tensor>& params) {
  for (auto& p : params) p.zero_grad();
}

Tensor& ParamStore::add(const std::string& name, Tensor t) {
  for (const auto& [n, _] : items_)
    if (n == name) throw std::invalid_argument("duplicate parameter " + name);
  t.set_requires_grad(true);
  items_.emplace_back(name, std::move(t));
  return items_.back().second;
}

std::vector<Tensor> ParamStore::tensors() const {
  std::vector<Tensor> out;
  out.reserve(items_.size());
  for (const auto& [_, t] : items_) out.push_back(t);
  return out;
}

size_t ParamStore::total_size() const {
  size_t n = 0;
  for (const auto& [_, t] : items_) n += t.numel();
  return n;
}

std::vector<double> ParamStore::flatten() const {
  std::vector<double> flat;
  flat.reserve(total_size());
  for (const auto& [_, t] : items_)
    flat.insert(flat.end(), t.data().begin(), t.data().end());
  return flat;
}

void ParamStore::unflatten(const std::vector<double>& flat) {
  if (flat.size() != total_size())
    throw std::invalid_argument("unflatten: expected " +
                                std::to_string(total_size()) + " values, got " +
                                std::to_string(flat.size()));
  size_t off = 0;
  for (auto& [_, t] : items_) {
    std::copy(flat.begin() + off, flat.begin() + off + t.numel(),
              t.data().begin());
    off += t.numel();
  }
}

namespace {
std::string encode_payload(const std::vector<double>& values) {
  // Little-endian f64; memcpy is fine on every target we build for.
  std::vector<uint8_t> bytes(values.size() * sizeof(double));
  std::memcpy(bytes.data(), values.data(), bytes.size());
  return base64_encode(bytes.data(), bytes.size());
}

std::vector<double> decode_payload(const std::string& b64, size_t expected) {
  auto bytes = base64_decode(b64);
  if (bytes.size() != expected * sizeof(double))
    throw std::runtime_error("checkpoint payload size mismatch");
  std::vector<double> values(expected);
  std::memcpy(values.data(), bytes.data(), bytes.size());
  return values;
}
}  // namespace

void ParamStore::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  for (const auto& [name, t] : items_)
    out << name << '\t' << t.rows() << 'x' << t.cols() << '\t'
        << encode_payload(t.data()) << '\n';
}

void ParamStore::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  std::string line;
  size_t idx = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (idx >= items_.size())
      throw std::runtime_error("checkpoint has more parameters than model");
    auto fields = split(line, '\t');
    if (fields.size() != 3)
      throw std::runtime_error("bad checkpoint line: " + line);
    auto& [name, t] = items_[idx];
    if (fields[0] != name)
      throw std::runtime_error("checkpoint parameter " + fields[0] +
                               " does not match model parameter " + name);
    if (fields[1] != t.shape_str())
      throw std::runtime_error("checkpoint shape " + fields[1] +
                               " does not match " + t.shape_str() + " for " +
                               name);
    t.data() = decode_payload(fields[2], t.numel());
    ++idx;
  }
  if (idx != items_.size())
    throw std::runtime_error("checkpoint is missing parameters");
}

}  // namespace continuum
