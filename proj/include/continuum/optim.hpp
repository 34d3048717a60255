#pragma once

#include <string>
#include <vector>

#include "continuum/tensor.hpp"

namespace continuum {

struct MissingGrad : std::runtime_error {
  explicit MissingGrad(const std::string& name)
      : std::runtime_error("parameter " + name + " has no gradient") {}
};

// Bias-corrected Adam with the optimizer's canonical defaults.
struct AdamState {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  int64_t step = 0;
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;

  void init(const std::vector<Tensor>& params);
};

// Updates params in place from their grads. Grads are left untouched;
// zero_grads is an explicit, separate call.
void adam_step(std::vector<Tensor>& params, AdamState& state);
void zero_grads(std::vector<Tensor>& params);

// Ordered, named parameter collection. Registration order is serialization
// order, which keeps checkpoints and flattened federation payloads aligned.
class ParamStore {
 public:
  Tensor& add(const std::string& name, Tensor t);
  const std::vector<std::pair<std::string, Tensor>>& items() const {
    return items_;
  }
  std::vector<Tensor> tensors() const;
  size_t total_size() const;

  std::vector<double> flatten() const;
  void unflatten(const std::vector<double>& flat);

  // One parameter per line: name TAB RxC TAB base64 little-endian f64.
  void save(const std::string& path) const;
  // Loads values into already-registered parameters; names, order, and
  // shapes must match.
  void load(const std::string& path);

 private:
  std::vector<std::pair<std::string, Tensor>> items_;
};

}  // namespace continuum
