#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace continuum {

struct ShapeMismatch : std::runtime_error {
  ShapeMismatch(const std::string& op, const std::string& a,
                const std::string& b)
      : std::runtime_error(op + ": shape mismatch " + a + " vs " + b) {}
};

struct NotScalar : std::runtime_error {
  NotScalar() : std::runtime_error("backward needs a scalar loss") {}
};

namespace detail {
struct TensorNode {
  size_t rows = 0;
  size_t cols = 0;
  std::vector<double> data;
  std::vector<double> grad;
  bool requires_grad = false;

  size_t numel() const { return rows * cols; }
  void ensure_grad() {
    if (grad.size() != data.size()) grad.assign(data.size(), 0.0);
  }
};
}  // namespace detail

// Value-semantic handle to a shared rank-2 buffer. Scalars are 1x1, row
// vectors 1xn. All data is f64.
class Tensor {
 public:
  Tensor() : node_(std::make_shared<detail::TensorNode>()) {}

  static Tensor zeros(size_t rows, size_t cols, bool requires_grad = false);
  static Tensor full(size_t rows, size_t cols, double value);
  static Tensor scalar(double value);
  static Tensor from(size_t rows, size_t cols, std::vector<double> data,
                     bool requires_grad = false);
  // Uniform in [-bound, bound]; the usual fan-based init lives in stgnn.
  static Tensor uniform(size_t rows, size_t cols, double bound,
                        std::mt19937_64& rng, bool requires_grad = false);

  size_t rows() const { return node_->rows; }
  size_t cols() const { return node_->cols; }
  size_t numel() const { return node_->numel(); }
  std::string shape_str() const;

  double value() const;  // scalar fetch, throws unless 1x1
  double at(size_t r, size_t c) const { return node_->data[r * cols() + c]; }

  std::vector<double>& data() { return node_->data; }
  const std::vector<double>& data() const { return node_->data; }
  const std::vector<double>& grad() const { return node_->grad; }

  bool requires_grad() const { return node_->requires_grad; }
  void set_requires_grad(bool v) {
    node_->requires_grad = v;
    if (v) node_->ensure_grad();
  }
  void zero_grad() { node_->grad.assign(node_->data.size(), 0.0); }

  std::shared_ptr<detail::TensorNode> node() const { return node_; }

 private:
  std::shared_ptr<detail::TensorNode> node_;
};

// Ordered record of primitive ops; execution order is topological order by
// construction. Ops record themselves onto the active tape (see TapeScope)
// whenever an input requires grad.
class Tape {
 public:
  // Seeds d(loss)/d(loss) = 1 and walks the record in reverse. Leaf grads
  // accumulate across calls; intermediate grads are reset per call.
  void backward(const Tensor& loss);

  size_t num_ops() const { return ops_.size(); }
  void clear() { ops_.clear(); }

  void record(std::shared_ptr<detail::TensorNode> output,
              std::function<void()> backward_fn) {
    ops_.push_back({std::move(output), std::move(backward_fn)});
  }

 private:
  struct Op {
    std::shared_ptr<detail::TensorNode> output;
    std::function<void()> backward;
  };
  std::vector<Op> ops_;
};

// RAII binding of the thread-local active tape.
class TapeScope {
 public:
  explicit TapeScope(Tape& tape);
  ~TapeScope();
  TapeScope(const TapeScope&) = delete;
  TapeScope& operator=(const TapeScope&) = delete;

 private:
  Tape* previous_;
};

Tape* active_tape();

// ---- primitives -----------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b);
// add/sub accept equal shapes or a 1xN row vector broadcast over rows.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
// mul/div accept equal shapes or an Mx1 column broadcast over columns.
Tensor mul(const Tensor& a, const Tensor& b);
Tensor div(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double c);
Tensor add_scalar(const Tensor& a, double c);
Tensor concat_cols(const std::vector<Tensor>& parts);
Tensor concat_rows(const std::vector<Tensor>& parts);
Tensor slice_cols(const Tensor& a, size_t start, size_t len);
Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);
Tensor softmax_rows(const Tensor& a);
Tensor leaky_relu(const Tensor& a, double slope);
Tensor prelu(const Tensor& a, const Tensor& slope);  // slope is 1x1, learnable
Tensor sigmoid(const Tensor& a);
Tensor tanh_t(const Tensor& a);
Tensor exp_t(const Tensor& a);
Tensor log_t(const Tensor& a);
Tensor clamp(const Tensor& a, double lo, double hi);
// Inverted dropout: scales by 1/(1-p) at train time, identity in eval.
Tensor dropout(const Tensor& a, double p, bool train, std::mt19937_64& rng);
Tensor index_select(const Tensor& a, const std::vector<uint32_t>& rows);
Tensor segment_sum(const Tensor& a, const std::vector<uint32_t>& segments,
                   size_t n_segments);

}  // namespace continuum
