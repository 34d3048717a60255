#include "continuum/tensor.hpp"

#include <algorithm>
#include <cmath>

namespace continuum {

namespace {
thread_local Tape* g_active_tape = nullptr;

using NodePtr = std::shared_ptr<detail::TensorNode>;

Tensor make_result(size_t rows, size_t cols) {
  Tensor t = Tensor::zeros(rows, cols);
  return t;
}

bool want_grad(std::initializer_list<const Tensor*> inputs) {
  if (g_active_tape == nullptr) return false;
  for (const Tensor* t : inputs)
    if (t->requires_grad()) return true;
  return false;
}

void mark_and_record(Tensor& out, std::function<void()> backward_fn) {
  out.set_requires_grad(true);
  g_active_tape->record(out.node(), std::move(backward_fn));
}
}  // namespace

Tensor Tensor::zeros(size_t rows, size_t cols, bool requires_grad) {
  Tensor t;
  t.node_->rows = rows;
  t.node_->cols = cols;
  t.node_->data.assign(rows * cols, 0.0);
  if (requires_grad) t.set_requires_grad(true);
  return t;
}

Tensor Tensor::full(size_t rows, size_t cols, double value) {
  Tensor t = zeros(rows, cols);
  std::fill(t.node_->data.begin(), t.node_->data.end(), value);
  return t;
}

Tensor Tensor::scalar(double value) { return full(1, 1, value); }

Tensor Tensor::from(size_t rows, size_t cols, std::vector<double> data,
                    bool requires_grad) {
  if (data.size() != rows * cols)
    throw ShapeMismatch("from", std::to_string(rows) + "x" + std::to_string(cols),
                        std::to_string(data.size()) + " values");
  Tensor t;
  t.node_->rows = rows;
  t.node_->cols = cols;
  t.node_->data = std::move(data);
  if (requires_grad) t.set_requires_grad(true);
  return t;
}

Tensor Tensor::uniform(size_t rows, size_t cols, double bound,
                       std::mt19937_64& rng, bool requires_grad) {
  Tensor t = zeros(rows, cols, requires_grad);
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (auto& v : t.node_->data) v = dist(rng);
  return t;
}

std::string Tensor::shape_str() const {
  return std::to_string(rows()) + "x" + std::to_string(cols());
}

double Tensor::value() const {
  if (numel() != 1) throw NotScalar();
  return node_->data[0];
}

void Tape::backward(const Tensor& loss) {
  if (loss.numel() != 1) throw NotScalar();
  // Intermediate grads are per-pass; leaves keep accumulating.
  for (auto& op : ops_) {
    op.output->ensure_grad();
    std::fill(op.output->grad.begin(), op.output->grad.end(), 0.0);
  }
  loss.node()->ensure_grad();
  loss.node()->grad[0] += 1.0;
  for (auto it = ops_.rbegin(); it != ops_.rend(); ++it) it->backward();
}

TapeScope::TapeScope(Tape& tape) : previous_(g_active_tape) {
  g_active_tape = &tape;
}

TapeScope::~TapeScope() { g_active_tape = previous_; }

Tape* active_tape() { return g_active_tape; }

// ---- primitives -----------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.rows())
    throw ShapeMismatch("matmul", a.shape_str(), b.shape_str());
  const size_t m = a.rows(), k = a.cols(), n = b.cols();
  Tensor out = make_result(m, n);
  const auto& A = a.data();
  const auto& B = b.data();
  auto& C = out.data();
  for (size_t i = 0; i < m; ++i)
    for (size_t p = 0; p < k; ++p) {
      const double av = A[i * k + p];
      if (av == 0.0) continue;
      for (size_t j = 0; j < n; ++j) C[i * n + j] += av * B[p * n + j];
    }

  if (want_grad({&a, &b})) {
    NodePtr an = a.node(), bn = b.node(), on = out.node();
    mark_and_record(out, [an, bn, on, m, k, n] {
      const auto& G = on->grad;
      if (an->requires_grad) {
        an->ensure_grad();
        for (size_t i = 0; i < m; ++i)
          for (size_t j = 0; j < n; ++j) {
            const double g = G[i * n + j];
            if (g == 0.0) continue;
            for (size_t p = 0; p < k; ++p)
              an->grad[i * k + p] += g * bn->data[p * n + j];
          }
      }
      if (bn->requires_grad) {
        bn->ensure_grad();
        for (size_t i = 0; i < m; ++i)
          for (size_t p = 0; p < k; ++p) {
            const double av = an->data[i * k + p];
            if (av == 0.0) continue;
            for (size_t j = 0; j < n; ++j)
              bn->grad[p * n + j] += av * G[i * n + j];
          }
      }
    });
  }
  return out;
}

namespace {
enum class Elementwise { add, sub };

Tensor add_like(const Tensor& a, const Tensor& b, Elementwise mode) {
  const char* name = mode == Elementwise::add ? "add" : "sub";
  const bool same = a.rows() == b.rows() && a.cols() == b.cols();
  const bool row_bcast = b.rows() == 1 && b.cols() == a.cols() && a.rows() > 1;
  if (!same && !row_bcast)
    throw ShapeMismatch(name, a.shape_str(), b.shape_str());

  const double sign = mode == Elementwise::add ? 1.0 : -1.0;
  Tensor out = make_result(a.rows(), a.cols());
  const size_t n = a.cols();
  for (size_t i = 0; i < a.rows(); ++i)
    for (size_t j = 0; j < n; ++j)
      out.data()[i * n + j] =
          a.data()[i * n + j] + sign * b.data()[(same ? i : 0) * n + j];

  if (want_grad({&a, &b})) {
    NodePtr an = a.node(), bn = b.node(), on = out.node();
    mark_and_record(out, [an, bn, on, same, sign, n] {
      if (an->requires_grad) {
        an->ensure_grad();
        for (size_t i = 0; i < on->grad.size(); ++i) an->grad[i] += on->grad[i];
      }
      if (bn->requires_grad) {
        bn->ensure_grad();
        for (size_t i = 0; i < on->rows; ++i)
          for (size_t j = 0; j < n; ++j)
            bn->grad[(same ? i : 0) * n + j] += sign * on->grad[i * n + j];
      }
    });
  }
  return out;
}

enum class Scaling { mul, div };

Tensor mul_like(const Tensor& a, const Tensor& b, Scaling mode) {
  const char* name = mode == Scaling::mul ? "mul" : "div";
  const bool same = a.rows() == b.rows() && a.cols() == b.cols();
  const bool col_bcast = b.cols() == 1 && b.rows() == a.rows() && a.cols() > 1;
  if (!same && !col_bcast)
    throw ShapeMismatch(name, a.shape_str(), b.shape_str());

  Tensor out = make_result(a.rows(), a.cols());
  const size_t n = a.cols();
  auto bval = [&](size_t i, size_t j) {
    return b.data()[same ? i * n + j : i];
  };
  for (size_t i = 0; i < a.rows(); ++i)
    for (size_t j = 0; j < n; ++j) {
      const double x = a.data()[i * n + j];
      out.data()[i * n + j] =
          mode == Scaling::mul ? x * bval(i, j) : x / bval(i, j);
    }

  if (want_grad({&a, &b})) {
    NodePtr an = a.node(), bn = b.node(), on = out.node();
    const bool is_mul = mode == Scaling::mul;
    mark_and_record(out, [an, bn, on, same, is_mul, n] {
      auto bv = [&](size_t i, size_t j) {
        return bn->data[same ? i * n + j : i];
      };
      if (an->requires_grad) {
        an->ensure_grad();
        for (size_t i = 0; i < on->rows; ++i)
          for (size_t j = 0; j < n; ++j) {
            const double g = on->grad[i * n + j];
            an->grad[i * n + j] += is_mul ? g * bv(i, j) : g / bv(i, j);
          }
      }
      if (bn->requires_grad) {
        bn->ensure_grad();
        for (size_t i = 0; i < on->rows; ++i)
          for (size_t j = 0; j < n; ++j) {
            const double g = on->grad[i * n + j];
            const double x = an->data[i * n + j];
            const double d =
                is_mul ? g * x : -g * x / (bv(i, j) * bv(i, j));
            bn->grad[same ? i * n + j : i] += d;
          }
      }
    });
  }
  return out;
}
}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  return add_like(a, b, Elementwise::add);
}
Tensor sub(const Tensor& a, const Tensor& b) {
  return add_like(a, b, Elementwise::sub);
}
Tensor mul(const Tensor& a, const Tensor& b) {
  return mul_like(a, b, Scaling::mul);
}
Tensor div(const Tensor& a, const Tensor& b) {
  return mul_like(a, b, Scaling::div);
}

Tensor scale(const Tensor& a, double c) {
  Tensor out = make_result(a.rows(), a.cols());
  for (size_t i = 0; i < a.numel(); ++i) out.data()[i] = a.data()[i] * c;
  if (want_grad({&a})) {
    NodePtr an = a.node(), on = out.node();
    mark_and_record(out, [an, on, c] {
      an->ensure_grad();
      for (size_t i = 0; i < on->grad.size(); ++i)
        an->grad[i] += c * on->grad[i];
    });
  }
  return out;
}

Tensor add_scalar(const Tensor& a, double c) {
  Tensor out = make_result(a.rows(), a.cols());
  for (size_t i = 0; i < a.numel(); ++i) out.data()[i] = a.data()[i] + c;
  if (want_grad({&a})) {
    NodePtr an = a.node(), on = out.node();
    mark_and_record(out, [an, on] {
      an->ensure_grad();
      for (size_t i = 0; i < on->grad.size(); ++i) an->grad[i] += on->grad[i];
    });
  }
  return out;
}

Tensor concat_cols(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat_cols: empty input");
  const size_t rows = parts[0].rows();
  size_t total = 0;
  for (const auto& p : parts) {
    if (p.rows() != rows)
      throw ShapeMismatch("concat_cols", parts[0].shape_str(), p.shape_str());
    total += p.cols();
  }
  Tensor out = make_result(rows, total);
  size_t off = 0;
  for (const auto& p : parts) {
    for (size_t i = 0; i < rows; ++i)
      for (size_t j = 0; j < p.cols(); ++j)
        out.data()[i * total + off + j] = p.data()[i * p.cols() + j];
    off += p.cols();
  }

  bool needs = g_active_tape != nullptr;
  if (needs) {
    needs = false;
    for (const auto& p : parts) needs = needs || p.requires_grad();
  }
  if (needs) {
    std::vector<NodePtr> nodes;
    for (const auto& p : parts) nodes.push_back(p.node());
    NodePtr on = out.node();
    mark_and_record(out, [nodes, on, rows, total] {
      size_t off2 = 0;
      for (auto& pn : nodes) {
        if (pn->requires_grad) {
          pn->ensure_grad();
          for (size_t i = 0; i < rows; ++i)
            for (size_t j = 0; j < pn->cols; ++j)
              pn->grad[i * pn->cols + j] += on->grad[i * total + off2 + j];
        }
        off2 += pn->cols;
      }
    });
  }
  return out;
}

Tensor concat_rows(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat_rows: empty input");
  const size_t cols = parts[0].cols();
  size_t total = 0;
  for (const auto& p : parts) {
    if (p.cols() != cols)
      throw ShapeMismatch("concat_rows", parts[0].shape_str(), p.shape_str());
    total += p.rows();
  }
  Tensor out = make_result(total, cols);
  size_t off = 0;
  for (const auto& p : parts) {
    std::copy(p.data().begin(), p.data().end(),
              out.data().begin() + off * cols);
    off += p.rows();
  }

  bool needs = g_active_tape != nullptr;
  if (needs) {
    needs = false;
    for (const auto& p : parts) needs = needs || p.requires_grad();
  }
  if (needs) {
    std::vector<NodePtr> nodes;
    for (const auto& p : parts) nodes.push_back(p.node());
    NodePtr on = out.node();
    mark_and_record(out, [nodes, on, cols] {
      size_t off2 = 0;
      for (auto& pn : nodes) {
        if (pn->requires_grad) {
          pn->ensure_grad();
          for (size_t i = 0; i < pn->grad.size(); ++i)
            pn->grad[i] += on->grad[off2 * cols + i];
        }
        off2 += pn->rows;
      }
    });
  }
  return out;
}

Tensor slice_cols(const Tensor& a, size_t start, size_t len) {
  if (start + len > a.cols())
    throw ShapeMismatch("slice_cols", a.shape_str(),
                        "[" + std::to_string(start) + "," +
                            std::to_string(start + len) + ")");
  Tensor out = make_result(a.rows(), len);
  for (size_t i = 0; i < a.rows(); ++i)
    for (size_t j = 0; j < len; ++j)
      out.data()[i * len + j] = a.data()[i * a.cols() + start + j];
  if (want_grad({&a})) {
    NodePtr an = a.node(), on = out.node();
    mark_and_record(out, [an, on, start, len] {
      an->ensure_grad();
      for (size_t i = 0; i < on->rows; ++i)
        for (size_t j = 0; j < len; ++j)
          an->grad[i * an->cols + start + j] += on->grad[i * len + j];
    });
  }
  return out;
}

Tensor sum(const Tensor& a) {
  double s = 0.0;
  for (double v : a.data()) s += v;
  Tensor out = Tensor::scalar(s);
  if (want_grad({&a})) {
    NodePtr an = a.node(), on = out.node();
    mark_and_record(out, [an, on] {
      an->ensure_grad();
      for (auto& g : an->grad) g += on->grad[0];
    });
  }
  return out;
}

Tensor mean(const Tensor& a) {
  const double inv = 1.0 / static_cast<double>(a.numel());
  double s = 0.0;
  for (double v : a.data()) s += v;
  Tensor out = Tensor::scalar(s * inv);
  if (want_grad({&a})) {
    NodePtr an = a.node(), on = out.node();
    mark_and_record(out, [an, on, inv] {
      an->ensure_grad();
      for (auto& g : an->grad) g += inv * on->grad[0];
    });
  }
  return out;
}

Tensor softmax_rows(const Tensor& a) {
  Tensor out = make_result(a.rows(), a.cols());
  const size_t n = a.cols();
  for (size_t i = 0; i < a.rows(); ++i) {
    double mx = a.data()[i * n];
    for (size_t j = 1; j < n; ++j) mx = std::max(mx, a.data()[i * n + j]);
    double denom = 0.0;
    for (size_t j = 0; j < n; ++j) {
      const double e = std::exp(a.data()[i * n + j] - mx);
      out.data()[i * n + j] = e;
      denom += e;
    }
    for (size_t j = 0; j < n; ++j) out.data()[i * n + j] /= denom;
  }
  if (want_grad({&a})) {
    NodePtr an = a.node(), on = out.node();
    mark_and_record(out, [an, on, n] {
      an->ensure_grad();
      for (size_t i = 0; i < on->rows; ++i) {
        double dot = 0.0;
        for (size_t j = 0; j < n; ++j)
          dot += on->grad[i * n + j] * on->data[i * n + j];
        for (size_t j = 0; j < n; ++j)
          an->grad[i * n + j] +=
              on->data[i * n + j] * (on->grad[i * n + j] - dot);
      }
    });
  }
  return out;
}

namespace {
template <typename Fwd, typename Bwd>
Tensor unary_op(const Tensor& a, Fwd fwd, Bwd dval) {
  Tensor out = Tensor::zeros(a.rows(), a.cols());
  for (size_t i = 0; i < a.numel(); ++i) out.data()[i] = fwd(a.data()[i]);
  if (want_grad({&a})) {
    NodePtr an = a.node(), on = out.node();
    mark_and_record(out, [an, on, dval] {
      an->ensure_grad();
      for (size_t i = 0; i < on->grad.size(); ++i)
        an->grad[i] += on->grad[i] * dval(an->data[i], on->data[i]);
    });
  }
  return out;
}
}  // namespace

Tensor leaky_relu(const Tensor& a, double slope) {
  return unary_op(
      a, [slope](double x) { return x > 0 ? x : slope * x; },
      [slope](double x, double) { return x > 0 ? 1.0 : slope; });
}

Tensor prelu(const Tensor& a, const Tensor& slope) {
  if (slope.numel() != 1)
    throw ShapeMismatch("prelu", a.shape_str(), slope.shape_str());
  const double s = slope.data()[0];
  Tensor out = make_result(a.rows(), a.cols());
  for (size_t i = 0; i < a.numel(); ++i) {
    const double x = a.data()[i];
    out.data()[i] = x > 0 ? x : s * x;
  }
  if (want_grad({&a, &slope})) {
    NodePtr an = a.node(), sn = slope.node(), on = out.node();
    mark_and_record(out, [an, sn, on] {
      const double sv = sn->data[0];
      if (an->requires_grad) {
        an->ensure_grad();
        for (size_t i = 0; i < on->grad.size(); ++i)
          an->grad[i] += on->grad[i] * (an->data[i] > 0 ? 1.0 : sv);
      }
      if (sn->requires_grad) {
        sn->ensure_grad();
        double acc = 0.0;
        for (size_t i = 0; i < on->grad.size(); ++i)
          if (an->data[i] <= 0) acc += on->grad[i] * an->data[i];
        sn->grad[0] += acc;
      }
    });
  }
  return out;
}

Tensor sigmoid(const Tensor& a) {
  return unary_op(
      a, [](double x) { return 1.0 / (1.0 + std::exp(-x)); },
      [](double, double y) { return y * (1.0 - y); });
}

Tensor tanh_t(const Tensor& a) {
  return unary_op(a, [](double x) { return std::tanh(x); },
                  [](double, double y) { return 1.0 - y * y; });
}

Tensor exp_t(const Tensor& a) {
  return unary_op(a, [](double x) { return std::exp(x); },
                  [](double, double y) { return y; });
}

Tensor log_t(const Tensor& a) {
  return unary_op(a, [](double x) { return std::log(x); },
                  [](double x, double) { return 1.0 / x; });
}

Tensor clamp(const Tensor& a, double lo, double hi) {
  return unary_op(
      a, [lo, hi](double x) { return std::min(std::max(x, lo), hi); },
      [lo, hi](double x, double) { return (x > lo && x < hi) ? 1.0 : 0.0; });
}

Tensor dropout(const Tensor& a, double p, bool train, std::mt19937_64& rng) {
  if (p < 0.0 || p >= 1.0)
    throw std::invalid_argument("dropout: p must be in [0,1)");
  if (!train || p == 0.0) return a;

  const double keep = 1.0 - p;
  std::bernoulli_distribution dist(keep);
  auto mask = std::make_shared<std::vector<double>>(a.numel());
  for (auto& m : *mask) m = dist(rng) ? 1.0 / keep : 0.0;

  Tensor out = make_result(a.rows(), a.cols());
  for (size_t i = 0; i < a.numel(); ++i)
    out.data()[i] = a.data()[i] * (*mask)[i];
  if (want_grad({&a})) {
    NodePtr an = a.node(), on = out.node();
    mark_and_record(out, [an, on, mask] {
      an->ensure_grad();
      for (size_t i = 0; i < on->grad.size(); ++i)
        an->grad[i] += on->grad[i] * (*mask)[i];
    });
  }
  return out;
}

Tensor index_select(const Tensor& a, const std::vector<uint32_t>& rows) {
  for (uint32_t r : rows)
    if (r >= a.rows())
      throw ShapeMismatch("index_select", a.shape_str(),
                          "row " + std::to_string(r));
  const size_t n = a.cols();
  Tensor out = make_result(rows.size(), n);
  for (size_t i = 0; i < rows.size(); ++i)
    for (size_t j = 0; j < n; ++j)
      out.data()[i * n + j] = a.data()[rows[i] * n + j];
  if (want_grad({&a})) {
    NodePtr an = a.node(), on = out.node();
    auto idx = rows;
    mark_and_record(out, [an, on, idx, n] {
      an->ensure_grad();
      for (size_t i = 0; i < idx.size(); ++i)
        for (size_t j = 0; j < n; ++j)
          an->grad[idx[i] * n + j] += on->grad[i * n + j];
    });
  }
  return out;
}

Tensor segment_sum(const Tensor& a, const std::vector<uint32_t>& segments,
                   size_t n_segments) {
  if (segments.size() != a.rows())
    throw ShapeMismatch("segment_sum", a.shape_str(),
                        std::to_string(segments.size()) + " segments");
  for (uint32_t s : segments)
    if (s >= n_segments)
      throw ShapeMismatch("segment_sum",
                          std::to_string(n_segments) + " groups",
                          "segment " + std::to_string(s));
  const size_t n = a.cols();
  Tensor out = make_result(n_segments, n);
  for (size_t i = 0; i < a.rows(); ++i)
    for (size_t j = 0; j < n; ++j)
      out.data()[segments[i] * n + j] += a.data()[i * n + j];
  if (want_grad({&a})) {
    NodePtr an = a.node(), on = out.node();
    auto seg = segments;
    mark_and_record(out, [an, on, seg, n] {
      an->ensure_grad();
      for (size_t i = 0; i < seg.size(); ++i)
        for (size_t j = 0; j < n; ++j)
          an->grad[i * n + j] += on->grad[seg[i] * n + j];
    });
  }
  return out;
}

}  // namespace continuum
