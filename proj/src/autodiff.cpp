#include "easl/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "easl/errors.hpp"

namespace easl::ad {

namespace detail {

struct Node {
  Shape shape;
  std::vector<double> data;
  std::vector<double> grad;  // empty unless requires_grad
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  // Pushes this node's grad into its parents' grads.
  std::function<void(Node&)> backward;
};

}  // namespace detail

using detail::Node;

std::size_t shape_numel(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

struct OpAccess {
  static const std::shared_ptr<Node>& node(const Tensor& t) {
    if (!t.node_) throw ContractError("operation on an undefined tensor");
    return t.node_;
  }

  static Tensor leaf(Shape shape, std::vector<double> data, bool requires_grad) {
    if (shape_numel(shape) != data.size()) {
      throw DimensionError("tensor data size " + std::to_string(data.size()) + " does not match shape " +
                           shape_string(shape));
    }
    auto n = std::make_shared<Node>();
    n->shape = std::move(shape);
    n->data = std::move(data);
    n->requires_grad = requires_grad;
    if (requires_grad) n->grad.assign(n->data.size(), 0.0);
    return Tensor(std::move(n));
  }

  // Result node; history is kept only if some parent needs gradients.
  static Tensor result(Shape shape, std::vector<double> data, std::vector<std::shared_ptr<Node>> parents,
                       std::function<void(Node&)> backward) {
    auto n = std::make_shared<Node>();
    n->shape = std::move(shape);
    n->data = std::move(data);
    n->requires_grad = std::any_of(parents.begin(), parents.end(), [](const auto& p) { return p->requires_grad; });
    if (n->requires_grad) {
      n->grad.assign(n->data.size(), 0.0);
      n->parents = std::move(parents);
      n->backward = std::move(backward);
    }
    return Tensor(std::move(n));
  }
};

namespace {

const Node& N(const Tensor& t) { return *OpAccess::node(t); }

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + shape_string(a.shape()) + " vs " +
                         shape_string(b.shape()));
  }
}

void require_rank(const Tensor& t, std::size_t rank, const char* op) {
  if (t.rank() != rank) {
    throw DimensionError(std::string(op) + ": expected rank " + std::to_string(rank) + ", got " +
                         shape_string(t.shape()));
  }
}

// Accumulate `g` into p->grad only when p participates in differentiation.
inline void accumulate(Node& p, std::size_t i, double g) {
  if (p.requires_grad) p.grad[i] += g;
}

}  // namespace

// ---------------------------------------------------------------- Tensor

Tensor Tensor::from_data(Shape shape, std::vector<double> data, bool requires_grad) {
  return OpAccess::leaf(std::move(shape), std::move(data), requires_grad);
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) { return filled(std::move(shape), 0.0, requires_grad); }

Tensor Tensor::ones(Shape shape, bool requires_grad) { return filled(std::move(shape), 1.0, requires_grad); }

Tensor Tensor::filled(Shape shape, double value, bool requires_grad) {
  std::vector<double> data(shape_numel(shape), value);
  return OpAccess::leaf(std::move(shape), std::move(data), requires_grad);
}

Tensor Tensor::scalar(double value, bool requires_grad) { return OpAccess::leaf(Shape{}, {value}, requires_grad); }

Tensor Tensor::matrix(std::initializer_list<std::initializer_list<double>> rows, bool requires_grad) {
  const std::size_t m = rows.size();
  const std::size_t n = m ? rows.begin()->size() : 0;
  std::vector<double> data;
  data.reserve(m * n);
  for (const auto& row : rows) {
    if (row.size() != n) throw DimensionError("ragged matrix literal");
    data.insert(data.end(), row.begin(), row.end());
  }
  return OpAccess::leaf(Shape{m, n}, std::move(data), requires_grad);
}

const Shape& Tensor::shape() const { return N(*this).shape; }

std::size_t Tensor::dim(std::size_t axis) const {
  const auto& s = shape();
  if (axis >= s.size()) throw DimensionError("axis " + std::to_string(axis) + " out of range for " + shape_string(s));
  return s[axis];
}

std::size_t Tensor::numel() const { return N(*this).data.size(); }
bool Tensor::requires_grad() const { return N(*this).requires_grad; }
bool Tensor::is_leaf() const { return !N(*this).backward; }

std::span<const double> Tensor::data() const { return N(*this).data; }
std::span<const double> Tensor::grad() const { return N(*this).grad; }

std::span<double> Tensor::mutable_data() {
  auto& n = *OpAccess::node(*this);
  if (n.backward) throw ContractError("mutable_data() on a non-leaf tensor");
  return n.data;
}

std::span<double> Tensor::mutable_grad() { return OpAccess::node(*this)->grad; }

double Tensor::item() const {
  if (numel() != 1) throw ContractError("item() on tensor of shape " + shape_string(shape()));
  return data()[0];
}

double Tensor::at(std::size_t i) const {
  if (i >= numel()) throw DimensionError("index out of range");
  return data()[i];
}

double Tensor::at(std::size_t row, std::size_t col) const {
  require_rank(*this, 2, "at");
  if (row >= shape()[0] || col >= shape()[1]) throw DimensionError("index out of range");
  return data()[row * shape()[1] + col];
}

void Tensor::zero_grad() {
  auto& g = OpAccess::node(*this)->grad;
  std::fill(g.begin(), g.end(), 0.0);
}

Tensor Tensor::detach() const {
  const auto& n = N(*this);
  return OpAccess::leaf(n.shape, n.data, false);
}

// ---------------------------------------------------------------- elementwise

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  const auto& x = N(a).data;
  const auto& y = N(b).data;
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] + y[i];
  return OpAccess::result(a.shape(), std::move(out), {OpAccess::node(a), OpAccess::node(b)}, [](Node& self) {
    for (auto& p : self.parents) {
      if (!p->requires_grad) continue;
      for (std::size_t i = 0; i < self.grad.size(); ++i) p->grad[i] += self.grad[i];
    }
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  const auto& x = N(a).data;
  const auto& y = N(b).data;
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] - y[i];
  return OpAccess::result(a.shape(), std::move(out), {OpAccess::node(a), OpAccess::node(b)}, [](Node& self) {
    Node& pa = *self.parents[0];
    Node& pb = *self.parents[1];
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      accumulate(pa, i, self.grad[i]);
      accumulate(pb, i, -self.grad[i]);
    }
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  const auto& x = N(a).data;
  const auto& y = N(b).data;
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] * y[i];
  return OpAccess::result(a.shape(), std::move(out), {OpAccess::node(a), OpAccess::node(b)}, [](Node& self) {
    Node& pa = *self.parents[0];
    Node& pb = *self.parents[1];
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      accumulate(pa, i, self.grad[i] * pb.data[i]);
      accumulate(pb, i, self.grad[i] * pa.data[i]);
    }
  });
}

Tensor scale(const Tensor& a, double factor) {
  const auto& x = N(a).data;
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] * factor;
  return OpAccess::result(a.shape(), std::move(out), {OpAccess::node(a)}, [factor](Node& self) {
    Node& p = *self.parents[0];
    for (std::size_t i = 0; i < self.grad.size(); ++i) p.grad[i] += self.grad[i] * factor;
  });
}

Tensor sigmoid(const Tensor& x) {
  const auto& v = N(x).data;
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    // Branch on sign so exp() only ever sees a non-positive argument.
    if (v[i] >= 0.0) {
      out[i] = 1.0 / (1.0 + std::exp(-v[i]));
    } else {
      const double e = std::exp(v[i]);
      out[i] = e / (1.0 + e);
    }
  }
  return OpAccess::result(x.shape(), std::move(out), {OpAccess::node(x)}, [](Node& self) {
    Node& p = *self.parents[0];
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      const double s = self.data[i];
      p.grad[i] += self.grad[i] * s * (1.0 - s);
    }
  });
}

Tensor add_row_bias(const Tensor& x, const Tensor& bias) {
  require_rank(x, 2, "add_row_bias");
  const std::size_t m = x.dim(0);
  const std::size_t n = x.dim(1);
  if (bias.numel() != n || bias.rank() > 2 || (bias.rank() == 2 && bias.dim(0) != 1)) {
    throw DimensionError("add_row_bias: bias " + shape_string(bias.shape()) + " does not fit rows of " +
                         shape_string(x.shape()));
  }
  const auto& v = N(x).data;
  const auto& b = N(bias).data;
  std::vector<double> out(v.size());
  for (std::size_t r = 0; r < m; ++r)
    for (std::size_t c = 0; c < n; ++c) out[r * n + c] = v[r * n + c] + b[c];
  return OpAccess::result(x.shape(), std::move(out), {OpAccess::node(x), OpAccess::node(bias)}, [m, n](Node& self) {
    Node& px = *self.parents[0];
    Node& pb = *self.parents[1];
    for (std::size_t r = 0; r < m; ++r)
      for (std::size_t c = 0; c < n; ++c) {
        const double g = self.grad[r * n + c];
        accumulate(px, r * n + c, g);
        accumulate(pb, c, g);
      }
  });
}

// ---------------------------------------------------------------- linear algebra

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0)) {
    throw DimensionError("matmul: incompatible shapes " + shape_string(a.shape()) + " and " + shape_string(b.shape()));
  }
  const std::size_t m = a.dim(0);
  const std::size_t k = a.dim(1);
  const std::size_t n = b.dim(1);
  const auto& x = N(a).data;
  const auto& y = N(b).data;
  std::vector<double> out(m * n, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t p = 0; p < k; ++p) {
      const double xv = x[i * k + p];
      for (std::size_t j = 0; j < n; ++j) out[i * n + j] += xv * y[p * n + j];
    }
  return OpAccess::result(Shape{m, n}, std::move(out), {OpAccess::node(a), OpAccess::node(b)}, [m, k, n](Node& self) {
    Node& pa = *self.parents[0];
    Node& pb = *self.parents[1];
    const auto& g = self.grad;
    if (pa.requires_grad) {
      // dA = dC * B^T
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p) {
          double acc = 0.0;
          for (std::size_t j = 0; j < n; ++j) acc += g[i * n + j] * pb.data[p * n + j];
          pa.grad[i * k + p] += acc;
        }
    }
    if (pb.requires_grad) {
      // dB = A^T * dC
      for (std::size_t p = 0; p < k; ++p)
        for (std::size_t j = 0; j < n; ++j) {
          double acc = 0.0;
          for (std::size_t i = 0; i < m; ++i) acc += pa.data[i * k + p] * g[i * n + j];
          pb.grad[p * n + j] += acc;
        }
    }
  });
}

Tensor transpose(const Tensor& a) {
  require_rank(a, 2, "transpose");
  const std::size_t m = a.dim(0);
  const std::size_t n = a.dim(1);
  const auto& x = N(a).data;
  std::vector<double> out(m * n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[j * m + i] = x[i * n + j];
  return OpAccess::result(Shape{n, m}, std::move(out), {OpAccess::node(a)}, [m, n](Node& self) {
    Node& p = *self.parents[0];
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) p.grad[i * n + j] += self.grad[j * m + i];
  });
}

// ---------------------------------------------------------------- softmax

namespace {

// Views a rank-1/2 tensor as `outer` independent lanes of length `len` with
// element stride `stride` along the softmax axis.
struct Lanes {
  std::size_t outer, len, stride, lane_step;
  std::size_t index(std::size_t lane, std::size_t j) const { return lane * lane_step + j * stride; }
};

Lanes softmax_lanes(const Shape& s, std::size_t axis) {
  if (s.size() == 1 && axis == 0) return {1, s[0], 1, 0};
  if (s.size() == 2 && axis == 1) return {s[0], s[1], 1, s[1]};
  if (s.size() == 2 && axis == 0) return {s[1], s[0], s[1], 1};
  throw DimensionError("softmax: axis " + std::to_string(axis) + " invalid for " + shape_string(s));
}

}  // namespace

Tensor softmax(const Tensor& x, std::size_t axis) {
  const Lanes lanes = softmax_lanes(x.shape(), axis);
  const auto& v = N(x).data;
  std::vector<double> out(v.size());
  for (std::size_t l = 0; l < lanes.outer; ++l) {
    double mx = -INFINITY;
    for (std::size_t j = 0; j < lanes.len; ++j) mx = std::max(mx, v[lanes.index(l, j)]);
    double z = 0.0;
    for (std::size_t j = 0; j < lanes.len; ++j) {
      const double e = std::exp(v[lanes.index(l, j)] - mx);
      out[lanes.index(l, j)] = e;
      z += e;
    }
    for (std::size_t j = 0; j < lanes.len; ++j) out[lanes.index(l, j)] /= z;
  }
  return OpAccess::result(x.shape(), std::move(out), {OpAccess::node(x)}, [lanes](Node& self) {
    Node& p = *self.parents[0];
    for (std::size_t l = 0; l < lanes.outer; ++l) {
      double dot = 0.0;
      for (std::size_t j = 0; j < lanes.len; ++j) {
        const std::size_t i = lanes.index(l, j);
        dot += self.grad[i] * self.data[i];
      }
      for (std::size_t j = 0; j < lanes.len; ++j) {
        const std::size_t i = lanes.index(l, j);
        p.grad[i] += self.data[i] * (self.grad[i] - dot);
      }
    }
  });
}

// ---------------------------------------------------------------- structural

namespace {

// Splits a rank-1/2 shape around `axis` into (outer, extent, inner) so that
// flat index = (o * extent + a) * inner + i.
struct AxisView {
  std::size_t outer, extent, inner;
};

AxisView axis_view(const Shape& s, std::size_t axis, const char* op) {
  if (s.empty() || s.size() > 2 || axis >= s.size()) {
    throw DimensionError(std::string(op) + ": axis " + std::to_string(axis) + " invalid for " + shape_string(s));
  }
  if (s.size() == 1) return {1, s[0], 1};
  return axis == 0 ? AxisView{1, s[0], s[1]} : AxisView{s[0], s[1], 1};
}

}  // namespace

Tensor concat(const std::vector<Tensor>& parts, std::size_t axis) {
  if (parts.empty()) throw ContractError("concat: no inputs");
  Shape out_shape = parts.front().shape();
  const std::size_t rank = out_shape.size();
  std::vector<AxisView> views;
  std::size_t total = 0;
  for (const auto& t : parts) {
    const auto& s = t.shape();
    bool ok = s.size() == rank;
    for (std::size_t d = 0; ok && d < rank; ++d)
      if (d != axis && s[d] != out_shape[d]) ok = false;
    if (!ok) {
      throw DimensionError("concat: " + shape_string(s) + " incompatible with " + shape_string(out_shape) +
                           " along axis " + std::to_string(axis));
    }
    views.push_back(axis_view(s, axis, "concat"));
    total += s[axis];
  }
  out_shape[axis] = total;
  const AxisView ov = axis_view(out_shape, axis, "concat");

  std::vector<double> out(shape_numel(out_shape));
  std::vector<std::shared_ptr<Node>> parents;
  std::vector<std::size_t> offsets;
  std::size_t offset = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const auto& v = N(parts[k]).data;
    const AxisView& pv = views[k];
    for (std::size_t o = 0; o < pv.outer; ++o)
      for (std::size_t a = 0; a < pv.extent; ++a)
        for (std::size_t i = 0; i < pv.inner; ++i)
          out[(o * ov.extent + offset + a) * ov.inner + i] = v[(o * pv.extent + a) * pv.inner + i];
    parents.push_back(OpAccess::node(parts[k]));
    offsets.push_back(offset);
    offset += pv.extent;
  }
  return OpAccess::result(std::move(out_shape), std::move(out), std::move(parents),
                          [views = std::move(views), offsets = std::move(offsets), ov](Node& self) {
                            for (std::size_t k = 0; k < self.parents.size(); ++k) {
                              Node& p = *self.parents[k];
                              if (!p.requires_grad) continue;
                              const AxisView& pv = views[k];
                              for (std::size_t o = 0; o < pv.outer; ++o)
                                for (std::size_t a = 0; a < pv.extent; ++a)
                                  for (std::size_t i = 0; i < pv.inner; ++i)
                                    p.grad[(o * pv.extent + a) * pv.inner + i] +=
                                        self.grad[(o * ov.extent + offsets[k] + a) * ov.inner + i];
                            }
                          });
}

Tensor slice(const Tensor& x, std::size_t axis, std::size_t begin, std::size_t end) {
  const AxisView xv = axis_view(x.shape(), axis, "slice");
  if (begin >= end || end > xv.extent) {
    throw DimensionError("slice: range [" + std::to_string(begin) + ", " + std::to_string(end) + ") invalid for " +
                         shape_string(x.shape()) + " axis " + std::to_string(axis));
  }
  Shape out_shape = x.shape();
  out_shape[axis] = end - begin;
  const AxisView ov{xv.outer, end - begin, xv.inner};
  const auto& v = N(x).data;
  std::vector<double> out(shape_numel(out_shape));
  for (std::size_t o = 0; o < ov.outer; ++o)
    for (std::size_t a = 0; a < ov.extent; ++a)
      for (std::size_t i = 0; i < ov.inner; ++i)
        out[(o * ov.extent + a) * ov.inner + i] = v[(o * xv.extent + begin + a) * xv.inner + i];
  return OpAccess::result(std::move(out_shape), std::move(out), {OpAccess::node(x)}, [xv, ov, begin](Node& self) {
    Node& p = *self.parents[0];
    for (std::size_t o = 0; o < ov.outer; ++o)
      for (std::size_t a = 0; a < ov.extent; ++a)
        for (std::size_t i = 0; i < ov.inner; ++i)
          p.grad[(o * xv.extent + begin + a) * xv.inner + i] += self.grad[(o * ov.extent + a) * ov.inner + i];
  });
}

// ---------------------------------------------------------------- reductions

Tensor sum(const Tensor& x) {
  const auto& v = N(x).data;
  const double s = std::accumulate(v.begin(), v.end(), 0.0);
  return OpAccess::result(Shape{}, {s}, {OpAccess::node(x)}, [](Node& self) {
    Node& p = *self.parents[0];
    for (auto& g : p.grad) g += self.grad[0];
  });
}

Tensor mean(const Tensor& x) {
  const auto& v = N(x).data;
  if (v.empty()) throw ContractError("mean of an empty tensor");
  const double inv = 1.0 / static_cast<double>(v.size());
  const double s = std::accumulate(v.begin(), v.end(), 0.0) * inv;
  return OpAccess::result(Shape{}, {s}, {OpAccess::node(x)}, [inv](Node& self) {
    Node& p = *self.parents[0];
    for (auto& g : p.grad) g += self.grad[0] * inv;
  });
}

Tensor mean_abs(const Tensor& x) {
  const auto& v = N(x).data;
  if (v.empty()) throw ContractError("mean_abs of an empty tensor");
  const double inv = 1.0 / static_cast<double>(v.size());
  double s = 0.0;
  for (double e : v) s += std::abs(e);
  return OpAccess::result(Shape{}, {s * inv}, {OpAccess::node(x)}, [inv](Node& self) {
    Node& p = *self.parents[0];
    const double g = self.grad[0] * inv;
    for (std::size_t i = 0; i < p.grad.size(); ++i) {
      const double e = p.data[i];
      if (e > 0.0) {
        p.grad[i] += g;
      } else if (e < 0.0) {
        p.grad[i] -= g;
      }
    }
  });
}

// ---------------------------------------------------------------- backward

namespace {

// Post-order DFS over differentiable nodes; reversing yields a valid
// replay order with each node exactly once.
std::vector<Node*> topo_order(Node* root) {
  std::vector<Node*> order;
  if (!root->requires_grad) return order;
  std::unordered_set<Node*> seen;
  std::vector<std::pair<Node*, std::size_t>> stack;
  stack.emplace_back(root, 0);
  seen.insert(root);
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node* p = node->parents[next++].get();
      if (p->requires_grad && seen.insert(p).second) stack.emplace_back(p, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  return order;
}

}  // namespace

void backward(const Tensor& loss) {
  Node* root = OpAccess::node(loss).get();
  if (root->data.size() != 1) {
    throw ContractError("backward: loss must be scalar, got shape " + shape_string(root->shape));
  }
  const std::vector<Node*> order = topo_order(root);
  for (Node* n : order)
    if (n->backward) std::fill(n->grad.begin(), n->grad.end(), 0.0);
  if (root->requires_grad) root->grad[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if ((*it)->backward) (*it)->backward(**it);
  }
}

std::size_t tape_size(const Tensor& root) { return topo_order(OpAccess::node(root).get()).size(); }

}  // namespace easl::ad
