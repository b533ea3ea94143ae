#pragma once

// Reverse-mode automatic differentiation over small dense float64 tensors.
//
// A Tensor is a shared handle to a graph node. Operations build the graph
// eagerly; backward() orders the reachable nodes topologically and replays
// them in reverse, accumulating into the grad buffers of leaf tensors.
// Intermediate gradients are reset at the start of every backward pass, so
// calling backward twice on the same graph doubles the leaf gradients.

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace easl::ad {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_string(const Shape& shape);

namespace detail {
struct Node;
}

class Tensor {
 public:
  Tensor() = default;

  static Tensor from_data(Shape shape, std::vector<double> data, bool requires_grad = false);
  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor ones(Shape shape, bool requires_grad = false);
  static Tensor filled(Shape shape, double value, bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);
  // 2-D helper, rows given row-major.
  static Tensor matrix(std::initializer_list<std::initializer_list<double>> rows, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t numel() const;
  bool requires_grad() const;
  bool is_leaf() const;

  std::span<const double> data() const;
  std::span<const double> grad() const;
  // Leaf parameters only: optimizer updates and initialization.
  std::span<double> mutable_data();
  std::span<double> mutable_grad();

  double item() const;
  double at(std::size_t i) const;
  double at(std::size_t row, std::size_t col) const;

  void zero_grad();
  // Fresh leaf holding a copy of the values; no graph history.
  Tensor detach() const;

  bool same_node(const Tensor& other) const { return node_ == other.node_; }

 private:
  explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}
  std::shared_ptr<detail::Node> node_;

  friend struct OpAccess;
};

// Elementwise (identical shapes).
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double factor);
Tensor sigmoid(const Tensor& x);

// x[m x n] + bias, bias of shape [n] or [1 x n] added to every row.
Tensor add_row_bias(const Tensor& x, const Tensor& bias);

// 2-D only.
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);

// Max-subtracted softmax along `axis` (rank 1 or 2).
Tensor softmax(const Tensor& x, std::size_t axis);

// Concatenate along `axis`; all other extents must agree.
Tensor concat(const std::vector<Tensor>& parts, std::size_t axis);
// Half-open range [begin, end) along `axis` (rank 1 or 2).
Tensor slice(const Tensor& x, std::size_t axis, std::size_t begin, std::size_t end);

// Scalar reductions (shape {}).
Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);
// mean(|x|), with d|x|/dx = 0 at x == 0.
Tensor mean_abs(const Tensor& x);

// Seeds d(loss)/d(loss) = 1 and accumulates into every reachable
// requires_grad leaf. Throws ContractError unless loss holds one element.
void backward(const Tensor& loss);

// Number of graph nodes reachable from `root` (the replay tape length).
std::size_t tape_size(const Tensor& root);

}  // namespace easl::ad
