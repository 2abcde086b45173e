#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace vbuf::ad {

// Dense row-major 2-D tensor of 64-bit reals. The models here are small
// enough that double precision everywhere keeps finite-difference checks
// clean and costs nothing that matters.
struct Tensor {
  int rows = 0;
  int cols = 0;
  std::vector<double> v;

  Tensor() = default;
  Tensor(int r, int c, double fill = 0.0)
      : rows(r), cols(c), v(static_cast<size_t>(r) * c, fill)
  {
  }

  double& at(int r, int c) { return v[static_cast<size_t>(r) * cols + c]; }
  double at(int r, int c) const
  {
    return v[static_cast<size_t>(r) * cols + c];
  }
  int size() const { return rows * cols; }
  bool same_shape(const Tensor& o) const
  {
    return rows == o.rows && cols == o.cols;
  }
  bool all_finite() const;

  static Tensor scalar(double x)
  {
    Tensor t(1, 1);
    t.v[0] = x;
    return t;
  }
  static Tensor row_vector(const std::vector<double>& xs)
  {
    Tensor t(1, static_cast<int>(xs.size()));
    t.v = xs;
    return t;
  }
};

class Graph;

// Lightweight handle into a graph node.
struct Var {
  Graph* g = nullptr;
  int id = -1;

  const Tensor& val() const;
  const Tensor& grad() const;
  int rows() const { return val().rows; }
  int cols() const { return val().cols; }
  double scalar() const { return val().v[0]; }
  bool valid() const { return g != nullptr && id >= 0; }
};

// Reverse-mode tape. Creation order is a topological order, so backward
// is a single reverse sweep. One Graph instance per forward pass.
class Graph {
 public:
  Var leaf(Tensor value, bool needs_grad = false);
  Var constant(Tensor value) { return leaf(std::move(value), false); }
  Var constant_scalar(double x) { return constant(Tensor::scalar(x)); }

  Var matmul(Var a, Var b);
  Var transpose(Var a);
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);  // elementwise
  Var scale(Var a, double s);
  Var add_scalar(Var a, double s);
  Var add_rowvec(Var a, Var bias);  // bias broadcast over rows
  Var concat_cols(const std::vector<Var>& parts);
  Var concat_rows(const std::vector<Var>& parts);
  Var slice_cols(Var a, int start, int n);
  Var select_rows(Var a, std::vector<int> idx);
  Var zero_rows(Var a, std::vector<int> idx);
  Var gelu(Var a);
  Var relu(Var a);  // subgradient 0 at the kink
  Var log(Var a);
  Var sum_all(Var a);
  Var mean_all(Var a);

  // Row-wise softmax((x + noise) / tau). noise, when given, must match
  // the input shape; tau must be positive.
  Var softmax_rows(Var logits, double tau, const Tensor* noise = nullptr);

  // Mean squared elementwise difference; symmetric in its arguments.
  Var mse_loss(Var pred, Var target);

  // Mean over rows of -(1 - p_true)^gamma * log(p_true). `probs` rows are
  // probability vectors; `onehot` selects the true class per row.
  Var focal_loss(Var probs, const Tensor& onehot, double gamma);

  // Contrastive pair loss over embedding rows with scaled cosine
  // similarity. Throws on zero-norm embeddings.
  struct PairLabel {
    int i = 0;
    int j = 0;
    bool same = false;
  };
  Var contrastive_loss(Var embeddings, std::vector<PairLabel> pairs);

  // Half-perimeter of the bounding box of an Mx2 point matrix; gradients
  // land on the extreme rows with first-index tie-breaking.
  Var bbox_hpwl(Var points);

  void backward(Var seed);  // seed must be 1x1
  void zero_grad();

  const Tensor& value(int id) const { return nodes_[id].val; }
  Tensor& grad(int id) { return nodes_[id].grad; }
  bool needs_grad(int id) const { return nodes_[id].needs_grad; }
  size_t node_count() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor val;
    Tensor grad;
    bool needs_grad = false;
    std::function<void(Graph&, int)> back;
  };
  std::vector<Node> nodes_;

  Var push(Tensor val, bool needs_grad, std::function<void(Graph&, int)> back);
  void check_same_graph(Var v) const;
};

}  // namespace vbuf::ad
