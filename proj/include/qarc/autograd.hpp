#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "qarc/tensor.hpp"

namespace qarc::ag {

struct Node;
using NodePtr = std::shared_ptr<Node>;

struct Node {
  Tensor t;
  std::vector<NodePtr> inputs;
  std::function<void(Node&)> backward;
  Parameter* bound = nullptr;  // parameter leaves sync grads back on backward()
  std::vector<std::size_t> scratch;  // op-specific (max-pool argmax indices)
};

// Lightweight handle into a Graph's tape.
class Var {
 public:
  Var() = default;
  explicit Var(NodePtr n) : node_(std::move(n)) {}
  const Tensor& t() const { return node_->t; }
  Tensor& t() { return node_->t; }
  const std::vector<double>& values() const { return node_->t.values; }
  const std::vector<double>& grad() const { return node_->t.grad; }
  double scalar() const { return node_->t.values.at(0); }
  NodePtr node() const { return node_; }
  explicit operator bool() const { return node_ != nullptr; }

 private:
  NodePtr node_;
};

// Define-by-run tape. Creation order is a topological order, so backward()
// is a single reverse sweep. One Graph instance per forward/backward pass;
// graphs are cheap to build and are not reused.
class Graph {
 public:
  Var input(Tensor t);
  Var input(std::vector<double> values);  // 1-D
  Var param(Parameter& p);
  Var constant(double v);

  Var dense(Var x, Var w, Var b);       // x:[N], w:[M,N], b:[M] -> [M]
  Var conv1d(Var in, Var k, std::size_t stride);  // in:[L,C], k:[K,C,F]
  Var conv2d(Var in, Var k, std::size_t stride);  // in:[H,W,C], k:[Kh,Kw,C,F]
  Var avg_pool2d(Var in, std::size_t window);     // non-overlapping windows
  Var max_pool2d(Var in, std::size_t window);

  Var relu(Var x);
  Var sigmoid(Var x);
  Var tanh(Var x);
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  Var scale(Var x, double c);
  Var sum(Var x);
  Var sumsq(Var x);
  Var concat(const std::vector<Var>& parts);  // 1-D
  Var flatten(Var x);
  Var softmax(Var logits);
  Var log(Var x);             // ln(max(x, 1e-12))
  Var pick(Var x, std::size_t index);
  Var entropy(Var probs);     // -sum p ln p, 0 ln 0 := 0
  Var square(Var x);

  // (1/N) sum (pred - target)^2 + lambda * sum_i ||params_i||^2
  Var mse_l2_loss(Var pred, const std::vector<double>& target,
                  const std::vector<Var>& params, double lambda);

  // Seeds d(loss)=1 and sweeps the tape in reverse. Bound parameters get
  // their grads accumulated into Parameter::tensor.grad.
  void backward(Var loss);

  std::size_t size() const { return nodes_.size(); }

 private:
  Var make(Tensor t, std::vector<NodePtr> inputs, std::function<void(Node&)> bw);
  std::vector<NodePtr> nodes_;
};

double entropy_value(const std::vector<double>& probs);
std::vector<double> softmax_value(const std::vector<double>& logits);

// Central-difference gradient check. `value` evaluates the scalar function at
// a flat input vector; `gradient` returns the analytic gradient at the same
// point. Returns the max of |analytic - numeric| / max(1, |analytic|, |numeric|).
double grad_check(const std::function<double(const std::vector<double>&)>& value,
                  const std::function<std::vector<double>(const std::vector<double>&)>& gradient,
                  const std::vector<double>& x0, double h = 1e-5);

}  // namespace qarc::ag
