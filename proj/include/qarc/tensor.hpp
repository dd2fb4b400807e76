#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace qarc {

// Dense row-major array with a paired gradient buffer.
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> values;
  std::vector<double> grad;

  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> s);
  Tensor(std::vector<std::size_t> s, std::vector<double> v);

  std::size_t numel() const { return values.size(); }
  std::size_t rank() const { return shape.size(); }
  std::size_t dim(std::size_t i) const { return shape.at(i); }

  void zero_grad();
  bool same_shape(const Tensor& other) const { return shape == other.shape; }
  std::string shape_str() const;

  static Tensor zeros(std::vector<std::size_t> s) { return Tensor(std::move(s)); }
  static Tensor full(std::vector<std::size_t> s, double v);
};

struct ShapeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::size_t shape_numel(const std::vector<std::size_t>& shape);

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::int64_t step_count = 0;
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct Parameter {
  std::string name;
  Tensor tensor;
  AdamState adam_state;

  Parameter() = default;
  Parameter(std::string n, Tensor t);
};

// One Adam update with bias correction. `grad` must match the tensor shape.
void adam_step(Parameter& param, const std::vector<double>& grad);
// Convenience: consume the gradient accumulated in param.tensor.grad, then zero it.
void adam_step(Parameter& param);

}  // namespace qarc
