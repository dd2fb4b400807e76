#include "qarc/tensor.hpp"

#include <cmath>
#include <sstream>

namespace qarc {

std::size_t shape_numel(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

Tensor::Tensor(std::vector<std::size_t> s) : shape(std::move(s)) {
  values.assign(shape_numel(shape), 0.0);
  grad.assign(values.size(), 0.0);
}

Tensor::Tensor(std::vector<std::size_t> s, std::vector<double> v)
    : shape(std::move(s)), values(std::move(v)) {
  if (shape_numel(shape) != values.size()) {
    throw ShapeError("tensor values length " + std::to_string(values.size()) +
                     " does not match shape " + shape_str());
  }
  grad.assign(values.size(), 0.0);
}

void Tensor::zero_grad() { grad.assign(values.size(), 0.0); }

std::string Tensor::shape_str() const {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

Tensor Tensor::full(std::vector<std::size_t> s, double v) {
  Tensor t(std::move(s));
  t.values.assign(t.values.size(), v);
  return t;
}

Parameter::Parameter(std::string n, Tensor t) : name(std::move(n)), tensor(std::move(t)) {
  adam_state.m.assign(tensor.numel(), 0.0);
  adam_state.v.assign(tensor.numel(), 0.0);
}

void adam_step(Parameter& param, const std::vector<double>& grad) {
  Tensor& t = param.tensor;
  AdamState& st = param.adam_state;
  if (grad.size() != t.numel()) {
    throw ShapeError("adam_step: gradient length " + std::to_string(grad.size()) +
                     " does not match parameter " + param.name + " " + t.shape_str());
  }
  if (st.m.size() != t.numel()) {
    st.m.assign(t.numel(), 0.0);
    st.v.assign(t.numel(), 0.0);
  }
  st.step_count += 1;
  const double bc1 = 1.0 - std::pow(st.beta1, static_cast<double>(st.step_count));
  const double bc2 = 1.0 - std::pow(st.beta2, static_cast<double>(st.step_count));
  for (std::size_t i = 0; i < grad.size(); ++i) {
    const double g = grad[i];
    st.m[i] = st.beta1 * st.m[i] + (1.0 - st.beta1) * g;
    st.v[i] = st.beta2 * st.v[i] + (1.0 - st.beta2) * g * g;
    const double mhat = st.m[i] / bc1;
    const double vhat = st.v[i] / bc2;
    t.values[i] -= st.lr * mhat / (std::sqrt(vhat) + st.epsilon);
  }
}

void adam_step(Parameter& param) {
  adam_step(param, param.tensor.grad);
  param.tensor.zero_grad();
}

}  // namespace qarc
