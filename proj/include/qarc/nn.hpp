#pragma once

#include <random>
#include <string>
#include <vector>

#include "qarc/autograd.hpp"
#include "qarc/tensor.hpp"

namespace qarc::nn {

using ag::Graph;
using ag::Var;

void init_xavier_uniform(Tensor& t, std::size_t fan_in, std::size_t fan_out,
                         std::mt19937_64& rng);
void init_uniform(Tensor& t, double bound, std::mt19937_64& rng);

// Owns a model's parameters in a stable order. Layers refer to parameters by
// index so the vector can grow during construction.
class Model {
 public:
  std::size_t add(std::string name, Tensor t);
  Parameter& at(std::size_t idx) { return params_[idx]; }
  const Parameter& at(std::size_t idx) const { return params_[idx]; }
  std::vector<Parameter>& params() { return params_; }
  const std::vector<Parameter>& params() const { return params_; }

  void zero_grad();
  void set_lr(double lr);
  std::size_t total_values() const;

  // Flat views in parameter order, used by the A3C gradient messages.
  std::vector<double> flat_values() const;
  void set_flat_values(const std::vector<double>& flat);
  std::vector<double> take_flat_grads();  // collects then zeroes
  void adam_step_flat(const std::vector<double>& flat_grads);

 private:
  std::vector<Parameter> params_;
};

struct Dense {
  std::size_t w = 0, b = 0;
  std::size_t in = 0, out = 0;
  static Dense create(Model& m, const std::string& name, std::size_t in,
                      std::size_t out, std::mt19937_64& rng);
  Var apply(Graph& g, Model& m, Var x) const;
};

struct Conv1d {
  std::size_t k = 0;
  std::size_t ksize = 0, channels = 0, filters = 0, stride = 1;
  static Conv1d create(Model& m, const std::string& name, std::size_t ksize,
                       std::size_t channels, std::size_t filters, std::size_t stride,
                       std::mt19937_64& rng);
  Var apply(Graph& g, Model& m, Var x) const;
};

struct Conv2d {
  std::size_t k = 0;
  std::size_t ksize = 0, channels = 0, filters = 0, stride = 1;
  static Conv2d create(Model& m, const std::string& name, std::size_t ksize,
                       std::size_t channels, std::size_t filters, std::size_t stride,
                       std::mt19937_64& rng);
  Var apply(Graph& g, Model& m, Var x) const;
};

// Standard GRU cell: update gate z, reset gate r, candidate h~, and
// h' = z*h + (1-z)*h~. With zero parameters and h=0 the state stays 0;
// a large update-gate bias freezes the state regardless of input.
struct GruCell {
  std::size_t wz = 0, uz = 0, bz = 0;
  std::size_t wr = 0, ur = 0, br = 0;
  std::size_t wh = 0, uh = 0, bh = 0;
  std::size_t in = 0, hidden = 0;
  static GruCell create(Model& m, const std::string& name, std::size_t in,
                        std::size_t hidden, std::mt19937_64& rng);
  Var step(Graph& g, Model& m, Var x, Var h) const;
};

}  // namespace qarc::nn
