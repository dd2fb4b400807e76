#include "qarc/nn.hpp"

#include <cmath>
#include <stdexcept>

#include "qarc/kernels.hpp"

namespace qarc::nn {

void init_xavier_uniform(Tensor& t, std::size_t fan_in, std::size_t fan_out,
                         std::mt19937_64& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  init_uniform(t, bound, rng);
}

void init_uniform(Tensor& t, double bound, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (double& v : t.values) v = dist(rng);
}

std::size_t Model::add(std::string name, Tensor t) {
  for (const Parameter& p : params_) {
    if (p.name == name) throw std::invalid_argument("duplicate parameter name: " + name);
  }
  params_.emplace_back(std::move(name), std::move(t));
  return params_.size() - 1;
}

void Model::zero_grad() {
  for (Parameter& p : params_) p.tensor.zero_grad();
}

void Model::set_lr(double lr) {
  for (Parameter& p : params_) p.adam_state.lr = lr;
}

std::size_t Model::total_values() const {
  std::size_t n = 0;
  for (const Parameter& p : params_) n += p.tensor.numel();
  return n;
}

std::vector<double> Model::flat_values() const {
  std::vector<double> flat;
  flat.reserve(total_values());
  for (const Parameter& p : params_) {
    flat.insert(flat.end(), p.tensor.values.begin(), p.tensor.values.end());
  }
  return flat;
}

void Model::set_flat_values(const std::vector<double>& flat) {
  if (flat.size() != total_values()) {
    throw ShapeError("set_flat_values: length mismatch");
  }
  std::size_t off = 0;
  for (Parameter& p : params_) {
    std::copy(flat.begin() + off, flat.begin() + off + p.tensor.numel(),
              p.tensor.values.begin());
    off += p.tensor.numel();
  }
}

std::vector<double> Model::take_flat_grads() {
  std::vector<double> flat;
  flat.reserve(total_values());
  for (Parameter& p : params_) {
    flat.insert(flat.end(), p.tensor.grad.begin(), p.tensor.grad.end());
    p.tensor.zero_grad();
  }
  return flat;
}

void Model::adam_step_flat(const std::vector<double>& flat_grads) {
  if (flat_grads.size() != total_values()) {
    throw ShapeError("adam_step_flat: gradient length mismatch");
  }
  std::size_t off = 0;
  std::vector<double> g;
  for (Parameter& p : params_) {
    g.assign(flat_grads.begin() + off, flat_grads.begin() + off + p.tensor.numel());
    adam_step(p, g);
    off += p.tensor.numel();
  }
}

Dense Dense::create(Model& m, const std::string& name, std::size_t in, std::size_t out,
                    std::mt19937_64& rng) {
  Dense d;
  d.in = in;
  d.out = out;
  Tensor w({out, in});
  init_xavier_uniform(w, in, out, rng);
  d.w = m.add(name + ".w", std::move(w));
  d.b = m.add(name + ".b", Tensor({out}));
  return d;
}

Var Dense::apply(Graph& g, Model& m, Var x) const {
  return g.dense(x, g.param(m.at(w)), g.param(m.at(b)));
}

Conv1d Conv1d::create(Model& m, const std::string& name, std::size_t ksize,
                      std::size_t channels, std::size_t filters, std::size_t stride,
                      std::mt19937_64& rng) {
  Conv1d c;
  c.ksize = ksize;
  c.channels = channels;
  c.filters = filters;
  c.stride = stride;
  Tensor k({ksize, channels, filters});
  init_xavier_uniform(k, ksize * channels, ksize * filters, rng);
  c.k = m.add(name + ".k", std::move(k));
  return c;
}

Var Conv1d::apply(Graph& g, Model& m, Var x) const {
  return g.conv1d(x, g.param(m.at(k)), stride);
}

Conv2d Conv2d::create(Model& m, const std::string& name, std::size_t ksize,
                      std::size_t channels, std::size_t filters, std::size_t stride,
                      std::mt19937_64& rng) {
  Conv2d c;
  c.ksize = ksize;
  c.channels = channels;
  c.filters = filters;
  c.stride = stride;
  Tensor k({ksize, ksize, channels, filters});
  init_xavier_uniform(k, ksize * ksize * channels, ksize * ksize * filters, rng);
  c.k = m.add(name + ".k", std::move(k));
  return c;
}

Var Conv2d::apply(Graph& g, Model& m, Var x) const {
  return g.conv2d(x, g.param(m.at(k)), stride);
}

GruCell GruCell::create(Model& m, const std::string& name, std::size_t in,
                        std::size_t hidden, std::mt19937_64& rng) {
  GruCell c;
  c.in = in;
  c.hidden = hidden;
  auto mat = [&](const std::string& suffix, std::size_t rows, std::size_t cols) {
    Tensor t({rows, cols});
    init_uniform(t, 0.08, rng);
    return m.add(name + suffix, std::move(t));
  };
  c.wz = mat(".wz", hidden, in);
  c.uz = mat(".uz", hidden, hidden);
  c.bz = m.add(name + ".bz", Tensor({hidden}));
  c.wr = mat(".wr", hidden, in);
  c.ur = mat(".ur", hidden, hidden);
  c.br = m.add(name + ".br", Tensor({hidden}));
  c.wh = mat(".wh", hidden, in);
  c.uh = mat(".uh", hidden, hidden);
  c.bh = m.add(name + ".bh", Tensor({hidden}));
  return c;
}

Var GruCell::step(Graph& g, Model& m, Var x, Var h) const {
  for (double v : x.values()) {
    if (!std::isfinite(v)) throw std::invalid_argument("gru_step: non-finite input");
  }
  for (double v : h.values()) {
    if (!std::isfinite(v)) throw std::invalid_argument("gru_step: non-finite hidden state");
  }
  Var zero_bias = g.input(Tensor({hidden}));
  Var z = g.sigmoid(g.add(g.dense(x, g.param(m.at(wz)), g.param(m.at(bz))),
                          g.dense(h, g.param(m.at(uz)), zero_bias)));
  Var r = g.sigmoid(g.add(g.dense(x, g.param(m.at(wr)), g.param(m.at(br))),
                          g.dense(h, g.param(m.at(ur)), zero_bias)));
  Var cand = g.tanh(g.add(g.dense(x, g.param(m.at(wh)), g.param(m.at(bh))),
                          g.dense(g.mul(r, h), g.param(m.at(uh)), zero_bias)));
  // h' = z*h + (1-z)*cand, written as cand + z*(h - cand)
  return g.add(cand, g.mul(z, g.sub(h, cand)));
}

}  // namespace qarc::nn
