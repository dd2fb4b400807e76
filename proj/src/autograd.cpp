#include "qarc/autograd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qarc/kernels.hpp"

namespace qarc::ag {

namespace {

constexpr double kLogFloor = 1e-12;

void ensure_finite(const Tensor& t, const char* op) {
  for (double v : t.values) {
    if (!std::isfinite(v)) throw std::invalid_argument(std::string(op) + ": non-finite input");
  }
}

}  // namespace

Var Graph::make(Tensor t, std::vector<NodePtr> inputs, std::function<void(Node&)> bw) {
  auto n = std::make_shared<Node>();
  n->t = std::move(t);
  n->inputs = std::move(inputs);
  n->backward = std::move(bw);
  nodes_.push_back(n);
  return Var(n);
}

Var Graph::input(Tensor t) { return make(std::move(t), {}, nullptr); }

Var Graph::input(std::vector<double> values) {
  const std::size_t n = values.size();
  return input(Tensor({n}, std::move(values)));
}

Var Graph::param(Parameter& p) {
  Tensor t(p.tensor.shape, p.tensor.values);
  Var v = make(std::move(t), {}, nullptr);
  v.node()->bound = &p;
  return v;
}

Var Graph::constant(double v) { return input(Tensor({1}, {v})); }

Var Graph::dense(Var x, Var w, Var b) {
  if (x.t().rank() != 1 || w.t().rank() != 2 || b.t().rank() != 1 ||
      w.t().dim(1) != x.t().numel() || w.t().dim(0) != b.t().numel()) {
    throw ShapeError("dense: x " + x.t().shape_str() + " w " + w.t().shape_str() +
                     " b " + b.t().shape_str());
  }
  const std::size_t out = w.t().dim(0);
  const std::size_t in = w.t().dim(1);
  Tensor y({out});
  kernels::matvec(w.values().data(), x.values().data(), b.values().data(),
                  y.values.data(), out, in);
  return make(std::move(y), {x.node(), w.node(), b.node()}, [out, in](Node& n) {
    Node& xn = *n.inputs[0];
    Node& wn = *n.inputs[1];
    Node& bn = *n.inputs[2];
    const double* gy = n.t.grad.data();
    kernels::matvec_t_acc(wn.t.values.data(), gy, xn.t.grad.data(), out, in);
    for (std::size_t i = 0; i < out; ++i) {
      kernels::axpy(gy[i], xn.t.values.data(), wn.t.grad.data() + i * in, in);
    }
    kernels::axpy(1.0, gy, bn.t.grad.data(), out);
  });
}

Var Graph::conv1d(Var in, Var k, std::size_t stride) {
  if (in.t().rank() != 2 || k.t().rank() != 3 || in.t().dim(1) != k.t().dim(1) ||
      k.t().dim(0) > in.t().dim(0) || stride < 1) {
    throw ShapeError("conv1d: input " + in.t().shape_str() + " kernels " +
                     k.t().shape_str());
  }
  const std::size_t L = in.t().dim(0), C = in.t().dim(1);
  const std::size_t K = k.t().dim(0), F = k.t().dim(2);
  const std::size_t Lo = (L - K) / stride + 1;
  Tensor y({Lo, F});
  const double* iv = in.values().data();
  const double* kv = k.values().data();
  for (std::size_t l = 0; l < Lo; ++l) {
    for (std::size_t kk = 0; kk < K; ++kk) {
      const double* row = iv + (l * stride + kk) * C;
      for (std::size_t c = 0; c < C; ++c) {
        kernels::axpy(row[c], kv + (kk * C + c) * F, y.values.data() + l * F, F);
      }
    }
  }
  return make(std::move(y), {in.node(), k.node()}, [L, C, K, F, Lo, stride](Node& n) {
    Node& xn = *n.inputs[0];
    Node& kn = *n.inputs[1];
    (void)L;
    for (std::size_t l = 0; l < Lo; ++l) {
      const double* gy = n.t.grad.data() + l * F;
      for (std::size_t kk = 0; kk < K; ++kk) {
        const std::size_t base = (l * stride + kk) * C;
        for (std::size_t c = 0; c < C; ++c) {
          const double* kf = kn.t.values.data() + (kk * C + c) * F;
          xn.t.grad[base + c] += kernels::dot(kf, gy, F);
          kernels::axpy(xn.t.values[base + c], gy,
                        kn.t.grad.data() + (kk * C + c) * F, F);
        }
      }
    }
  });
}

Var Graph::conv2d(Var in, Var k, std::size_t stride) {
  if (in.t().rank() != 3 || k.t().rank() != 4 || in.t().dim(2) != k.t().dim(2) ||
      k.t().dim(0) > in.t().dim(0) || k.t().dim(1) > in.t().dim(1) || stride < 1) {
    throw ShapeError("conv2d: input " + in.t().shape_str() + " kernels " +
                     k.t().shape_str());
  }
  const std::size_t H = in.t().dim(0), W = in.t().dim(1), C = in.t().dim(2);
  const std::size_t Kh = k.t().dim(0), Kw = k.t().dim(1), F = k.t().dim(3);
  const std::size_t Ho = (H - Kh) / stride + 1;
  const std::size_t Wo = (W - Kw) / stride + 1;
  Tensor y({Ho, Wo, F});
  const double* iv = in.values().data();
  const double* kv = k.values().data();
  for (std::size_t i = 0; i < Ho; ++i) {
    for (std::size_t j = 0; j < Wo; ++j) {
      double* out = y.values.data() + (i * Wo + j) * F;
      for (std::size_t kh = 0; kh < Kh; ++kh) {
        const double* row = iv + ((i * stride + kh) * W + j * stride) * C;
        const double* krow = kv + kh * Kw * C * F;
        for (std::size_t m = 0; m < Kw * C; ++m) {
          kernels::axpy(row[m], krow + m * F, out, F);
        }
      }
    }
  }
  return make(std::move(y), {in.node(), k.node()},
              [W, C, Kh, Kw, F, Ho, Wo, stride](Node& n) {
                Node& xn = *n.inputs[0];
                Node& kn = *n.inputs[1];
                for (std::size_t i = 0; i < Ho; ++i) {
                  for (std::size_t j = 0; j < Wo; ++j) {
                    const double* gy = n.t.grad.data() + (i * Wo + j) * F;
                    for (std::size_t kh = 0; kh < Kh; ++kh) {
                      const std::size_t base = ((i * stride + kh) * W + j * stride) * C;
                      const std::size_t kbase = kh * Kw * C * F;
                      for (std::size_t m = 0; m < Kw * C; ++m) {
                        xn.t.grad[base + m] +=
                            kernels::dot(kn.t.values.data() + kbase + m * F, gy, F);
                        kernels::axpy(xn.t.values[base + m], gy,
                                      kn.t.grad.data() + kbase + m * F, F);
                      }
                    }
                  }
                }
              });
}

Var Graph::avg_pool2d(Var in, std::size_t window) {
  if (in.t().rank() != 3 || window < 1 || window > in.t().dim(0) ||
      window > in.t().dim(1)) {
    throw ShapeError("avg_pool2d: window " + std::to_string(window) +
                     " does not fit input " + in.t().shape_str());
  }
  const std::size_t H = in.t().dim(0), W = in.t().dim(1), C = in.t().dim(2);
  const std::size_t Ho = H / window, Wo = W / window;
  Tensor y({Ho, Wo, C});
  const double inv = 1.0 / static_cast<double>(window * window);
  for (std::size_t i = 0; i < Ho; ++i)
    for (std::size_t j = 0; j < Wo; ++j)
      for (std::size_t c = 0; c < C; ++c) {
        double acc = 0.0;
        for (std::size_t a = 0; a < window; ++a)
          for (std::size_t b = 0; b < window; ++b)
            acc += in.values()[((i * window + a) * W + j * window + b) * C + c];
        y.values[(i * Wo + j) * C + c] = acc * inv;
      }
  return make(std::move(y), {in.node()}, [W, C, Ho, Wo, window, inv](Node& n) {
    Node& xn = *n.inputs[0];
    for (std::size_t i = 0; i < Ho; ++i)
      for (std::size_t j = 0; j < Wo; ++j)
        for (std::size_t c = 0; c < C; ++c) {
          const double g = n.t.grad[(i * Wo + j) * C + c] * inv;
          for (std::size_t a = 0; a < window; ++a)
            for (std::size_t b = 0; b < window; ++b)
              xn.t.grad[((i * window + a) * W + j * window + b) * C + c] += g;
        }
  });
}

Var Graph::max_pool2d(Var in, std::size_t window) {
  if (in.t().rank() != 3 || window < 1 || window > in.t().dim(0) ||
      window > in.t().dim(1)) {
    throw ShapeError("max_pool2d: window " + std::to_string(window) +
                     " does not fit input " + in.t().shape_str());
  }
  const std::size_t H = in.t().dim(0), W = in.t().dim(1), C = in.t().dim(2);
  const std::size_t Ho = H / window, Wo = W / window;
  Tensor y({Ho, Wo, C});
  std::vector<std::size_t> argmax(y.numel());
  for (std::size_t i = 0; i < Ho; ++i)
    for (std::size_t j = 0; j < Wo; ++j)
      for (std::size_t c = 0; c < C; ++c) {
        double best = -std::numeric_limits<double>::infinity();
        std::size_t best_idx = 0;
        // ties go to the first index in row-major order
        for (std::size_t a = 0; a < window; ++a)
          for (std::size_t b = 0; b < window; ++b) {
            const std::size_t idx = ((i * window + a) * W + j * window + b) * C + c;
            if (in.values()[idx] > best) {
              best = in.values()[idx];
              best_idx = idx;
            }
          }
        y.values[(i * Wo + j) * C + c] = best;
        argmax[(i * Wo + j) * C + c] = best_idx;
      }
  Var v = make(std::move(y), {in.node()}, [](Node& n) {
    Node& xn = *n.inputs[0];
    for (std::size_t o = 0; o < n.t.numel(); ++o) {
      xn.t.grad[n.scratch[o]] += n.t.grad[o];
    }
  });
  v.node()->scratch = std::move(argmax);
  return v;
}

Var Graph::relu(Var x) {
  Tensor y(x.t().shape);
  for (std::size_t i = 0; i < y.numel(); ++i) y.values[i] = std::max(0.0, x.values()[i]);
  return make(std::move(y), {x.node()}, [](Node& n) {
    Node& xn = *n.inputs[0];
    for (std::size_t i = 0; i < n.t.numel(); ++i)
      if (xn.t.values[i] > 0.0) xn.t.grad[i] += n.t.grad[i];
  });
}

Var Graph::sigmoid(Var x) {
  Tensor y(x.t().shape);
  for (std::size_t i = 0; i < y.numel(); ++i) y.values[i] = 1.0 / (1.0 + std::exp(-x.values()[i]));
  return make(std::move(y), {x.node()}, [](Node& n) {
    Node& xn = *n.inputs[0];
    for (std::size_t i = 0; i < n.t.numel(); ++i) {
      const double s = n.t.values[i];
      xn.t.grad[i] += n.t.grad[i] * s * (1.0 - s);
    }
  });
}

Var Graph::tanh(Var x) {
  Tensor y(x.t().shape);
  for (std::size_t i = 0; i < y.numel(); ++i) y.values[i] = std::tanh(x.values()[i]);
  return make(std::move(y), {x.node()}, [](Node& n) {
    Node& xn = *n.inputs[0];
    for (std::size_t i = 0; i < n.t.numel(); ++i) {
      const double t = n.t.values[i];
      xn.t.grad[i] += n.t.grad[i] * (1.0 - t * t);
    }
  });
}

Var Graph::add(Var a, Var b) {
  if (!a.t().same_shape(b.t())) {
    throw ShapeError("add: " + a.t().shape_str() + " vs " + b.t().shape_str());
  }
  Tensor y(a.t().shape);
  kernels::add(a.values().data(), b.values().data(), y.values.data(), y.numel());
  return make(std::move(y), {a.node(), b.node()}, [](Node& n) {
    kernels::axpy(1.0, n.t.grad.data(), n.inputs[0]->t.grad.data(), n.t.numel());
    kernels::axpy(1.0, n.t.grad.data(), n.inputs[1]->t.grad.data(), n.t.numel());
  });
}

Var Graph::sub(Var a, Var b) {
  if (!a.t().same_shape(b.t())) {
    throw ShapeError("sub: " + a.t().shape_str() + " vs " + b.t().shape_str());
  }
  Tensor y(a.t().shape);
  kernels::sub(a.values().data(), b.values().data(), y.values.data(), y.numel());
  return make(std::move(y), {a.node(), b.node()}, [](Node& n) {
    kernels::axpy(1.0, n.t.grad.data(), n.inputs[0]->t.grad.data(), n.t.numel());
    kernels::axpy(-1.0, n.t.grad.data(), n.inputs[1]->t.grad.data(), n.t.numel());
  });
}

Var Graph::mul(Var a, Var b) {
  if (!a.t().same_shape(b.t())) {
    throw ShapeError("mul: " + a.t().shape_str() + " vs " + b.t().shape_str());
  }
  Tensor y(a.t().shape);
  kernels::mul(a.values().data(), b.values().data(), y.values.data(), y.numel());
  return make(std::move(y), {a.node(), b.node()}, [](Node& n) {
    Node& an = *n.inputs[0];
    Node& bn = *n.inputs[1];
    for (std::size_t i = 0; i < n.t.numel(); ++i) {
      an.t.grad[i] += n.t.grad[i] * bn.t.values[i];
      bn.t.grad[i] += n.t.grad[i] * an.t.values[i];
    }
  });
}

Var Graph::scale(Var x, double c) {
  Tensor y(x.t().shape, x.values());
  kernels::scale(c, y.values.data(), y.numel());
  return make(std::move(y), {x.node()}, [c](Node& n) {
    kernels::axpy(c, n.t.grad.data(), n.inputs[0]->t.grad.data(), n.t.numel());
  });
}

Var Graph::sum(Var x) {
  Tensor y({1}, {kernels::sum(x.values().data(), x.t().numel())});
  return make(std::move(y), {x.node()}, [](Node& n) {
    Node& xn = *n.inputs[0];
    const double g = n.t.grad[0];
    for (std::size_t i = 0; i < xn.t.numel(); ++i) xn.t.grad[i] += g;
  });
}

Var Graph::sumsq(Var x) {
  Tensor y({1}, {kernels::sumsq(x.values().data(), x.t().numel())});
  return make(std::move(y), {x.node()}, [](Node& n) {
    Node& xn = *n.inputs[0];
    kernels::axpy(2.0 * n.t.grad[0], xn.t.values.data(), xn.t.grad.data(), xn.t.numel());
  });
}

Var Graph::concat(const std::vector<Var>& parts) {
  std::size_t total = 0;
  for (const Var& p : parts) total += p.t().numel();
  Tensor y({total});
  std::vector<NodePtr> inputs;
  std::size_t off = 0;
  for (const Var& p : parts) {
    std::copy(p.values().begin(), p.values().end(), y.values.begin() + off);
    off += p.t().numel();
    inputs.push_back(p.node());
  }
  return make(std::move(y), std::move(inputs), [](Node& n) {
    std::size_t off = 0;
    for (auto& in : n.inputs) {
      kernels::axpy(1.0, n.t.grad.data() + off, in->t.grad.data(), in->t.numel());
      off += in->t.numel();
    }
  });
}

Var Graph::flatten(Var x) {
  Tensor y({x.t().numel()}, x.values());
  return make(std::move(y), {x.node()}, [](Node& n) {
    kernels::axpy(1.0, n.t.grad.data(), n.inputs[0]->t.grad.data(), n.t.numel());
  });
}

Var Graph::softmax(Var logits) {
  ensure_finite(logits.t(), "softmax");
  Tensor y(logits.t().shape, softmax_value(logits.values()));
  return make(std::move(y), {logits.node()}, [](Node& n) {
    Node& xn = *n.inputs[0];
    const double inner = kernels::dot(n.t.values.data(), n.t.grad.data(), n.t.numel());
    for (std::size_t i = 0; i < n.t.numel(); ++i) {
      xn.t.grad[i] += n.t.values[i] * (n.t.grad[i] - inner);
    }
  });
}

Var Graph::log(Var x) {
  Tensor y(x.t().shape);
  for (std::size_t i = 0; i < y.numel(); ++i) {
    y.values[i] = std::log(std::max(x.values()[i], kLogFloor));
  }
  return make(std::move(y), {x.node()}, [](Node& n) {
    Node& xn = *n.inputs[0];
    for (std::size_t i = 0; i < n.t.numel(); ++i) {
      xn.t.grad[i] += n.t.grad[i] / std::max(xn.t.values[i], kLogFloor);
    }
  });
}

Var Graph::pick(Var x, std::size_t index) {
  if (index >= x.t().numel()) {
    throw ShapeError("pick: index " + std::to_string(index) + " out of range for " +
                     x.t().shape_str());
  }
  Tensor y({1}, {x.values()[index]});
  Var v = make(std::move(y), {x.node()}, [](Node& n) {
    n.inputs[0]->t.grad[n.scratch[0]] += n.t.grad[0];
  });
  v.node()->scratch = {index};
  return v;
}

Var Graph::entropy(Var probs) {
  for (double p : probs.values()) {
    if (p < -1e-12 || !std::isfinite(p)) {
      throw std::invalid_argument("entropy: probabilities must be non-negative");
    }
  }
  Tensor y({1}, {entropy_value(probs.values())});
  return make(std::move(y), {probs.node()}, [](Node& n) {
    Node& pn = *n.inputs[0];
    const double g = n.t.grad[0];
    for (std::size_t i = 0; i < pn.t.numel(); ++i) {
      const double p = pn.t.values[i];
      if (p > 0.0) pn.t.grad[i] += g * (-std::log(p) - 1.0);
    }
  });
}

Var Graph::square(Var x) {
  Tensor y(x.t().shape);
  kernels::mul(x.values().data(), x.values().data(), y.values.data(), y.numel());
  return make(std::move(y), {x.node()}, [](Node& n) {
    Node& xn = *n.inputs[0];
    for (std::size_t i = 0; i < n.t.numel(); ++i) {
      xn.t.grad[i] += 2.0 * n.t.grad[i] * xn.t.values[i];
    }
  });
}

Var Graph::mse_l2_loss(Var pred, const std::vector<double>& target,
                       const std::vector<Var>& params, double lambda) {
  if (pred.t().numel() != target.size()) {
    throw ShapeError("mse_l2_loss: pred " + pred.t().shape_str() + " vs target length " +
                     std::to_string(target.size()));
  }
  Var diff = sub(pred, input(Tensor(pred.t().shape, target)));
  Var loss = scale(sumsq(diff), 1.0 / static_cast<double>(target.size()));
  if (lambda > 0.0) {
    for (const Var& p : params) loss = add(loss, scale(sumsq(p), lambda));
  }
  return loss;
}

void Graph::backward(Var loss) {
  if (loss.t().numel() != 1) throw ShapeError("backward: loss must be scalar");
  loss.node()->t.grad[0] = 1.0;
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
    Node& n = **it;
    if (n.backward) n.backward(n);
    if (n.bound) {
      kernels::axpy(1.0, n.t.grad.data(), n.bound->tensor.grad.data(), n.t.numel());
    }
  }
}

double entropy_value(const std::vector<double>& probs) {
  double h = 0.0;
  for (double p : probs) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

std::vector<double> softmax_value(const std::vector<double>& logits) {
  const double m = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  double z = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - m);
    z += out[i];
  }
  for (double& v : out) v /= z;
  return out;
}

double grad_check(const std::function<double(const std::vector<double>&)>& value,
                  const std::function<std::vector<double>(const std::vector<double>&)>& gradient,
                  const std::vector<double>& x0, double h) {
  const std::vector<double> analytic = gradient(x0);
  double worst = 0.0;
  std::vector<double> x = x0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = x[i];
    x[i] = saved + h;
    const double fp = value(x);
    x[i] = saved - h;
    const double fm = value(x);
    x[i] = saved;
    const double numeric = (fp - fm) / (2.0 * h);
    const double denom = std::max({1.0, std::abs(analytic[i]), std::abs(numeric)});
    worst = std::max(worst, std::abs(analytic[i] - numeric) / denom);
  }
  return worst;
}

}  // namespace qarc::ag
