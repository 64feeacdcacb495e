#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "medgnn/common.hpp"
#include "medgnn/model.hpp"

namespace medgnn {

struct TensorRef {
  std::string name;
  double* data = nullptr;
  std::size_t size = 0;
};

struct ConstTensorRef {
  std::string name;
  const double* data = nullptr;
  std::size_t size = 0;
};

inline std::vector<TensorRef> trainable_tensors(ModelParams& p) {
  std::vector<TensorRef> t;
  t.push_back({"filter.h", p.filter.h.data(), p.filter.h.size()});
  if (p.activation.kind == ActivationKind::DynamicMedian)
    t.push_back({"median.omega", p.median.omega.data(), p.median.omega.size()});
  t.push_back({"readout.weight", p.readout.weight.data().data(), p.readout.weight.data().size()});
  t.push_back({"readout.bias", p.readout.bias.data(), p.readout.bias.size()});
  return t;
}

inline std::vector<ConstTensorRef> gradient_tensors(const ModelParams& p,
                                                    const ModelGradients& g) {
  std::vector<ConstTensorRef> t;
  t.push_back({"filter.h", g.grad_h.data(), g.grad_h.size()});
  if (p.activation.kind == ActivationKind::DynamicMedian)
    t.push_back({"median.omega", g.grad_omega.data(), g.grad_omega.size()});
  t.push_back({"readout.weight", g.grad_weight.data().data(), g.grad_weight.data().size()});
  t.push_back({"readout.bias", g.grad_bias.data(), g.grad_bias.size()});
  return t;
}

// First/second moment accumulators, one pair per parameter tensor.
struct AdamState {
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  long step = 0;
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;

  void init(const std::vector<TensorRef>& params) {
    step = 0;
    m.clear();
    v.clear();
    for (const TensorRef& t : params) {
      m.emplace_back(t.size, 0.0);
      v.emplace_back(t.size, 0.0);
    }
  }
};

inline void adam_step(AdamState& state, const std::vector<TensorRef>& params,
                      const std::vector<ConstTensorRef>& grads) {
  if (params.size() != grads.size() || params.size() != state.m.size())
    throw ShapeError("adam_step: tensor list size mismatch");
  for (std::size_t t = 0; t < params.size(); ++t) {
    if (params[t].size != grads[t].size || params[t].size != state.m[t].size())
      throw ShapeError("adam_step: shape mismatch for tensor " + params[t].name);
    for (std::size_t i = 0; i < grads[t].size; ++i)
      if (!std::isfinite(grads[t].data[i]))
        throw NumericalError("adam_step: non-finite gradient in tensor " + params[t].name);
  }

  state.step += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (std::size_t t = 0; t < params.size(); ++t) {
    double* p = params[t].data;
    const double* g = grads[t].data;
    std::vector<double>& mt = state.m[t];
    std::vector<double>& vt = state.v[t];
    for (std::size_t i = 0; i < params[t].size; ++i) {
      mt[i] = state.beta1 * mt[i] + (1.0 - state.beta1) * g[i];
      vt[i] = state.beta2 * vt[i] + (1.0 - state.beta2) * g[i] * g[i];
      const double m_hat = mt[i] / bc1;
      const double v_hat = vt[i] / bc2;
      p[i] -= state.learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon);
    }
  }
}

}  // namespace medgnn
