#pragma once

#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "medgnn/activations.hpp"
#include "medgnn/common.hpp"
#include "medgnn/filter.hpp"
#include "medgnn/matrix.hpp"
#include "medgnn/neighborhood.hpp"
#include "medgnn/readout.hpp"
#include "medgnn/signal.hpp"

namespace medgnn {

enum class ActivationKind { Relu, StaticMedian, DynamicMedian };

struct ActivationSpec {
  ActivationKind kind = ActivationKind::Relu;
  int hops = 0;  // r for static, reach R for dynamic, unused for relu

  // Highest hop the neighborhood table must provide.
  int required_hops() const { return kind == ActivationKind::Relu ? 0 : hops; }
};

// "relu" | "static-med:<r>" | "dyn-med:<R>"
inline ActivationSpec parse_activation(const std::string& s) {
  if (s == "relu") return {ActivationKind::Relu, 0};
  auto parse_hops = [&](std::size_t prefix_len, ActivationKind kind) {
    int h = 0;
    try {
      std::size_t used = 0;
      h = std::stoi(s.substr(prefix_len), &used);
      if (used != s.size() - prefix_len) throw std::invalid_argument("");
    } catch (const std::exception&) {
      throw ConfigError("activation: cannot parse hop count in '" + s + "'");
    }
    if (h < 1) throw ConfigError("activation: median reach must be >= 1 in '" + s + "'");
    return ActivationSpec{kind, h};
  };
  if (s.rfind("static-med:", 0) == 0) return parse_hops(11, ActivationKind::StaticMedian);
  if (s.rfind("dyn-med:", 0) == 0) return parse_hops(8, ActivationKind::DynamicMedian);
  throw ConfigError("activation: expected 'relu', 'static-med:<r>' or 'dyn-med:<R>', got '" +
                    s + "'");
}

inline std::string activation_name(const ActivationSpec& a) {
  switch (a.kind) {
    case ActivationKind::Relu: return "relu";
    case ActivationKind::StaticMedian: return "static-med:" + std::to_string(a.hops);
    case ActivationKind::DynamicMedian: return "dyn-med:" + std::to_string(a.hops);
  }
  throw Error("activation_name: unreachable");
}

// Single convolutional layer (filter bank + activation) and softmax readout.
struct ModelParams {
  ActivationSpec activation;
  FilterBankParams filter;
  DynamicMedianParams median;  // populated only for the dynamic median
  ReadoutParams readout;

  // Trainable parameters of the convolutional layer: filter taps plus, for
  // the dynamic median, the hop weights. 32 filters with 5 taps give 160;
  // reach 1 and 2 add 2 and 3.
  long conv_param_count() const {
    long c = filter.param_count();
    if (activation.kind == ActivationKind::DynamicMedian) c += median.param_count();
    return c;
  }

  long total_param_count() const { return conv_param_count() + readout.param_count(); }
};

inline ModelParams init_model(const ActivationSpec& activation, int f_in, int f_out,
                              int taps, int nodes, int classes, std::uint64_t seed) {
  ModelParams m;
  m.activation = activation;
  m.filter = FilterBankParams(f_in, f_out, taps);
  Rng rng(seed);
  const double filter_bound = std::sqrt(1.0 / (static_cast<double>(f_in) * taps));
  for (double& v : m.filter.h) v = rng.uniform(-filter_bound, filter_bound);
  if (activation.kind == ActivationKind::DynamicMedian)
    m.median = DynamicMedianParams(activation.hops);
  m.readout = ReadoutParams(f_out * nodes, classes);
  const double readout_bound = std::sqrt(1.0 / m.readout.in_dim);
  for (double& v : m.readout.weight.data()) v = rng.uniform(-readout_bound, readout_bound);
  for (double& v : m.readout.bias) v = rng.uniform(-readout_bound, readout_bound);
  return m;
}

struct ModelCache {
  FilterCache filter;
  ReluCache relu;
  StaticMedianCache static_median;
  DynamicMedianCache dynamic_median;
  ReadoutCache readout;
  int activation_features = 0;
  int activation_nodes = 0;
};

inline DenseMatrix model_forward(const ModelParams& p, const ShiftMatrix& s,
                                 const NeighborhoodTable& tbl, const SignalBatch& x,
                                 ModelCache& cache) {
  require_finite(x, "model_forward");
  SignalBatch conv = filter_forward(p.filter, s, x, cache.filter);
  SignalBatch act;
  switch (p.activation.kind) {
    case ActivationKind::Relu:
      act = relu_forward(conv, cache.relu);
      break;
    case ActivationKind::StaticMedian:
      act = static_median_forward(conv, tbl, p.activation.hops, cache.static_median);
      break;
    case ActivationKind::DynamicMedian:
      act = dynamic_median_forward(conv, tbl, p.median, cache.dynamic_median);
      break;
  }
  cache.activation_features = act.features;
  cache.activation_nodes = act.nodes;
  return readout_forward(p.readout, act, cache.readout);
}

struct ModelGradients {
  std::vector<double> grad_h;
  std::vector<double> grad_omega;  // empty unless dynamic median
  DenseMatrix grad_weight;
  std::vector<double> grad_bias;
};

inline ModelGradients model_backward(const ModelParams& p, const ShiftMatrix& s,
                                     const NeighborhoodTable& tbl, const ModelCache& cache,
                                     const DenseMatrix& grad_logits) {
  ModelGradients g;
  ReadoutGradients ro = readout_backward(p.readout, cache.readout, grad_logits,
                                         cache.activation_features, cache.activation_nodes);
  g.grad_weight = std::move(ro.grad_weight);
  g.grad_bias = std::move(ro.grad_bias);

  SignalBatch grad_act;
  switch (p.activation.kind) {
    case ActivationKind::Relu:
      grad_act = relu_backward(cache.relu, ro.grad_x);
      break;
    case ActivationKind::StaticMedian:
      grad_act = static_median_backward(tbl, p.activation.hops, cache.static_median, ro.grad_x);
      break;
    case ActivationKind::DynamicMedian: {
      DynamicMedianGradients dm =
          dynamic_median_backward(tbl, p.median, cache.dynamic_median, ro.grad_x);
      g.grad_omega = std::move(dm.grad_omega);
      grad_act = std::move(dm.grad_x);
      break;
    }
  }
  FilterGradients fg = filter_backward(p.filter, s, cache.filter, grad_act);
  g.grad_h = std::move(fg.grad_h);
  return g;
}

// Forward + cross-entropy + backward for one labeled batch.
struct BatchResult {
  double loss = 0.0;
  DenseMatrix probs;
  ModelGradients grads;
};

inline BatchResult model_loss_and_gradients(const ModelParams& p, const ShiftMatrix& s,
                                            const NeighborhoodTable& tbl,
                                            const SignalBatch& x,
                                            std::span<const int> labels,
                                            ModelCache& cache) {
  BatchResult r;
  r.probs = model_forward(p, s, tbl, x, cache);
  CrossEntropyResult ce = cross_entropy(r.probs, labels);
  r.loss = ce.loss;
  r.grads = model_backward(p, s, tbl, cache, ce.grad_logits);
  return r;
}

// ---------------------------------------------------------------------------
// Checkpoint format: versioned plain text, full-precision decimal values.

inline void save_checkpoint(std::ostream& out, const ModelParams& p) {
  out << "medgnn-checkpoint 1\n";
  out << "activation " << activation_name(p.activation) << '\n';
  out << "filter " << p.filter.f_out << ' ' << p.filter.f_in << ' ' << p.filter.taps << '\n';
  for (std::size_t i = 0; i < p.filter.h.size(); ++i)
    out << format_double(p.filter.h[i]) << (((i + 1) % 8 == 0) ? '\n' : ' ');
  out << '\n';
  if (p.activation.kind == ActivationKind::DynamicMedian) {
    out << "omega " << p.median.omega.size() << '\n';
    for (double v : p.median.omega) out << format_double(v) << ' ';
    out << '\n';
  }
  out << "readout " << p.readout.classes << ' ' << p.readout.in_dim << '\n';
  for (int c = 0; c < p.readout.classes; ++c) {
    const double* row = p.readout.weight.row(c);
    for (int j = 0; j < p.readout.in_dim; ++j)
      out << format_double(row[j]) << (j + 1 == p.readout.in_dim ? '\n' : ' ');
  }
  for (std::size_t c = 0; c < p.readout.bias.size(); ++c)
    out << format_double(p.readout.bias[c]) << (c + 1 == p.readout.bias.size() ? '\n' : ' ');
}

inline ModelParams load_checkpoint(std::istream& in) {
  auto expect = [&](const std::string& what) {
    std::string tok;
    if (!(in >> tok) || tok != what)
      throw ParseError("checkpoint: expected '" + what + "', got '" + tok + "'");
  };
  expect("medgnn-checkpoint");
  int version = 0;
  if (!(in >> version) || version != 1)
    throw ParseError("checkpoint: unsupported version");

  ModelParams p;
  expect("activation");
  std::string act;
  in >> act;
  p.activation = parse_activation(act);

  expect("filter");
  int f_out = 0, f_in = 0, taps = 0;
  if (!(in >> f_out >> f_in >> taps) || f_out < 1 || f_in < 1 || taps < 1)
    throw ParseError("checkpoint: bad filter header");
  p.filter = FilterBankParams(f_in, f_out, taps);
  for (double& v : p.filter.h)
    if (!(in >> v)) throw ParseError("checkpoint: truncated filter coefficients");

  if (p.activation.kind == ActivationKind::DynamicMedian) {
    expect("omega");
    std::size_t len = 0;
    if (!(in >> len) || len != static_cast<std::size_t>(p.activation.hops) + 1)
      throw ParseError("checkpoint: omega length does not match activation reach");
    p.median = DynamicMedianParams(p.activation.hops);
    for (double& v : p.median.omega)
      if (!(in >> v)) throw ParseError("checkpoint: truncated omega");
  }

  expect("readout");
  int classes = 0, in_dim = 0;
  if (!(in >> classes >> in_dim) || classes < 1 || in_dim < 1)
    throw ParseError("checkpoint: bad readout header");
  p.readout = ReadoutParams(in_dim, classes);
  for (double& v : p.readout.weight.data())
    if (!(in >> v)) throw ParseError("checkpoint: truncated readout weights");
  for (double& v : p.readout.bias)
    if (!(in >> v)) throw ParseError("checkpoint: truncated readout bias");
  return p;
}

}  // namespace medgnn
