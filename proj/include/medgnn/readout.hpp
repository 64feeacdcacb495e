#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "medgnn/common.hpp"
#include "medgnn/matrix.hpp"
#include "medgnn/signal.hpp"

namespace medgnn {

// Fully connected layer over the concatenated features of a sample, followed
// by a softmax.
struct ReadoutParams {
  int in_dim = 0;
  int classes = 0;
  DenseMatrix weight;  // classes x in_dim
  std::vector<double> bias;

  ReadoutParams() = default;
  ReadoutParams(int in, int c) : in_dim(in), classes(c), weight(c, in), bias(c, 0.0) {}

  long param_count() const {
    return static_cast<long>(in_dim) * classes + classes;
  }
};

struct ReadoutCache {
  bool valid = false;
  int batch = 0, in_dim = 0, classes = 0;
  std::vector<double> input;  // flattened samples, batch x in_dim
  DenseMatrix probs;          // batch x classes

  const double* input_row(int b) const {
    return input.data() + static_cast<std::size_t>(b) * in_dim;
  }
};

// Row-wise softmax with max subtraction.
inline void softmax_row(const double* logits, double* probs, int c) {
  double m = logits[0];
  for (int j = 1; j < c; ++j) m = std::max(m, logits[j]);
  double sum = 0.0;
  for (int j = 0; j < c; ++j) {
    probs[j] = std::exp(logits[j] - m);
    sum += probs[j];
  }
  for (int j = 0; j < c; ++j) probs[j] /= sum;
}

// Returns class probabilities, one row per sample.
inline DenseMatrix readout_forward(const ReadoutParams& p, const SignalBatch& x,
                                   ReadoutCache& cache) {
  if (x.features * x.nodes != p.in_dim)
    throw ShapeError("readout_forward: flattened dim " +
                     std::to_string(x.features * x.nodes) + " != in_dim " +
                     std::to_string(p.in_dim));

  cache.valid = true;
  cache.batch = x.batch;
  cache.in_dim = p.in_dim;
  cache.classes = p.classes;
  cache.input.assign(x.values.begin(), x.values.end());
  cache.probs = DenseMatrix(x.batch, p.classes);

  DenseMatrix probs(x.batch, p.classes);
  std::vector<double> logits(p.classes);
  for (int b = 0; b < x.batch; ++b) {
    const double* flat = x.sample(b);
    for (int c = 0; c < p.classes; ++c)
      logits[c] = dot(p.weight.row(c), flat, p.in_dim) + p.bias[c];
    softmax_row(logits.data(), probs.row(b), p.classes);
  }
  cache.probs = probs;
  return probs;
}

struct ReadoutGradients {
  DenseMatrix grad_weight;
  std::vector<double> grad_bias;
  SignalBatch grad_x;
};

inline ReadoutGradients readout_backward(const ReadoutParams& p, const ReadoutCache& cache,
                                         const DenseMatrix& grad_logits, int features,
                                         int nodes) {
  if (!cache.valid) throw ShapeError("readout_backward: cache not produced by a forward pass");
  if (grad_logits.rows() != cache.batch || grad_logits.cols() != p.classes)
    throw ShapeError("readout_backward: gradient shape does not match cache");
  if (features * nodes != p.in_dim)
    throw ShapeError("readout_backward: features * nodes != in_dim");

  ReadoutGradients g;
  g.grad_weight = DenseMatrix(p.classes, p.in_dim);
  g.grad_bias.assign(p.classes, 0.0);
  g.grad_x = SignalBatch(cache.batch, features, nodes);
  for (int b = 0; b < cache.batch; ++b) {
    const double* flat = cache.input_row(b);
    const double* gl = grad_logits.row(b);
    double* gx = g.grad_x.values.data() + static_cast<std::size_t>(b) * p.in_dim;
    for (int c = 0; c < p.classes; ++c) {
      const double gc = gl[c];
      g.grad_bias[c] += gc;
      double* gw = g.grad_weight.row(c);
      const double* w = p.weight.row(c);
      for (int j = 0; j < p.in_dim; ++j) {
        gw[j] += gc * flat[j];
        gx[j] += gc * w[j];
      }
    }
  }
  return g;
}

struct CrossEntropyResult {
  double loss = 0.0;
  DenseMatrix grad_logits;  // batch x classes, already divided by batch size
};

// Mean negative log-likelihood with probabilities clamped at 1e-12.
inline CrossEntropyResult cross_entropy(const DenseMatrix& probs,
                                        std::span<const int> labels) {
  const int batch = probs.rows();
  const int classes = probs.cols();
  if (static_cast<int>(labels.size()) != batch)
    throw ShapeError("cross_entropy: label count != batch size");

  CrossEntropyResult r;
  r.grad_logits = DenseMatrix(batch, classes);
  const double inv_b = 1.0 / batch;
  for (int b = 0; b < batch; ++b) {
    const int y = labels[b];
    if (y < 0 || y >= classes)
      throw ValidationError("cross_entropy: label " + std::to_string(y) +
                            " out of range [0, " + std::to_string(classes) + ")");
    r.loss += -std::log(std::max(probs(b, y), 1e-12));
    double* gl = r.grad_logits.row(b);
    const double* pr = probs.row(b);
    for (int c = 0; c < classes; ++c)
      gl[c] = (pr[c] - (c == y ? 1.0 : 0.0)) * inv_b;
  }
  r.loss *= inv_b;
  return r;
}

}  // namespace medgnn
