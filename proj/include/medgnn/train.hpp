#pragma once

#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <ostream>
#include <thread>
#include <utility>
#include <vector>

#include "medgnn/adam.hpp"
#include "medgnn/common.hpp"
#include "medgnn/dataset.hpp"
#include "medgnn/model.hpp"

namespace medgnn {

struct TrainConfig {
  int epochs = 1;
  int batch_size = 100;
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t seed = 0;
  // When > 0, a seeded stratified carve-out of the training data is held out
  // and evaluated after every epoch.
  double val_fraction = 0.0;
  int threads = 1;
};

struct TrainReport {
  std::vector<double> train_loss;
  std::vector<double> val_loss;  // NaN entries when no validation split
  std::vector<double> val_acc;
  std::vector<double> seconds;
  ModelParams final_params;

  double final_train_loss() const {
    return train_loss.empty() ? std::numeric_limits<double>::quiet_NaN() : train_loss.back();
  }
};

// Per-epoch rows in the order epoch, train_loss, val_loss, val_acc, seconds.
inline void report_to_csv(std::ostream& out, const TrainReport& r) {
  out << "epoch,train_loss,val_loss,val_acc,seconds\n";
  for (std::size_t e = 0; e < r.train_loss.size(); ++e)
    out << (e + 1) << ',' << format_double(r.train_loss[e]) << ','
        << format_double(r.val_loss[e]) << ',' << format_double(r.val_acc[e]) << ','
        << format_double(r.seconds[e]) << '\n';
}

struct EvalResult {
  double loss = 0.0;
  double accuracy = 0.0;
};

namespace detail {

// Runs fn(b) for b in [0, count) across the given number of threads. Work is
// striped, and every output slot is owned by exactly one sample, so results
// do not depend on the schedule.
template <class Fn>
void parallel_samples(int count, int threads, Fn&& fn) {
  const int workers = std::max(1, std::min(threads, count));
  if (workers == 1) {
    for (int b = 0; b < count; ++b) fn(b, 0);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  auto guarded = [&](int w) {
    try {
      for (int b = w; b < count; b += workers) fn(b, w);
    } catch (...) {
      std::lock_guard<std::mutex> lock(error_mutex);
      if (!error) error = std::current_exception();
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (int w = 1; w < workers; ++w) pool.emplace_back(guarded, w);
  guarded(0);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

inline int argmax_row(const double* p, int c) {
  int best = 0;
  for (int j = 1; j < c; ++j)
    if (p[j] > p[best]) best = j;
  return best;
}

}  // namespace detail

inline EvalResult evaluate(const ModelParams& params, const ShiftMatrix& s,
                           const NeighborhoodTable& tbl, const Dataset& data,
                           int threads = 1) {
  if (data.samples.empty()) throw ValidationError("evaluate: empty dataset");
  const int n = static_cast<int>(data.samples.size());
  std::vector<double> losses(n);
  std::vector<std::uint8_t> correct(n);
  std::vector<ModelCache> caches(std::max(1, std::min(threads, n)));

  detail::parallel_samples(n, threads, [&](int b, int worker) {
    SignalBatch x(1, 1, data.n);
    std::copy(data.samples[b].signal.begin(), data.samples[b].signal.end(), x.slice(0, 0));
    DenseMatrix probs = model_forward(params, s, tbl, x, caches[worker]);
    const int label = data.samples[b].label;
    if (label < 0 || label >= probs.cols())
      throw ValidationError("evaluate: label out of range");
    losses[b] = -std::log(std::max(probs(0, label), 1e-12));
    correct[b] = detail::argmax_row(probs.row(0), probs.cols()) == label;
  });

  EvalResult r;
  long hits = 0;
  for (int b = 0; b < n; ++b) {
    r.loss += losses[b];
    hits += correct[b];
  }
  r.loss /= n;
  r.accuracy = static_cast<double>(hits) / n;
  return r;
}

namespace detail {

// Accumulates sample gradients in sample order; the result is bit-identical
// for any worker count.
inline void reduce_gradients(ModelGradients& total, const ModelGradients& g) {
  for (std::size_t i = 0; i < total.grad_h.size(); ++i) total.grad_h[i] += g.grad_h[i];
  for (std::size_t i = 0; i < total.grad_omega.size(); ++i)
    total.grad_omega[i] += g.grad_omega[i];
  auto& tw = total.grad_weight.data();
  const auto& gw = g.grad_weight.data();
  for (std::size_t i = 0; i < tw.size(); ++i) tw[i] += gw[i];
  for (std::size_t i = 0; i < total.grad_bias.size(); ++i) total.grad_bias[i] += g.grad_bias[i];
}

inline void scale_gradients(ModelGradients& g, double c) {
  for (double& v : g.grad_h) v *= c;
  for (double& v : g.grad_omega) v *= c;
  for (double& v : g.grad_weight.data()) v *= c;
  for (double& v : g.grad_bias) v *= c;
}

inline ModelGradients zero_gradients(const ModelParams& p) {
  ModelGradients g;
  g.grad_h.assign(p.filter.h.size(), 0.0);
  if (p.activation.kind == ActivationKind::DynamicMedian)
    g.grad_omega.assign(p.median.omega.size(), 0.0);
  g.grad_weight = DenseMatrix(p.readout.classes, p.readout.in_dim);
  g.grad_bias.assign(p.readout.bias.size(), 0.0);
  return g;
}

}  // namespace detail

// Mini-batch ADAM training. Deterministic for a fixed seed: seeded shuffling
// per epoch, sample-ordered gradient reduction, serial optimizer state.
inline TrainReport train(ModelParams& params, const ShiftMatrix& s,
                         const NeighborhoodTable& tbl, const Dataset& data,
                         const TrainConfig& cfg) {
  if (data.samples.empty()) throw ValidationError("train: empty dataset");
  if (cfg.epochs < 1) throw ValidationError("train: epochs must be positive");
  if (cfg.batch_size < 1) throw ValidationError("train: batch_size must be positive");

  Dataset train_set = data;
  Dataset val_set;
  bool has_val = cfg.val_fraction > 0.0;
  if (has_val) {
    auto parts = split(data, 1.0 - cfg.val_fraction, mix_seed(cfg.seed, 0x76a1));
    train_set = std::move(parts.first);
    val_set = std::move(parts.second);
  }

  AdamState adam;
  adam.learning_rate = cfg.learning_rate;
  adam.beta1 = cfg.beta1;
  adam.beta2 = cfg.beta2;
  adam.epsilon = cfg.epsilon;
  auto param_refs = trainable_tensors(params);
  adam.init(param_refs);

  const int n = static_cast<int>(train_set.samples.size());
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng shuffle_rng(mix_seed(cfg.seed, 0x5481));

  const int workers = std::max(1, cfg.threads);
  std::vector<ModelCache> caches(workers);
  std::vector<double> sample_loss(cfg.batch_size);
  std::vector<ModelGradients> sample_grads(cfg.batch_size);

  TrainReport report;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    shuffle_rng.shuffle(order);

    double epoch_loss = 0.0;
    for (int start = 0; start < n; start += cfg.batch_size) {
      const int bsz = std::min(cfg.batch_size, n - start);  // last partial batch kept

      detail::parallel_samples(bsz, workers, [&](int b, int worker) {
        const Sample& smp = train_set.samples[order[start + b]];
        SignalBatch x(1, 1, train_set.n);
        std::copy(smp.signal.begin(), smp.signal.end(), x.slice(0, 0));
        const int label[1] = {smp.label};
        BatchResult r = model_loss_and_gradients(params, s, tbl, x, label, caches[worker]);
        sample_loss[b] = r.loss;
        sample_grads[b] = std::move(r.grads);
      });

      ModelGradients batch_grads = detail::zero_gradients(params);
      double batch_loss = 0.0;
      for (int b = 0; b < bsz; ++b) {
        batch_loss += sample_loss[b];
        detail::reduce_gradients(batch_grads, sample_grads[b]);
      }
      batch_loss /= bsz;
      detail::scale_gradients(batch_grads, 1.0 / bsz);
      epoch_loss += batch_loss * bsz;

      if (!std::isfinite(batch_loss))
        throw NumericalError("train: loss diverged at epoch " + std::to_string(epoch));
      try {
        adam_step(adam, param_refs, gradient_tensors(params, batch_grads));
      } catch (const NumericalError& e) {
        throw NumericalError("train: epoch " + std::to_string(epoch) + ": " + e.what());
      }
    }
    report.train_loss.push_back(epoch_loss / n);

    if (has_val) {
      EvalResult ev = evaluate(params, s, tbl, val_set, cfg.threads);
      report.val_loss.push_back(ev.loss);
      report.val_acc.push_back(ev.accuracy);
    } else {
      report.val_loss.push_back(std::numeric_limits<double>::quiet_NaN());
      report.val_acc.push_back(std::numeric_limits<double>::quiet_NaN());
    }
    report.seconds.push_back(
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  report.final_params = params;
  return report;
}

}  // namespace medgnn
