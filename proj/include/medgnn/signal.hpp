#pragma once

#include <cstddef>
#include <vector>

#include "medgnn/common.hpp"

namespace medgnn {

// Batch of multi-feature graph signals, laid out [batch][feature][node].
struct SignalBatch {
  int batch = 0;
  int features = 0;
  int nodes = 0;
  std::vector<double> values;

  SignalBatch() = default;
  SignalBatch(int b, int f, int n)
      : batch(b), features(f), nodes(n),
        values(static_cast<std::size_t>(b) * f * n, 0.0) {}

  std::size_t index(int b, int f, int n) const {
    return (static_cast<std::size_t>(b) * features + f) * nodes + n;
  }
  double& at(int b, int f, int n) { return values[index(b, f, n)]; }
  double at(int b, int f, int n) const { return values[index(b, f, n)]; }

  // Contiguous node slice for one (sample, feature).
  double* slice(int b, int f) { return values.data() + index(b, f, 0); }
  const double* slice(int b, int f) const { return values.data() + index(b, f, 0); }

  // Contiguous feature-major flattening of one sample (length features*nodes).
  const double* sample(int b) const { return values.data() + index(b, 0, 0); }

  bool same_shape(const SignalBatch& o) const {
    return batch == o.batch && features == o.features && nodes == o.nodes;
  }
};

inline void require_finite(const SignalBatch& x, const char* what) {
  if (!all_finite(x.values))
    throw NumericalError(std::string(what) + ": non-finite signal value");
}

}  // namespace medgnn
