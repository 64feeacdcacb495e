#pragma once

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "medgnn/common.hpp"
#include "medgnn/signal.hpp"

namespace medgnn {

struct Sample {
  std::vector<double> signal;
  int label = 0;
};

// Labeled graph signals. class_map names what each dense label id stands for
// (a source node id, an author tag); it is annotation, not serialized state.
struct Dataset {
  int n = 0;        // signal dimension, one value per node
  int classes = 0;  // labels are dense in [0, classes)
  std::uint64_t seed = 0;
  std::vector<Sample> samples;
  std::vector<std::string> class_map;

  void validate() const {
    for (const Sample& s : samples) {
      if (static_cast<int>(s.signal.size()) != n)
        throw ValidationError("dataset: signal dimension mismatch");
      if (s.label < 0 || s.label >= classes)
        throw ValidationError("dataset: label out of range");
    }
  }
};

inline void save_dataset(std::ostream& out, const Dataset& d) {
  out << d.n << ' ' << d.classes << ' ' << d.samples.size() << ' ' << d.seed << '\n';
  for (const Sample& s : d.samples) {
    out << s.label;
    for (double v : s.signal) out << ' ' << format_double(v);
    out << '\n';
  }
}

inline Dataset load_dataset(std::istream& in) {
  Dataset d;
  std::size_t count = 0;
  if (!(in >> d.n >> d.classes >> count >> d.seed))
    throw ParseError("dataset: malformed header");
  if (d.n < 1 || d.classes < 1)
    throw ParseError("dataset: non-positive dimensions in header");
  d.samples.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    Sample& s = d.samples[i];
    if (!(in >> s.label))
      throw ParseError("dataset: truncated at sample " + std::to_string(i));
    s.signal.resize(d.n);
    for (int j = 0; j < d.n; ++j)
      if (!(in >> s.signal[j]))
        throw ParseError("dataset: truncated at sample " + std::to_string(i));
  }
  d.validate();
  return d;
}

inline std::string serialize_dataset(const Dataset& d) {
  std::ostringstream ss;
  save_dataset(ss, d);
  return ss.str();
}

inline std::uint64_t dataset_hash(const Dataset& d) {
  return fnv1a64(serialize_dataset(d));
}

// Gathers the given samples into a single-feature batch plus label vector.
inline std::pair<SignalBatch, std::vector<int>> to_batch(const Dataset& d,
                                                         const std::vector<int>& indices) {
  SignalBatch x(static_cast<int>(indices.size()), 1, d.n);
  std::vector<int> labels(indices.size());
  for (std::size_t b = 0; b < indices.size(); ++b) {
    const Sample& s = d.samples[indices[b]];
    std::copy(s.signal.begin(), s.signal.end(), x.slice(static_cast<int>(b), 0));
    labels[b] = s.label;
  }
  return {std::move(x), std::move(labels)};
}

// Seeded stratified split over sample indices. Per class, the test side gets
// floor((1 - train_fraction) * count), so per-class counts deviate from exact
// proportionality by less than one sample.
inline std::pair<std::vector<int>, std::vector<int>> split_indices(
    const std::vector<int>& labels, int classes, double train_fraction,
    std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw ValidationError("split: train_fraction must be in (0, 1)");
  std::vector<std::vector<int>> by_class(classes);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= classes)
      throw ValidationError("split: label out of range");
    by_class[labels[i]].push_back(static_cast<int>(i));
  }
  std::vector<int> train_idx, test_idx;
  Rng rng(seed);
  for (int c = 0; c < classes; ++c) {
    auto& idx = by_class[c];
    rng.shuffle(idx);
    const int n_c = static_cast<int>(idx.size());
    // Epsilon absorbs representation error, e.g. (1 - 0.8) * 5 = 0.999...
    const int n_test = static_cast<int>(std::floor((1.0 - train_fraction) * n_c + 1e-9));
    for (int i = 0; i < n_c; ++i)
      (i < n_c - n_test ? train_idx : test_idx).push_back(idx[i]);
  }
  if (train_idx.empty() || test_idx.empty())
    throw ValidationError("split: degenerate split sizes (" +
                          std::to_string(train_idx.size()) + " train, " +
                          std::to_string(test_idx.size()) + " test)");
  return {std::move(train_idx), std::move(test_idx)};
}

inline std::pair<Dataset, Dataset> split(const Dataset& d, double train_fraction,
                                         std::uint64_t seed) {
  d.validate();
  std::vector<int> labels(d.samples.size());
  for (std::size_t i = 0; i < d.samples.size(); ++i) labels[i] = d.samples[i].label;
  auto [train_idx, test_idx] = split_indices(labels, d.classes, train_fraction, seed);

  Dataset train, test;
  train.n = test.n = d.n;
  train.classes = test.classes = d.classes;
  train.seed = test.seed = seed;
  train.class_map = test.class_map = d.class_map;
  for (int i : train_idx) train.samples.push_back(d.samples[i]);
  for (int i : test_idx) test.samples.push_back(d.samples[i]);
  return {std::move(train), std::move(test)};
}

}  // namespace medgnn
