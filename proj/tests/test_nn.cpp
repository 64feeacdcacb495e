#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numeric>

#include "helpers.hpp"
#include "medgnn/activations.hpp"
#include "medgnn/filter.hpp"
#include "medgnn/model.hpp"
#include "medgnn/readout.hpp"
#include "medgnn/spectral.hpp"

using namespace medgnn;
using testutil::grad_close;
using testutil::random_batch;
using testutil::random_graph;

namespace {

Graph path3() { return make_graph(3, {{0, 1, 1.0}, {1, 2, 1.0}}, false); }

SignalBatch single(const std::vector<double>& values) {
  SignalBatch x(1, 1, static_cast<int>(values.size()));
  std::copy(values.begin(), values.end(), x.values.begin());
  return x;
}

std::vector<double> row(const SignalBatch& x, int b = 0, int f = 0) {
  return std::vector<double>(x.slice(b, f), x.slice(b, f) + x.nodes);
}

// Reference filter output via explicit dense powers of S.
SignalBatch filter_oracle(const FilterBankParams& p, const ShiftMatrix& s,
                          const SignalBatch& x) {
  std::vector<ShiftMatrix> powers{ShiftMatrix::identity(s.rows())};
  for (int k = 1; k < p.taps; ++k) {
    ShiftMatrix next(s.rows(), s.rows());
    const ShiftMatrix& prev = powers.back();
    for (int i = 0; i < s.rows(); ++i)
      for (int j = 0; j < s.rows(); ++j) {
        double acc = 0.0;
        for (int m = 0; m < s.rows(); ++m) acc += s(i, m) * prev(m, j);
        next(i, j) = acc;
      }
    powers.push_back(std::move(next));
  }
  SignalBatch out(x.batch, p.f_out, x.nodes);
  std::vector<double> shifted(x.nodes);
  for (int b = 0; b < x.batch; ++b)
    for (int g = 0; g < p.f_out; ++g)
      for (int f = 0; f < p.f_in; ++f)
        for (int k = 0; k < p.taps; ++k) {
          powers[k].matvec(x.slice(b, f), shifted.data());
          for (int i = 0; i < x.nodes; ++i)
            out.at(b, g, i) += p.coeff(g, f, k) * shifted[i];
        }
  return out;
}

}  // namespace

TEST_CASE("filter with a single unit tap is the identity") {
  FilterBankParams p(1, 1, 1);
  p.coeff(0, 0, 0) = 1.0;
  ShiftMatrix s = adjacency(random_graph(5, 0.5, false, 11));
  SignalBatch x = random_batch(2, 1, 5, 21);
  FilterCache cache;
  SignalBatch out = filter_forward(p, s, x, cache);
  CHECK(out.values == x.values);

  SignalBatch grad_out = random_batch(2, 1, 5, 22);
  FilterGradients g = filter_backward(p, s, cache, grad_out);
  CHECK(g.grad_x.values == grad_out.values);
  // k = 0 tap gradient is the plain inner product with the input.
  double expected = 0.0;
  for (std::size_t i = 0; i < x.values.size(); ++i) expected += x.values[i] * grad_out.values[i];
  CHECK_THAT(g.grad_h[0], Catch::Matchers::WithinRel(expected, 1e-12));
}

TEST_CASE("filter shift moves an impulse from the star center to the leaves") {
  Graph star = make_graph(4, {{0, 1, 1.0}, {0, 2, 1.0}, {0, 3, 1.0}}, false);
  ShiftMatrix s = binary_gso(star);
  FilterBankParams p(1, 1, 2);
  p.coeff(0, 0, 1) = 1.0;  // h = [0, 1]
  SignalBatch x = single({1.0, 0.0, 0.0, 0.0});
  FilterCache cache;
  SignalBatch out = filter_forward(p, s, x, cache);
  CHECK(row(out) == std::vector<double>{0.0, 1.0, 1.0, 1.0});
}

TEST_CASE("filter agrees with the dense matrix-power oracle") {
  for (int trial = 0; trial < 6; ++trial) {
    Graph g = random_graph(7, 0.4, trial % 2 == 1, 800 + trial);
    ShiftMatrix s = adjacency(g);
    FilterBankParams p(2, 3, 4);
    Rng rng(99 + trial);
    for (double& v : p.h) v = rng.uniform(-1.0, 1.0);
    SignalBatch x = random_batch(2, 2, 7, 500 + trial);
    FilterCache cache;
    SignalBatch out = filter_forward(p, s, x, cache);
    SignalBatch expected = filter_oracle(p, s, x);
    for (std::size_t i = 0; i < out.values.size(); ++i)
      CHECK_THAT(out.values[i], Catch::Matchers::WithinAbs(expected.values[i], 1e-10));
  }
}

TEST_CASE("filter bank has 160 parameters in the 32x5 configuration") {
  FilterBankParams p(1, 32, 5);
  CHECK(p.param_count() == 160);
}

TEST_CASE("filter gradients match finite differences") {
  Graph g = random_graph(6, 0.5, false, 42);
  ShiftMatrix s = adjacency(g);
  FilterBankParams p(2, 2, 3);
  Rng rng(7);
  for (double& v : p.h) v = rng.uniform(-1.0, 1.0);
  SignalBatch x = random_batch(2, 2, 6, 77);
  SignalBatch weights = random_batch(2, 2, 6, 78);  // fixed linear loss weights

  auto loss = [&]() {
    FilterCache cache;
    SignalBatch out = filter_forward(p, s, x, cache);
    double acc = 0.0;
    for (std::size_t i = 0; i < out.values.size(); ++i) acc += out.values[i] * weights.values[i];
    return acc;
  };

  FilterCache cache;
  filter_forward(p, s, x, cache);
  FilterGradients analytic = filter_backward(p, s, cache, weights);
  CHECK(testutil::check_gradient_tensor(loss, p.h.data(), analytic.grad_h.data(),
                                        analytic.grad_h.size(), 1e-6, 1e-6) == 0);
  CHECK(testutil::check_gradient_tensor(loss, x.values.data(), analytic.grad_x.values.data(),
                                        analytic.grad_x.values.size(), 1e-6, 1e-6) == 0);
}

TEST_CASE("filter rejects mismatched shapes and stale caches") {
  FilterBankParams p(1, 1, 2);
  ShiftMatrix s(3, 3);
  s(0, 1) = 1.0;
  SignalBatch wrong_features(1, 2, 3);
  FilterCache cache;
  CHECK_THROWS_AS(filter_forward(p, s, wrong_features, cache), ShapeError);
  CHECK_THROWS_AS(filter_backward(p, s, cache, SignalBatch(1, 1, 3)), ShapeError);

  SignalBatch x(1, 1, 3);
  filter_forward(p, s, x, cache);
  CHECK_THROWS_AS(filter_backward(p, s, cache, SignalBatch(2, 1, 3)), ShapeError);
}

TEST_CASE("relu forward masks negatives, backward masks kinks") {
  ReluCache cache;
  SignalBatch out = relu_forward(single({-1.0, 0.0, 2.0}), cache);
  CHECK(row(out) == std::vector<double>{0.0, 0.0, 2.0});

  SignalBatch pos = single({0.5, 1.0, 3.0});
  ReluCache c2;
  CHECK(relu_forward(pos, c2).values == pos.values);

  ReluCache c3;
  relu_forward(single({-1.0, 2.0}), c3);
  SignalBatch grad = relu_backward(c3, single({5.0, 5.0}));
  CHECK(row(grad) == std::vector<double>{0.0, 5.0});
}

TEST_CASE("static median on a path applies the upper-median rule") {
  Graph p = path3();
  NeighborhoodTable tbl = build_neighborhood_table(p, 1);
  StaticMedianCache cache;
  SignalBatch out = static_median_forward(single({1.0, 2.0, 3.0}), tbl, 1, cache);
  CHECK(row(out) == std::vector<double>{2.0, 2.0, 3.0});
  CHECK(cache.selected[0] == 1);
  CHECK(cache.selected[1] == 1);
  CHECK(cache.selected[2] == 2);

  // hop 0 is the identity
  StaticMedianCache c0;
  SignalBatch id = static_median_forward(single({3.0, -1.0, 0.5}), tbl, 0, c0);
  CHECK(row(id) == std::vector<double>{3.0, -1.0, 0.5});

  // constant signals are fixed points
  StaticMedianCache c1;
  SignalBatch constant = static_median_forward(single({4.2, 4.2, 4.2}), tbl, 1, c1);
  CHECK(row(constant) == std::vector<double>{4.2, 4.2, 4.2});
}

TEST_CASE("static median ties route to the smallest node id") {
  Graph p = path3();
  NeighborhoodTable tbl = build_neighborhood_table(p, 1);
  StaticMedianCache cache;
  static_median_forward(single({5.0, 5.0, 1.0}), tbl, 1, cache);
  CHECK(cache.selected[0] == 0);  // members {0, 1} hold equal values
}

TEST_CASE("static median agrees with the full-sort oracle") {
  for (int trial = 0; trial < 40; ++trial) {
    Graph g = random_graph(3 + trial % 28, 0.2, trial % 2 == 1, 1300 + trial);
    const int max_hop = 3;
    NeighborhoodTable tbl = build_neighborhood_table(g, max_hop);
    SignalBatch x = random_batch(2, 2, g.n_nodes, 260 + trial);
    for (int r = 0; r <= max_hop; ++r) {
      StaticMedianCache cache;
      SignalBatch out = static_median_forward(x, tbl, r, cache);
      for (int b = 0; b < x.batch; ++b)
        for (int f = 0; f < x.features; ++f)
          for (int i = 0; i < g.n_nodes; ++i) {
            std::vector<double> window;
            for (int j : tbl.members(i, r)) window.push_back(x.at(b, f, j));
            REQUIRE(out.at(b, f, i) == testutil::sort_median_oracle(window));
            // The cached selection is a member holding the median value.
            const int sel = cache.selected[cache.index(b, f, i)];
            auto members = tbl.members(i, r);
            REQUIRE(std::binary_search(members.begin(), members.end(), sel));
            REQUIRE(x.at(b, f, sel) == out.at(b, f, i));
          }
    }
  }
}

TEST_CASE("static median backward routes gradients to selected members") {
  Graph p = path3();
  NeighborhoodTable tbl = build_neighborhood_table(p, 1);

  StaticMedianCache c0;
  SignalBatch x = single({1.0, 2.0, 3.0});
  static_median_forward(x, tbl, 0, c0);
  SignalBatch g0 = static_median_backward(tbl, 0, c0, single({7.0, 8.0, 9.0}));
  CHECK(row(g0) == std::vector<double>{7.0, 8.0, 9.0});

  StaticMedianCache c1;
  static_median_forward(x, tbl, 1, c1);
  SignalBatch g1 = static_median_backward(tbl, 1, c1, single({10.0, 20.0, 30.0}));
  CHECK(row(g1) == std::vector<double>{0.0, 30.0, 30.0});

  CHECK_THROWS_AS(static_median_backward(tbl, 0, c1, single({1.0, 1.0, 1.0})), ShapeError);
}

TEST_CASE("static median gradient matches finite differences at non-tie points") {
  Graph g = random_graph(8, 0.35, false, 5150);
  NeighborhoodTable tbl = build_neighborhood_table(g, 2);
  SignalBatch x = random_batch(1, 1, 8, 9001);
  SignalBatch weights = random_batch(1, 1, 8, 9002);
  const int r = 2;

  auto loss = [&]() {
    StaticMedianCache cache;
    SignalBatch out = static_median_forward(x, tbl, r, cache);
    double acc = 0.0;
    for (std::size_t i = 0; i < out.values.size(); ++i) acc += out.values[i] * weights.values[i];
    return acc;
  };
  StaticMedianCache cache;
  static_median_forward(x, tbl, r, cache);
  SignalBatch analytic = static_median_backward(tbl, r, cache, weights);
  CHECK(testutil::check_gradient_tensor(loss, x.values.data(), analytic.values.data(),
                                        analytic.values.size(), 1e-6, 1e-6) == 0);
}

TEST_CASE("dynamic median basics on the path graph") {
  Graph p = path3();
  NeighborhoodTable tbl = build_neighborhood_table(p, 1);
  SignalBatch x = single({1.0, 2.0, 3.0});

  DynamicMedianParams identity(1);  // omega = (1, 0)
  DynamicMedianCache c1;
  CHECK(dynamic_median_forward(x, tbl, identity, c1).values == x.values);

  DynamicMedianParams hop1(1);
  hop1.omega = {0.0, 1.0};
  DynamicMedianCache c2;
  CHECK(row(dynamic_median_forward(x, tbl, hop1, c2)) == std::vector<double>{2.0, 2.0, 3.0});

  DynamicMedianParams blend(1);
  blend.omega = {0.5, 0.5};
  DynamicMedianCache c3;
  CHECK(row(dynamic_median_forward(x, tbl, blend, c3)) == std::vector<double>{1.5, 2.0, 3.0});
}

TEST_CASE("dynamic median is linear in omega with identical selections") {
  Graph g = random_graph(10, 0.3, false, 61);
  NeighborhoodTable tbl = build_neighborhood_table(g, 2);
  SignalBatch x = random_batch(2, 3, 10, 62);
  Rng rng(63);
  DynamicMedianParams w1(2), w2(2), sum(2);
  for (int r = 0; r <= 2; ++r) {
    w1.omega[r] = rng.uniform(-1.0, 1.0);
    w2.omega[r] = rng.uniform(-1.0, 1.0);
    sum.omega[r] = w1.omega[r] + w2.omega[r];
  }
  DynamicMedianCache c1, c2, cs;
  SignalBatch y1 = dynamic_median_forward(x, tbl, w1, c1);
  SignalBatch y2 = dynamic_median_forward(x, tbl, w2, c2);
  SignalBatch ys = dynamic_median_forward(x, tbl, sum, cs);
  CHECK(cs.selected == c1.selected);
  CHECK(cs.selected == c2.selected);
  for (std::size_t i = 0; i < ys.values.size(); ++i)
    CHECK_THAT(ys.values[i], Catch::Matchers::WithinAbs(y1.values[i] + y2.values[i], 1e-12));
}

TEST_CASE("dynamic median backward computes exact omega gradients") {
  Graph p = path3();
  NeighborhoodTable tbl = build_neighborhood_table(p, 1);
  DynamicMedianParams params(1);
  params.omega = {0.25, 0.75};
  SignalBatch x = single({1.0, 2.0, 3.0});
  DynamicMedianCache cache;
  dynamic_median_forward(x, tbl, params, cache);

  DynamicMedianGradients zero = dynamic_median_backward(tbl, params, cache,
                                                        single({0.0, 0.0, 0.0}));
  CHECK(zero.grad_omega == std::vector<double>{0.0, 0.0});

  // Single-node graph, reach 0: plain scalar chain rule.
  Graph lone = make_graph(1, {}, false);
  NeighborhoodTable ltbl = build_neighborhood_table(lone, 0);
  DynamicMedianParams lp(0);
  lp.omega = {0.4};
  SignalBatch lx(1, 1, 1);
  lx.values[0] = 3.0;
  DynamicMedianCache lcache;
  dynamic_median_forward(lx, ltbl, lp, lcache);
  SignalBatch lgrad(1, 1, 1);
  lgrad.values[0] = 2.0;
  DynamicMedianGradients lg = dynamic_median_backward(ltbl, lp, lcache, lgrad);
  CHECK(lg.grad_omega == std::vector<double>{6.0});
  CHECK(lg.grad_x.values == std::vector<double>{0.8});
}

TEST_CASE("dynamic median gradients match finite differences at non-tie points") {
  Graph g = random_graph(8, 0.4, false, 5391);
  NeighborhoodTable tbl = build_neighborhood_table(g, 2);
  SignalBatch x = random_batch(1, 2, 8, 777);
  SignalBatch weights = random_batch(1, 2, 8, 778);
  DynamicMedianParams params(2);
  params.omega = {0.3, -0.6, 0.9};

  auto loss = [&]() {
    DynamicMedianCache cache;
    SignalBatch out = dynamic_median_forward(x, tbl, params, cache);
    double acc = 0.0;
    for (std::size_t i = 0; i < out.values.size(); ++i) acc += out.values[i] * weights.values[i];
    return acc;
  };
  DynamicMedianCache cache;
  dynamic_median_forward(x, tbl, params, cache);
  DynamicMedianGradients analytic = dynamic_median_backward(tbl, params, cache, weights);
  CHECK(testutil::check_gradient_tensor(loss, params.omega.data(), analytic.grad_omega.data(),
                                        analytic.grad_omega.size(), 1e-6, 1e-6) == 0);
  CHECK(testutil::check_gradient_tensor(loss, x.values.data(), analytic.grad_x.values.data(),
                                        analytic.grad_x.values.size(), 1e-6, 1e-6) == 0);
}

TEST_CASE("median activations are monotone and positive-affine equivariant") {
  Graph g = random_graph(12, 0.3, false, 3100);
  NeighborhoodTable tbl = build_neighborhood_table(g, 2);
  Rng rng(3200);
  for (int trial = 0; trial < 10; ++trial) {
    SignalBatch x = random_batch(1, 1, 12, 3300 + trial);
    SignalBatch y = x;
    for (double& v : y.values) v += rng.uniform(0.0, 1.5);
    for (int r = 1; r <= 2; ++r) {
      StaticMedianCache cx, cy;
      SignalBatch mx = static_median_forward(x, tbl, r, cx);
      SignalBatch my = static_median_forward(y, tbl, r, cy);
      for (std::size_t i = 0; i < mx.values.size(); ++i) CHECK(mx.values[i] <= my.values[i]);

      const double a = rng.uniform(0.1, 3.0);
      const double b = rng.uniform(-2.0, 2.0);
      SignalBatch ax = x;
      for (double& v : ax.values) v = a * v + b;
      StaticMedianCache ca;
      SignalBatch max_ = static_median_forward(ax, tbl, r, ca);
      for (std::size_t i = 0; i < mx.values.size(); ++i)
        CHECK(max_.values[i] == a * mx.values[i] + b);
    }
  }
}

TEST_CASE("median activations commute with node relabeling") {
  Rng rng(4100);
  for (int trial = 0; trial < 5; ++trial) {
    Graph g = random_graph(9, 0.35, trial % 2 == 1, 4200 + trial);
    std::vector<int> perm(g.n_nodes);
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(perm);
    Graph pg = testutil::permute_graph(g, perm);
    NeighborhoodTable tbl = build_neighborhood_table(g, 2);
    NeighborhoodTable ptbl = build_neighborhood_table(pg, 2);

    SignalBatch x = random_batch(1, 1, 9, 4300 + trial);
    SignalBatch px(1, 1, 9);
    for (int i = 0; i < 9; ++i) px.at(0, 0, perm[i]) = x.at(0, 0, i);

    StaticMedianCache c1, c2;
    SignalBatch mx = static_median_forward(x, tbl, 2, c1);
    SignalBatch mpx = static_median_forward(px, ptbl, 2, c2);
    for (int i = 0; i < 9; ++i) REQUIRE(mpx.at(0, 0, perm[i]) == mx.at(0, 0, i));

    DynamicMedianParams dp(2);
    dp.omega = {0.2, 0.5, -0.3};
    DynamicMedianCache d1, d2;
    SignalBatch dx = dynamic_median_forward(x, tbl, dp, d1);
    SignalBatch dpx = dynamic_median_forward(px, ptbl, dp, d2);
    for (int i = 0; i < 9; ++i)
      REQUIRE_THAT(dpx.at(0, 0, perm[i]), Catch::Matchers::WithinAbs(dx.at(0, 0, i), 1e-14));
  }
}

TEST_CASE("median activation is nonlinear in the signal for r > 0") {
  Graph p = path3();
  NeighborhoodTable tbl = build_neighborhood_table(p, 1);
  SignalBatch x = single({1.0, 0.0, 0.0});
  SignalBatch y = single({0.0, 0.0, 1.0});
  SignalBatch xy = single({1.0, 0.0, 1.0});
  StaticMedianCache c1, c2, c3;
  SignalBatch mx = static_median_forward(x, tbl, 1, c1);
  SignalBatch my = static_median_forward(y, tbl, 1, c2);
  SignalBatch mxy = static_median_forward(xy, tbl, 1, c3);
  bool differs = false;
  for (std::size_t i = 0; i < mx.values.size(); ++i)
    differs = differs || mxy.values[i] != mx.values[i] + my.values[i];
  CHECK(differs);
}

TEST_CASE("readout softmax basics") {
  ReadoutParams p(3, 4);  // zero weights and bias
  SignalBatch x = random_batch(2, 1, 3, 950);
  ReadoutCache cache;
  DenseMatrix probs = readout_forward(p, x, cache);
  for (int b = 0; b < 2; ++b)
    for (int c = 0; c < 4; ++c)
      CHECK_THAT(probs(b, c), Catch::Matchers::WithinAbs(0.25, 1e-15));

  double big[2] = {500.0, 0.0};
  double out[2];
  softmax_row(big, out, 2);
  CHECK_THAT(out[0], Catch::Matchers::WithinAbs(1.0, 1e-12));

  double logits[3] = {1.0, 2.0, 3.0};
  double soft[3];
  softmax_row(logits, soft, 3);
  // closed-form softmax oracle
  const double denom = std::exp(1.0) + std::exp(2.0) + std::exp(3.0);
  for (int c = 0; c < 3; ++c)
    CHECK_THAT(soft[c], Catch::Matchers::WithinAbs(std::exp(logits[c]) / denom, 1e-14));
  CHECK_THAT(soft[0], Catch::Matchers::WithinAbs(0.0900, 5e-5));
  CHECK_THAT(soft[1], Catch::Matchers::WithinAbs(0.2447, 5e-5));
  CHECK_THAT(soft[2], Catch::Matchers::WithinAbs(0.6652, 5e-5));
}

TEST_CASE("softmax rows sum to one") {
  Rng rng(888);
  for (int trial = 0; trial < 50; ++trial) {
    const int c = 2 + static_cast<int>(rng.uniform_index(6));
    std::vector<double> logits(c), probs(c);
    for (double& v : logits) v = rng.uniform(-40.0, 40.0);
    softmax_row(logits.data(), probs.data(), c);
    CHECK_THAT(std::accumulate(probs.begin(), probs.end(), 0.0),
               Catch::Matchers::WithinAbs(1.0, 1e-12));
  }
}

TEST_CASE("cross entropy values and gradients") {
  DenseMatrix perfect(1, 2);
  perfect(0, 0) = 1.0;
  perfect(0, 1) = 0.0;
  const int label0[1] = {0};
  CHECK(cross_entropy(perfect, label0).loss == 0.0);

  DenseMatrix uniform(1, 5);
  for (int c = 0; c < 5; ++c) uniform(0, c) = 0.2;
  CHECK_THAT(cross_entropy(uniform, label0).loss,
             Catch::Matchers::WithinRel(std::log(5.0), 1e-12));

  DenseMatrix p(1, 2);
  p(0, 0) = 0.7;
  p(0, 1) = 0.3;
  CrossEntropyResult r = cross_entropy(p, label0);
  CHECK_THAT(r.loss, Catch::Matchers::WithinAbs(0.356674943938732, 1e-12));
  CHECK_THAT(r.grad_logits(0, 0), Catch::Matchers::WithinAbs(-0.3, 1e-12));
  CHECK_THAT(r.grad_logits(0, 1), Catch::Matchers::WithinAbs(0.3, 1e-12));

  const int bad[1] = {7};
  CHECK_THROWS_AS(cross_entropy(p, bad), ValidationError);
}

TEST_CASE("softmax cross-entropy gradient matches finite differences and sums to zero") {
  Rng rng(3141);
  std::vector<double> logits(4);
  for (double& v : logits) v = rng.uniform(-2.0, 2.0);
  std::vector<int> labels = {2};

  auto loss = [&]() {
    DenseMatrix probs(1, 4);
    softmax_row(logits.data(), probs.row(0), 4);
    return cross_entropy(probs, labels).loss;
  };
  DenseMatrix probs(1, 4);
  softmax_row(logits.data(), probs.row(0), 4);
  CrossEntropyResult r = cross_entropy(probs, labels);
  double sum = 0.0;
  for (int c = 0; c < 4; ++c) {
    sum += r.grad_logits(0, c);
    const double numeric = testutil::central_difference(loss, &logits[c]);
    CHECK(grad_close(r.grad_logits(0, c), numeric, 1e-6));
  }
  CHECK_THAT(sum, Catch::Matchers::WithinAbs(0.0, 1e-12));
}

TEST_CASE("readout gradients match finite differences") {
  ReadoutParams p(6, 3);
  Rng rng(515);
  for (double& v : p.weight.data()) v = rng.uniform(-1.0, 1.0);
  for (double& v : p.bias) v = rng.uniform(-1.0, 1.0);
  SignalBatch x = random_batch(2, 2, 3, 516);
  std::vector<int> labels = {1, 2};

  auto loss = [&]() {
    ReadoutCache cache;
    DenseMatrix probs = readout_forward(p, x, cache);
    return cross_entropy(probs, labels).loss;
  };
  ReadoutCache cache;
  DenseMatrix probs = readout_forward(p, x, cache);
  CrossEntropyResult ce = cross_entropy(probs, labels);
  ReadoutGradients g = readout_backward(p, cache, ce.grad_logits, 2, 3);

  CHECK(testutil::check_gradient_tensor(loss, p.weight.data().data(),
                                        g.grad_weight.data().data(),
                                        g.grad_weight.data().size()) == 0);
  CHECK(testutil::check_gradient_tensor(loss, p.bias.data(), g.grad_bias.data(),
                                        g.grad_bias.size()) == 0);
  CHECK(testutil::check_gradient_tensor(loss, x.values.data(), g.grad_x.values.data(),
                                        g.grad_x.values.size()) == 0);
}

TEST_CASE("conv layer parameter counts match the reference architecture") {
  auto count = [](const char* act) {
    ModelParams m = init_model(parse_activation(act), 1, 32, 5, 20, 5, 1);
    return m.conv_param_count();
  };
  CHECK(count("relu") == 160);
  CHECK(count("static-med:1") == 160);
  CHECK(count("dyn-med:1") == 162);
  CHECK(count("dyn-med:2") == 163);
}

TEST_CASE("zero model predicts the uniform distribution") {
  Graph g = random_graph(6, 0.5, false, 2700);
  ShiftMatrix s = normalized_adjacency(g);
  NeighborhoodTable tbl = build_neighborhood_table(g, 1);
  ModelParams m = init_model(parse_activation("dyn-med:1"), 1, 4, 3, 6, 5, 3);
  std::fill(m.filter.h.begin(), m.filter.h.end(), 0.0);
  std::fill(m.readout.weight.data().begin(), m.readout.weight.data().end(), 0.0);
  std::fill(m.readout.bias.begin(), m.readout.bias.end(), 0.0);

  SignalBatch x = random_batch(3, 1, 6, 2701);
  ModelCache cache;
  DenseMatrix probs = model_forward(m, s, tbl, x, cache);
  std::vector<int> labels = {0, 3, 4};
  for (int b = 0; b < 3; ++b)
    for (int c = 0; c < 5; ++c)
      CHECK_THAT(probs(b, c), Catch::Matchers::WithinAbs(0.2, 1e-15));
  CHECK_THAT(cross_entropy(probs, labels).loss,
             Catch::Matchers::WithinRel(std::log(5.0), 1e-12));
}

TEST_CASE("full model gradients match finite differences for every activation") {
  const char* activations[] = {"relu", "static-med:1", "dyn-med:2"};
  for (const char* act : activations) {
    testutil::FdSetup setup = testutil::make_non_tie_setup(parse_activation(act), fnv1a64(act));

    auto loss = [&]() {
      ModelCache cache;
      DenseMatrix probs = model_forward(setup.model, setup.shift, setup.table, setup.x, cache);
      return cross_entropy(probs, setup.labels).loss;
    };
    ModelCache cache;
    BatchResult r = model_loss_and_gradients(setup.model, setup.shift, setup.table, setup.x,
                                             setup.labels, cache);

    CHECK(testutil::check_gradient_tensor(loss, setup.model.filter.h.data(),
                                          r.grads.grad_h.data(), r.grads.grad_h.size()) == 0);
    if (setup.model.activation.kind == ActivationKind::DynamicMedian)
      CHECK(testutil::check_gradient_tensor(loss, setup.model.median.omega.data(),
                                            r.grads.grad_omega.data(),
                                            r.grads.grad_omega.size()) == 0);
    CHECK(testutil::check_gradient_tensor(loss, setup.model.readout.weight.data().data(),
                                          r.grads.grad_weight.data().data(),
                                          r.grads.grad_weight.data().size()) == 0);
    CHECK(testutil::check_gradient_tensor(loss, setup.model.readout.bias.data(),
                                          r.grads.grad_bias.data(),
                                          r.grads.grad_bias.size()) == 0);
  }
}

TEST_CASE("checkpoints round-trip every parameter exactly") {
  for (const char* act : {"relu", "static-med:2", "dyn-med:2"}) {
    ModelParams m = init_model(parse_activation(act), 1, 4, 3, 7, 4, 99);
    if (m.activation.kind == ActivationKind::DynamicMedian) m.median.omega = {0.1, -0.2, 0.3};
    std::stringstream ss;
    save_checkpoint(ss, m);
    ModelParams loaded = load_checkpoint(ss);
    CHECK(loaded.activation.kind == m.activation.kind);
    CHECK(loaded.activation.hops == m.activation.hops);
    CHECK(loaded.filter.h == m.filter.h);
    CHECK(loaded.median.omega == m.median.omega);
    CHECK(loaded.readout.weight.data() == m.readout.weight.data());
    CHECK(loaded.readout.bias == m.readout.bias);
  }

  std::stringstream bad("medgnn-checkpoint 9\n");
  CHECK_THROWS_AS(load_checkpoint(bad), ParseError);
}
