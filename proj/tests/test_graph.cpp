// Copyright 2026 The layercut Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <doctest.h>

#include <functional>

#include "layercut/graph.hpp"
#include "layercut/rng.hpp"

using namespace layercut;

namespace {

using G = Graph<double>;
using Id = G::Id;

Mat<double> random_mat(std::size_t r, std::size_t c, Rng& rng) {
  Mat<double> m(r, c);
  for (double& v : m.v) v = rng.normal();
  return m;
}

// Probes an op through the scalar loss(x) = sum(w .* op(x)) for fixed
// random weights w: reverse mode runs via backward_with_seed(out, w), the
// oracle is central finite differences on the same scalar.
void check_op(const std::vector<Mat<double>>& inputs,
              const std::function<Id(G&, const std::vector<Id>&)>& build,
              double tol = 1e-7) {
  G g(true);
  std::vector<Id> ids;
  for (const auto& m : inputs) ids.push_back(g.input(m));
  const Id out = build(g, ids);
  const Mat<double>& out_val = g.value(out);
  Rng wrng(777);
  Mat<double> w = random_mat(out_val.rows, out_val.cols, wrng);
  g.backward_with_seed(out, w);

  std::vector<Mat<double>> analytic;
  for (Id id : ids) analytic.push_back(g.grad(id));

  // central differences on scalar(w . build(inputs))
  const double h = 1e-6;
  auto loss_at = [&](const std::vector<Mat<double>>& xs) {
    G gg(false);
    std::vector<Id> xids;
    for (const auto& m : xs) xids.push_back(gg.input(m));
    const Mat<double>& y = gg.value(build(gg, xids));
    double acc = 0.0;
    for (std::size_t i = 0; i < y.v.size(); ++i) acc += y.v[i] * w.v[i];
    return acc;
  };
  for (std::size_t p = 0; p < inputs.size(); ++p) {
    std::vector<Mat<double>> xs = inputs;
    for (std::size_t i = 0; i < xs[p].v.size(); ++i) {
      const double saved = xs[p].v[i];
      xs[p].v[i] = saved + h;
      const double plus = loss_at(xs);
      xs[p].v[i] = saved - h;
      const double minus = loss_at(xs);
      xs[p].v[i] = saved;
      const double fd = (plus - minus) / (2.0 * h);
      const double ad = analytic[p].v[i];
      const double rel = std::abs(fd - ad) / std::max({std::abs(fd), std::abs(ad), 1.0});
      CHECK(rel < tol);
    }
  }
}

}  // namespace

TEST_SUITE_BEGIN("graph");

TEST_CASE("matmul gradients") {
  Rng rng(1);
  check_op({random_mat(3, 4, rng), random_mat(4, 2, rng)},
           [](G& g, const std::vector<Id>& v) { return g.matmul(v[0], v[1]); });
}

TEST_CASE("matmul_nt gradients") {
  Rng rng(2);
  check_op({random_mat(3, 4, rng), random_mat(5, 4, rng)},
           [](G& g, const std::vector<Id>& v) { return g.matmul_nt(v[0], v[1]); });
}

TEST_CASE("add and add_row gradients") {
  Rng rng(3);
  check_op({random_mat(3, 4, rng), random_mat(3, 4, rng)},
           [](G& g, const std::vector<Id>& v) { return g.add(v[0], v[1]); });
  check_op({random_mat(3, 4, rng), random_mat(1, 4, rng)},
           [](G& g, const std::vector<Id>& v) { return g.add_row(v[0], v[1]); });
}

TEST_CASE("scale and add_const gradients") {
  Rng rng(4);
  check_op({random_mat(2, 5, rng)},
           [](G& g, const std::vector<Id>& v) { return g.scale(v[0], -1.75); });
  const Mat<double> c = random_mat(2, 5, rng);
  check_op({random_mat(2, 5, rng)},
           [c](G& g, const std::vector<Id>& v) { return g.add_const(v[0], c); });
}

TEST_CASE("gelu gradients") {
  Rng rng(5);
  check_op({random_mat(3, 3, rng)},
           [](G& g, const std::vector<Id>& v) { return g.gelu(v[0]); });
}

TEST_CASE("softmax gradients") {
  Rng rng(6);
  check_op({random_mat(3, 5, rng)},
           [](G& g, const std::vector<Id>& v) { return g.softmax_rows(v[0]); });
}

TEST_CASE("layer_norm gradients") {
  Rng rng(7);
  check_op({random_mat(3, 6, rng), random_mat(1, 6, rng), random_mat(1, 6, rng)},
           [](G& g, const std::vector<Id>& v) {
             return g.layer_norm_rows(v[0], v[1], v[2], 1e-8);
           },
           1e-5);
}

TEST_CASE("gather/slice/concat/pick/vstack gradients") {
  Rng rng(8);
  check_op({random_mat(6, 4, rng)}, [](G& g, const std::vector<Id>& v) {
    return g.gather_rows(v[0], {0, 2, 2, 5});  // repeated rows accumulate
  });
  check_op({random_mat(3, 6, rng)},
           [](G& g, const std::vector<Id>& v) { return g.slice_cols(v[0], 1, 4); });
  check_op({random_mat(3, 2, rng), random_mat(3, 3, rng)},
           [](G& g, const std::vector<Id>& v) {
             return g.concat_cols({v[0], v[1]});
           });
  check_op({random_mat(4, 3, rng)},
           [](G& g, const std::vector<Id>& v) { return g.pick_row(v[0], 2); });
  check_op({random_mat(1, 4, rng), random_mat(1, 4, rng)},
           [](G& g, const std::vector<Id>& v) {
             return g.vstack({v[0], v[1]});
           });
}

TEST_CASE("cross-entropy value and gradient are the textbook forms") {
  // all logits equal: loss = log C, gradient = (1/C - onehot) per row / B
  G g(true);
  Mat<double> logits(1, 4, 0.7);
  const Id z = g.input(logits);
  const Id loss = g.mean_cross_entropy(z, {2});
  CHECK(g.value(loss)(0, 0) == doctest::Approx(std::log(4.0)));
  g.backward(loss);
  const Mat<double>& dz = g.grad(z);
  for (std::size_t c = 0; c < 4; ++c) {
    const double expect = (c == 2) ? 0.25 - 1.0 : 0.25;
    CHECK(dz(0, c) == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("cross-entropy gradient is softmax minus onehot over the batch") {
  Rng rng(9);
  G g(true);
  const Mat<double> logits = random_mat(3, 5, rng);
  const Id z = g.input(logits);
  const Id loss = g.mean_cross_entropy(z, {4, 0, 3});
  g.backward(loss);
  const Mat<double> probs = G::softmax_rows_value(logits);
  const std::vector<std::size_t> labels{4, 0, 3};
  for (std::size_t r = 0; r < 3; ++r) {
    for (std::size_t c = 0; c < 5; ++c) {
      double expect = probs(r, c) / 3.0;
      if (c == labels[r]) expect -= 1.0 / 3.0;
      CHECK(g.grad(z)(r, c) == doctest::Approx(expect).epsilon(1e-12));
    }
  }
}

TEST_CASE("fan-out accumulates gradients") {
  G g(true);
  Mat<double> x(1, 1, 3.0);
  const Id a = g.input(x);
  const Id y = g.add(a, a);  // y = 2a
  g.backward(y);
  CHECK(g.grad(a)(0, 0) == doctest::Approx(2.0));
}

TEST_CASE("non-recording graphs refuse backward") {
  G g(false);
  const Id a = g.input(Mat<double>(1, 1, 1.0));
  CHECK_THROWS_AS(g.backward(a), Error);
}

TEST_SUITE_END();
