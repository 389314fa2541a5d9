/* Copyright (c) 2026 The LDVD Lab Authors. All Rights Reserved.
   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at
   http://www.apache.org/licenses/LICENSE-2.0
   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License. */

#include <doctest.h>

#include <cmath>
#include <functional>
#include <stdexcept>

#include <cstdio>

#include "ldvd/graph.hpp"
#include "ldvd/paramset.hpp"
#include "ldvd/rng.hpp"
#include "oracles.hpp"

using namespace ldvd;

TEST_CASE("tensor invariants") {
  CHECK_THROWS(Tensor({0, 2}));
  CHECK_THROWS(Tensor({2}, {1.0, 2.0, 3.0}));
  CHECK_THROWS(Tensor(Shape{}));
  Tensor t({2, 3});
  CHECK(t.numel() == 6);
  CHECK(t.rank() == 2);
}

TEST_CASE("elementwise examples") {
  Graph g;
  NodeId a = g.constant(Tensor({2}, {1, 2}));
  NodeId b = g.constant(Tensor({2}, {3, 4}));
  const Tensor& sum = g.value(g.add(a, b));
  CHECK(sum[0] == 4);
  CHECK(sum[1] == 6);
  CHECK(g.value(g.leaky_relu(g.constant(Tensor::scalar(-1.0)), 0.2))[0] == doctest::Approx(-0.2));
  // subgradient at 0 takes the positive branch
  CHECK(g.value(g.leaky_relu(g.constant(Tensor::scalar(0.0)), 0.2))[0] == 0.0);
  CHECK(g.value(g.leaky_relu_mask(g.constant(Tensor::scalar(0.0)), 0.2))[0] == 1.0);
}

TEST_CASE("matmul identity") {
  Graph g;
  Rng rng(3);
  Tensor a({3, 3});
  rng.fill_normal(a);
  Tensor eye({3, 3});
  for (int i = 0; i < 3; ++i) eye[i * 3 + i] = 1.0;
  const Tensor& got = g.value(g.matmul(g.constant(eye), g.constant(a)));
  for (int64_t i = 0; i < 9; ++i) CHECK(got[i] == a[i]);
}

TEST_CASE("shape mismatches are rejected with shapes named") {
  Graph g;
  NodeId a = g.constant(Tensor({2, 3}));
  NodeId b = g.constant(Tensor({3, 2}));
  CHECK_THROWS_WITH_AS(g.add(a, b), doctest::Contains("(2x3)"), std::invalid_argument);
  CHECK_THROWS_AS(g.matmul(a, a), std::invalid_argument);
  CHECK_THROWS_AS(g.concat(a, b, 0), std::invalid_argument);
  CHECK_THROWS_AS(g.slice(a, {0, 0}, {3, 3}), std::invalid_argument);
}

namespace {

// Builds a scalar loss touching one primitive, for finite-difference
// certification of its reverse rule.
struct PrimitiveCase {
  const char* name;
  Shape in_shape;
  std::function<NodeId(Graph&, NodeId)> apply;
  double lo = -1.0, hi = 1.0;
};

double loss_through(const PrimitiveCase& pc, const std::vector<double>& x) {
  Graph g;
  NodeId leaf = g.leaf(Tensor(pc.in_shape, x));
  NodeId y = pc.apply(g, leaf);
  // square-sum keeps every output element in play
  return g.value(g.sum_all(g.mul(y, y)))[0];
}

std::vector<double> grad_through(const PrimitiveCase& pc, const std::vector<double>& x) {
  Graph g;
  NodeId leaf = g.leaf(Tensor(pc.in_shape, x));
  NodeId y = pc.apply(g, leaf);
  NodeId loss = g.sum_all(g.mul(y, y));
  return gradient_flat(g, loss, {leaf});
}

}  // namespace

TEST_CASE("every primitive's reverse rule matches central differences") {
  Rng rng(11);
  Tensor other({2, 4});
  rng.fill_normal(other);
  Tensor mat({4, 3});
  rng.fill_normal(mat);
  Tensor chan({4});
  rng.fill_normal(chan);
  Tensor kernel({2, 1, 2, 2, 2});
  rng.fill_uniform(kernel, -0.7, 0.7);
  Tensor video({1, 3, 4, 4, 2});
  rng.fill_uniform(video, -1, 1);

  std::vector<PrimitiveCase> cases = {
      {"add", {2, 4}, [&](Graph& g, NodeId x) { return g.add(x, g.constant(other)); }},
      {"sub", {2, 4}, [&](Graph& g, NodeId x) { return g.sub(g.constant(other), x); }},
      {"mul", {2, 4}, [&](Graph& g, NodeId x) { return g.mul(x, g.constant(other)); }},
      {"scale", {2, 4}, [&](Graph& g, NodeId x) { return g.scale(x, -1.7); }},
      {"add_scalar", {2, 4}, [&](Graph& g, NodeId x) { return g.add_scalar(x, 0.3); }},
      {"matmul_l", {2, 4}, [&](Graph& g, NodeId x) { return g.matmul(x, g.constant(mat)); }},
      {"matmul_r", {4, 3}, [&](Graph& g, NodeId x) { return g.matmul(g.constant(other), x); }},
      {"transpose", {2, 4}, [&](Graph& g, NodeId x) { return g.transpose(x); }},
      {"reshape", {2, 4}, [&](Graph& g, NodeId x) { return g.reshape(x, {4, 2}); }},
      {"pad", {2, 4}, [&](Graph& g, NodeId x) { return g.pad(x, {1, 0}, {0, 2}); }},
      {"slice", {2, 4}, [&](Graph& g, NodeId x) { return g.slice(x, {0, 1}, {2, 2}); }},
      {"concat", {2, 4}, [&](Graph& g, NodeId x) { return g.concat(x, g.constant(other), 1); }},
      {"sum_all", {2, 4}, [&](Graph& g, NodeId x) { return g.sum_all(x); }},
      {"sum_axis", {2, 4}, [&](Graph& g, NodeId x) { return g.sum_axis(x, 1); }},
      {"broadcast_axis", {2, 4}, [&](Graph& g, NodeId x) { return g.broadcast_axis(x, 1, 3); }},
      {"broadcast_full", {1}, [&](Graph& g, NodeId x) { return g.broadcast_full(x, {2, 3}); }},
      {"add_channel", {2, 4}, [&](Graph& g, NodeId x) { return g.add_channel(x, g.constant(chan)); }},
      {"add_channel_b", {4}, [&](Graph& g, NodeId x) { return g.add_channel(g.constant(other), x); }},
      {"scale_channel", {2, 4}, [&](Graph& g, NodeId x) { return g.scale_channel(x, g.constant(chan)); }},
      {"scale_channel_s", {4}, [&](Graph& g, NodeId x) { return g.scale_channel(g.constant(other), x); }},
      {"sum_to_channel", {2, 4}, [&](Graph& g, NodeId x) { return g.sum_to_channel(x); }},
      {"broadcast_channel", {4}, [&](Graph& g, NodeId x) { return g.broadcast_channel(x, {2, 3, 4}); }},
      {"exp", {2, 4}, [&](Graph& g, NodeId x) { return g.exp(x); }},
      {"log", {2, 4}, [&](Graph& g, NodeId x) { return g.log(x); }, 0.3, 2.0},
      {"sigmoid", {2, 4}, [&](Graph& g, NodeId x) { return g.sigmoid(x); }},
      {"tanh", {2, 4}, [&](Graph& g, NodeId x) { return g.tanh(x); }},
      {"softplus", {2, 4}, [&](Graph& g, NodeId x) { return g.softplus(x); }},
      {"reciprocal", {2, 4}, [&](Graph& g, NodeId x) { return g.reciprocal(x); }, 0.4, 2.0},
      {"rsqrt", {2, 4}, [&](Graph& g, NodeId x) { return g.rsqrt(x); }, 0.4, 2.0},
      // away from the kink: inputs in [0.2, 1] or [-1, -0.2]
      {"leaky_relu_pos", {2, 4}, [&](Graph& g, NodeId x) { return g.leaky_relu(x, 0.2); }, 0.2, 1.0},
      {"leaky_relu_neg", {2, 4}, [&](Graph& g, NodeId x) { return g.leaky_relu(x, 0.2); }, -1.0, -0.2},
      {"conv_x",
       {1, 3, 4, 4, 2},
       [&](Graph& g, NodeId x) { return g.conv(x, g.constant(kernel), {1, 2, 1}, {0, 1, 1}); }},
      {"conv_k",
       {2, 1, 2, 2, 2},
       [&](Graph& g, NodeId x) { return g.conv(g.constant(video), x, {1, 2, 1}, {0, 1, 1}); }},
      {"temporal_shift",
       {1, 3, 4, 4, 2},
       // fraction 0.5 so both directions move with C=2
       [&](Graph& g, NodeId x) { return g.temporal_shift(x, 0.5, 1); }},
  };

  for (const auto& pc : cases) {
    CAPTURE(pc.name);
    Tensor x0(pc.in_shape);
    rng.fill_uniform(x0, pc.lo, pc.hi);
    const std::vector<double> x = x0.vec();
    const auto analytic = grad_through(pc, x);
    const auto numeric = oracles::fd_gradient([&](const std::vector<double>& v) { return loss_through(pc, v); }, x);
    CHECK(oracles::rel_err(analytic, numeric) < 1e-6);
  }
}

TEST_CASE("grad basics") {
  {
    Graph g;
    NodeId x = g.leaf(Tensor::scalar(3.0));
    NodeId y = g.mul(x, x);
    CHECK(gradient_flat(g, y, {x})[0] == doctest::Approx(6.0));
  }
  {
    // constant loss: zero gradient for a non-participating parameter
    Graph g;
    NodeId x = g.leaf(Tensor::scalar(3.0));
    NodeId c = g.constant(Tensor::scalar(7.0));
    NodeId loss = g.sum_all(c);
    auto grad = gradient_flat(g, loss, {x});
    CHECK(grad[0] == 0.0);
  }
  {
    // f(W) = sum(W v) against the finite-difference oracle
    Rng rng(5);
    Tensor w({4, 4}), v({4, 1});
    rng.fill_normal(w);
    rng.fill_normal(v);
    auto loss_of = [&](const std::vector<double>& flat) {
      Graph g;
      NodeId wl = g.leaf(Tensor({4, 4}, flat));
      return g.value(g.sum_all(g.matmul(wl, g.constant(v))))[0];
    };
    Graph g;
    NodeId wl = g.leaf(w);
    NodeId loss = g.sum_all(g.matmul(wl, g.constant(v)));
    const auto analytic = gradient_flat(g, loss, {wl});
    const auto numeric = oracles::fd_gradient(loss_of, w.vec());
    CHECK(oracles::rel_err(analytic, numeric) < 1e-6);
  }
  {
    // non-scalar loss rejected
    Graph g;
    NodeId x = g.leaf(Tensor({2}, {1, 2}));
    CHECK_THROWS_AS(g.backward(x, {x}), std::invalid_argument);
  }
}

TEST_CASE("graph evaluation is deterministic") {
  auto run = [] {
    Rng rng(77);
    Graph g;
    Tensor x({2, 3, 4, 4, 2});
    rng.fill_normal(x);
    Tensor k({3, 2, 2, 2, 2});
    rng.fill_normal(k);
    NodeId y = g.conv(g.constant(x), g.constant(k), {1, 2, 2}, {0, 1, 1});
    NodeId loss = g.mean_all(g.tanh(y));
    return g.value(loss)[0];
  };
  const double a = run();
  const double b = run();
  CHECK(a == b);  // bit identical
}

TEST_CASE("paramset flatten/unflatten identity and duplicate names") {
  ParamSet ps;
  Rng rng(9);
  Tensor a({3, 2}), b({5});
  rng.fill_normal(a);
  rng.fill_normal(b);
  ps.add("a", a);
  ps.add("b", b);
  CHECK_THROWS_AS(ps.add("a", b), std::invalid_argument);
  CHECK(ps.total_dim() == 11);
  const auto flat = ps.flatten();
  ParamSet copy = ps;
  copy.unflatten(flat);
  for (size_t i = 0; i < ps.size(); ++i) {
    for (int64_t j = 0; j < ps.tensor(i).numel(); ++j) {
      CHECK(copy.tensor(i)[j] == ps.tensor(i)[j]);
    }
  }
  CHECK_THROWS_AS(ps.unflatten(std::vector<double>(10)), std::invalid_argument);
}

TEST_CASE("paramset container round trip and corruption") {
  const std::string path = std::string(LDVD_TEST_TMP) + "/ps_roundtrip.ldps";
  ParamSet ps;
  Rng rng(13);
  Tensor a({4, 3});
  rng.fill_normal(a);
  ps.add("layer.w", a);
  save_paramset(path, ps);
  ParamSet back = load_paramset(path);
  CHECK(back.size() == 1);
  CHECK(back.entry(0).name == "layer.w");
  for (int64_t i = 0; i < a.numel(); ++i) CHECK(back.tensor(0)[i] == a[i]);

  // flip one payload byte: checksum must reject
  {
    FILE* f = std::fopen(path.c_str(), "r+b");
    REQUIRE(f);
    std::fseek(f, 20, SEEK_SET);
    int c = std::fgetc(f);
    std::fseek(f, 20, SEEK_SET);
    std::fputc(c ^ 0x40, f);
    std::fclose(f);
  }
  CHECK_THROWS_WITH_AS(load_paramset(path), doctest::Contains("checksum"), std::runtime_error);
}
