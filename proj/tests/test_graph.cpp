#include <doctest.h>

#include <cmath>

#include "csforge/graph.hpp"
#include "csforge/nn.hpp"
#include "support/gradcheck.hpp"

using namespace csforge;

TEST_CASE("matmul shapes and values") {
  Graph g;
  NodeId a = g.input(Tensor::mat(2, 3, {1, 2, 3, 4, 5, 6}));
  NodeId b = g.input(Tensor::mat(3, 1, {1, 0, -1}));
  NodeId c = g.matmul(a, b);
  CHECK(g.value(c).shape == std::vector<std::size_t>{2, 1});
  CHECK(g.value(c).data[0] == doctest::Approx(-2.0));
  CHECK(g.value(c).data[1] == doctest::Approx(-2.0));

  NodeId v = g.input(Tensor::vec({1, 1, 1}));
  NodeId mv = g.matmul(a, v);
  CHECK(g.value(mv).shape == std::vector<std::size_t>{2});
  CHECK(g.value(mv).data[0] == doctest::Approx(6.0));
  CHECK(g.value(mv).data[1] == doctest::Approx(15.0));

  CHECK_THROWS_AS(g.matmul(a, a), GraphError);
}

TEST_CASE("sigmoid and softmax basics") {
  Graph g;
  NodeId z = g.sigmoid(g.input(Tensor::scalar(0.0)));
  CHECK(g.value(z).scalar_value() == doctest::Approx(0.5));

  NodeId s = g.softmax(g.input(Tensor::vec({1, 1, 1})));
  for (double v : g.value(s).data) CHECK(v == doctest::Approx(1.0 / 3));
}

TEST_CASE("softmax stays normalized for large inputs") {
  Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    Graph g;
    Tensor in = Tensor::zeros({5});
    for (double& v : in.data) v = rng.uniform(-50.0, 50.0);
    const Tensor& out = g.value(g.softmax(g.input(in)));
    double sum = 0.0;
    for (double v : out.data) {
      CHECK(v >= 0.0);
      sum += v;
    }
    CHECK(std::fabs(sum - 1.0) < 1e-9);
  }
}

TEST_CASE("non-finite outputs are reported with the node id") {
  Graph g;
  NodeId v = g.input(Tensor::vec({0.0}));
  CHECK_THROWS_WITH_AS(g.log_(v), doctest::Contains("non-finite"), GraphError);
}

TEST_CASE("backward of x squared at x=3") {
  ParameterStore params;
  params.create("x", {});
  params.value("x").data[0] = 3.0;
  Graph g(&params);
  NodeId x = g.param("x");
  NodeId loss = g.mul(x, x);
  g.backward(loss, params);
  CHECK(params.grad("x").data[0] == doctest::Approx(6.0));
}

TEST_CASE("softmax cross-entropy closed form at uniform logits") {
  const std::size_t K = 7;
  ParameterStore params;
  params.create("logits", {K});
  Graph g(&params);
  NodeId p = g.softmax(g.param("logits"));
  NodeId loss = g.neg(g.log_(g.pick(p, 2)));
  g.backward(loss, params);
  // gradient = softmax - onehot
  for (std::size_t k = 0; k < K; ++k) {
    const double expected = 1.0 / K - (k == 2 ? 1.0 : 0.0);
    CHECK(params.grad("logits").data[k] == doctest::Approx(expected));
  }
}

TEST_CASE("backward rejects non-scalar loss and unknown nodes") {
  ParameterStore params;
  params.create("v", {3});
  Graph g(&params);
  NodeId v = g.param("v");
  CHECK_THROWS_AS(g.backward(v, params), GraphError);
  CHECK_THROWS_AS(g.backward(999, params), GraphError);
}

TEST_CASE("unreached parameters keep zero gradients") {
  ParameterStore params;
  params.create("used", {});
  params.create("unused", {4});
  params.value("used").data[0] = 2.0;
  Graph g(&params);
  NodeId loss = g.mul(g.param("used"), g.param("used"));
  params.zero_grads();
  g.backward(loss, params);
  for (double v : params.grad("unused").data) CHECK(v == 0.0);
  CHECK(params.grad("used").data[0] == doctest::Approx(4.0));
}

TEST_CASE("every primitive op matches finite differences") {
  Rng rng(42);
  ParameterStore params;
  params.create_xavier("A", 3, 4, rng);
  params.create_xavier("B", 4, 2, rng);
  params.create("v4", {4});
  params.create("v3", {3});
  params.create("s", {});
  for (double& x : params.value("v4").data) x = rng.uniform(-1, 1);
  for (double& x : params.value("v3").data) x = rng.uniform(-1, 1);
  params.value("s").data[0] = 0.3;

  auto build = [](Graph& g) -> NodeId {
    NodeId A = g.param("A");
    NodeId B = g.param("B");
    NodeId v4 = g.param("v4");
    NodeId v3 = g.param("v3");
    NodeId s = g.param("s");
    NodeId mv = g.matmul(A, v4);                      // (3)
    NodeId mt = g.matvec_t(A, v3);                    // (4)
    NodeId mm = g.matmul(A, B);                       // (3,2)
    NodeId act = g.add(g.sigmoid(mv), g.tanh_(v3));   // (3)
    NodeId sc = g.scale(act, s);
    NodeId cat = g.concat(sc, g.exp_(g.scale_const(mt, 0.25)));  // (7)
    NodeId sl = g.slice(cat, 1, 5);
    NodeId sm = g.softmax(sl);
    NodeId picked = g.log_(g.pick(sm, 2));
    NodeId scat = g.scatter_add(sm, {0, 2, 2, 1, 0}, 3);
    NodeId st = g.stack_rows({g.slice(cat, 0, 4), g.sub(v4, g.row(A, 1))});
    NodeId total = g.add(g.add(g.sum(g.mul(scat, scat)), picked),
                         g.add(g.sum(st), g.dot(v3, g.matmul(mm, g.slice(v4, 0, 2)))));
    return total;
  };
  auto result = testing::gradient_check(params, build);
  INFO("worst ", result.worst_param, "[", result.worst_index, "] analytic ",
       result.analytic, " numeric ", result.numeric, " rel ", result.worst_rel);
  CHECK(result.ok);
}

TEST_CASE("two-layer lstm step gradients match finite differences") {
  Rng rng(11);
  ParameterStore params;
  const std::size_t H = 5, I = 4;
  LstmParams l0 = LstmParams::create(params, "l0", I, H, rng);
  LstmParams l1 = LstmParams::create(params, "l1", H, H, rng);
  params.create("x", {I});
  for (double& v : params.value("x").data) v = rng.uniform(-1, 1);

  auto build = [&](Graph& g) -> NodeId {
    LstmNodes n0 = lstm_nodes(g, l0);
    LstmNodes n1 = lstm_nodes(g, l1);
    LstmState s0{g.constant(zero_vec(H)), g.constant(zero_vec(H))};
    LstmState s1{g.constant(zero_vec(H)), g.constant(zero_vec(H))};
    NodeId x = g.param("x");
    for (int t = 0; t < 3; ++t) {  // a short unrolled sequence
      s0 = lstm_step(g, n0, x, s0, H);
      s1 = lstm_step(g, n1, s0.h, s1, H);
    }
    return g.sum(g.mul(s1.h, s1.h));
  };
  auto result = testing::gradient_check(params, build);
  INFO("worst ", result.worst_param, " rel ", result.worst_rel);
  CHECK(result.ok);
}

TEST_CASE("gradient clipping semantics") {
  ParameterStore params;
  params.create("p", {2});
  params.value("p") = Tensor::vec({1.0, 1.0});

  SUBCASE("norm above threshold scales by clip/norm") {
    params.grad("p") = Tensor::vec({0.3, 0.4});  // norm 0.5
    sgd_update(params, 1.0, 0.25);
    CHECK(params.grad("p").data[0] == doctest::Approx(0.15));
    CHECK(params.grad("p").data[1] == doctest::Approx(0.20));
    double norm = std::hypot(params.grad("p").data[0], params.grad("p").data[1]);
    CHECK(norm <= 0.25 + 1e-12);
  }
  SUBCASE("norm below threshold is untouched") {
    params.grad("p") = Tensor::vec({0.06, 0.08});  // norm 0.1
    sgd_update(params, 1.0, 0.25);
    CHECK(params.grad("p").data[0] == doctest::Approx(0.06));
    CHECK(params.grad("p").data[1] == doctest::Approx(0.08));
  }
  SUBCASE("plain sgd step") {
    params.value("p") = Tensor::vec({1.0, 1.0});
    params.grad("p") = Tensor::vec({0.5, 0.0});
    sgd_update(params, 0.1, 1e18);
    CHECK(params.value("p").data[0] == doctest::Approx(0.95));
    CHECK(params.value("p").data[1] == doctest::Approx(1.0));
  }
  SUBCASE("non-finite gradient aborts naming the parameter") {
    params.grad("p") = Tensor::vec({std::nan(""), 0.0});
    CHECK_THROWS_WITH_AS(sgd_update(params, 0.1, 0.25), doctest::Contains("p"),
                         GraphError);
  }
}

TEST_CASE("post-clip norm bounded over random gradients") {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    ParameterStore params;
    params.create("a", {3});
    params.create("b", {2, 2});
    for (const auto& name : params.names()) {
      for (double& v : params.grad(name).data) v = rng.uniform(-2, 2);
    }
    const double clip = 0.25;
    sgd_update(params, 0.01, clip);
    double sq = 0.0;
    for (const auto& name : params.names()) {
      for (double v : params.grad(name).data) sq += v * v;
    }
    CHECK(std::sqrt(sq) <= clip + 1e-12);
  }
}

TEST_CASE("evaluation is deterministic") {
  Rng rng(5);
  ParameterStore params;
  params.create_xavier("W", 4, 4, rng);
  params.create("x", {4});
  for (double& v : params.value("x").data) v = rng.uniform(-1, 1);
  auto run = [&]() {
    Graph g(&params);
    return g.value(g.sum(g.tanh_(g.matmul(g.param("W"), g.param("x"))))).scalar_value();
  };
  const double first = run();
  for (int i = 0; i < 5; ++i) CHECK(run() == first);
}
