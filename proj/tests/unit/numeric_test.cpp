#include <doctest.h>

#include <cmath>
#include <vector>

#include "cadsev/numeric/adam.hpp"
#include "cadsev/numeric/ops.hpp"
#include "cadsev/numeric/parameter.hpp"
#include "cadsev/numeric/tape.hpp"
#include "support/generators.hpp"
#include "support/gradcheck.hpp"

using namespace cadsev;
using num::Parameter;
using num::Shape;
using num::Tape;
using num::Tensor;
using num::Var;

namespace {

Var vec_const(Tape& t, std::vector<double> v) { return t.constant(Tensor::vector(std::move(v))); }

/// Reduces a tensor-valued op to a scalar with fixed random weights.
Var project(Tape& t, Var x, std::uint64_t seed) {
  testing::Gen g(seed);
  return num::dot(x, t.constant(g.tensor(x.shape())));
}

}  // namespace

TEST_SUITE("tensor") {
  TEST_CASE("shape and storage agree") {
    Tensor t(Shape{2, 3});
    CHECK(t.size() == 6);
    CHECK(t.shape().numel() == 6);
    CHECK(t.shape().str() == "[2, 3]");
    CHECK_THROWS_AS(Tensor(Shape{2, 2}, {1.0, 2.0, 3.0}), std::invalid_argument);
    CHECK(Tensor::scalar(4.0).item() == 4.0);
    CHECK(Shape{}.numel() == 1);
  }

  TEST_CASE("accumulate checks shapes") {
    Tensor a(Shape{2}, {1.0, 2.0});
    a += Tensor(Shape{2}, {0.5, 0.5});
    CHECK(a[1] == 2.5);
    CHECK_THROWS_AS(a += Tensor(Shape{3}), std::invalid_argument);
  }
}

TEST_SUITE("ops forward") {
  TEST_CASE("activation identities") {
    Tape t;
    CHECK(num::sigmoid(vec_const(t, {0.0})).value()[0] == 0.5);
    CHECK(num::tanh(vec_const(t, {0.0})).value()[0] == 0.0);
    const auto r = num::relu(vec_const(t, {-1.0, 0.0, 2.0})).value();
    CHECK(r == Tensor::vector({0.0, 0.0, 2.0}));
  }

  TEST_CASE("softmax of equal logits is uniform") {
    Tape t;
    const auto y = num::softmax(vec_const(t, {0.0, 0.0, 0.0})).value();
    for (std::size_t i = 0; i < 3; ++i) CHECK(y[i] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  }

  TEST_CASE("dot, norms, affine by hand") {
    Tape t;
    CHECK(num::dot(vec_const(t, {1, 2}), vec_const(t, {3, 4})).value().item() == 11.0);
    CHECK(num::l2norm(vec_const(t, {3, 4})).value().item() == 5.0);
    CHECK(num::sqnorm(vec_const(t, {3, 4})).value().item() == 25.0);
    const Var W = t.constant(Tensor(Shape{2, 3}, {1, 2, 3, 4, 5, 6}));
    const auto y = num::affine(W, vec_const(t, {1, 0, -1}), vec_const(t, {0.5, -0.5})).value();
    CHECK(y == Tensor::vector({-1.5, -2.5}));
    CHECK(num::matvec(W, vec_const(t, {1, 1, 1})).value() == Tensor::vector({6, 15}));
  }

  TEST_CASE("concat, slice, gather") {
    Tape t;
    const auto c = num::concat(vec_const(t, {1, 2}), vec_const(t, {3})).value();
    CHECK(c == Tensor::vector({1, 2, 3}));
    const Var scalars[] = {t.constant(Tensor::scalar(7)), t.constant(Tensor::scalar(8))};
    CHECK(num::concat(scalars).value() == Tensor::vector({7, 8}));
    CHECK(num::slice(vec_const(t, {1, 2, 3, 4}), 1, 2).value() == Tensor::vector({2, 3}));
    const Var table = t.constant(Tensor(Shape{3, 2}, {0, 1, 2, 3, 4, 5}));
    CHECK(num::gather_row(table, 2).value() == Tensor::vector({4, 5}));
    CHECK_THROWS_AS(num::gather_row(table, 3), std::invalid_argument);
  }

  TEST_CASE("squash lengths") {
    Tape t;
    CHECK(num::l2norm(num::squash(vec_const(t, {0, 0, 0}))).value().item() == 0.0);
    const auto v = num::squash(vec_const(t, {0.6, 0.8})).value();
    CHECK(v[0] == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(v[1] == doctest::Approx(0.4).epsilon(1e-15));
    // 10^6 / (1 + 10^6), evaluated in 50-digit arithmetic.
    const double len = num::l2norm(num::squash(vec_const(t, {600, 800}))).value().item();
    CHECK(len == doctest::Approx(0.999999000000999999).epsilon(1e-15));
    CHECK(len < 1.0);
  }

  TEST_CASE("shape mismatch names both shapes") {
    Tape t;
    try {
      num::add(vec_const(t, {1, 2}), vec_const(t, {1, 2, 3}));
      FAIL("expected a shape error");
    } catch (const std::invalid_argument& e) {
      const std::string msg = e.what();
      CHECK(msg.find("[2]") != std::string::npos);
      CHECK(msg.find("[3]") != std::string::npos);
    }
    const Var W = t.constant(Tensor(Shape{2, 3}));
    CHECK_THROWS_AS(num::matvec(W, vec_const(t, {1, 2})), std::invalid_argument);
    CHECK_THROWS_AS(num::dot(vec_const(t, {1}), vec_const(t, {1, 2})), std::invalid_argument);
    CHECK_THROWS_AS(num::mul(vec_const(t, {1}), vec_const(t, {1, 2})), std::invalid_argument);
  }

  TEST_CASE("softmax rows sum to one on random input") {
    testing::Gen g(11);
    for (int trial = 0; trial < 200; ++trial) {
      Tape t;
      const std::size_t r = g.index(1, 6);
      const std::size_t c = g.index(1, 6);
      const Var x = t.constant(g.tensor(Shape{r, c}, 30.0));
      for (std::size_t axis : {0u, 1u}) {
        const auto y = num::softmax(x, axis).value();
        const std::size_t groups = axis == 1 ? r : c;
        for (std::size_t k = 0; k < groups; ++k) {
          double s = 0.0;
          const std::size_t len = axis == 1 ? c : r;
          for (std::size_t j = 0; j < len; ++j) {
            const double v = axis == 1 ? y.at(k, j) : y.at(j, k);
            CHECK(v >= 0.0);
            s += v;
          }
          CHECK(std::abs(s - 1.0) <= 1e-12);
        }
      }
    }
  }

  TEST_CASE("forward stays finite on finite input") {
    testing::Gen g(5);
    Tape t;
    const Var x = t.constant(g.tensor(Shape{6}, 800.0));
    CHECK(num::sigmoid(x).value().all_finite());
    CHECK(num::tanh(x).value().all_finite());
    CHECK(num::softmax(x).value().all_finite());
    CHECK(num::squash(x).value().all_finite());
    CHECK(num::softmax_cross_entropy(x, 2).value().all_finite());
  }
}

TEST_SUITE("backward") {
  TEST_CASE("d(p.p)/dp = 2p") {
    Parameter p("p", Tensor::vector({1, 2}));
    Tape t;
    const Var v = t.param(p);
    t.backward(num::dot(v, v));
    CHECK(p.gradient == Tensor::vector({2, 4}));
  }

  TEST_CASE("unused parameter keeps a zero gradient") {
    Parameter p("p", Tensor::vector({1, 2}));
    Parameter q("q", Tensor::vector({3, 4}));
    Tape t;
    t.param(p);
    const Var qv = t.param(q);
    t.backward(num::sqnorm(qv));
    CHECK(p.gradient == Tensor::vector({0, 0}));
    CHECK(q.gradient == Tensor::vector({6, 8}));
  }

  TEST_CASE("loss independent of the parameter") {
    Parameter p("p", Tensor::vector({1, 2}));
    Tape t;
    t.param(p);
    t.backward(num::sqnorm(vec_const(t, {1, 1})));
    CHECK(p.gradient == Tensor::vector({0, 0}));
  }

  TEST_CASE("non-scalar loss is rejected, empty tape is a no-op") {
    Parameter p("p", Tensor::vector({1, 2}));
    Tape t;
    const Var v = t.param(p);
    CHECK_THROWS_AS(t.backward(num::tanh(v)), std::invalid_argument);
    Tape empty;
    CHECK_NOTHROW(empty.backward(Var{}));
  }

  TEST_CASE("gradients accumulate across tapes until zero_grad") {
    Parameter p("p", Tensor::vector({1, 2}));
    for (int k = 0; k < 2; ++k) {
      Tape t;
      const Var v = t.param(p);
      t.backward(num::dot(v, v));
    }
    CHECK(p.gradient == Tensor::vector({4, 8}));
    p.zero_grad();
    CHECK(p.gradient == Tensor::vector({0, 0}));
  }

  TEST_CASE("concat routes gradient slices") {
    Parameter a("a", Tensor::vector({1, 2}));
    Parameter b("b", Tensor::vector({3}));
    Tape t;
    const Var c = num::concat(t.param(a), t.param(b));
    t.backward(num::dot(c, vec_const(t, {10, 20, 30})));
    CHECK(a.gradient == Tensor::vector({10, 20}));
    CHECK(b.gradient == Tensor::vector({30}));
  }

  TEST_CASE("l2norm and squash have zero gradient at the origin") {
    Parameter p("p", Tensor::vector({0, 0}));
    Tape t;
    const Var v = t.param(p);
    t.backward(num::add(num::l2norm(v), num::l2norm(num::squash(v))));
    CHECK(p.gradient == Tensor::vector({0, 0}));
  }
}

TEST_SUITE("gradient check") {
  // Every op against central differences on random inputs of dimension <= 8.
  TEST_CASE("each op matches finite differences") {
    testing::Gen g(2024);
    for (int trial = 0; trial < 5; ++trial) {
      const std::size_t m = g.index(1, 8);
      const std::size_t n = g.index(1, 8);
      Parameter W("W", g.tensor(Shape{m, n}));
      Parameter x("x", g.tensor(Shape{n}, 1.0, 0.05));
      Parameter b("b", g.tensor(Shape{m}));
      Parameter y("y", g.tensor(Shape{n}, 1.0, 0.05));
      Parameter s("s", g.tensor(Shape{}, 1.0, 0.1));
      Parameter M("M", g.tensor(Shape{m, n}, 2.0));
      Parameter* all[] = {&W, &x, &b, &y, &s, &M};
      const std::uint64_t seed = 100 + trial;

      using Fn = std::function<Var(Tape&)>;
      const std::vector<std::pair<const char*, Fn>> cases = {
          {"affine", [&](Tape& t) { return project(t, num::affine(t.param(W), t.param(x), t.param(b)), seed); }},
          {"matvec", [&](Tape& t) { return project(t, num::matvec(t.param(W), t.param(x)), seed); }},
          {"concat", [&](Tape& t) { return project(t, num::concat(t.param(x), t.param(b)), seed); }},
          {"sigmoid", [&](Tape& t) { return project(t, num::sigmoid(t.param(x)), seed); }},
          {"tanh", [&](Tape& t) { return project(t, num::tanh(t.param(x)), seed); }},
          {"relu", [&](Tape& t) { return project(t, num::relu(t.param(x)), seed); }},
          {"mul", [&](Tape& t) { return project(t, num::mul(t.param(x), t.param(y)), seed); }},
          {"add", [&](Tape& t) { return project(t, num::add(t.param(x), t.param(y)), seed); }},
          {"sum", [&](Tape& t) {
             const Var terms[] = {t.param(x), t.param(y), num::mul(t.param(x), t.param(y))};
             return project(t, num::sum(terms), seed);
           }},
          {"dot", [&](Tape& t) { return num::dot(t.param(x), t.param(y)); }},
          {"scale", [&](Tape& t) { return project(t, num::scale(t.param(x), -1.7), seed); }},
          {"scale by var", [&](Tape& t) { return project(t, num::scale(t.param(x), t.param(s)), seed); }},
          {"softmax rows", [&](Tape& t) { return project(t, num::softmax(t.param(M), 1), seed); }},
          {"softmax cols", [&](Tape& t) { return project(t, num::softmax(t.param(M), 0), seed); }},
          {"softmax vec", [&](Tape& t) { return project(t, num::softmax(t.param(x)), seed); }},
          {"l2norm", [&](Tape& t) { return num::l2norm(t.param(x)); }},
          {"sqnorm", [&](Tape& t) { return num::sqnorm(t.param(x)); }},
          {"gather_row", [&](Tape& t) { return project(t, num::gather_row(t.param(M), m - 1), seed); }},
          {"slice", [&](Tape& t) { return project(t, num::slice(t.param(b), 0, m), seed); }},
          {"squash", [&](Tape& t) { return project(t, num::squash(t.param(x)), seed); }},
          {"cross entropy", [&](Tape& t) { return num::softmax_cross_entropy(t.param(b), m - 1); }},
      };
      for (const auto& [name, fn] : cases) {
        CAPTURE(name);
        const auto r = testing::gradient_check(all, fn);
        CAPTURE(r.worst);
        CHECK(r.max_rel_error < 1e-4);
      }
    }
  }

  TEST_CASE("random three-layer composite") {
    testing::Gen g(77);
    Parameter W1("W1", g.tensor(Shape{6, 5}));
    Parameter b1("b1", g.tensor(Shape{6}));
    Parameter W2("W2", g.tensor(Shape{4, 6}));
    Parameter b2("b2", g.tensor(Shape{4}));
    Parameter W3("W3", g.tensor(Shape{3, 4}));
    Parameter x("x", g.tensor(Shape{5}));
    Parameter* all[] = {&W1, &b1, &W2, &b2, &W3, &x};
    const auto r = testing::gradient_check(all, [&](Tape& t) {
      const Var h1 = num::tanh(num::affine(t.param(W1), t.param(x), t.param(b1)));
      const Var h2 = num::sigmoid(num::affine(t.param(W2), h1, t.param(b2)));
      const Var v = num::squash(num::matvec(t.param(W3), h2));
      return num::add(num::sqnorm(v), num::softmax_cross_entropy(num::matvec(t.param(W3), h2), 1));
    });
    CAPTURE(r.worst);
    CHECK(r.max_rel_error < 1e-4);
  }
}

TEST_SUITE("adam") {
  TEST_CASE("zero gradient leaves values unchanged") {
    Parameter p("p", Tensor::vector({0.3, -0.7}));
    Parameter* ps[] = {&p};
    num::adam_step(ps);
    CHECK(p.value == Tensor::vector({0.3, -0.7}));
    CHECK(p.step_count == 1);
  }

  TEST_CASE("first step moves by the learning rate") {
    Parameter p("p", Tensor::scalar(0.0));
    p.gradient[0] = 1.0;
    Parameter* ps[] = {&p};
    num::adam_step(ps);
    CHECK(p.value[0] == doctest::Approx(-0.001).epsilon(1e-7));
    CHECK(p.gradient[0] == 1.0);
  }

  // References computed with 50-digit arithmetic from the textbook update.
  TEST_CASE("two identical steps") {
    Parameter p("p", Tensor::scalar(0.5));
    Parameter* ps[] = {&p};
    p.gradient[0] = 0.3;
    num::adam_step(ps);
    CHECK(p.value[0] == doctest::Approx(0.49900000003333333222).epsilon(1e-14));
    num::adam_step(ps);
    CHECK(p.value[0] == doctest::Approx(0.49800000006666666444).epsilon(1e-14));
    CHECK(p.step_count == 2);
  }

  TEST_CASE("two steps with changing gradients") {
    Parameter p("p", Tensor::vector({1.0, -2.0}));
    Parameter* ps[] = {&p};
    p.gradient = Tensor::vector({0.5, -1.5});
    num::adam_step(ps);
    CHECK(p.value[0] == doctest::Approx(0.9990000000199999996).epsilon(1e-14));
    CHECK(p.value[1] == doctest::Approx(-1.9990000000066666666).epsilon(1e-14));
    p.gradient = Tensor::vector({-0.25, 2.0});
    num::adam_step(ps);
    CHECK(p.value[0] == doctest::Approx(0.99873366298707846163).epsilon(1e-14));
    CHECK(p.value[1] == doctest::Approx(-1.9991935104147085774).epsilon(1e-14));
  }
}

TEST_SUITE("parameters") {
  TEST_CASE("store rejects duplicate names and keeps order") {
    num::ParameterStore store;
    store.add("a", Tensor(Shape{2}));
    store.add("b", Tensor(Shape{3}));
    CHECK_THROWS_AS(store.add("a", Tensor(Shape{1})), std::invalid_argument);
    CHECK(store.scalar_count() == 5);
    CHECK(store.all()[1]->name == "b");
    CHECK(store.find("zzz") == nullptr);
    auto* a = store.find("a");
    CHECK(a->gradient.shape() == a->value.shape());
    CHECK(a->adam_m.shape() == a->value.shape());
  }

  TEST_CASE("seeded init is reproducible and bounded") {
    std::mt19937_64 r1(9), r2(9);
    Tensor a(Shape{50}), b(Shape{50});
    num::init_uniform(a, 0.08, r1);
    num::init_uniform(b, 0.08, r2);
    CHECK(a == b);
    for (double v : a.data()) CHECK(std::abs(v) <= 0.08);
  }
}
