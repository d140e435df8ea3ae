#include <benchmark/benchmark.h>

#include "cadsev/numeric/adam.hpp"
#include "cadsev/numeric/ops.hpp"
#include "cadsev/numeric/parameter.hpp"
#include "cadsev/numeric/tape.hpp"
#include "support/generators.hpp"

using namespace cadsev;

static void BM_AffineTanh(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  testing::Gen g(1);
  num::Parameter W("W", g.tensor(num::Shape{n, n}));
  num::Parameter b("b", g.tensor(num::Shape{n}));
  const num::Tensor x = g.tensor(num::Shape{n});
  num::Tape tape;
  for (auto _ : state) {
    tape.clear();
    const auto y = num::tanh(num::affine(tape.param(W), tape.constant_ref(x), tape.param(b)));
    benchmark::DoNotOptimize(y.value()[0]);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(n * n));
}
BENCHMARK(BM_AffineTanh)->Arg(16)->Arg(64)->Arg(256);

static void BM_AffineBackward(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  testing::Gen g(2);
  num::Parameter W("W", g.tensor(num::Shape{n, n}));
  num::Parameter b("b", g.tensor(num::Shape{n}));
  const num::Tensor x = g.tensor(num::Shape{n});
  num::Tape tape;
  for (auto _ : state) {
    tape.clear();
    tape.backward(num::sqnorm(num::tanh(num::affine(tape.param(W), tape.constant_ref(x), tape.param(b)))));
  }
  benchmark::DoNotOptimize(W.gradient[0]);
  state.SetItemsProcessed(state.iterations() * static_cast<long>(n * n));
}
BENCHMARK(BM_AffineBackward)->Arg(16)->Arg(64)->Arg(256);

static void BM_Softmax(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  testing::Gen g(3);
  const num::Tensor x = g.tensor(num::Shape{n}, 10.0);
  num::Tape tape;
  for (auto _ : state) {
    tape.clear();
    benchmark::DoNotOptimize(num::softmax(tape.constant_ref(x)).value()[0]);
  }
}
BENCHMARK(BM_Softmax)->Arg(6)->Arg(128);

static void BM_AdamStep(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  testing::Gen g(4);
  num::Parameter p("p", g.tensor(num::Shape{n}));
  p.gradient = g.tensor(num::Shape{n});
  num::Parameter* ps[] = {&p};
  for (auto _ : state) num::adam_step(ps);
  benchmark::DoNotOptimize(p.value[0]);
  state.SetItemsProcessed(state.iterations() * static_cast<long>(n));
}
BENCHMARK(BM_AdamStep)->Arg(1 << 10)->Arg(1 << 16);
