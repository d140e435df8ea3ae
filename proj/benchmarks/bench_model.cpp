#include <benchmark/benchmark.h>

#include "cadsev/model/rcn.hpp"
#include "cadsev/syngen/syngen.hpp"
#include "cadsev/text/lexicon.hpp"
#include "support/generators.hpp"

using namespace cadsev;

namespace {

struct LstmWeights {
  num::Tensor W, U, b;
  std::size_t hidden;

  LstmWeights(testing::Gen& g, std::size_t h, std::size_t input)
      : W(g.tensor(num::Shape{4 * h, input}, 0.08)),
        U(g.tensor(num::Shape{4 * h, h}, 0.08)),
        b(g.tensor(num::Shape{4 * h}, 0.08)),
        hidden(h) {}

  model::LstmVars bind(num::Tape& tape) const {
    return {tape.constant_ref(W), tape.constant_ref(U), tape.constant_ref(b), hidden};
  }
};

const std::vector<data::RelationInstance>& corpus_instances() {
  static const auto insts = [] {
    syngen::GenConfig cfg;
    cfg.documents = 50;
    return syngen::generate_corpus(cfg, text::Lexicon::builtin()).instances;
  }();
  return insts;
}

}  // namespace

// Bi-LSTM over a segment at the default widths.
static void BM_BiLstmSegment(benchmark::State& state) {
  const auto len = static_cast<std::size_t>(state.range(0));
  testing::Gen g(5);
  const LstmWeights fwd(g, 64, 256), bwd(g, 64, 256);
  std::vector<num::Tensor> xs;
  for (std::size_t t = 0; t < len; ++t) xs.push_back(g.tensor(num::Shape{256}));
  num::Tape tape;
  for (auto _ : state) {
    tape.clear();
    const model::SegmentEncoderVars enc{fwd.bind(tape), bwd.bind(tape)};
    std::vector<num::Var> seq;
    for (const auto& x : xs) seq.push_back(tape.constant_ref(x));
    benchmark::DoNotOptimize(model::lstm_encode(tape, seq, enc, 128).value()[0]);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(len));
}
BENCHMARK(BM_BiLstmSegment)->Arg(1)->Arg(4)->Arg(16);

static void BM_Routing(benchmark::State& state) {
  const auto iters = static_cast<std::size_t>(state.range(0));
  testing::Gen g(6);
  std::vector<num::Tensor> u, w;
  for (int i = 0; i < 5; ++i) u.push_back(g.tensor(num::Shape{128}));
  for (int k = 0; k < 30; ++k) w.push_back(g.tensor(num::Shape{64, 128}, 0.08));
  num::Tape tape;
  for (auto _ : state) {
    tape.clear();
    std::vector<num::Var> uv, wv;
    for (const auto& t : u) uv.push_back(tape.constant_ref(t));
    for (const auto& t : w) wv.push_back(tape.constant_ref(t));
    benchmark::DoNotOptimize(model::capsule_forward(uv, wv, 6, iters).lengths[0].value().item());
  }
}
BENCHMARK(BM_Routing)->DenseRange(1, 5);

static void BM_PredictInstance(benchmark::State& state) {
  const auto& insts = corpus_instances();
  model::RcnModel m(model::ModelConfig{}, model::Vocabulary::build(insts));
  std::size_t k = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(m.predict(insts[k]).scores[0]);
    k = (k + 1) % insts.size();
  }
}
BENCHMARK(BM_PredictInstance);

static void BM_TrainStep(benchmark::State& state) {
  const auto& insts = corpus_instances();
  model::RcnModel m(model::ModelConfig{}, model::Vocabulary::build(insts));
  num::Tape tape;
  std::size_t k = 0;
  for (auto _ : state) {
    tape.clear();
    const auto bound = m.bind_trainable(tape);
    const auto fwd = m.forward(tape, bound, m.encode(insts[k]));
    tape.backward(m.loss(fwd, *insts[k].label));
    k = (k + 1) % insts.size();
  }
  m.parameters().zero_grad();
}
BENCHMARK(BM_TrainStep);

static void BM_Tokenize(benchmark::State& state) {
  const std::string s = "左前降支中段40%狭窄，右前降支、右回旋支未见明显狭窄。";
  const auto& lex = text::Lexicon::builtin();
  for (auto _ : state) benchmark::DoNotOptimize(text::analyze_sentence(s, lex).entities.size());
  state.SetBytesProcessed(state.iterations() * static_cast<long>(s.size()));
}
BENCHMARK(BM_Tokenize);
