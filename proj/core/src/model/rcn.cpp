#include "cadsev/model/rcn.hpp"

#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace cadsev::model {

using num::Shape;
using num::Tape;
using num::Tensor;
using num::Var;

// ---------------------------------------------------------------------------
// Vocabulary

Vocabulary::Vocabulary() { add(std::string(kUnknownToken)); }

Vocabulary::Vocabulary(std::vector<std::string> tokens) {
  if (tokens.empty() || tokens.front() != kUnknownToken) {
    throw std::invalid_argument("vocabulary must start with " + std::string(kUnknownToken));
  }
  for (auto& t : tokens) {
    if (ids_.contains(t)) throw std::invalid_argument("duplicate vocabulary token '" + t + "'");
    add(std::move(t));
  }
}

void Vocabulary::add(std::string token) {
  ids_.emplace(token, tokens_.size());
  tokens_.push_back(std::move(token));
}

Vocabulary Vocabulary::build(std::span<const data::RelationInstance> instances) {
  Vocabulary v;
  for (const auto& inst : instances) {
    for (const auto& t : inst.tokens) {
      if (!v.ids_.contains(t)) v.add(t);
    }
  }
  return v;
}

std::size_t Vocabulary::id(std::string_view token) const {
  auto it = ids_.find(std::string(token));
  return it == ids_.end() ? kUnknown : it->second;
}

bool Vocabulary::contains(std::string_view token) const { return ids_.contains(std::string(token)); }

// ---------------------------------------------------------------------------
// Layers

namespace {

Var run_lstm(Tape& tape, std::span<const Var> sequence, const LstmVars& p, bool reverse) {
  const std::size_t h = p.hidden;
  std::optional<Var> hidden;
  std::optional<Var> cell;
  const std::size_t n = sequence.size();
  for (std::size_t step = 0; step < n; ++step) {
    const Var& e = sequence[reverse ? n - 1 - step : step];
    Var pre = num::affine(p.W, e, p.b);
    if (hidden) pre = num::add(pre, num::matvec(p.U, *hidden));
    const Var in_gate = num::sigmoid(num::slice(pre, 0, h));
    const Var candidate = num::tanh(num::slice(pre, 2 * h, h));
    const Var out_gate = num::sigmoid(num::slice(pre, 3 * h, h));
    Var next_cell = num::mul(in_gate, candidate);
    if (cell) {
      // c_{t-1} = 0 at the first step, so the forget gate only matters afterwards.
      const Var forget = num::sigmoid(num::slice(pre, h, h));
      next_cell = num::add(num::mul(forget, *cell), next_cell);
    }
    cell = next_cell;
    hidden = num::mul(out_gate, num::tanh(*cell));
  }
  (void)tape;
  return *hidden;
}

}  // namespace

Var lstm_encode(Tape& tape, std::span<const Var> sequence, const SegmentEncoderVars& encoder,
                std::size_t width) {
  if (!encoder.forward && !encoder.backward) {
    throw std::invalid_argument("lstm_encode: encoder has no direction");
  }
  if (sequence.empty()) return tape.constant(Tensor(Shape{width}));
  if (encoder.forward && encoder.backward) {
    return num::concat(run_lstm(tape, sequence, *encoder.forward, false),
                       run_lstm(tape, sequence, *encoder.backward, true));
  }
  if (encoder.forward) return run_lstm(tape, sequence, *encoder.forward, false);
  return run_lstm(tape, sequence, *encoder.backward, true);
}

CapsuleGraph capsule_forward(std::span<const Var> inputs, std::span<const Var> weights,
                             std::size_t num_classes, std::size_t iterations) {
  if (inputs.empty()) throw std::invalid_argument("capsule_forward: no input capsules");
  if (iterations < 1) throw std::invalid_argument("capsule_forward: routing needs at least one iteration");
  const std::size_t n_in = inputs.size();
  const std::size_t n_out = num_classes;
  if (weights.size() != n_in * n_out) {
    throw std::invalid_argument("capsule_forward: expected " + std::to_string(n_in * n_out) +
                                " transform matrices, got " + std::to_string(weights.size()));
  }
  Tape& tape = *inputs.front().tape;

  std::vector<Var> predictions;  // û_{j|i}, row-major (i, j)
  predictions.reserve(n_in * n_out);
  for (std::size_t i = 0; i < n_in; ++i) {
    for (std::size_t j = 0; j < n_out; ++j) predictions.push_back(num::matvec(weights[i * n_out + j], inputs[i]));
  }

  std::vector<Var> logits(n_in, tape.constant(Tensor(Shape{n_out})));
  std::vector<Var> coupling(n_in, logits.front());
  std::vector<Var> activity(n_out, logits.front());
  std::vector<Var> terms(n_in, logits.front());
  std::vector<Var> agreement(n_out, logits.front());

  for (std::size_t it = 0; it < iterations; ++it) {
    for (std::size_t i = 0; i < n_in; ++i) coupling[i] = num::softmax(logits[i]);
    for (std::size_t j = 0; j < n_out; ++j) {
      for (std::size_t i = 0; i < n_in; ++i) {
        terms[i] = num::scale(predictions[i * n_out + j], num::slice(coupling[i], j, 1));
      }
      activity[j] = num::squash(num::sum(terms));
    }
    if (it + 1 == iterations) break;
    for (std::size_t i = 0; i < n_in; ++i) {
      for (std::size_t j = 0; j < n_out; ++j) agreement[j] = num::dot(predictions[i * n_out + j], activity[j]);
      logits[i] = num::add(logits[i], num::concat(agreement));
    }
  }

  CapsuleGraph out;
  out.activity = activity;
  out.lengths.reserve(n_out);
  for (const Var& v : activity) out.lengths.push_back(num::l2norm(v));
  out.coefficients = Tensor(Shape{n_in, n_out});
  for (std::size_t i = 0; i < n_in; ++i) {
    const Tensor& c = coupling[i].value();
    for (std::size_t j = 0; j < n_out; ++j) out.coefficients.at(i, j) = c[j];
  }
  return out;
}

CapsuleOutput snapshot(const CapsuleGraph& graph) {
  CapsuleOutput out;
  for (const Var& v : graph.activity) out.activity.push_back(v.value());
  for (const Var& l : graph.lengths) out.lengths.push_back(l.value().item());
  out.coefficients = graph.coefficients;
  return out;
}

Var margin_loss(std::span<const Var> lengths, std::size_t gold, double m_plus, double m_minus,
                double lambda) {
  if (lengths.empty()) throw std::invalid_argument("margin_loss: no class capsules");
  if (gold >= lengths.size()) {
    throw std::invalid_argument("margin_loss: gold class " + std::to_string(gold) + " out of range");
  }
  Tape& tape = *lengths.front().tape;
  std::vector<Var> terms;
  terms.reserve(lengths.size());
  for (std::size_t j = 0; j < lengths.size(); ++j) {
    if (j == gold) {
      const Var gap = num::relu(num::add(tape.constant(Tensor::scalar(m_plus)), num::scale(lengths[j], -1.0)));
      terms.push_back(num::mul(gap, gap));
    } else {
      const Var excess = num::relu(num::add(lengths[j], tape.constant(Tensor::scalar(-m_minus))));
      terms.push_back(num::scale(num::mul(excess, excess), lambda));
    }
  }
  return num::sum(terms);
}

std::size_t argmax_lowest(std::span<const double> scores) {
  if (scores.empty()) throw std::invalid_argument("argmax over empty scores");
  std::size_t best = 0;
  for (std::size_t j = 1; j < scores.size(); ++j) {
    if (scores[j] > scores[best]) best = j;
  }
  return best;
}

// ---------------------------------------------------------------------------
// RcnModel

namespace {

std::string encoder_name(std::size_t segment, const char* dir, const char* part) {
  return "encoder.E" + std::to_string(segment + 1) + "." + dir + "." + part;
}

std::string capsule_name(std::size_t i, std::size_t j) {
  return "capsule.W." + std::to_string(i) + "." + std::to_string(j);
}

struct EncoderLayout {
  bool forward;
  bool backward;
  std::size_t hidden;
};

EncoderLayout layout_for(const ModelConfig& c, std::size_t segment) {
  if (c.encoder == EncoderMode::UniBi) {
    if (segment == 0) return {true, false, c.uni_hidden};
    if (segment == 4) return {false, true, c.uni_hidden};
  }
  return {true, true, c.bi_hidden};
}

}  // namespace

RcnModel::RcnModel(ModelConfig config, Vocabulary vocab) : config_(std::move(config)), vocab_(std::move(vocab)) {
  config_.validate();
  create_parameters();
  if (!config_.embedding_file.empty()) load_word_vectors(config_.embedding_file);
}

RcnModel::RcnModel(ModelConfig config, Vocabulary vocab, num::ParameterStore params)
    : config_(std::move(config)), vocab_(std::move(vocab)) {
  config_.validate();
  params_ = adopt_parameters(std::move(params));
}

void RcnModel::create_parameters() {
  std::mt19937_64 rng(config_.seed);
  const double r = config_.init_range;
  auto add = [&](std::string name, Shape shape) {
    Tensor t(shape);
    num::init_uniform(t, r, rng);
    params_.add(std::move(name), std::move(t));
  };
  const std::size_t input = config_.word_dim + config_.type_dim;
  add("embedding.word", Shape{vocab_.size(), config_.word_dim});
  add("embedding.type", Shape{text::kNumEntityTypes, config_.type_dim});
  for (std::size_t s = 0; s < 5; ++s) {
    const auto lay = layout_for(config_, s);
    for (const char* dir : {"fwd", "bwd"}) {
      if ((dir[0] == 'f' && !lay.forward) || (dir[0] == 'b' && !lay.backward)) continue;
      add(encoder_name(s, dir, "W"), Shape{4 * lay.hidden, input});
      add(encoder_name(s, dir, "U"), Shape{4 * lay.hidden, lay.hidden});
      add(encoder_name(s, dir, "b"), Shape{4 * lay.hidden});
    }
  }
  const std::size_t width = config_.capsule_input_dim();
  if (config_.head == HeadMode::Capsule) {
    for (std::size_t i = 0; i < 5; ++i) {
      for (std::size_t j = 0; j < config_.num_classes; ++j) {
        add(capsule_name(i, j), Shape{config_.capsule_dim, width});
      }
    }
  } else {
    add("softmax.W", Shape{config_.num_classes, 5 * width});
    add("softmax.b", Shape{config_.num_classes});
  }
}

num::ParameterStore RcnModel::adopt_parameters(num::ParameterStore given) const {
  // Compare against a reference layout and re-register in its order.
  ModelConfig ref_cfg = config_;
  ref_cfg.embedding_file.clear();
  RcnModel reference(ref_cfg, vocab_);
  const auto expected = reference.params_.all();
  if (expected.size() != given.size()) {
    throw std::invalid_argument("checkpoint has " + std::to_string(given.size()) +
                                " parameters, config expects " + std::to_string(expected.size()));
  }
  num::ParameterStore ordered;
  for (const num::Parameter* e : expected) {
    num::Parameter* p = given.find(e->name);
    if (p == nullptr) throw std::invalid_argument("missing parameter '" + e->name + "'");
    if (p->value.shape() != e->value.shape()) {
      throw std::invalid_argument("parameter '" + e->name + "' has shape " + p->value.shape().str() +
                                  ", expected " + e->value.shape().str());
    }
    ordered.add(e->name, std::move(p->value));
  }
  return ordered;
}

template <typename BindFn>
RcnModel::Bound RcnModel::bind_with(BindFn&& bind) const {
  Bound b;
  b.word_embedding = bind("embedding.word");
  b.type_embedding = bind("embedding.type");
  for (std::size_t s = 0; s < 5; ++s) {
    const auto lay = layout_for(config_, s);
    auto lstm = [&](const char* dir) {
      return LstmVars{bind(encoder_name(s, dir, "W")), bind(encoder_name(s, dir, "U")),
                      bind(encoder_name(s, dir, "b")), lay.hidden};
    };
    if (lay.forward) b.encoders[s].forward = lstm("fwd");
    if (lay.backward) b.encoders[s].backward = lstm("bwd");
  }
  if (config_.head == HeadMode::Capsule) {
    for (std::size_t i = 0; i < 5; ++i) {
      for (std::size_t j = 0; j < config_.num_classes; ++j) b.capsule_weights.push_back(bind(capsule_name(i, j)));
    }
  } else {
    b.softmax_weight = bind("softmax.W");
    b.softmax_bias = bind("softmax.b");
  }
  return b;
}

RcnModel::Bound RcnModel::bind_trainable(Tape& tape) {
  return bind_with([&](const std::string& name) { return tape.param(*params_.find(name)); });
}

RcnModel::Bound RcnModel::bind_frozen(Tape& tape) const {
  return bind_with([&](const std::string& name) { return tape.constant_ref(params_.find(name)->value); });
}

EncodedInstance RcnModel::encode(const data::RelationInstance& instance) const {
  EncodedInstance enc;
  enc.split = data::split_segments(instance);
  enc.token_ids.reserve(instance.tokens.size());
  for (const auto& t : instance.tokens) {
    const std::size_t id = vocab_.id(t);
    if (id == Vocabulary::kUnknown) ++enc.oov_count;
    enc.token_ids.push_back(id);
  }
  for (auto tag : instance.type_tags) enc.type_ids.push_back(static_cast<std::size_t>(tag));
  return enc;
}

std::vector<Var> RcnModel::embed(Tape& tape, const Bound& bound, const EncodedInstance& enc) const {
  (void)tape;
  std::vector<Var> out;
  out.reserve(enc.token_ids.size());
  for (std::size_t t = 0; t < enc.token_ids.size(); ++t) {
    out.push_back(num::concat(num::gather_row(bound.word_embedding, enc.token_ids[t]),
                              num::gather_row(bound.type_embedding, enc.type_ids[t])));
  }
  return out;
}

std::array<Var, 5> RcnModel::encode_segments(Tape& tape, const Bound& bound, std::span<const Var> embedded,
                                             const data::SegmentSplit& split) const {
  std::array<Var, 5> u;
  const std::size_t width = config_.capsule_input_dim();
  for (std::size_t s = 0; s < 5; ++s) {
    const auto& r = split.segments[s];
    u[s] = lstm_encode(tape, embedded.subspan(r.begin, r.size()), bound.encoders[s], width);
  }
  return u;
}

RcnModel::Forward RcnModel::forward(Tape& tape, const Bound& bound, const EncodedInstance& enc) const {
  Forward f;
  const auto embedded = embed(tape, bound, enc);
  f.capsule_inputs = encode_segments(tape, bound, embedded, enc.split);
  if (config_.head == HeadMode::Capsule) {
    f.capsules = capsule_forward(f.capsule_inputs, bound.capsule_weights, config_.num_classes,
                                 config_.routing_iters);
    for (const Var& l : f.capsules->lengths) f.scores.push_back(l.value().item());
  } else {
    f.logits = num::affine(*bound.softmax_weight, num::concat(f.capsule_inputs), *bound.softmax_bias);
    const Tensor& z = f.logits->value();
    double mx = z[0];
    for (std::size_t j = 1; j < z.size(); ++j) mx = std::max(mx, z[j]);
    double total = 0.0;
    for (std::size_t j = 0; j < z.size(); ++j) total += std::exp(z[j] - mx);
    for (std::size_t j = 0; j < z.size(); ++j) f.scores.push_back(std::exp(z[j] - mx) / total);
  }
  return f;
}

Var RcnModel::loss(const Forward& fwd, data::RelationLabel gold) const {
  const std::size_t g = data::index(gold);
  if (fwd.capsules) {
    return margin_loss(fwd.capsules->lengths, g, config_.m_plus, config_.m_minus, config_.lambda);
  }
  return num::softmax_cross_entropy(*fwd.logits, g);
}

Prediction RcnModel::predict(const data::RelationInstance& instance) const {
  Tape tape;
  const Bound bound = bind_frozen(tape);
  const auto enc = encode(instance);
  auto f = forward(tape, bound, enc);
  Prediction p;
  p.label = data::label_at(argmax_lowest(f.scores));
  p.scores = std::move(f.scores);
  return p;
}

std::size_t RcnModel::load_word_vectors(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open embedding file " + path.string());
  num::Parameter& table = *params_.find("embedding.word");
  const std::size_t dim = config_.word_dim;
  std::size_t loaded = 0;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string token;
    if (!(ls >> token)) continue;
    std::vector<double> values;
    double v = 0.0;
    while (ls >> v) values.push_back(v);
    if (values.size() != dim) {
      // word2vec text files start with a "count dim" header line.
      if (lineno == 1 && values.size() == 1) continue;
      throw std::invalid_argument(path.string() + ":" + std::to_string(lineno) + ": expected " +
                                  std::to_string(dim) + " values, got " + std::to_string(values.size()));
    }
    if (!vocab_.contains(token)) continue;
    const std::size_t row = vocab_.id(token);
    for (std::size_t k = 0; k < dim; ++k) table.value.at(row, k) = values[k];
    ++loaded;
  }
  return loaded;
}

}  // namespace cadsev::model
