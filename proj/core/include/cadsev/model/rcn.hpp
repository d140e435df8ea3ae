#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <filesystem>
#include <vector>

#include "cadsev/dataset/dataset.hpp"
#include "cadsev/model/config.hpp"
#include "cadsev/numeric/ops.hpp"
#include "cadsev/numeric/parameter.hpp"
#include "cadsev/numeric/tape.hpp"

namespace cadsev::model {

/// Token inventory; id 0 is the trainable unknown-word row.
class Vocabulary {
 public:
  static constexpr std::size_t kUnknown = 0;
  static constexpr std::string_view kUnknownToken = "<unk>";

  Vocabulary();
  /// `tokens[0]` must be the unknown token; the rest must be distinct.
  explicit Vocabulary(std::vector<std::string> tokens);

  /// Tokens in order of first appearance.
  static Vocabulary build(std::span<const data::RelationInstance> instances);

  std::size_t id(std::string_view token) const;
  bool contains(std::string_view token) const;
  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }

 private:
  void add(std::string token);

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> ids_;
};

/// Stacked LSTM gate weights in i, f, c, o row blocks:
/// W [4h, input], U [4h, h], b [4h].
struct LstmVars {
  num::Var W;
  num::Var U;
  num::Var b;
  std::size_t hidden = 0;
};

/// One segment encoder: forward only, backward only, or both (bidirectional).
struct SegmentEncoderVars {
  std::optional<LstmVars> forward;
  std::optional<LstmVars> backward;
};

/// Runs the LSTM over `sequence` from zero states. Forward-only returns the
/// last hidden state, backward-only returns the hidden state at position 0
/// after a right-to-left scan, bidirectional concatenates the two. An empty
/// sequence yields a zero vector of `width`.
num::Var lstm_encode(num::Tape& tape, std::span<const num::Var> sequence,
                     const SegmentEncoderVars& encoder, std::size_t width);

/// Result of the capsule layer for one instance.
struct CapsuleGraph {
  std::vector<num::Var> activity;  // v_j per class
  std::vector<num::Var> lengths;   // |v_j| per class, scalar vars
  num::Tensor coefficients;        // c_ij [inputs, classes] from the last routing iteration
};

/// Value snapshot of a CapsuleGraph.
struct CapsuleOutput {
  std::vector<num::Tensor> activity;
  std::vector<double> lengths;
  num::Tensor coefficients;
};

CapsuleOutput snapshot(const CapsuleGraph& graph);

/// Prediction vectors W_ij·u_i, then `iterations` rounds of routing by
/// agreement starting from zero logits. `weights` holds W_ij row-major over
/// (input i, class j). Gradients flow through every iteration.
CapsuleGraph capsule_forward(std::span<const num::Var> inputs, std::span<const num::Var> weights,
                             std::size_t num_classes, std::size_t iterations);

/// Sum over classes of the capsule margin loss with `gold` as the present class.
num::Var margin_loss(std::span<const num::Var> lengths, std::size_t gold, double m_plus,
                     double m_minus, double lambda);

/// Arg-max of per-class scores; ties go to the lowest class index.
std::size_t argmax_lowest(std::span<const double> scores);

struct Prediction {
  data::RelationLabel label = data::RelationLabel::NoRelation;
  std::vector<double> scores;
};

/// Token ids, type ids and segment ranges for one instance.
struct EncodedInstance {
  std::vector<std::size_t> token_ids;
  std::vector<std::size_t> type_ids;
  data::SegmentSplit split;
  std::size_t oov_count = 0;
};

/// The recurrent capsule network: embeddings, five segment encoders, and a
/// capsule (or softmax) classification head.
class RcnModel {
 public:
  /// Fresh model with seeded uniform initialization.
  RcnModel(ModelConfig config, Vocabulary vocab);
  /// Adopts existing parameters in any order; names and shapes must match the config.
  RcnModel(ModelConfig config, Vocabulary vocab, num::ParameterStore params);

  RcnModel(RcnModel&&) noexcept = default;
  RcnModel& operator=(RcnModel&&) noexcept = default;

  const ModelConfig& config() const { return config_; }
  const Vocabulary& vocab() const { return vocab_; }
  num::ParameterStore& parameters() { return params_; }
  const num::ParameterStore& parameters() const { return params_; }

  /// Every parameter on `tape`: trainable leaves, or read-only constants.
  struct Bound {
    num::Var word_embedding;
    num::Var type_embedding;
    std::array<SegmentEncoderVars, 5> encoders;
    std::vector<num::Var> capsule_weights;  // row-major (input i, class j)
    std::optional<num::Var> softmax_weight;
    std::optional<num::Var> softmax_bias;
  };
  Bound bind_trainable(num::Tape& tape);
  Bound bind_frozen(num::Tape& tape) const;

  EncodedInstance encode(const data::RelationInstance& instance) const;

  /// e_t = word embedding ⊕ type embedding for every token.
  std::vector<num::Var> embed(num::Tape& tape, const Bound& bound, const EncodedInstance& enc) const;
  /// The five input capsules u_1..u_5.
  std::array<num::Var, 5> encode_segments(num::Tape& tape, const Bound& bound,
                                          std::span<const num::Var> embedded,
                                          const data::SegmentSplit& split) const;

  struct Forward {
    std::array<num::Var, 5> capsule_inputs;
    std::optional<CapsuleGraph> capsules;  // capsule head
    std::optional<num::Var> logits;        // softmax head
    std::vector<double> scores;            // |v_j|, or softmax probabilities
  };
  Forward forward(num::Tape& tape, const Bound& bound, const EncodedInstance& enc) const;

  /// Margin loss (capsule head) or cross-entropy (softmax head).
  num::Var loss(const Forward& fwd, data::RelationLabel gold) const;

  /// Thread-safe read-only prediction.
  Prediction predict(const data::RelationInstance& instance) const;

  /// Overwrites word-embedding rows for tokens present in a "token v1 ... vN" file.
  /// Returns the number of rows loaded.
  std::size_t load_word_vectors(const std::filesystem::path& path);

 private:
  void create_parameters();
  num::ParameterStore adopt_parameters(num::ParameterStore given) const;
  template <typename BindFn>
  Bound bind_with(BindFn&& bind) const;

  ModelConfig config_;
  Vocabulary vocab_;
  num::ParameterStore params_;
};

}  // namespace cadsev::model
