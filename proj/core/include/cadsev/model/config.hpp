#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "cadsev/numeric/adam.hpp"

namespace cadsev::model {

/// Classification head: capsules with dynamic routing, or a dense softmax layer (ablation).
enum class HeadMode : std::uint8_t { Capsule, Softmax };
/// Segment encoders: forward/backward LSTMs at the sentence edges with Bi-LSTMs
/// in the middle, or Bi-LSTMs for all five segments (ablation).
enum class EncoderMode : std::uint8_t { UniBi, AllBi };
/// How per-instance losses combine within a mini-batch.
enum class LossReduction : std::uint8_t { Sum, Mean };

std::string_view to_string(HeadMode m);
std::string_view to_string(EncoderMode m);
std::string_view to_string(LossReduction r);
HeadMode head_mode_from_string(std::string_view s);
EncoderMode encoder_mode_from_string(std::string_view s);
LossReduction loss_reduction_from_string(std::string_view s);

struct ModelConfig {
  std::size_t word_dim = 128;
  std::size_t type_dim = 128;
  std::size_t bi_hidden = 64;
  std::size_t uni_hidden = 128;
  std::size_t capsule_dim = 64;
  std::size_t num_classes = 6;
  std::size_t routing_iters = 4;
  std::size_t batch_size = 128;
  std::size_t epochs = 8;
  num::AdamConfig adam;
  double m_plus = 0.9;
  double m_minus = 0.1;
  double lambda = 0.5;
  HeadMode head = HeadMode::Capsule;
  EncoderMode encoder = EncoderMode::UniBi;
  LossReduction loss_reduction = LossReduction::Sum;
  double init_range = 0.08;
  std::uint64_t seed = 1;
  /// Optional pretrained word vectors ("token v1 ... vN" per line).
  std::string embedding_file;

  /// Width of every input capsule; uni-directional and bi-directional encoders must agree.
  std::size_t capsule_input_dim() const { return 2 * bi_hidden; }

  /// Throws std::invalid_argument listing the first violated constraint.
  void validate() const;
};

std::string to_json(const ModelConfig& config);
/// Missing keys keep their defaults; unknown keys are rejected.
ModelConfig config_from_json(std::string_view json_text);
ModelConfig load_config(const std::filesystem::path& path);

}  // namespace cadsev::model
