#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cadsev/dataset/relation.hpp"
#include "cadsev/model/rcn.hpp"

namespace cadsev::model {

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double loss = 0.0;      // summed over the epoch's instances
  double train_f1 = 0.0;  // positive-class micro-F1 of the epoch's own forward passes
  std::optional<double> dev_f1;
};

/// {"epoch", "loss", "train_f1", "dev_f1"}; dev_f1 is null without a dev set.
std::string to_json_line(const EpochRecord& record);

struct TrainOptions {
  /// Held-out instances scored after every epoch.
  std::span<const data::RelationInstance> dev;
  /// When set, the checkpoint is rewritten after every epoch.
  std::optional<std::filesystem::path> epoch_checkpoint;
  /// Called after every epoch.
  std::function<void(const EpochRecord&)> on_epoch;
  /// Overrides config().epochs when set.
  std::optional<std::size_t> epochs;
};

/// Mini-batch training: per-epoch shuffle seeded from config().seed + 1,
/// forward/backward per instance with gradients summed (or averaged) over
/// the batch, then one Adam step. The final short batch is kept.
/// Throws std::invalid_argument on an empty or unlabeled training set.
std::vector<EpochRecord> train(RcnModel& model, std::span<const data::RelationInstance> instances,
                               const TrainOptions& options = {});

/// Predictions for every instance, fanned out over `threads` workers (0 = hardware).
std::vector<Prediction> predict_all(const RcnModel& model, std::span<const data::RelationInstance> instances,
                                    std::size_t threads = 1);

/// Gold labels of labeled instances; throws if any label is missing.
std::vector<data::RelationLabel> gold_labels(std::span<const data::RelationInstance> instances);

}  // namespace cadsev::model
