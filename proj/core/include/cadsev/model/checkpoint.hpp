#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "cadsev/model/rcn.hpp"

namespace cadsev::model {

inline constexpr std::string_view kCheckpointFormat = "cadsev-rcn-checkpoint";
inline constexpr int kCheckpointVersion = 1;

/// JSON document with the config, vocabulary, and every parameter as
/// {shape, values}. Values use shortest round-trip formatting, so a
/// save/load cycle reproduces the model bit for bit.
std::string checkpoint_json(const RcnModel& model);
RcnModel model_from_checkpoint_json(std::string_view text);

void save_checkpoint(const RcnModel& model, const std::filesystem::path& path);
/// Throws std::runtime_error naming the path when the file is missing or malformed.
RcnModel load_checkpoint(const std::filesystem::path& path);

}  // namespace cadsev::model
