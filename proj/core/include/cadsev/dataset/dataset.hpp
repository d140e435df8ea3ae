#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cadsev/dataset/relation.hpp"

namespace cadsev::data {

/// One unlabeled instance per unordered entity pair, e1 being the earlier
/// entity. Output order depends only on entity positions, not on input order.
/// Throws on overlapping entities.
std::vector<RelationInstance> generate_pairs(std::span<const text::Token> tokens,
                                             std::span<const text::Entity> entities,
                                             std::string sentence_id = {});

SegmentSplit split_segments(const RelationInstance& instance);

struct SplitResult {
  std::vector<RelationInstance> train;
  std::vector<RelationInstance> test;
  std::size_t discarded = 0;
};

/// Drops floor(discard_fraction * n) randomly chosen no_relation instances,
/// then splits each label group at round(train_fraction * group size).
/// Both sides keep the input order.
SplitResult balance_and_split(std::span<const RelationInstance> instances, double discard_fraction,
                              double train_fraction, std::uint64_t seed);

/// Per-label counts indexed by RelationLabel.
std::array<std::size_t, kNumLabels> label_counts(std::span<const RelationInstance> instances);

// Instance file: one JSON object per line,
// {"sentence_id", "tokens", "type_tags", "e1": {"span", "type"}, "e2": {...}, "label"?}.
std::string to_json_line(const RelationInstance& instance);
RelationInstance from_json_line(std::string_view line);
void write_instances(const std::filesystem::path& path, std::span<const RelationInstance> instances);
std::vector<RelationInstance> read_instances(const std::filesystem::path& path);

}  // namespace cadsev::data
