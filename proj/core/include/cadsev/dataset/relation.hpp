#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cadsev/text/ner.hpp"

namespace cadsev::data {

/// Directed relation classes. The integer value is the classifier output index:
///   0 modifier(e1,e2)    Lumen -> Modifier
///   1 negative(e2,e1)    Negative precedes the Modifier it negates
///   2 position(e1,e2)    Lumen -> Position
///   3 percentage(e1,e2)  Modifier precedes its Percentage ("狭窄40%")
///   4 percentage(e2,e1)  Percentage precedes its Modifier ("40%狭窄")
///   5 no_relation
enum class RelationLabel : std::uint8_t {
  Modifier = 0,
  Negative = 1,
  Position = 2,
  PercentageE1E2 = 3,
  PercentageE2E1 = 4,
  NoRelation = 5,
};
inline constexpr std::size_t kNumLabels = 6;
inline constexpr std::size_t kNumPositiveLabels = 5;

std::string_view to_string(RelationLabel label);
RelationLabel label_from_string(std::string_view name);
inline std::size_t index(RelationLabel label) { return static_cast<std::size_t>(label); }
inline RelationLabel label_at(std::size_t i) { return static_cast<RelationLabel>(i); }

/// Entity types a label's (e1, e2) arguments must carry, or nullopt for no_relation.
std::optional<std::pair<text::EntityType, text::EntityType>> signature(RelationLabel label);

struct EntityRef {
  text::TokenSpan span;
  text::EntityType type = text::EntityType::None;

  friend bool operator==(const EntityRef&, const EntityRef&) = default;
};

/// A candidate entity pair inside one tokenized sentence; e1 lies strictly left of e2.
struct RelationInstance {
  std::string sentence_id;
  std::vector<std::string> tokens;
  std::vector<text::EntityType> type_tags;
  EntityRef e1;
  EntityRef e2;
  std::optional<RelationLabel> label;

  /// Throws std::invalid_argument when the structural invariants fail.
  void validate() const;
};

/// Half-open token index range.
struct Range {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  bool empty() const { return begin == end; }
  friend bool operator==(const Range&, const Range&) = default;
};

/// Left context, e1, middle context, e2, right context.
struct SegmentSplit {
  std::array<Range, 5> segments;
};

}  // namespace cadsev::data
