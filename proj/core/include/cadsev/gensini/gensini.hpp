#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cadsev/dataset/relation.hpp"
#include "cadsev/text/lexicon.hpp"

namespace cadsev::gensini {

enum class SeverityLevel : std::uint8_t { Mild, Moderate, Severe };
inline constexpr std::size_t kNumLevels = 3;

std::string_view to_string(SeverityLevel level);
SeverityLevel level_from_string(std::string_view name);

/// Raised for a malformed document, e.g. a linked percentage outside (0, 100].
class RecordError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// 0 -> 0, (0, 50) -> 1, [50, 75) -> 2, [75, 100) -> 3, 100 -> 4.
/// Diameters below 1% count as no lesion. Throws outside [0, 100].
int lesion_score(double diameter);

/// <= 7 mild, 8..14 moderate, >= 15 severe.
SeverityLevel classify_total(int total);

/// An entity mention anywhere in a document.
struct Mention {
  std::string surface;
  text::EntityType type = text::EntityType::None;
};

/// A classified pair; `e1`/`e2` index the document's mentions.
struct RelationTriple {
  std::size_t e1 = 0;
  std::size_t e2 = 0;
  data::RelationLabel label = data::RelationLabel::NoRelation;
  friend bool operator==(const RelationTriple&, const RelationTriple&) = default;
};

/// One modifier linked to a lumen and what it contributed.
struct Evidence {
  std::size_t lumen_mention = 0;
  std::size_t modifier_mention = 0;
  std::string modifier;
  text::ModifierKind kind = text::ModifierKind::Stenosis;
  std::vector<double> percentages;
  std::vector<std::string> positions;
  bool negated = false;
  /// Diameter this modifier implies; nullopt when negated.
  std::optional<double> contribution;
};

struct LesionRecord {
  std::string lumen;  // canonical name
  text::Side side = text::Side::Left;
  double diameter = 0.0;
  int score = 0;
  std::vector<Evidence> evidence;
};

struct LesionSet {
  std::vector<LesionRecord> lesions;  // order of first mention
  std::vector<std::string> warnings;
};

/// Follows modifier links from every lumen mention. Negated modifiers
/// contribute nothing; occlusion counts as 100, normal as 0, stenosis as
/// the largest linked percentage (0 with a warning when none is linked).
/// Triples whose argument types do not fit their label are skipped with a
/// warning. Throws RecordError for a linked percentage outside (0, 100].
LesionSet aggregate_lesions(std::span<const Mention> mentions, std::span<const RelationTriple> relations,
                            const text::Lexicon& lexicon);

struct SeverityReport {
  std::string id;
  std::vector<LesionRecord> lesions;
  int left_total = 0;
  int right_total = 0;
  int total = 0;
  SeverityLevel level = SeverityLevel::Mild;
  std::vector<std::string> warnings;
  /// Set when the document could not be scored.
  std::optional<std::string> error;
};

/// Sums the precomputed lesion scores per side and overall.
SeverityReport total_and_classify(std::vector<LesionRecord> lesions);

/// Convenience: aggregate, then total and classify.
SeverityReport score_document(std::span<const Mention> mentions, std::span<const RelationTriple> relations,
                              const text::Lexicon& lexicon);

/// {"id", "lesions": [{"lumen", "side", "diameter", "score"}], "left_total",
///  "right_total", "total", "level"}, plus "warnings"/"error" when present.
std::string to_json_line(const SeverityReport& report);

}  // namespace cadsev::gensini
