#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace cadsev::text {

/// Closed entity taxonomy. `None` tags tokens outside every entity.
enum class EntityType : std::uint8_t { None = 0, Lumen, Modifier, Negative, Position, Percentage };
inline constexpr std::size_t kNumEntityTypes = 6;

std::string_view to_string(EntityType type);
/// Accepts the names produced by `to_string`; throws on anything else.
EntityType entity_type_from_string(std::string_view name);

enum class Side : std::uint8_t { Left, Right };
enum class ModifierKind : std::uint8_t { Normal, Stenosis, Occlusion };

std::string_view to_string(Side side);
std::string_view to_string(ModifierKind kind);

struct LumenTerm {
  std::string term;
  Side side = Side::Left;
  /// Name that repeated or variant mentions aggregate under.
  std::string canonical;
};

struct ModifierTerm {
  std::string term;
  ModifierKind kind = ModifierKind::Stenosis;
};

/// Per-type term dictionaries used for longest-match entity recognition.
///
/// JSON schema:
///   {"lumen": [{"term", "side", "canonical"?}], "modifier": [{"term", "kind"}],
///    "negative": [term], "position": [term]}
class Lexicon {
 public:
  Lexicon(std::vector<LumenTerm> lumens, std::vector<ModifierTerm> modifiers,
          std::vector<std::string> negatives, std::vector<std::string> positions);

  static Lexicon from_json(std::string_view json_text);
  static Lexicon load(const std::filesystem::path& path);
  /// Chinese default lexicon shipped in data/lexicon.json.
  static const Lexicon& builtin();
  /// Transliterated ASCII lexicon shipped in data/lexicon_ascii.json.
  static const Lexicon& builtin_ascii();

  std::string to_json() const;

  std::optional<EntityType> type_of(std::string_view term) const;
  const LumenTerm* lumen(std::string_view term) const;
  const ModifierTerm* modifier(std::string_view term) const;

  const std::vector<LumenTerm>& lumens() const { return lumens_; }
  const std::vector<ModifierTerm>& modifiers() const { return modifiers_; }
  const std::vector<std::string>& negatives() const { return negatives_; }
  const std::vector<std::string>& positions() const { return positions_; }

  /// Length in bytes of the longest term starting at `pos`, or 0. Terms made of
  /// ASCII word characters only match on word boundaries.
  std::size_t longest_match(std::string_view text, std::size_t pos) const;

 private:
  void index_term(const std::string& term, EntityType type);

  std::vector<LumenTerm> lumens_;
  std::vector<ModifierTerm> modifiers_;
  std::vector<std::string> negatives_;
  std::vector<std::string> positions_;
  std::unordered_map<std::string, EntityType> types_;
  std::unordered_map<std::string, std::size_t> lumen_index_;
  std::unordered_map<std::string, std::size_t> modifier_index_;
  std::vector<std::size_t> term_lengths_;  // distinct lengths, descending
};

}  // namespace cadsev::text
