#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cadsev/dataset/relation.hpp"
#include "cadsev/gensini/gensini.hpp"
#include "cadsev/text/lexicon.hpp"
#include "cadsev/text/ner.hpp"

namespace cadsev::syngen {

/// Surface language of generated text. Both share the same token structure.
enum class SurfaceMode : std::uint8_t { Chinese, Ascii };
std::string_view to_string(SurfaceMode mode);
SurfaceMode surface_mode_from_string(std::string_view name);

/// A directed gold relation between two entities of one sentence. Indices
/// point into GoldSentence::entities with e1 < e2.
struct GoldRelation {
  std::size_t e1 = 0;
  std::size_t e2 = 0;
  data::RelationLabel label = data::RelationLabel::NoRelation;
  friend bool operator==(const GoldRelation&, const GoldRelation&) = default;
};

struct GoldSentence {
  std::string text;
  std::vector<text::Token> tokens;
  std::vector<text::Entity> entities;
  std::vector<GoldRelation> relations;
};

struct GoldLesion {
  std::string lumen;
  text::Side side = text::Side::Left;
  double diameter = 0.0;
};

struct GoldDocument {
  std::string id;
  std::string text;
  std::vector<GoldSentence> sentences;
  std::vector<GoldLesion> diameters;  // order of first mention
  int total = 0;
  gensini::SeverityLevel severity = gensini::SeverityLevel::Mild;
};

/// Template-grammar knobs. Percentages, fan-out and lumen counts per
/// severity profile are fixed in the generator; these control the mix.
struct GenConfig {
  std::size_t documents = 1000;
  /// Chance that a lumen group's finding is a negated stenosis.
  double negation_probability = 0.25;
  /// Chance that a finding reads "normal".
  double normal_probability = 0.10;
  /// Chance that a stenosis is written modifier-first ("狭窄40%") rather than "40%狭窄".
  double modifier_first_probability = 0.28;
  double position_probability = 0.5;
  /// Chance that several lumens share one finding in a conjunction.
  double conjunction_probability = 0.35;
  std::size_t max_fanout = 5;
  /// Chance of a second, separately positioned stenosis on the same lumen.
  double second_lesion_probability = 0.15;
  /// Chance of adding a filler clause without relations.
  double filler_probability = 0.4;
  /// Document severity mix (mild, moderate, severe), reached by rejection sampling.
  std::array<double, gensini::kNumLevels> severity_mix{0.725, 0.225, 0.05};
  /// Per-label instance mix, indexed by RelationLabel.
  std::array<double, data::kNumLabels> class_mix{1068, 406, 389, 100, 256, 1977};
  /// When nonzero, the instance file is sampled to this many instances at
  /// `class_mix` proportions, generating extra documents if needed.
  std::size_t target_instances = 0;
  /// Without a target, this fraction of no_relation instances is dropped.
  double discard_fraction = 0.85;
  std::uint64_t seed = 1;
  SurfaceMode mode = SurfaceMode::Chinese;

  void validate() const;
};

struct Corpus {
  std::vector<GoldDocument> documents;
  std::vector<data::RelationInstance> instances;
  std::array<std::size_t, data::kNumLabels> counts{};
  /// Shortfalls against the requested mix, one line per affected label.
  std::vector<std::string> notes;
};

/// Deterministic for a fixed config. Throws std::logic_error if a generated
/// document fails its self-consistency checks.
Corpus generate_corpus(const GenConfig& config, const text::Lexicon& lexicon);

/// Generates document `index` of the corpus stream.
GoldDocument generate_document(const GenConfig& config, const text::Lexicon& lexicon, std::size_t index);

/// Every candidate pair of every sentence, labeled from the gold relations.
std::vector<data::RelationInstance> labeled_instances(const GoldDocument& doc);

/// Document-level mentions and relation triples for scoring.
std::vector<gensini::Mention> mentions(const GoldDocument& doc);
std::vector<gensini::RelationTriple> gold_triples(const GoldDocument& doc);

/// Scales `mix` to integer counts summing to `total` (largest remainder).
std::array<std::size_t, data::kNumLabels> target_counts(const std::array<double, data::kNumLabels>& mix,
                                                       std::size_t total);

std::string to_json_line(const GoldDocument& doc);
GoldDocument gold_from_json_line(std::string_view line);
void write_gold(const std::filesystem::path& path, std::span<const GoldDocument> docs);
std::vector<GoldDocument> read_gold(const std::filesystem::path& path);

}  // namespace cadsev::syngen
