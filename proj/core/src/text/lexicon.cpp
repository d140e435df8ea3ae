#include "cadsev/text/lexicon.hpp"

#include <algorithm>
#include <fstream>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>
#include <stdexcept>

#include "text_util.hpp"

namespace cadsev::text {

// Defined in the generated builtin_lexicons.cpp.
extern const char* const kBuiltinLexiconZh;
extern const char* const kBuiltinLexiconAscii;

std::string_view to_string(EntityType type) {
  switch (type) {
    case EntityType::None: return "none";
    case EntityType::Lumen: return "Lumen";
    case EntityType::Modifier: return "Modifier";
    case EntityType::Negative: return "Negative";
    case EntityType::Position: return "Position";
    case EntityType::Percentage: return "Percentage";
  }
  return "none";
}

EntityType entity_type_from_string(std::string_view name) {
  for (std::size_t i = 0; i < kNumEntityTypes; ++i) {
    const auto t = static_cast<EntityType>(i);
    if (to_string(t) == name) return t;
  }
  throw std::invalid_argument("unknown entity type '" + std::string(name) + "'");
}

std::string_view to_string(Side side) { return side == Side::Left ? "left" : "right"; }

std::string_view to_string(ModifierKind kind) {
  switch (kind) {
    case ModifierKind::Normal: return "normal";
    case ModifierKind::Stenosis: return "stenosis";
    case ModifierKind::Occlusion: return "occlusion";
  }
  return "stenosis";
}

namespace {

Side side_from_string(const std::string& s) {
  if (s == "left") return Side::Left;
  if (s == "right") return Side::Right;
  throw std::invalid_argument("lexicon: lumen side must be 'left' or 'right', got '" + s + "'");
}

ModifierKind kind_from_string(const std::string& s) {
  if (s == "normal") return ModifierKind::Normal;
  if (s == "stenosis") return ModifierKind::Stenosis;
  if (s == "occlusion") return ModifierKind::Occlusion;
  throw std::invalid_argument("lexicon: modifier kind must be normal/stenosis/occlusion, got '" + s +
                              "'");
}

}  // namespace

Lexicon::Lexicon(std::vector<LumenTerm> lumens, std::vector<ModifierTerm> modifiers,
                 std::vector<std::string> negatives, std::vector<std::string> positions)
    : lumens_(std::move(lumens)),
      modifiers_(std::move(modifiers)),
      negatives_(std::move(negatives)),
      positions_(std::move(positions)) {
  for (std::size_t i = 0; i < lumens_.size(); ++i) {
    auto& l = lumens_[i];
    if (l.canonical.empty()) l.canonical = l.term;
    index_term(l.term, EntityType::Lumen);
    lumen_index_.emplace(l.term, i);
  }
  for (std::size_t i = 0; i < modifiers_.size(); ++i) {
    index_term(modifiers_[i].term, EntityType::Modifier);
    modifier_index_.emplace(modifiers_[i].term, i);
  }
  for (const auto& t : negatives_) index_term(t, EntityType::Negative);
  for (const auto& t : positions_) index_term(t, EntityType::Position);

  std::set<std::size_t, std::greater<>> lengths;
  for (const auto& [term, type] : types_) lengths.insert(term.size());
  term_lengths_.assign(lengths.begin(), lengths.end());
}

void Lexicon::index_term(const std::string& term, EntityType type) {
  if (term.empty()) throw std::invalid_argument("lexicon: empty term");
  if (std::any_of(term.begin(), term.end(), [](char c) { return detail::is_ascii_space(c); })) {
    throw std::invalid_argument("lexicon: term '" + term + "' contains whitespace");
  }
  auto [it, inserted] = types_.emplace(term, type);
  if (!inserted) {
    throw std::invalid_argument("lexicon: duplicate term '" + term + "' (" +
                                std::string(to_string(it->second)) + " and " +
                                std::string(to_string(type)) + ")");
  }
}

Lexicon Lexicon::from_json(std::string_view json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("lexicon: malformed JSON: ") + e.what());
  }
  std::vector<LumenTerm> lumens;
  std::vector<ModifierTerm> modifiers;
  std::vector<std::string> negatives;
  std::vector<std::string> positions;
  try {
    for (const auto& e : j.at("lumen")) {
      if (!e.contains("side")) {
        throw std::invalid_argument("lexicon: lumen term '" + e.at("term").get<std::string>() +
                                    "' has no side tag");
      }
      lumens.push_back({e.at("term").get<std::string>(),
                        side_from_string(e.at("side").get<std::string>()),
                        e.value("canonical", std::string{})});
    }
    for (const auto& e : j.at("modifier")) {
      modifiers.push_back(
          {e.at("term").get<std::string>(), kind_from_string(e.at("kind").get<std::string>())});
    }
    negatives = j.at("negative").get<std::vector<std::string>>();
    positions = j.at("position").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("lexicon: schema violation: ") + e.what());
  }
  return Lexicon(std::move(lumens), std::move(modifiers), std::move(negatives), std::move(positions));
}

Lexicon Lexicon::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open lexicon file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

const Lexicon& Lexicon::builtin() {
  static const Lexicon lex = from_json(kBuiltinLexiconZh);
  return lex;
}

const Lexicon& Lexicon::builtin_ascii() {
  static const Lexicon lex = from_json(kBuiltinLexiconAscii);
  return lex;
}

std::string Lexicon::to_json() const {
  nlohmann::json j;
  j["lumen"] = nlohmann::json::array();
  for (const auto& l : lumens_) {
    nlohmann::json e{{"term", l.term}, {"side", to_string(l.side)}};
    if (l.canonical != l.term) e["canonical"] = l.canonical;
    j["lumen"].push_back(e);
  }
  j["modifier"] = nlohmann::json::array();
  for (const auto& m : modifiers_) j["modifier"].push_back({{"term", m.term}, {"kind", to_string(m.kind)}});
  j["negative"] = negatives_;
  j["position"] = positions_;
  return j.dump(2);
}

std::optional<EntityType> Lexicon::type_of(std::string_view term) const {
  auto it = types_.find(std::string(term));
  if (it == types_.end()) return std::nullopt;
  return it->second;
}

const LumenTerm* Lexicon::lumen(std::string_view term) const {
  auto it = lumen_index_.find(std::string(term));
  return it == lumen_index_.end() ? nullptr : &lumens_[it->second];
}

const ModifierTerm* Lexicon::modifier(std::string_view term) const {
  auto it = modifier_index_.find(std::string(term));
  return it == modifier_index_.end() ? nullptr : &modifiers_[it->second];
}

std::size_t Lexicon::longest_match(std::string_view text, std::size_t pos) const {
  const std::size_t remaining = text.size() - pos;
  for (std::size_t len : term_lengths_) {
    if (len > remaining) continue;
    const std::string key(text.substr(pos, len));
    if (types_.find(key) == types_.end()) continue;
    if (!detail::on_word_boundaries(text, pos, len)) continue;
    return len;
  }
  return 0;
}

}  // namespace cadsev::text
