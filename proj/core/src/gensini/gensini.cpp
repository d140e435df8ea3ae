#include "cadsev/gensini/gensini.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <nlohmann/json.hpp>

#include "cadsev/text/ner.hpp"

namespace cadsev::gensini {

using data::RelationLabel;
using text::EntityType;

std::string_view to_string(SeverityLevel level) {
  switch (level) {
    case SeverityLevel::Mild: return "mild";
    case SeverityLevel::Moderate: return "moderate";
    case SeverityLevel::Severe: return "severe";
  }
  return "mild";
}

SeverityLevel level_from_string(std::string_view name) {
  if (name == "mild") return SeverityLevel::Mild;
  if (name == "moderate") return SeverityLevel::Moderate;
  if (name == "severe") return SeverityLevel::Severe;
  throw std::invalid_argument("unknown severity level '" + std::string(name) + "'");
}

int lesion_score(double diameter) {
  if (!(diameter >= 0.0 && diameter <= 100.0)) {
    throw std::invalid_argument("lesion diameter " + std::to_string(diameter) + " outside [0, 100]");
  }
  if (diameter < 1.0) return 0;
  if (diameter < 50.0) return 1;
  if (diameter < 75.0) return 2;
  if (diameter < 100.0) return 3;
  return 4;
}

SeverityLevel classify_total(int total) {
  if (total <= 7) return SeverityLevel::Mild;
  if (total <= 14) return SeverityLevel::Moderate;
  return SeverityLevel::Severe;
}

namespace {

struct Links {
  std::vector<std::vector<std::size_t>> modifiers_of_lumen;
  std::vector<std::vector<std::size_t>> percentages_of_modifier;
  std::vector<std::vector<std::size_t>> positions_of_lumen;
  std::vector<bool> negated;
};

std::string describe(std::span<const Mention> mentions, std::size_t i) {
  return "'" + mentions[i].surface + "' (" + std::string(text::to_string(mentions[i].type)) + " #" +
         std::to_string(i) + ")";
}

}  // namespace

LesionSet aggregate_lesions(std::span<const Mention> mentions, std::span<const RelationTriple> relations,
                            const text::Lexicon& lexicon) {
  const std::size_t n = mentions.size();
  LesionSet out;
  Links links{std::vector<std::vector<std::size_t>>(n), std::vector<std::vector<std::size_t>>(n),
              std::vector<std::vector<std::size_t>>(n), std::vector<bool>(n, false)};

  for (const auto& r : relations) {
    if (r.label == RelationLabel::NoRelation) continue;
    if (r.e1 >= n || r.e2 >= n) {
      throw RecordError("relation references mention " + std::to_string(std::max(r.e1, r.e2)) + " of " +
                        std::to_string(n));
    }
    const auto sig = *data::signature(r.label);
    // Pairs are stored earlier-first; the label signature fixes which argument plays which role.
    std::size_t a = r.e1;
    std::size_t b = r.e2;
    if (mentions[a].type != sig.first || mentions[b].type != sig.second) {
      std::swap(a, b);
      if (mentions[a].type != sig.first || mentions[b].type != sig.second) {
        out.warnings.push_back("skipped " + std::string(data::to_string(r.label)) + " between " +
                               describe(mentions, r.e1) + " and " + describe(mentions, r.e2) +
                               ": argument types do not match");
        continue;
      }
    }
    switch (r.label) {
      case RelationLabel::Modifier: links.modifiers_of_lumen[a].push_back(b); break;
      case RelationLabel::Negative: links.negated[b] = true; break;
      case RelationLabel::Position: links.positions_of_lumen[a].push_back(b); break;
      case RelationLabel::PercentageE1E2: links.percentages_of_modifier[a].push_back(b); break;
      case RelationLabel::PercentageE2E1: links.percentages_of_modifier[b].push_back(a); break;
      case RelationLabel::NoRelation: break;
    }
  }

  std::map<std::string, std::size_t> record_of;
  for (std::size_t i = 0; i < n; ++i) {
    if (mentions[i].type != EntityType::Lumen) continue;
    const text::LumenTerm* term = lexicon.lumen(mentions[i].surface);
    if (term == nullptr) throw RecordError("lumen " + describe(mentions, i) + " is not in the lexicon");
    auto [it, inserted] = record_of.emplace(term->canonical, out.lesions.size());
    if (inserted) out.lesions.push_back(LesionRecord{term->canonical, term->side, 0.0, 0, {}});
    LesionRecord& rec = out.lesions[it->second];

    std::vector<std::string> positions;
    for (std::size_t p : links.positions_of_lumen[i]) positions.push_back(mentions[p].surface);

    for (std::size_t m : links.modifiers_of_lumen[i]) {
      const text::ModifierTerm* mod = lexicon.modifier(mentions[m].surface);
      if (mod == nullptr) throw RecordError("modifier " + describe(mentions, m) + " is not in the lexicon");
      Evidence ev;
      ev.lumen_mention = i;
      ev.modifier_mention = m;
      ev.modifier = mentions[m].surface;
      ev.kind = mod->kind;
      ev.positions = positions;
      ev.negated = links.negated[m];
      for (std::size_t p : links.percentages_of_modifier[m]) {
        const auto value = text::parse_percentage(mentions[p].surface);
        if (!value || !(*value > 0.0 && *value <= 100.0)) {
          throw RecordError("percentage " + describe(mentions, p) + " is outside (0, 100]");
        }
        ev.percentages.push_back(*value);
      }
      if (!ev.negated) {
        switch (mod->kind) {
          case text::ModifierKind::Occlusion: ev.contribution = 100.0; break;
          case text::ModifierKind::Normal: ev.contribution = 0.0; break;
          case text::ModifierKind::Stenosis:
            if (ev.percentages.empty()) {
              out.warnings.push_back("stenosis " + describe(mentions, m) + " on " + term->canonical +
                                     " has no percentage; scored as 0");
              ev.contribution = 0.0;
            } else {
              ev.contribution = *std::max_element(ev.percentages.begin(), ev.percentages.end());
            }
            break;
        }
        rec.diameter = std::max(rec.diameter, *ev.contribution);
      }
      rec.evidence.push_back(std::move(ev));
    }
  }
  for (auto& rec : out.lesions) rec.score = lesion_score(rec.diameter);
  return out;
}

SeverityReport total_and_classify(std::vector<LesionRecord> lesions) {
  SeverityReport report;
  for (const auto& rec : lesions) {
    (rec.side == text::Side::Left ? report.left_total : report.right_total) += rec.score;
  }
  report.total = report.left_total + report.right_total;
  report.level = classify_total(report.total);
  report.lesions = std::move(lesions);
  return report;
}

SeverityReport score_document(std::span<const Mention> mentions, std::span<const RelationTriple> relations,
                              const text::Lexicon& lexicon) {
  LesionSet set = aggregate_lesions(mentions, relations, lexicon);
  SeverityReport report = total_and_classify(std::move(set.lesions));
  report.warnings = std::move(set.warnings);
  return report;
}

std::string to_json_line(const SeverityReport& report) {
  nlohmann::json j;
  j["id"] = report.id;
  auto& lesions = j["lesions"] = nlohmann::json::array();
  for (const auto& rec : report.lesions) {
    lesions.push_back({{"lumen", rec.lumen},
                       {"side", text::to_string(rec.side)},
                       {"diameter", rec.diameter},
                       {"score", rec.score}});
  }
  j["left_total"] = report.left_total;
  j["right_total"] = report.right_total;
  j["total"] = report.total;
  j["level"] = to_string(report.level);
  if (!report.warnings.empty()) j["warnings"] = report.warnings;
  if (report.error) j["error"] = *report.error;
  return j.dump();
}

}  // namespace cadsev::gensini
