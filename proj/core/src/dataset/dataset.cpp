#include "cadsev/dataset/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <numeric>
#include <random>
#include <stdexcept>

namespace cadsev::data {

using text::EntityType;

std::string_view to_string(RelationLabel label) {
  switch (label) {
    case RelationLabel::Modifier: return "modifier(e1,e2)";
    case RelationLabel::Negative: return "negative(e2,e1)";
    case RelationLabel::Position: return "position(e1,e2)";
    case RelationLabel::PercentageE1E2: return "percentage(e1,e2)";
    case RelationLabel::PercentageE2E1: return "percentage(e2,e1)";
    case RelationLabel::NoRelation: return "no_relation";
  }
  return "no_relation";
}

RelationLabel label_from_string(std::string_view name) {
  for (std::size_t i = 0; i < kNumLabels; ++i) {
    if (to_string(label_at(i)) == name) return label_at(i);
  }
  throw std::invalid_argument("unknown relation label '" + std::string(name) + "'");
}

std::optional<std::pair<EntityType, EntityType>> signature(RelationLabel label) {
  switch (label) {
    case RelationLabel::Modifier: return std::pair{EntityType::Lumen, EntityType::Modifier};
    case RelationLabel::Negative: return std::pair{EntityType::Negative, EntityType::Modifier};
    case RelationLabel::Position: return std::pair{EntityType::Lumen, EntityType::Position};
    case RelationLabel::PercentageE1E2: return std::pair{EntityType::Modifier, EntityType::Percentage};
    case RelationLabel::PercentageE2E1: return std::pair{EntityType::Percentage, EntityType::Modifier};
    case RelationLabel::NoRelation: return std::nullopt;
  }
  return std::nullopt;
}

void RelationInstance::validate() const {
  if (type_tags.size() != tokens.size()) {
    throw std::invalid_argument("instance " + sentence_id + ": " + std::to_string(type_tags.size()) +
                                " type tags for " + std::to_string(tokens.size()) + " tokens");
  }
  for (const EntityRef* e : {&e1, &e2}) {
    if (e->span.first > e->span.last || e->span.last >= tokens.size()) {
      throw std::invalid_argument("instance " + sentence_id + ": entity span out of range");
    }
  }
  if (!(e1.span.last < e2.span.first)) {
    throw std::invalid_argument("instance " + sentence_id + ": e1 [" + std::to_string(e1.span.first) +
                                ", " + std::to_string(e1.span.last) + "] must end before e2 [" +
                                std::to_string(e2.span.first) + ", " + std::to_string(e2.span.last) + "]");
  }
}

std::vector<RelationInstance> generate_pairs(std::span<const text::Token> tokens,
                                             std::span<const text::Entity> entities,
                                             std::string sentence_id) {
  std::vector<text::Entity> sorted(entities.begin(), entities.end());
  std::sort(sorted.begin(), sorted.end(), [](const text::Entity& a, const text::Entity& b) {
    return std::pair{a.span.first, a.span.last} < std::pair{b.span.first, b.span.last};
  });
  for (std::size_t k = 1; k < sorted.size(); ++k) {
    if (sorted[k].span.first <= sorted[k - 1].span.last) {
      throw std::invalid_argument(
          "overlapping entities [" + std::to_string(sorted[k - 1].span.first) + ", " +
          std::to_string(sorted[k - 1].span.last) + "] and [" + std::to_string(sorted[k].span.first) +
          ", " + std::to_string(sorted[k].span.last) + "]");
    }
  }

  std::vector<std::string> surfaces;
  surfaces.reserve(tokens.size());
  for (const auto& t : tokens) surfaces.push_back(t.surface);
  const auto tags = text::type_tags(tokens.size(), sorted);

  std::vector<RelationInstance> out;
  out.reserve(sorted.size() * (sorted.size() > 0 ? sorted.size() - 1 : 0) / 2);
  for (std::size_t a = 0; a < sorted.size(); ++a) {
    for (std::size_t b = a + 1; b < sorted.size(); ++b) {
      RelationInstance inst;
      inst.sentence_id = sentence_id;
      inst.tokens = surfaces;
      inst.type_tags = tags;
      inst.e1 = {sorted[a].span, sorted[a].type};
      inst.e2 = {sorted[b].span, sorted[b].type};
      out.push_back(std::move(inst));
    }
  }
  return out;
}

SegmentSplit split_segments(const RelationInstance& instance) {
  instance.validate();
  const std::size_t n = instance.tokens.size();
  const auto& a = instance.e1.span;
  const auto& b = instance.e2.span;
  return SegmentSplit{{Range{0, a.first}, Range{a.first, a.last + 1}, Range{a.last + 1, b.first},
                       Range{b.first, b.last + 1}, Range{b.last + 1, n}}};
}

std::array<std::size_t, kNumLabels> label_counts(std::span<const RelationInstance> instances) {
  std::array<std::size_t, kNumLabels> counts{};
  for (const auto& inst : instances) {
    if (inst.label) ++counts[index(*inst.label)];
  }
  return counts;
}

SplitResult balance_and_split(std::span<const RelationInstance> instances, double discard_fraction,
                              double train_fraction, std::uint64_t seed) {
  if (!(discard_fraction >= 0.0 && discard_fraction <= 1.0) ||
      !(train_fraction >= 0.0 && train_fraction <= 1.0)) {
    throw std::invalid_argument("balance_and_split: fractions must lie in [0, 1]");
  }
  std::array<std::vector<std::size_t>, kNumLabels> groups;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    if (!instances[i].label) {
      throw std::invalid_argument("balance_and_split: instance " + std::to_string(i) + " (" +
                                  instances[i].sentence_id + ") has no label");
    }
    groups[index(*instances[i].label)].push_back(i);
  }

  std::mt19937_64 rng(seed);
  SplitResult result;

  auto& no_rel = groups[index(RelationLabel::NoRelation)];
  // The epsilon keeps e.g. 0.85 * 1000 from flooring to 849.
  const auto drop = static_cast<std::size_t>(
      std::floor(discard_fraction * static_cast<double>(no_rel.size()) + 1e-9));
  std::shuffle(no_rel.begin(), no_rel.end(), rng);
  no_rel.erase(no_rel.begin(), no_rel.begin() + static_cast<std::ptrdiff_t>(drop));
  result.discarded = drop;

  std::vector<std::size_t> train_idx;
  std::vector<std::size_t> test_idx;
  for (auto& group : groups) {
    std::shuffle(group.begin(), group.end(), rng);
    const auto n_train = static_cast<std::size_t>(
        std::floor(train_fraction * static_cast<double>(group.size()) + 0.5));
    train_idx.insert(train_idx.end(), group.begin(), group.begin() + static_cast<std::ptrdiff_t>(n_train));
    test_idx.insert(test_idx.end(), group.begin() + static_cast<std::ptrdiff_t>(n_train), group.end());
  }
  std::sort(train_idx.begin(), train_idx.end());
  std::sort(test_idx.begin(), test_idx.end());
  for (std::size_t i : train_idx) result.train.push_back(instances[i]);
  for (std::size_t i : test_idx) result.test.push_back(instances[i]);
  return result;
}

namespace {

nlohmann::json entity_json(const EntityRef& e) {
  return {{"span", {e.span.first, e.span.last}}, {"type", text::to_string(e.type)}};
}

EntityRef entity_from_json(const nlohmann::json& j) {
  const auto span = j.at("span").get<std::vector<std::size_t>>();
  if (span.size() != 2) throw std::invalid_argument("instance: span must have two indices");
  return {{span[0], span[1]}, text::entity_type_from_string(j.at("type").get<std::string>())};
}

}  // namespace

std::string to_json_line(const RelationInstance& inst) {
  nlohmann::json j;
  j["sentence_id"] = inst.sentence_id;
  j["tokens"] = inst.tokens;
  auto& tags = j["type_tags"] = nlohmann::json::array();
  for (auto t : inst.type_tags) tags.push_back(text::to_string(t));
  j["e1"] = entity_json(inst.e1);
  j["e2"] = entity_json(inst.e2);
  if (inst.label) j["label"] = to_string(*inst.label);
  return j.dump();
}

RelationInstance from_json_line(std::string_view line) {
  RelationInstance inst;
  try {
    const auto j = nlohmann::json::parse(line);
    inst.sentence_id = j.value("sentence_id", std::string{});
    inst.tokens = j.at("tokens").get<std::vector<std::string>>();
    for (const auto& t : j.at("type_tags")) inst.type_tags.push_back(text::entity_type_from_string(t.get<std::string>()));
    inst.e1 = entity_from_json(j.at("e1"));
    inst.e2 = entity_from_json(j.at("e2"));
    if (j.contains("label") && !j.at("label").is_null()) {
      inst.label = label_from_string(j.at("label").get<std::string>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("malformed instance record: ") + e.what());
  }
  inst.validate();
  return inst;
}

void write_instances(const std::filesystem::path& path, std::span<const RelationInstance> instances) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write instance file " + path.string());
  for (const auto& inst : instances) out << to_json_line(inst) << '\n';
}

std::vector<RelationInstance> read_instances(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open instance file " + path.string());
  std::vector<RelationInstance> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(from_json_line(line));
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace cadsev::data
