#include "cadsev/syngen/syngen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <numeric>
#include <random>
#include <stdexcept>

#include "cadsev/dataset/dataset.hpp"

namespace cadsev::syngen {

using data::RelationLabel;
using text::EntityType;

std::string_view to_string(SurfaceMode mode) { return mode == SurfaceMode::Chinese ? "zh" : "ascii"; }

SurfaceMode surface_mode_from_string(std::string_view name) {
  if (name == "zh") return SurfaceMode::Chinese;
  if (name == "ascii") return SurfaceMode::Ascii;
  throw std::invalid_argument("surface mode must be 'zh' or 'ascii', got '" + std::string(name) + "'");
}

void GenConfig::validate() const {
  auto prob = [](double p, const char* what) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument(std::string("gen config: ") + what + " must lie in [0, 1]");
  };
  prob(negation_probability, "negation_probability");
  prob(normal_probability, "normal_probability");
  prob(modifier_first_probability, "modifier_first_probability");
  prob(position_probability, "position_probability");
  prob(conjunction_probability, "conjunction_probability");
  prob(second_lesion_probability, "second_lesion_probability");
  prob(filler_probability, "filler_probability");
  prob(discard_fraction, "discard_fraction");
  if (negation_probability + normal_probability > 1.0) {
    throw std::invalid_argument("gen config: negation_probability + normal_probability exceeds 1");
  }
  if (max_fanout < 1) throw std::invalid_argument("gen config: max_fanout must be at least 1");
  double level_total = 0.0;
  for (double w : severity_mix) {
    if (!(w >= 0.0)) throw std::invalid_argument("gen config: severity_mix weights must be non-negative");
    level_total += w;
  }
  if (!(level_total > 0.0)) throw std::invalid_argument("gen config: severity_mix is all zero");
  double class_total = 0.0;
  for (double w : class_mix) {
    if (!(w >= 0.0)) throw std::invalid_argument("gen config: class_mix weights must be non-negative");
    class_total += w;
  }
  if (target_instances > 0 && !(class_total > 0.0)) throw std::invalid_argument("gen config: class_mix is all zero");
}

std::array<std::size_t, data::kNumLabels> target_counts(const std::array<double, data::kNumLabels>& mix,
                                                       std::size_t total) {
  const double sum = std::accumulate(mix.begin(), mix.end(), 0.0);
  std::array<std::size_t, data::kNumLabels> counts{};
  if (!(sum > 0.0)) return counts;
  std::array<double, data::kNumLabels> remainder{};
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < data::kNumLabels; ++c) {
    const double exact = mix[c] / sum * static_cast<double>(total);
    counts[c] = static_cast<std::size_t>(std::floor(exact));
    remainder[c] = exact - std::floor(exact);
    assigned += counts[c];
  }
  std::array<std::size_t, data::kNumLabels> order{};
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t k = 0; assigned < total; ++k, ++assigned) ++counts[order[k % data::kNumLabels]];
  return counts;
}

namespace {

// Function words and relation-free clauses per surface mode. None of these
// may contain a lexicon term; the self-consistency check enforces it.
struct Words {
  std::string_view list_sep;
  std::string_view list_and;
  std::string_view all;
  std::string_view about;
  std::string_view obvious;
  std::string_view clause_sep;
  std::string_view stop;
  std::string_view joiner;
  std::string_view dominance;
  std::string_view flow;
  std::string_view rest_vessels;
  std::string_view abnormal;
};

constexpr Words kChinese{"、", "及", "均", "约", "明显", "，", "。", "", "冠脉呈右优势型", "血流TIMI3级",
                         "余血管", "异常"};
constexpr Words kAscii{",", "and", "all", "about", "obvious", ",", ".", " ", "right_dominant_circulation",
                       "TIMI3_flow", "other_vessels", "abnormal"};

const Words& words_for(SurfaceMode mode) { return mode == SurfaceMode::Chinese ? kChinese : kAscii; }

using Rng = std::mt19937_64;

bool chance(Rng& rng, double p) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p; }

std::size_t pick(Rng& rng, std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); }

std::size_t between(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

struct Vocab {
  struct Lumen {
    std::string canonical;
    std::string primary;                // usual surface
    std::vector<std::string> variants;  // other surfaces
  };
  std::vector<Lumen> lumens;
  std::array<std::vector<std::string>, 3> modifiers;  // by ModifierKind
  std::vector<std::string> negatives;
  std::vector<std::string> positions;
};

Vocab vocab_from(const text::Lexicon& lex) {
  Vocab v;
  std::map<std::string, std::size_t> index;
  for (const auto& l : lex.lumens()) {
    auto [it, inserted] = index.emplace(l.canonical, v.lumens.size());
    if (inserted) v.lumens.push_back({l.canonical, {}, {}});
    if (l.term != l.canonical) v.lumens[it->second].variants.push_back(l.term);
  }
  for (auto& l : v.lumens) {
    if (lex.lumen(l.canonical) != nullptr) {
      l.primary = l.canonical;
    } else {
      l.primary = l.variants.front();
      l.variants.erase(l.variants.begin());
    }
  }
  for (const auto& m : lex.modifiers()) v.modifiers[static_cast<std::size_t>(m.kind)].push_back(m.term);
  v.negatives = lex.negatives();
  v.positions = lex.positions();
  if (v.lumens.empty() || v.negatives.empty() || v.positions.empty()) {
    throw std::invalid_argument("syngen: lexicon needs lumen, negative and position terms");
  }
  for (const auto& kind : v.modifiers) {
    if (kind.empty()) throw std::invalid_argument("syngen: lexicon needs modifiers of every kind");
  }
  return v;
}

/// The first term of a kind is the common one; it appears most often.
const std::string& pick_term(Rng& rng, const std::vector<std::string>& terms) {
  if (terms.size() == 1 || chance(rng, 0.6)) return terms.front();
  return terms[1 + pick(rng, terms.size() - 1)];
}

struct Profile {
  std::size_t min_lumens;
  std::size_t max_lumens;
  int min_pct;
  int max_pct;
  double occlusion;
};

constexpr std::array<Profile, gensini::kNumLevels> kProfiles{{
    {1, 4, 5, 80, 0.03},
    {3, 6, 30, 99, 0.15},
    {5, 9, 60, 99, 0.30},
}};

enum class FindingKind { Negated, Normal, Occlusion, Stenosis };

struct Finding {
  FindingKind kind = FindingKind::Stenosis;
  double pct = 0.0;
  double second_pct = 0.0;  // > 0 when a second stenosis follows
};

double draw_percentage(Rng& rng, const Profile& p) {
  const int v = static_cast<int>(between(rng, static_cast<std::size_t>(p.min_pct), static_cast<std::size_t>(p.max_pct)));
  if (v < 99 && chance(rng, 0.08)) return v + 0.5;
  return v;
}

std::string format_percentage(double v) {
  char buf[16];
  if (v == std::floor(v)) {
    std::snprintf(buf, sizeof buf, "%d%%", static_cast<int>(v));
  } else {
    std::snprintf(buf, sizeof buf, "%.1f%%", v);
  }
  return buf;
}

class SentenceBuilder {
 public:
  std::size_t entity(EntityType type, std::string surface) {
    pieces_.push_back({surface, true});
    entities_.push_back({type, std::move(surface)});
    return entities_.size() - 1;
  }
  void filler(std::string_view text) { pieces_.push_back({std::string(text), false}); }
  void relate(std::size_t a, std::size_t b, RelationLabel label) {
    relations_.push_back({std::min(a, b), std::max(a, b), label});
  }
  bool empty() const { return pieces_.empty(); }

  std::string text(const Words& w) const {
    std::string out;
    for (std::size_t i = 0; i < pieces_.size(); ++i) {
      if (i > 0) out += w.joiner;
      out += pieces_[i].text;
    }
    return out;
  }

  GoldSentence finish(const Words& w, const text::Lexicon& lex) const {
    GoldSentence s;
    s.text = text(w);
    auto analyzed = text::analyze_sentence(s.text, lex);
    if (analyzed.entities.size() != entities_.size()) {
      throw std::logic_error("syngen: NER found " + std::to_string(analyzed.entities.size()) + " entities in '" +
                             s.text + "', expected " + std::to_string(entities_.size()));
    }
    for (std::size_t i = 0; i < entities_.size(); ++i) {
      if (analyzed.entities[i].type != entities_[i].first || analyzed.entities[i].surface != entities_[i].second) {
        throw std::logic_error("syngen: NER disagrees with the template at entity " + std::to_string(i) + " of '" +
                               s.text + "'");
      }
    }
    for (const auto& r : relations_) {
      const auto sig = data::signature(r.label);
      if (!sig || entities_[r.e1].first != sig->first || entities_[r.e2].first != sig->second) {
        throw std::logic_error("syngen: relation " + std::string(data::to_string(r.label)) +
                               " has mismatched argument types in '" + s.text + "'");
      }
    }
    s.tokens = std::move(analyzed.tokens);
    s.entities = std::move(analyzed.entities);
    s.relations = relations_;
    std::sort(s.relations.begin(), s.relations.end(),
              [](const GoldRelation& a, const GoldRelation& b) { return std::pair{a.e1, a.e2} < std::pair{b.e1, b.e2}; });
    return s;
  }

 private:
  struct Piece {
    std::string text;
    bool is_entity;
  };
  std::vector<Piece> pieces_;
  std::vector<std::pair<EntityType, std::string>> entities_;
  std::vector<GoldRelation> relations_;
};

struct Plan {
  std::vector<std::size_t> lumens;  // indices into Vocab::lumens
  Finding finding;
};

class DocumentWriter {
 public:
  DocumentWriter(const GenConfig& cfg, const Vocab& vocab, const Words& words, Rng& rng)
      : cfg_(cfg), vocab_(vocab), w_(words), rng_(rng) {}

  /// Writes a stenosis with its percentage in either order and links it to `lumens`.
  void stenosis(SentenceBuilder& s, const std::vector<std::size_t>& lumens, double pct) {
    const std::string& term = pick_term(rng_, vocab_.modifiers[static_cast<std::size_t>(text::ModifierKind::Stenosis)]);
    std::size_t mod = 0;
    if (chance(rng_, cfg_.modifier_first_probability)) {
      mod = s.entity(EntityType::Modifier, term);
      if (chance(rng_, 0.3)) s.filler(w_.about);
      const std::size_t p = s.entity(EntityType::Percentage, format_percentage(pct));
      s.relate(mod, p, RelationLabel::PercentageE1E2);
    } else {
      if (chance(rng_, 0.3)) s.filler(w_.about);
      const std::size_t p = s.entity(EntityType::Percentage, format_percentage(pct));
      mod = s.entity(EntityType::Modifier, term);
      s.relate(p, mod, RelationLabel::PercentageE2E1);
    }
    for (std::size_t l : lumens) s.relate(l, mod, RelationLabel::Modifier);
  }

  void clause(SentenceBuilder& s, const Plan& plan) {
    std::vector<std::size_t> lumens;
    for (std::size_t k = 0; k < plan.lumens.size(); ++k) {
      const auto& lumen = vocab_.lumens[plan.lumens[k]];
      const std::string& surface =
          lumen.variants.empty() || chance(rng_, 0.7) ? lumen.primary : lumen.variants[pick(rng_, lumen.variants.size())];
      const std::size_t l = s.entity(EntityType::Lumen, surface);
      lumens.push_back(l);
      if (chance(rng_, cfg_.position_probability)) {
        const std::size_t p = s.entity(EntityType::Position, vocab_.positions[pick(rng_, vocab_.positions.size())]);
        s.relate(l, p, RelationLabel::Position);
      }
      if (k + 2 == plan.lumens.size()) {
        s.filler(chance(rng_, 0.5) ? w_.list_and : w_.list_sep);
      } else if (k + 1 < plan.lumens.size()) {
        s.filler(w_.list_sep);
      }
    }
    if (lumens.size() > 1 && chance(rng_, 0.6)) s.filler(w_.all);

    const Finding& f = plan.finding;
    switch (f.kind) {
      case FindingKind::Negated: {
        const std::size_t n = s.entity(EntityType::Negative, vocab_.negatives[pick(rng_, vocab_.negatives.size())]);
        if (chance(rng_, 0.5)) s.filler(w_.obvious);
        const std::size_t m = s.entity(
            EntityType::Modifier, pick_term(rng_, vocab_.modifiers[static_cast<std::size_t>(text::ModifierKind::Stenosis)]));
        s.relate(n, m, RelationLabel::Negative);
        for (std::size_t l : lumens) s.relate(l, m, RelationLabel::Modifier);
        break;
      }
      case FindingKind::Normal:
      case FindingKind::Occlusion: {
        const auto kind = f.kind == FindingKind::Normal ? text::ModifierKind::Normal : text::ModifierKind::Occlusion;
        const std::size_t m = s.entity(EntityType::Modifier, pick_term(rng_, vocab_.modifiers[static_cast<std::size_t>(kind)]));
        for (std::size_t l : lumens) s.relate(l, m, RelationLabel::Modifier);
        break;
      }
      case FindingKind::Stenosis:
        stenosis(s, lumens, f.pct);
        if (f.second_pct > 0.0) {
          s.filler(w_.clause_sep);
          const std::size_t p = s.entity(EntityType::Position, vocab_.positions[pick(rng_, vocab_.positions.size())]);
          s.relate(lumens.front(), p, RelationLabel::Position);
          stenosis(s, {lumens.front()}, f.second_pct);
        }
        break;
    }
  }

 private:
  const GenConfig& cfg_;
  const Vocab& vocab_;
  const Words& w_;
  Rng& rng_;
};

std::vector<Plan> plan_document(const GenConfig& cfg, const Vocab& vocab, const Profile& profile, Rng& rng) {
  const std::size_t n_lumens = std::min(vocab.lumens.size(), between(rng, profile.min_lumens, profile.max_lumens));
  std::vector<std::size_t> chosen(vocab.lumens.size());
  std::iota(chosen.begin(), chosen.end(), 0);
  std::shuffle(chosen.begin(), chosen.end(), rng);
  chosen.resize(n_lumens);

  std::vector<Plan> plans;
  std::size_t next = 0;
  while (next < chosen.size()) {
    const std::size_t remaining = chosen.size() - next;
    std::size_t k = 1;
    if (remaining >= 2 && cfg.max_fanout >= 2 && chance(rng, cfg.conjunction_probability)) {
      k = between(rng, 2, std::min(cfg.max_fanout, remaining));
    }
    Plan plan;
    plan.lumens.assign(chosen.begin() + static_cast<std::ptrdiff_t>(next),
                       chosen.begin() + static_cast<std::ptrdiff_t>(next + k));
    next += k;
    const double r = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    if (r < cfg.negation_probability) {
      plan.finding.kind = FindingKind::Negated;
    } else if (r < cfg.negation_probability + cfg.normal_probability) {
      plan.finding.kind = FindingKind::Normal;
    } else if (chance(rng, profile.occlusion)) {
      plan.finding.kind = FindingKind::Occlusion;
    } else {
      plan.finding.kind = FindingKind::Stenosis;
      plan.finding.pct = draw_percentage(rng, profile);
      if (k == 1 && chance(rng, cfg.second_lesion_probability)) plan.finding.second_pct = draw_percentage(rng, profile);
    }
    plans.push_back(std::move(plan));
  }
  return plans;
}

double planned_diameter(const Finding& f) {
  switch (f.kind) {
    case FindingKind::Negated:
    case FindingKind::Normal: return 0.0;
    case FindingKind::Occlusion: return 100.0;
    case FindingKind::Stenosis: return std::max(f.pct, f.second_pct);
  }
  return 0.0;
}

GoldDocument write_document(const GenConfig& cfg, const text::Lexicon& lex, const Vocab& vocab,
                            const std::vector<Plan>& plans, Rng& rng, std::string id) {
  const Words& w = words_for(cfg.mode);
  DocumentWriter writer(cfg, vocab, w, rng);
  std::vector<SentenceBuilder> sentences;

  if (chance(rng, cfg.filler_probability * 0.5)) {
    SentenceBuilder s;
    s.filler(w.dominance);
    s.filler(w.stop);
    sentences.push_back(std::move(s));
  }
  std::size_t p = 0;
  while (p < plans.size()) {
    SentenceBuilder s;
    const std::size_t clauses = std::min(plans.size() - p, between(rng, 1, 3));
    for (std::size_t c = 0; c < clauses; ++c, ++p) {
      if (c > 0) s.filler(w.clause_sep);
      writer.clause(s, plans[p]);
    }
    if (chance(rng, cfg.filler_probability * 0.3)) {
      s.filler(w.clause_sep);
      s.filler(w.flow);
    }
    s.filler(w.stop);
    sentences.push_back(std::move(s));
  }
  if (chance(rng, cfg.filler_probability)) {
    SentenceBuilder s;
    s.filler(w.rest_vessels);
    s.entity(EntityType::Negative, vocab.negatives[pick(rng, vocab.negatives.size())]);
    s.filler(w.abnormal);
    s.filler(w.stop);
    sentences.push_back(std::move(s));
  }

  GoldDocument doc;
  doc.id = std::move(id);
  for (std::size_t k = 0; k < sentences.size(); ++k) {
    if (k > 0) doc.text += w.joiner;
    doc.text += sentences[k].text(w);
    doc.sentences.push_back(sentences[k].finish(w, lex));
  }
  const auto split = text::split_sentences(doc.text);
  bool same = split.size() == doc.sentences.size();
  for (std::size_t k = 0; same && k < split.size(); ++k) same = split[k] == doc.sentences[k].text;
  if (!same) throw std::logic_error("syngen: sentence splitting does not recover the sentences of " + doc.id);

  const auto ms = mentions(doc);
  const auto triples = gold_triples(doc);
  const auto set = gensini::aggregate_lesions(ms, triples, lex);
  std::map<std::string, double> planned;
  for (const auto& plan : plans) {
    for (std::size_t l : plan.lumens) planned[vocab.lumens[l].canonical] = planned_diameter(plan.finding);
  }
  for (const auto& rec : set.lesions) {
    const auto it = planned.find(rec.lumen);
    if (it == planned.end() || it->second != rec.diameter) {
      throw std::logic_error("syngen: gold relations of " + doc.id + " give " + rec.lumen + " diameter " +
                             std::to_string(rec.diameter) + ", template planned " +
                             (it == planned.end() ? std::string("none") : std::to_string(it->second)));
    }
    doc.diameters.push_back({rec.lumen, rec.side, rec.diameter});
  }
  if (set.lesions.size() != planned.size()) throw std::logic_error("syngen: lesion count mismatch in " + doc.id);
  const auto report = gensini::total_and_classify(set.lesions);
  doc.total = report.total;
  doc.severity = report.level;
  return doc;
}

std::string document_id(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "doc%06zu", index);
  return buf;
}

}  // namespace

GoldDocument generate_document(const GenConfig& config, const text::Lexicon& lexicon, std::size_t index) {
  config.validate();
  const Vocab vocab = vocab_from(lexicon);
  std::seed_seq seq{static_cast<std::uint32_t>(config.seed), static_cast<std::uint32_t>(config.seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  Rng rng(seq);
  std::discrete_distribution<std::size_t> level_dist(config.severity_mix.begin(), config.severity_mix.end());
  const std::size_t level = level_dist(rng);
  // Rejection sampling: redraw with the level's profile until the gold score lands in that level.
  constexpr std::size_t kMaxAttempts = 20000;
  for (std::size_t attempt = 0; attempt < kMaxAttempts; ++attempt) {
    const auto plans = plan_document(config, vocab, kProfiles[level], rng);
    GoldDocument doc = write_document(config, lexicon, vocab, plans, rng, document_id(index));
    if (static_cast<std::size_t>(doc.severity) == level) return doc;
  }
  throw std::runtime_error("syngen: could not reach severity level " +
                           std::string(gensini::to_string(static_cast<gensini::SeverityLevel>(level))) +
                           " with this lexicon and config");
}

std::vector<gensini::Mention> mentions(const GoldDocument& doc) {
  std::vector<gensini::Mention> out;
  for (const auto& s : doc.sentences) {
    for (const auto& e : s.entities) out.push_back({e.surface, e.type});
  }
  return out;
}

std::vector<gensini::RelationTriple> gold_triples(const GoldDocument& doc) {
  std::vector<gensini::RelationTriple> out;
  std::size_t offset = 0;
  for (const auto& s : doc.sentences) {
    for (const auto& r : s.relations) out.push_back({offset + r.e1, offset + r.e2, r.label});
    offset += s.entities.size();
  }
  return out;
}

std::vector<data::RelationInstance> labeled_instances(const GoldDocument& doc) {
  std::vector<data::RelationInstance> out;
  for (std::size_t k = 0; k < doc.sentences.size(); ++k) {
    const auto& s = doc.sentences[k];
    std::map<std::pair<std::size_t, std::size_t>, RelationLabel> gold;
    for (const auto& r : s.relations) gold[{s.entities[r.e1].span.first, s.entities[r.e2].span.first}] = r.label;
    auto pairs = data::generate_pairs(s.tokens, s.entities, doc.id + ".s" + std::to_string(k));
    for (auto& inst : pairs) {
      const auto it = gold.find({inst.e1.span.first, inst.e2.span.first});
      inst.label = it == gold.end() ? RelationLabel::NoRelation : it->second;
      out.push_back(std::move(inst));
    }
  }
  return out;
}

Corpus generate_corpus(const GenConfig& config, const text::Lexicon& lexicon) {
  config.validate();
  Corpus corpus;
  for (std::size_t i = 0; i < config.documents; ++i) corpus.documents.push_back(generate_document(config, lexicon, i));

  if (config.target_instances == 0) {
    std::vector<data::RelationInstance> all;
    for (const auto& doc : corpus.documents) {
      auto inst = labeled_instances(doc);
      all.insert(all.end(), std::make_move_iterator(inst.begin()), std::make_move_iterator(inst.end()));
    }
    auto split = data::balance_and_split(all, config.discard_fraction, 1.0, config.seed);
    corpus.instances = std::move(split.train);
    corpus.counts = data::label_counts(corpus.instances);
    return corpus;
  }

  // Pool (document, instance) references per label until every target is met.
  const auto targets = target_counts(config.class_mix, config.target_instances);
  std::array<std::vector<std::pair<std::size_t, std::size_t>>, data::kNumLabels> pools;
  auto add_to_pools = [&](std::size_t d) {
    const auto inst = labeled_instances(corpus.documents[d]);
    for (std::size_t i = 0; i < inst.size(); ++i) pools[data::index(*inst[i].label)].push_back({d, i});
  };
  auto satisfied = [&] {
    for (std::size_t c = 0; c < data::kNumLabels; ++c) {
      if (pools[c].size() < targets[c]) return false;
    }
    return true;
  };
  for (std::size_t d = 0; d < corpus.documents.size(); ++d) add_to_pools(d);
  const std::size_t cap = std::max<std::size_t>(config.documents * 20, 20000);
  while (!satisfied() && corpus.documents.size() < cap) {
    corpus.documents.push_back(generate_document(config, lexicon, corpus.documents.size()));
    add_to_pools(corpus.documents.size() - 1);
  }

  Rng rng(config.seed);
  std::vector<std::pair<std::size_t, std::size_t>> selected;
  for (std::size_t c = 0; c < data::kNumLabels; ++c) {
    auto& pool = pools[c];
    if (pool.size() < targets[c]) {
      corpus.notes.push_back(std::string(data::to_string(data::label_at(c))) + ": requested " +
                             std::to_string(targets[c]) + ", generated " + std::to_string(pool.size()));
    }
    std::shuffle(pool.begin(), pool.end(), rng);
    const std::size_t take = std::min(pool.size(), targets[c]);
    selected.insert(selected.end(), pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(take));
  }
  std::sort(selected.begin(), selected.end());
  std::size_t current = SIZE_MAX;
  std::vector<data::RelationInstance> cache;
  for (const auto& [d, i] : selected) {
    if (d != current) {
      cache = labeled_instances(corpus.documents[d]);
      current = d;
    }
    corpus.instances.push_back(cache[i]);
  }
  corpus.counts = data::label_counts(corpus.instances);
  return corpus;
}

// ---------------------------------------------------------------------------
// Gold document file

std::string to_json_line(const GoldDocument& doc) {
  nlohmann::json j;
  j["id"] = doc.id;
  j["text"] = doc.text;
  auto& sentences = j["sentences"] = nlohmann::json::array();
  for (const auto& s : doc.sentences) {
    nlohmann::json js;
    js["text"] = s.text;
    auto& tokens = js["tokens"] = nlohmann::json::array();
    for (const auto& t : s.tokens) tokens.push_back({t.surface, t.start, t.end});
    auto& entities = js["entities"] = nlohmann::json::array();
    for (const auto& e : s.entities) {
      entities.push_back({{"span", {e.span.first, e.span.last}}, {"type", text::to_string(e.type)}, {"surface", e.surface}});
    }
    auto& relations = js["relations"] = nlohmann::json::array();
    for (const auto& r : s.relations) relations.push_back({{"e1", r.e1}, {"e2", r.e2}, {"label", data::to_string(r.label)}});
    sentences.push_back(std::move(js));
  }
  auto& diameters = j["diameters"] = nlohmann::json::array();
  for (const auto& d : doc.diameters) {
    diameters.push_back({{"lumen", d.lumen}, {"side", text::to_string(d.side)}, {"diameter", d.diameter}});
  }
  j["total"] = doc.total;
  j["severity"] = gensini::to_string(doc.severity);
  return j.dump();
}

GoldDocument gold_from_json_line(std::string_view line) {
  GoldDocument doc;
  try {
    const auto j = nlohmann::json::parse(line);
    doc.id = j.at("id").get<std::string>();
    doc.text = j.at("text").get<std::string>();
    for (const auto& js : j.at("sentences")) {
      GoldSentence s;
      s.text = js.at("text").get<std::string>();
      for (const auto& t : js.at("tokens")) {
        s.tokens.push_back({t.at(0).get<std::string>(), t.at(1).get<std::size_t>(), t.at(2).get<std::size_t>()});
      }
      for (const auto& e : js.at("entities")) {
        const auto span = e.at("span").get<std::vector<std::size_t>>();
        if (span.size() != 2 || span[0] > span[1] || span[1] >= s.tokens.size()) {
          throw std::invalid_argument("gold document " + doc.id + ": bad entity span");
        }
        s.entities.push_back({{span[0], span[1]}, text::entity_type_from_string(e.at("type").get<std::string>()),
                              e.at("surface").get<std::string>()});
      }
      for (const auto& r : js.at("relations")) {
        GoldRelation rel{r.at("e1").get<std::size_t>(), r.at("e2").get<std::size_t>(),
                         data::label_from_string(r.at("label").get<std::string>())};
        if (rel.e1 >= rel.e2 || rel.e2 >= s.entities.size()) {
          throw std::invalid_argument("gold document " + doc.id + ": bad relation indices");
        }
        s.relations.push_back(rel);
      }
      doc.sentences.push_back(std::move(s));
    }
    for (const auto& d : j.at("diameters")) {
      const auto side = d.at("side").get<std::string>();
      if (side != "left" && side != "right") throw std::invalid_argument("gold document " + doc.id + ": bad side");
      doc.diameters.push_back({d.at("lumen").get<std::string>(), side == "left" ? text::Side::Left : text::Side::Right,
                               d.at("diameter").get<double>()});
    }
    doc.total = j.at("total").get<int>();
    doc.severity = gensini::level_from_string(j.at("severity").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("malformed gold document: ") + e.what());
  }
  return doc;
}

void write_gold(const std::filesystem::path& path, std::span<const GoldDocument> docs) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write gold file " + path.string());
  for (const auto& doc : docs) out << to_json_line(doc) << '\n';
}

std::vector<GoldDocument> read_gold(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open gold file " + path.string());
  std::vector<GoldDocument> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(gold_from_json_line(line));
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace cadsev::syngen
