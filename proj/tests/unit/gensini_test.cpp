#include <doctest.h>

#include <string>
#include <vector>

#include "cadsev/gensini/gensini.hpp"
#include "cadsev/text/lexicon.hpp"
#include "support/generators.hpp"

using namespace cadsev;
using data::RelationLabel;
using gensini::Mention;
using gensini::RelationTriple;
using gensini::SeverityLevel;
using text::EntityType;

namespace {

const text::Lexicon& lex() { return text::Lexicon::builtin(); }

/// Step table written out independently of the implementation.
int expected_score(int d) {
  if (d == 0) return 0;
  if (d <= 49) return 1;
  if (d <= 74) return 2;
  if (d <= 99) return 3;
  return 4;
}

gensini::LesionRecord lesion(int score) {
  gensini::LesionRecord r;
  r.lumen = "l" + std::to_string(score);
  r.score = score;
  return r;
}

gensini::SeverityReport totals(std::initializer_list<int> scores) {
  std::vector<gensini::LesionRecord> ls;
  for (int s : scores) ls.push_back(lesion(s));
  return gensini::total_and_classify(ls);
}

/// Mentions and triples for "<lumen><pct>狭窄" clauses, one per diameter.
struct Doc {
  std::vector<Mention> mentions;
  std::vector<RelationTriple> relations;

  void stenosis(const std::string& lumen, double pct) {
    const std::size_t l = add(lumen, EntityType::Lumen);
    const std::size_t p = add(format(pct), EntityType::Percentage);
    const std::size_t m = add("狭窄", EntityType::Modifier);
    relations.push_back({l, m, RelationLabel::Modifier});
    relations.push_back({p, m, RelationLabel::PercentageE2E1});
  }
  std::size_t add(std::string surface, EntityType type) {
    mentions.push_back({std::move(surface), type});
    return mentions.size() - 1;
  }
  static std::string format(double pct) {
    std::string s = std::to_string(static_cast<int>(pct));
    return s + "%";
  }
};

const std::vector<std::string> kLumens = {"左主干", "左前降支", "左回旋支", "对角支",  "钝缘支",
                                          "右冠状动脉", "后降支", "锐缘支",   "右回旋支", "中间支"};

}  // namespace

TEST_CASE("lesion score over every integer diameter") {
  for (int d = 0; d <= 100; ++d) {
    CAPTURE(d);
    CHECK(gensini::lesion_score(d) == expected_score(d));
  }
  CHECK(gensini::lesion_score(40) == 1);
  CHECK(gensini::lesion_score(100) == 4);
  CHECK(gensini::lesion_score(49.5) == 1);
  CHECK(gensini::lesion_score(74.9) == 2);
  CHECK(gensini::lesion_score(99.5) == 3);
  CHECK(gensini::lesion_score(0.5) == 0);
  CHECK_THROWS_AS(gensini::lesion_score(-1), std::invalid_argument);
  CHECK_THROWS_AS(gensini::lesion_score(100.5), std::invalid_argument);
}

TEST_CASE("severity thresholds") {
  CHECK(gensini::classify_total(7) == SeverityLevel::Mild);
  CHECK(gensini::classify_total(8) == SeverityLevel::Moderate);
  CHECK(gensini::classify_total(14) == SeverityLevel::Moderate);
  CHECK(gensini::classify_total(15) == SeverityLevel::Severe);
  const auto one = totals({1});
  CHECK(one.total == 1);
  CHECK(one.level == SeverityLevel::Mild);
  CHECK(totals({4, 4}).level == SeverityLevel::Moderate);
  CHECK(totals({4, 4}).total == 8);
  CHECK(totals({4, 4, 4, 3}).level == SeverityLevel::Severe);
  CHECK(totals({4, 4, 4, 3}).total == 15);
  CHECK(totals({}).level == SeverityLevel::Mild);
}

TEST_CASE("example sentence scores total one, mild") {
  std::vector<Mention> m = {
      {"左前降支", EntityType::Lumen},    {"中段", EntityType::Position}, {"40%", EntityType::Percentage},
      {"狭窄", EntityType::Modifier},     {"右前降支", EntityType::Lumen}, {"右回旋支", EntityType::Lumen},
      {"未见", EntityType::Negative},     {"狭窄", EntityType::Modifier},
  };
  std::vector<RelationTriple> r = {
      {0, 3, RelationLabel::Modifier}, {0, 1, RelationLabel::Position}, {2, 3, RelationLabel::PercentageE2E1},
      {4, 7, RelationLabel::Modifier}, {5, 7, RelationLabel::Modifier}, {6, 7, RelationLabel::Negative},
  };
  const auto rep = gensini::score_document(m, r, lex());
  REQUIRE(rep.lesions.size() == 3);
  CHECK(rep.lesions[0].lumen == "左前降支");
  CHECK(rep.lesions[0].diameter == 40.0);
  CHECK(rep.lesions[0].evidence[0].positions == std::vector<std::string>{"中段"});
  CHECK(rep.lesions[1].diameter == 0.0);
  CHECK(rep.lesions[2].diameter == 0.0);
  CHECK(rep.lesions[1].evidence[0].negated);
  CHECK(rep.total == 1);
  CHECK(rep.left_total == 1);
  CHECK(rep.right_total == 0);
  CHECK(rep.level == SeverityLevel::Mild);
  CHECK(rep.warnings.empty());
}

TEST_CASE("repeated mentions keep the largest diameter") {
  Doc d;
  d.stenosis("左前降支", 30);
  d.stenosis("前降支", 80);
  const auto rep = gensini::score_document(d.mentions, d.relations, lex());
  REQUIRE(rep.lesions.size() == 1);
  CHECK(rep.lesions[0].lumen == "左前降支");
  CHECK(rep.lesions[0].diameter == 80.0);
  CHECK(rep.lesions[0].score == 3);
}

TEST_CASE("modifier kinds") {
  Doc d;
  const auto l1 = d.add("右冠", EntityType::Lumen);
  const auto occ = d.add("闭塞", EntityType::Modifier);
  const auto l2 = d.add("左主干", EntityType::Lumen);
  const auto ok = d.add("正常", EntityType::Modifier);
  const auto l3 = d.add("后降支", EntityType::Lumen);
  const auto bare = d.add("狭窄", EntityType::Modifier);
  d.relations = {{l1, occ, RelationLabel::Modifier}, {l2, ok, RelationLabel::Modifier},
                 {l3, bare, RelationLabel::Modifier}};
  const auto rep = gensini::score_document(d.mentions, d.relations, lex());
  REQUIRE(rep.lesions.size() == 3);
  CHECK(rep.lesions[0].lumen == "右冠状动脉");
  CHECK(rep.lesions[0].diameter == 100.0);
  CHECK(rep.lesions[0].score == 4);
  CHECK(rep.lesions[1].diameter == 0.0);
  CHECK(rep.lesions[2].diameter == 0.0);
  CHECK(rep.warnings.size() == 1);
  CHECK(rep.right_total == 4);
}

TEST_CASE("percentage linked after the modifier") {
  Doc d;
  const auto l = d.add("左回旋支", EntityType::Lumen);
  const auto m = d.add("狭窄", EntityType::Modifier);
  const auto p = d.add("75%", EntityType::Percentage);
  d.relations = {{l, m, RelationLabel::Modifier}, {m, p, RelationLabel::PercentageE1E2}};
  CHECK(gensini::score_document(d.mentions, d.relations, lex()).total == 3);
}

TEST_CASE("negation removes exactly one modifier's contribution") {
  testing::Gen g(31);
  for (int trial = 0; trial < 300; ++trial) {
    Doc d;
    const std::size_t n = g.index(1, 6);
    for (std::size_t k = 0; k < n; ++k) d.stenosis(kLumens[g.index(0, kLumens.size() - 1)], g.index(1, 100));
    const std::size_t victim = g.index(0, n - 1);
    const std::size_t modifier = victim * 3 + 2;

    Doc negated = d;
    const auto neg = negated.add("未见", EntityType::Negative);
    negated.relations.push_back({neg, modifier, RelationLabel::Negative});

    Doc removed = d;
    std::erase_if(removed.relations, [&](const RelationTriple& r) { return r.e2 == modifier; });

    const auto a = gensini::score_document(negated.mentions, negated.relations, lex());
    const auto b = gensini::score_document(removed.mentions, removed.relations, lex());
    CHECK(a.total == b.total);
    CHECK(a.level == b.level);
  }
}

TEST_CASE("increasing a diameter never lowers the score") {
  testing::Gen g(32);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<std::pair<std::string, double>> clauses;
    const std::size_t n = g.index(1, 8);
    for (std::size_t k = 0; k < n; ++k) clauses.push_back({kLumens[g.index(0, kLumens.size() - 1)], g.index(1, 100)});
    auto score = [&] {
      Doc d;
      for (const auto& [l, p] : clauses) d.stenosis(l, p);
      return gensini::score_document(d.mentions, d.relations, lex());
    };
    const auto before = score();
    auto& target = clauses[g.index(0, n - 1)].second;
    target = g.index(static_cast<std::size_t>(target), 100);
    const auto after = score();
    CHECK(after.total >= before.total);
    CHECK(after.level >= before.level);
  }
}

TEST_CASE("malformed documents") {
  Doc d;
  d.stenosis("左前降支", 40);
  d.mentions[1].surface = "140%";
  CHECK_THROWS_AS(gensini::score_document(d.mentions, d.relations, lex()), gensini::RecordError);

  Doc z;
  z.stenosis("左前降支", 40);
  z.mentions[1].surface = "0%";
  CHECK_THROWS_AS(gensini::score_document(z.mentions, z.relations, lex()), gensini::RecordError);

  Doc u;
  u.stenosis("左前降支", 40);
  u.mentions[0].surface = "unknown-branch";
  CHECK_THROWS_AS(gensini::score_document(u.mentions, u.relations, lex()), gensini::RecordError);

  Doc t;
  t.stenosis("左前降支", 40);
  t.relations.push_back({1, 2, RelationLabel::Position});
  const auto rep = gensini::score_document(t.mentions, t.relations, lex());
  CHECK(rep.total == 1);
  CHECK(rep.warnings.size() == 1);
}

TEST_CASE("swapped argument order is tolerated") {
  Doc d;
  const auto l = d.add("左前降支", EntityType::Lumen);
  const auto m = d.add("闭塞", EntityType::Modifier);
  d.relations = {{m, l, RelationLabel::Modifier}};
  CHECK(gensini::score_document(d.mentions, d.relations, lex()).total == 4);
}

TEST_CASE("report json") {
  auto rep = totals({4, 4});
  rep.id = "doc7";
  const auto line = gensini::to_json_line(rep);
  CHECK(line.find("\"id\":\"doc7\"") != std::string::npos);
  CHECK(line.find("\"level\":\"moderate\"") != std::string::npos);
  CHECK(line.find("warnings") == std::string::npos);
  CHECK(gensini::level_from_string("severe") == SeverityLevel::Severe);
  CHECK_THROWS(gensini::level_from_string("critical"));
}
