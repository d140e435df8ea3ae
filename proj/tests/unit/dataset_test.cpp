#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>
#include <tuple>

#include "cadsev/dataset/dataset.hpp"
#include "cadsev/text/lexicon.hpp"
#include "support/generators.hpp"

using namespace cadsev;
using data::RelationInstance;
using data::RelationLabel;
using text::EntityType;

namespace {

const std::string kExample = "左前降支中段40%狭窄，右前降支、右回旋支未见明显狭窄。";

RelationInstance make(std::size_t id, RelationLabel label) {
  RelationInstance r;
  r.sentence_id = "s" + std::to_string(id);
  r.tokens = {"a", "b", "c"};
  r.type_tags = {EntityType::Lumen, EntityType::None, EntityType::Modifier};
  r.e1 = {{0, 0}, EntityType::Lumen};
  r.e2 = {{2, 2}, EntityType::Modifier};
  r.label = label;
  return r;
}

std::vector<RelationInstance> table_one() {
  const std::size_t counts[] = {1068, 406, 389, 100, 256, 1977};
  std::vector<RelationInstance> out;
  for (std::size_t l = 0; l < data::kNumLabels; ++l) {
    for (std::size_t k = 0; k < counts[l]; ++k) out.push_back(make(out.size(), data::label_at(l)));
  }
  return out;
}

using Key = std::tuple<std::string, std::size_t, std::size_t>;
Key key(const RelationInstance& r) { return {r.sentence_id, r.e1.span.first, r.e2.span.first}; }

}  // namespace

TEST_CASE("pairs over the example sentence") {
  const auto a = text::analyze_sentence(kExample, text::Lexicon::builtin());
  const auto pairs = data::generate_pairs(a.tokens, a.entities, "example");
  CHECK(pairs.size() == 28);
  for (const auto& p : pairs) {
    CHECK(p.e1.span.last < p.e2.span.first);
    CHECK_FALSE(p.label.has_value());
    CHECK_NOTHROW(p.validate());
  }

  const auto& first = pairs.front();
  CHECK(first.tokens[first.e1.span.first] == "左前降支");
  CHECK(first.tokens[first.e2.span.first] == "中段");

  const auto it = std::find_if(pairs.begin(), pairs.end(), [](const RelationInstance& p) {
    return p.e1.span.first == 0 && p.e2.span.first == 3;
  });
  REQUIRE(it != pairs.end());
  const auto split = data::split_segments(*it);
  CHECK(split.segments[0].empty());
  CHECK(split.segments[1] == data::Range{0, 1});
  CHECK(split.segments[2] == data::Range{1, 3});
  CHECK(split.segments[3] == data::Range{3, 4});
  CHECK(split.segments[4] == data::Range{4, it->tokens.size()});
}

TEST_CASE("small entity counts") {
  const auto a = text::analyze_sentence("左前降支狭窄", text::Lexicon::builtin());
  CHECK(data::generate_pairs(a.tokens, std::span(a.entities).first(1)).empty());
  const auto pairs = data::generate_pairs(a.tokens, a.entities);
  REQUIRE(pairs.size() == 1);
  const auto split = data::split_segments(pairs[0]);
  CHECK(split.segments[0].empty());
  CHECK(split.segments[2].empty());
  CHECK(split.segments[4].empty());

  const auto gap = text::analyze_sentence("左前降支中段狭窄", text::Lexicon::builtin());
  const auto p2 = data::generate_pairs(gap.tokens, gap.entities);
  CHECK(data::split_segments(p2[1]).segments[2].size() == 1);
}

TEST_CASE("overlapping entities are rejected") {
  const auto a = text::analyze_sentence("左前降支狭窄", text::Lexicon::builtin());
  auto ents = a.entities;
  ents.push_back(ents[0]);
  CHECK_THROWS_AS(data::generate_pairs(a.tokens, ents), std::invalid_argument);
}

TEST_CASE("pair generation ignores entity order") {
  const auto a = text::analyze_sentence(kExample, text::Lexicon::builtin());
  const auto base = data::generate_pairs(a.tokens, a.entities, "x");
  testing::Gen g(8);
  for (int trial = 0; trial < 50; ++trial) {
    auto ents = a.entities;
    std::shuffle(ents.begin(), ents.end(), g.engine());
    const auto shuffled = data::generate_pairs(a.tokens, ents, "x");
    REQUIRE(shuffled.size() == base.size());
    for (std::size_t k = 0; k < base.size(); ++k) {
      CHECK(data::to_json_line(shuffled[k]) == data::to_json_line(base[k]));
    }
  }
}

TEST_CASE("segments tile the sentence") {
  testing::Gen g(21);
  for (int trial = 0; trial < 300; ++trial) {
    RelationInstance r = make(0, RelationLabel::NoRelation);
    const std::size_t n = g.index(2, 20);
    r.tokens.assign(n, "t");
    r.type_tags.assign(n, EntityType::None);
    const std::size_t a0 = g.index(0, n - 2);
    const std::size_t a1 = g.index(a0, n - 2);
    const std::size_t b0 = g.index(a1 + 1, n - 1);
    const std::size_t b1 = g.index(b0, n - 1);
    r.e1.span = {a0, a1};
    r.e2.span = {b0, b1};
    const auto s = data::split_segments(r);
    CHECK(s.segments[0].begin == 0);
    for (std::size_t k = 1; k < 5; ++k) CHECK(s.segments[k].begin == s.segments[k - 1].end);
    CHECK(s.segments[4].end == n);
    CHECK(s.segments[1].size() == r.e1.span.length());
    CHECK(s.segments[3].size() == r.e2.span.length());
  }
}

TEST_CASE("discard keeps the floor-complement of no_relation") {
  std::vector<RelationInstance> all;
  for (std::size_t k = 0; k < 1000; ++k) all.push_back(make(k, RelationLabel::NoRelation));
  const auto r = data::balance_and_split(all, 0.85, 1.0, 3);
  CHECK(r.train.size() == 150);
  CHECK(r.test.empty());
  CHECK(r.discarded == 850);
}

TEST_CASE("no discard, full train keeps everything in order") {
  const auto all = table_one();
  const auto r = data::balance_and_split(all, 0.0, 1.0, 3);
  CHECK(r.test.empty());
  REQUIRE(r.train.size() == all.size());
  for (std::size_t k = 0; k < all.size(); ++k) CHECK(r.train[k].sentence_id == all[k].sentence_id);
  CHECK(data::balance_and_split(std::span<const RelationInstance>{}, 0.85, 0.7, 1).train.empty());
}

TEST_CASE("stratified split within one of 70/30") {
  const auto all = table_one();
  const auto r = data::balance_and_split(all, 0.85, 0.7, 5);
  const auto train = data::label_counts(r.train);
  const auto test = data::label_counts(r.test);
  const std::size_t kept[] = {1068, 406, 389, 100, 256, 1977 - 1680};
  for (std::size_t l = 0; l < data::kNumLabels; ++l) {
    CAPTURE(l);
    CHECK(train[l] + test[l] == kept[l]);
    CHECK(std::abs(static_cast<double>(train[l]) - 0.7 * kept[l]) <= 1.0);
    CHECK(test[l] > 0);
  }
}

TEST_CASE("split reproducibility and disjointness") {
  const auto all = table_one();
  const auto a = data::balance_and_split(all, 0.85, 0.7, 9);
  const auto b = data::balance_and_split(all, 0.85, 0.7, 9);
  const auto c = data::balance_and_split(all, 0.85, 0.7, 10);
  REQUIRE(a.train.size() == b.train.size());
  for (std::size_t k = 0; k < a.train.size(); ++k) CHECK(key(a.train[k]) == key(b.train[k]));
  CHECK(data::label_counts(a.train) == data::label_counts(c.train));
  CHECK(data::label_counts(a.test) == data::label_counts(c.test));
  bool membership_differs = false;
  for (std::size_t k = 0; k < a.train.size(); ++k) membership_differs |= key(a.train[k]) != key(c.train[k]);
  CHECK(membership_differs);

  std::set<Key> train_keys;
  for (const auto& r : a.train) train_keys.insert(key(r));
  for (const auto& r : a.test) CHECK(train_keys.count(key(r)) == 0);
}

TEST_CASE("split rejects bad input") {
  auto all = table_one();
  CHECK_THROWS_AS(data::balance_and_split(all, 1.5, 0.7, 1), std::invalid_argument);
  all[3].label.reset();
  CHECK_THROWS_AS(data::balance_and_split(all, 0.5, 0.7, 1), std::invalid_argument);
}

TEST_CASE("instance json round trip") {
  const auto a = text::analyze_sentence(kExample, text::Lexicon::builtin());
  auto pairs = data::generate_pairs(a.tokens, a.entities, "doc1:0");
  pairs[0].label = RelationLabel::Position;
  const auto path = std::filesystem::temp_directory_path() / "cadsev_dataset_test.jsonl";
  data::write_instances(path, pairs);
  const auto back = data::read_instances(path);
  std::filesystem::remove(path);
  REQUIRE(back.size() == pairs.size());
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    CHECK(back[k].tokens == pairs[k].tokens);
    CHECK(back[k].type_tags == pairs[k].type_tags);
    CHECK(back[k].e1 == pairs[k].e1);
    CHECK(back[k].e2 == pairs[k].e2);
    CHECK(back[k].label == pairs[k].label);
    CHECK(data::to_json_line(back[k]) == data::to_json_line(pairs[k]));
  }
  CHECK_THROWS_AS(data::from_json_line("{\"tokens\": 3}"), std::invalid_argument);
  CHECK_THROWS(data::read_instances("/nonexistent/instances.jsonl"));
}

TEST_CASE("labels and signatures") {
  for (std::size_t l = 0; l < data::kNumLabels; ++l) {
    CHECK(data::label_from_string(data::to_string(data::label_at(l))) == data::label_at(l));
  }
  CHECK(data::signature(RelationLabel::Modifier)->first == EntityType::Lumen);
  CHECK(data::signature(RelationLabel::PercentageE2E1)->first == EntityType::Percentage);
  CHECK_FALSE(data::signature(RelationLabel::NoRelation).has_value());
  CHECK_THROWS(data::label_from_string("causes"));
}
