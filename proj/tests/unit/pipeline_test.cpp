#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "cadsev/pipeline/metrics.hpp"
#include "cadsev/pipeline/pipeline.hpp"
#include "cadsev/syngen/syngen.hpp"
#include "support/generators.hpp"

using namespace cadsev;
using data::RelationLabel;
using gensini::SeverityLevel;

namespace {

const std::string kExample = "左前降支中段40%狭窄，右前降支、右回旋支未见明显狭窄。";

model::RcnModel tiny_model(const std::vector<data::RelationInstance>& insts) {
  model::ModelConfig c;
  c.word_dim = 4;
  c.type_dim = 4;
  c.bi_hidden = 3;
  c.uni_hidden = 6;
  c.capsule_dim = 4;
  c.seed = 5;
  return model::RcnModel(c, model::Vocabulary::build(insts));
}

}  // namespace

TEST_SUITE("relation metrics") {
  TEST_CASE("perfect predictions") {
    std::vector<RelationLabel> gold;
    for (std::size_t k = 0; k < 60; ++k) gold.push_back(data::label_at(k % 6));
    const auto m = pipeline::evaluate_relations(gold, gold);
    for (const auto& c : m.per_class) CHECK(c.f1 == 1.0);
    CHECK(m.micro.f1 == 1.0);
    CHECK(m.macro_f1 == 1.0);
    CHECK(pipeline::format_table(m).find("100.00") != std::string::npos);
  }

  TEST_CASE("everything predicted as no_relation") {
    std::vector<RelationLabel> gold;
    for (std::size_t k = 0; k < 60; ++k) gold.push_back(data::label_at(k % 6));
    const std::vector<RelationLabel> pred(gold.size(), RelationLabel::NoRelation);
    const auto m = pipeline::evaluate_relations(pred, gold);
    for (std::size_t l = 0; l < data::kNumPositiveLabels; ++l) {
      CHECK(m.per_class[l].recall == 0.0);
      CHECK(m.per_class[l].f1 == 0.0);
    }
    CHECK(m.micro.recall == 0.0);
    CHECK(m.micro.precision == 0.0);
    CHECK(m.micro.f1 == 0.0);
  }

  TEST_CASE("hand-counted toy") {
    using L = RelationLabel;
    const std::vector<L> gold = {L::Modifier, L::Modifier, L::Modifier, L::NoRelation, L::NoRelation};
    const std::vector<L> pred = {L::Modifier, L::Modifier, L::NoRelation, L::Modifier, L::NoRelation};
    const auto m = pipeline::evaluate_relations(pred, gold);
    const auto& mod = m.per_class[0];
    CHECK(mod.tp == 2);
    CHECK(mod.fp == 1);
    CHECK(mod.fn == 1);
    CHECK(mod.precision == doctest::Approx(2.0 / 3.0));
    CHECK(mod.recall == doctest::Approx(2.0 / 3.0));
    CHECK(mod.f1 == doctest::Approx(2.0 / 3.0));
    const auto& nr = m.per_class[5];
    CHECK(nr.tp == 1);
    CHECK(nr.precision == doctest::Approx(0.5));
    CHECK(nr.recall == doctest::Approx(0.5));
    CHECK(m.micro.f1 == doctest::Approx(2.0 / 3.0));
    CHECK(m.confusion[0][5] == 1);
    CHECK(m.confusion[5][0] == 1);
  }

  TEST_CASE("micro equals pooled counts") {
    testing::Gen g(40);
    for (int trial = 0; trial < 200; ++trial) {
      const std::size_t n = g.index(0, 80);
      std::vector<RelationLabel> gold, pred;
      std::size_t tp = 0, fp = 0, fn = 0;
      for (std::size_t k = 0; k < n; ++k) {
        const auto gl = data::label_at(g.index(0, 5));
        const auto pl = g.coin(0.6) ? gl : data::label_at(g.index(0, 5));
        gold.push_back(gl);
        pred.push_back(pl);
        const bool gpos = gl != RelationLabel::NoRelation;
        const bool ppos = pl != RelationLabel::NoRelation;
        if (gpos && pl == gl) ++tp;
        if (ppos && pl != gl) ++fp;
        if (gpos && pl != gl) ++fn;
      }
      const auto m = pipeline::evaluate_relations(pred, gold);
      CHECK(m.micro.tp == tp);
      CHECK(m.micro.fp == fp);
      CHECK(m.micro.fn == fn);
      const double p = tp + fp ? double(tp) / double(tp + fp) : 0.0;
      const double r = tp + fn ? double(tp) / double(tp + fn) : 0.0;
      CHECK(m.micro.f1 == doctest::Approx(p + r > 0 ? 2 * p * r / (p + r) : 0.0));
      for (std::size_t gl = 0; gl < data::kNumLabels; ++gl) {
        std::size_t row = 0;
        for (auto c : m.confusion[gl]) row += c;
        CHECK(row == m.per_class[gl].support);
      }
    }
  }

  TEST_CASE("length mismatch and f1 helper") {
    const std::vector<RelationLabel> a(3, RelationLabel::Modifier);
    const std::vector<RelationLabel> b(2, RelationLabel::Modifier);
    CHECK_THROWS_AS(pipeline::evaluate_relations(a, b), std::invalid_argument);
    CHECK(pipeline::f1_score(0.0, 0.0) == 0.0);
    CHECK(pipeline::f1_score(0.5, 1.0) == doctest::Approx(2.0 / 3.0));
    const auto empty = pipeline::evaluate_relations({}, {});
    CHECK(empty.total == 0);
    CHECK(empty.micro.f1 == 0.0);
  }
}

TEST_SUITE("severity metrics") {
  TEST_CASE("all correct") {
    const std::vector<SeverityLevel> gold = {SeverityLevel::Mild, SeverityLevel::Moderate, SeverityLevel::Severe};
    const auto m = pipeline::evaluate_severity(gold, gold);
    CHECK(m.accuracy == 1.0);
    CHECK(pipeline::format_table(m).find("100.00") != std::string::npos);
  }

  TEST_CASE("one missed severe document out of ten") {
    std::vector<SeverityLevel> gold(10, SeverityLevel::Severe);
    auto pred = gold;
    pred[4] = SeverityLevel::Moderate;
    const auto m = pipeline::evaluate_severity(pred, gold);
    const auto& severe = m.per_level[2];
    CHECK(severe.recall == doctest::Approx(0.9));
    CHECK(severe.precision == 1.0);
    CHECK(m.accuracy == doctest::Approx(0.9));
    CHECK(m.confusion[2][1] == 1);
    CHECK(m.per_level[1].fp == 1);
    CHECK_THROWS_AS(pipeline::evaluate_severity(pred, std::span(gold).first(3)), std::invalid_argument);
  }

  TEST_CASE("json rendering") {
    const std::vector<SeverityLevel> gold(4, SeverityLevel::Mild);
    const auto j = pipeline::to_json(pipeline::evaluate_severity(gold, gold));
    CHECK(j.find("\"accuracy\"") != std::string::npos);
    const std::vector<RelationLabel> rl(4, RelationLabel::Modifier);
    CHECK(pipeline::to_json(pipeline::evaluate_relations(rl, rl)).find("\"micro\"") != std::string::npos);
  }
}

TEST_SUITE("pipeline") {
  TEST_CASE("oracle reports equal gold severity") {
    syngen::GenConfig cfg;
    cfg.documents = 300;
    cfg.seed = 21;
    const auto corpus = syngen::generate_corpus(cfg, text::Lexicon::builtin());
    for (const auto& doc : corpus.documents) {
      const auto rep = pipeline::oracle_report(doc, text::Lexicon::builtin());
      CHECK(rep.level == doc.severity);
      CHECK(rep.total == doc.total);
      CHECK(rep.id == doc.id);
    }
  }

  TEST_CASE("empty input gives an empty report") {
    const auto m = tiny_model({});
    CHECK(pipeline::run_pipeline({}, m, text::Lexicon::builtin()).empty());
  }

  TEST_CASE("trace of the example sentence") {
    const auto m = tiny_model({});
    const auto t = pipeline::trace_document({"example", kExample}, m, text::Lexicon::builtin());
    CHECK(t.sentences.size() == 1);
    CHECK(t.instances.size() == 28);
    CHECK(t.predicted.size() == 28);
    CHECK(t.report.id == "example");
  }

  TEST_CASE("reports do not depend on thread count") {
    syngen::GenConfig cfg;
    cfg.documents = 40;
    const auto corpus = syngen::generate_corpus(cfg, text::Lexicon::builtin());
    const auto m = tiny_model(corpus.instances);
    const auto inputs = pipeline::inputs_from_gold(corpus.documents);
    const auto a = pipeline::run_pipeline(inputs, m, text::Lexicon::builtin(), 1);
    const auto b = pipeline::run_pipeline(inputs, m, text::Lexicon::builtin(), 4);
    REQUIRE(a.size() == inputs.size());
    for (std::size_t k = 0; k < a.size(); ++k) CHECK(gensini::to_json_line(a[k]) == gensini::to_json_line(b[k]));
  }

  TEST_CASE("reading documents") {
    const auto dir = std::filesystem::temp_directory_path();
    const auto plain = dir / "cadsev_docs.txt";
    std::ofstream(plain) << kExample << "\n\n右冠状动脉闭塞。\n";
    const auto docs = pipeline::read_documents(plain);
    REQUIRE(docs.size() == 2);
    CHECK(docs[0].id == "line1");
    CHECK(docs[1].id == "line3");
    CHECK(docs[1].text == "右冠状动脉闭塞。");

    const auto jsonl = dir / "cadsev_docs.jsonl";
    std::ofstream(jsonl) << R"({"id": "a", "text": "左前降支闭塞。"})" << "\n";
    const auto j = pipeline::read_documents(jsonl);
    REQUIRE(j.size() == 1);
    CHECK(j[0].id == "a");
    std::filesystem::remove(plain);
    std::filesystem::remove(jsonl);
    CHECK_THROWS(pipeline::read_documents(dir / "cadsev_missing.txt"));
  }
}
