// cadsev: command-line front end for the severity pipeline.
#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>

#include "cadsev/dataset/dataset.hpp"
#include "cadsev/gensini/gensini.hpp"
#include "cadsev/model/checkpoint.hpp"
#include "cadsev/model/trainer.hpp"
#include "cadsev/pipeline/metrics.hpp"
#include "cadsev/pipeline/pipeline.hpp"
#include "cadsev/syngen/syngen.hpp"
#include "cadsev/text/ner.hpp"

namespace {

using namespace cadsev;

struct LexiconOptions {
  std::string path;
  std::string builtin = "zh";

  void add_to(CLI::App* cmd) {
    cmd->add_option("--lexicon", path, "Lexicon JSON file (overrides --builtin-lexicon)");
    cmd->add_option("--builtin-lexicon", builtin, "Shipped lexicon to use: zh or ascii")
        ->check(CLI::IsMember({"zh", "ascii"}));
  }
  text::Lexicon load() const {
    if (!path.empty()) return text::Lexicon::load(path);
    return builtin == "ascii" ? text::Lexicon::builtin_ascii() : text::Lexicon::builtin();
  }
};

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

void write_text(const std::string& path, const std::string& content) {
  auto out = open_out(path);
  out << content;
  if (content.empty() || content.back() != '\n') out << '\n';
}

// ---------------------------------------------------------------------------

struct GenerateCmd {
  syngen::GenConfig cfg;
  std::string mode = "zh";
  LexiconOptions lexicon;
  std::string gold_out = "gold.jsonl";
  std::string instances_out = "instances.jsonl";

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("generate", "Generate a synthetic gold corpus and its relation instances");
    cmd->add_option("--documents", cfg.documents, "Number of documents")->capture_default_str();
    cmd->add_option("--target-instances", cfg.target_instances,
                    "Sample the instance file to this size at the class mix (0 = keep all, minus discards)")
        ->capture_default_str();
    cmd->add_option("--discard", cfg.discard_fraction, "no_relation discard fraction without a target")
        ->capture_default_str();
    cmd->add_option("--negation", cfg.negation_probability, "Negated-finding probability")->capture_default_str();
    cmd->add_option("--max-fanout", cfg.max_fanout, "Largest conjunction of lumens sharing a finding")
        ->capture_default_str();
    cmd->add_option("--mode", mode, "Surface language: zh or ascii")->check(CLI::IsMember({"zh", "ascii"}));
    cmd->add_option("--seed", cfg.seed, "Random seed")->capture_default_str();
    cmd->add_option("--gold-out", gold_out, "Gold document JSONL output")->capture_default_str();
    cmd->add_option("--instances-out", instances_out, "Relation instance JSONL output")->capture_default_str();
    lexicon.add_to(cmd);
    cmd->callback([this] { run(); });
  }

  void run() {
    cfg.mode = syngen::surface_mode_from_string(mode);
    if (lexicon.path.empty()) lexicon.builtin = mode;
    const auto corpus = syngen::generate_corpus(cfg, lexicon.load());
    syngen::write_gold(gold_out, corpus.documents);
    data::write_instances(instances_out, corpus.instances);
    std::printf("documents: %zu\ninstances: %zu\n", corpus.documents.size(), corpus.instances.size());
    for (std::size_t c = 0; c < data::kNumLabels; ++c) {
      std::printf("  %-20s %zu\n", std::string(data::to_string(data::label_at(c))).c_str(), corpus.counts[c]);
    }
    std::array<std::size_t, gensini::kNumLevels> levels{};
    for (const auto& d : corpus.documents) ++levels[static_cast<std::size_t>(d.severity)];
    std::printf("severity: mild %zu, moderate %zu, severe %zu\n", levels[0], levels[1], levels[2]);
    for (const auto& note : corpus.notes) std::fprintf(stderr, "shortfall: %s\n", note.c_str());
  }
};

struct NerCmd {
  std::string input;
  std::string output = "-";
  LexiconOptions lexicon;

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("ner", "Tokenize documents and recognize entities");
    cmd->add_option("--input", input, "Plain text (one document per line) or JSONL with id/text")->required();
    cmd->add_option("--out", output, "Output JSONL, '-' for stdout")->capture_default_str();
    lexicon.add_to(cmd);
    cmd->callback([this] { run(); });
  }

  void run() {
    const auto lex = lexicon.load();
    const auto docs = pipeline::read_documents(input);
    std::ofstream file;
    std::ostream* out = &std::cout;
    if (output != "-") {
      file = open_out(output);
      out = &file;
    }
    for (const auto& doc : docs) {
      const auto sentences = text::split_sentences(doc.text);
      for (std::size_t k = 0; k < sentences.size(); ++k) {
        const auto s = text::analyze_sentence(sentences[k], lex);
        nlohmann::json j;
        j["sentence_id"] = doc.id + ".s" + std::to_string(k);
        j["text"] = s.text;
        auto& tokens = j["tokens"] = nlohmann::json::array();
        for (const auto& t : s.tokens) tokens.push_back({t.surface, t.start, t.end});
        auto& entities = j["entities"] = nlohmann::json::array();
        for (const auto& e : s.entities) {
          entities.push_back({{"span", {e.span.first, e.span.last}}, {"type", text::to_string(e.type)}, {"surface", e.surface}});
        }
        *out << j.dump() << '\n';
      }
    }
  }
};

struct BuildDatasetCmd {
  std::string gold;
  std::string instances;
  double discard = 0.85;
  double train_fraction = 0.7;
  std::uint64_t seed = 1;
  std::string train_out = "train.jsonl";
  std::string test_out = "test.jsonl";

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("build-dataset", "Balance no_relation and split instances into train/test");
    auto* g = cmd->add_option("--gold", gold, "Gold document JSONL (all candidate pairs are labeled)");
    auto* i = cmd->add_option("--instances", instances, "Labeled instance JSONL");
    g->excludes(i);
    cmd->add_option("--discard", discard, "Fraction of no_relation instances dropped")->capture_default_str();
    cmd->add_option("--train-fraction", train_fraction, "Per-label training fraction")->capture_default_str();
    cmd->add_option("--seed", seed, "Random seed")->capture_default_str();
    cmd->add_option("--train-out", train_out)->capture_default_str();
    cmd->add_option("--test-out", test_out)->capture_default_str();
    cmd->callback([this] { run(); });
  }

  void run() {
    std::vector<data::RelationInstance> all;
    if (!gold.empty()) {
      for (const auto& doc : syngen::read_gold(gold)) {
        auto inst = syngen::labeled_instances(doc);
        all.insert(all.end(), std::make_move_iterator(inst.begin()), std::make_move_iterator(inst.end()));
      }
    } else if (!instances.empty()) {
      all = data::read_instances(instances);
    } else {
      throw CLI::RequiredError("--gold or --instances");
    }
    const auto split = data::balance_and_split(all, discard, train_fraction, seed);
    data::write_instances(train_out, split.train);
    data::write_instances(test_out, split.test);
    const auto tr = data::label_counts(split.train);
    const auto te = data::label_counts(split.test);
    std::printf("%-20s %8s %8s\n", "label", "train", "test");
    for (std::size_t c = 0; c < data::kNumLabels; ++c) {
      std::printf("%-20s %8zu %8zu\n", std::string(data::to_string(data::label_at(c))).c_str(), tr[c], te[c]);
    }
    std::printf("discarded no_relation: %zu\n", split.discarded);
  }
};

struct TrainCmd {
  std::string train_path;
  std::string dev_path;
  std::string config_path;
  std::string model_out = "model.json";
  std::string log_out;
  bool checkpoint_each_epoch = false;
  std::optional<std::size_t> epochs;
  std::optional<std::size_t> routing;
  std::optional<std::size_t> batch;
  std::optional<double> lr;
  std::optional<std::string> head;
  std::optional<std::string> encoder;
  std::optional<std::string> reduction;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> embeddings;

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("train", "Train the relation classifier");
    cmd->add_option("--train", train_path, "Training instance JSONL")->required();
    cmd->add_option("--dev", dev_path, "Held-out instance JSONL scored after each epoch");
    cmd->add_option("--config", config_path, "Model config JSON; flags below override it");
    cmd->add_option("--epochs", epochs);
    cmd->add_option("--routing-iters", routing);
    cmd->add_option("--batch-size", batch);
    cmd->add_option("--learning-rate", lr);
    cmd->add_option("--head", head, "capsule or softmax")->check(CLI::IsMember({"capsule", "softmax"}));
    cmd->add_option("--encoder", encoder, "uni_bi or all_bi")->check(CLI::IsMember({"uni_bi", "all_bi"}));
    cmd->add_option("--loss-reduction", reduction, "sum or mean")->check(CLI::IsMember({"sum", "mean"}));
    cmd->add_option("--embeddings", embeddings, "Pretrained word vectors, one 'token v1 ... vN' per line");
    cmd->add_option("--seed", seed, "Initialization and shuffling seed");
    cmd->add_option("--out", model_out, "Checkpoint path")->capture_default_str();
    cmd->add_option("--log", log_out, "Per-epoch JSONL log");
    cmd->add_flag("--checkpoint-each-epoch", checkpoint_each_epoch, "Rewrite the checkpoint after every epoch");
    cmd->callback([this] { run(); });
  }

  void run() {
    model::ModelConfig cfg = config_path.empty() ? model::ModelConfig{} : model::load_config(config_path);
    if (epochs) cfg.epochs = *epochs;
    if (routing) cfg.routing_iters = *routing;
    if (batch) cfg.batch_size = *batch;
    if (lr) cfg.adam.learning_rate = *lr;
    if (head) cfg.head = model::head_mode_from_string(*head);
    if (encoder) cfg.encoder = model::encoder_mode_from_string(*encoder);
    if (reduction) cfg.loss_reduction = model::loss_reduction_from_string(*reduction);
    if (seed) cfg.seed = *seed;
    if (embeddings) cfg.embedding_file = *embeddings;
    cfg.validate();

    const auto train = data::read_instances(train_path);
    std::vector<data::RelationInstance> dev;
    if (!dev_path.empty()) dev = data::read_instances(dev_path);
    model::RcnModel rcn(cfg, model::Vocabulary::build(train));
    std::fprintf(stderr, "vocabulary %zu, parameters %zu\n", rcn.vocab().size(), rcn.parameters().scalar_count());

    std::ofstream log;
    if (!log_out.empty()) log = open_out(log_out);
    model::TrainOptions opts;
    opts.dev = dev;
    if (checkpoint_each_epoch) opts.epoch_checkpoint = model_out;
    const auto start = std::chrono::steady_clock::now();
    opts.on_epoch = [&](const model::EpochRecord& r) {
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      std::fprintf(stderr, "epoch %3zu  loss %12.4f  train_f1 %.4f", r.epoch, r.loss, r.train_f1);
      if (r.dev_f1) std::fprintf(stderr, "  dev_f1 %.4f", *r.dev_f1);
      std::fprintf(stderr, "  (%.1fs)\n", secs);
      if (log.is_open()) log << model::to_json_line(r) << '\n';
    };
    model::train(rcn, train, opts);
    model::save_checkpoint(rcn, model_out);
  }
};

struct EvalRelationsCmd {
  std::string model_path;
  std::string instances;
  std::string metrics_out;
  std::string predictions_out;
  std::size_t threads = 1;
  std::uint64_t seed = 1;

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("eval-relations", "Score relation predictions against labeled instances");
    cmd->add_option("--model", model_path, "Checkpoint")->required();
    cmd->add_option("--instances", instances, "Labeled instance JSONL")->required();
    cmd->add_option("--out", metrics_out, "Metrics JSON output");
    cmd->add_option("--predictions", predictions_out, "Per-instance predictions JSONL");
    cmd->add_option("--threads", threads, "Worker threads (0 = all cores)")->capture_default_str();
    cmd->add_option("--seed", seed, "Accepted for uniformity; evaluation is deterministic");
    cmd->callback([this] { run(); });
  }

  void run() {
    const auto rcn = model::load_checkpoint(model_path);
    const auto inst = data::read_instances(instances);
    const auto gold = model::gold_labels(inst);
    const auto preds = model::predict_all(rcn, inst, threads);
    std::vector<data::RelationLabel> labels;
    for (const auto& p : preds) labels.push_back(p.label);
    const auto m = pipeline::evaluate_relations(labels, gold);
    std::cout << pipeline::format_table(m);
    if (!metrics_out.empty()) write_text(metrics_out, pipeline::to_json(m));
    if (!predictions_out.empty()) {
      auto out = open_out(predictions_out);
      for (std::size_t i = 0; i < inst.size(); ++i) {
        out << nlohmann::json{{"sentence_id", inst[i].sentence_id},
                              {"e1", {inst[i].e1.span.first, inst[i].e1.span.last}},
                              {"e2", {inst[i].e2.span.first, inst[i].e2.span.last}},
                              {"gold", data::to_string(gold[i])},
                              {"predicted", data::to_string(labels[i])},
                              {"scores", preds[i].scores}}
                   .dump()
            << '\n';
      }
    }
  }
};

std::vector<gensini::SeverityLevel> levels_of(const std::vector<gensini::SeverityReport>& reports) {
  std::vector<gensini::SeverityLevel> out;
  for (const auto& r : reports) out.push_back(r.level);
  return out;
}

void write_reports(const std::string& path, const std::vector<gensini::SeverityReport>& reports) {
  auto out = open_out(path);
  for (const auto& r : reports) out << gensini::to_json_line(r) << '\n';
}

struct EvalSeverityCmd {
  std::string model_path;
  std::string gold_path;
  bool oracle = false;
  std::string metrics_out;
  std::string reports_out;
  std::size_t threads = 1;
  std::uint64_t seed = 1;
  LexiconOptions lexicon;

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("eval-severity", "Run the pipeline on gold documents and score severity levels");
    cmd->add_option("--gold", gold_path, "Gold document JSONL")->required();
    cmd->add_option("--model", model_path, "Checkpoint (not needed with --oracle)");
    cmd->add_flag("--oracle", oracle, "Score gold relations instead of predicted ones");
    cmd->add_option("--out", metrics_out, "Metrics JSON output");
    cmd->add_option("--reports", reports_out, "Per-document report JSONL");
    cmd->add_option("--threads", threads, "Worker threads (0 = all cores)")->capture_default_str();
    cmd->add_option("--seed", seed, "Accepted for uniformity; evaluation is deterministic");
    lexicon.add_to(cmd);
    cmd->callback([this] { run(); });
  }

  void run() {
    const auto lex = lexicon.load();
    const auto docs = syngen::read_gold(gold_path);
    std::vector<gensini::SeverityReport> reports;
    if (oracle) {
      for (const auto& d : docs) reports.push_back(pipeline::oracle_report(d, lex));
    } else {
      if (model_path.empty()) throw CLI::RequiredError("--model");
      const auto rcn = model::load_checkpoint(model_path);
      reports = pipeline::run_pipeline(pipeline::inputs_from_gold(docs), rcn, lex, threads);
    }
    std::vector<gensini::SeverityLevel> gold;
    for (const auto& d : docs) gold.push_back(d.severity);
    const auto m = pipeline::evaluate_severity(levels_of(reports), gold);
    std::cout << pipeline::format_table(m);
    if (!metrics_out.empty()) write_text(metrics_out, pipeline::to_json(m));
    if (!reports_out.empty()) write_reports(reports_out, reports);
  }
};

struct ClassifyCmd {
  std::string model_path;
  std::string input;
  std::string output = "-";
  std::size_t threads = 1;
  std::uint64_t seed = 1;
  LexiconOptions lexicon;

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("classify", "Severity reports for raw angiography texts");
    cmd->add_option("--model", model_path, "Checkpoint")->required();
    cmd->add_option("--input", input, "Plain text (one document per line) or JSONL with id/text")->required();
    cmd->add_option("--out", output, "Report JSONL, '-' for stdout")->capture_default_str();
    cmd->add_option("--threads", threads, "Worker threads (0 = all cores)")->capture_default_str();
    cmd->add_option("--seed", seed, "Accepted for uniformity; classification is deterministic");
    lexicon.add_to(cmd);
    cmd->callback([this] { run(); });
  }

  void run() {
    const auto lex = lexicon.load();
    const auto rcn = model::load_checkpoint(model_path);
    const auto docs = pipeline::read_documents(input);
    const auto reports = pipeline::run_pipeline(docs, rcn, lex, threads);
    if (output == "-") {
      for (const auto& r : reports) std::cout << gensini::to_json_line(r) << '\n';
    } else {
      write_reports(output, reports);
    }
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coronary angiography severity pipeline: NER, relation extraction, Gensini scoring"};
  app.require_subcommand(1);
  GenerateCmd generate;
  NerCmd ner;
  BuildDatasetCmd build;
  TrainCmd train;
  EvalRelationsCmd eval_rel;
  EvalSeverityCmd eval_sev;
  ClassifyCmd classify;
  generate.add(app);
  ner.add(app);
  build.add(app);
  train.add(app);
  eval_rel.add(app);
  eval_sev.add(app);
  classify.add(app);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "cadsev: %s\n", e.what());
    return 1;
  }
  return 0;
}
