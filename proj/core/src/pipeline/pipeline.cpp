#include "cadsev/pipeline/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <nlohmann/json.hpp>
#include <thread>

#include "cadsev/dataset/dataset.hpp"

namespace cadsev::pipeline {

DocumentTrace trace_document(const DocumentInput& doc, const model::RcnModel& model, const text::Lexicon& lexicon) {
  DocumentTrace trace;
  std::vector<gensini::Mention> mentions;
  std::vector<gensini::RelationTriple> triples;
  try {
    const auto sentences = text::split_sentences(doc.text);
    for (std::size_t k = 0; k < sentences.size(); ++k) {
      auto analyzed = text::analyze_sentence(sentences[k], lexicon);
      const std::size_t offset = mentions.size();
      for (const auto& e : analyzed.entities) mentions.push_back({e.surface, e.type});
      auto pairs = data::generate_pairs(analyzed.tokens, analyzed.entities, doc.id + ".s" + std::to_string(k));
      // generate_pairs walks entities in position order, matching the mention order above.
      std::size_t a = 0;
      std::size_t b = 1;
      for (auto& inst : pairs) {
        const auto label = model.predict(inst).label;
        trace.predicted.push_back(label);
        triples.push_back({offset + a, offset + b, label});
        trace.instances.push_back(std::move(inst));
        if (++b == analyzed.entities.size()) b = ++a + 1;
      }
      trace.sentences.push_back(std::move(analyzed));
    }
    trace.report = gensini::score_document(mentions, triples, lexicon);
  } catch (const std::invalid_argument& e) {
    trace.report = gensini::SeverityReport{};
    trace.report.error = e.what();
  }
  trace.report.id = doc.id;
  return trace;
}

std::vector<gensini::SeverityReport> run_pipeline(std::span<const DocumentInput> docs, const model::RcnModel& model,
                                                  const text::Lexicon& lexicon, std::size_t threads) {
  std::vector<gensini::SeverityReport> out(docs.size());
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, std::max<std::size_t>(1, docs.size()));
  auto work = [&](std::size_t worker) {
    for (std::size_t i = worker; i < docs.size(); i += threads) out[i] = trace_document(docs[i], model, lexicon).report;
  };
  if (threads <= 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < threads; ++w) pool.emplace_back(work, w);
  }
  return out;
}

gensini::SeverityReport oracle_report(const syngen::GoldDocument& doc, const text::Lexicon& lexicon) {
  gensini::SeverityReport report;
  try {
    report = gensini::score_document(syngen::mentions(doc), syngen::gold_triples(doc), lexicon);
  } catch (const std::invalid_argument& e) {
    report.error = e.what();
  }
  report.id = doc.id;
  return report;
}

std::vector<DocumentInput> inputs_from_gold(std::span<const syngen::GoldDocument> docs) {
  std::vector<DocumentInput> out;
  out.reserve(docs.size());
  for (const auto& d : docs) out.push_back({d.id, d.text});
  return out;
}

std::vector<DocumentInput> read_documents(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open document file " + path.string());
  std::vector<DocumentInput> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    if (line[first] == '{') {
      try {
        const auto j = nlohmann::json::parse(line);
        out.push_back({j.at("id").get<std::string>(), j.at("text").get<std::string>()});
      } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
      }
    } else {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      out.push_back({"line" + std::to_string(lineno), line});
    }
  }
  return out;
}

}  // namespace cadsev::pipeline
