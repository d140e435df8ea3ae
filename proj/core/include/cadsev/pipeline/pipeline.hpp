#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "cadsev/gensini/gensini.hpp"
#include "cadsev/model/rcn.hpp"
#include "cadsev/syngen/syngen.hpp"
#include "cadsev/text/lexicon.hpp"

namespace cadsev::pipeline {

struct DocumentInput {
  std::string id;
  std::string text;
};

/// Intermediate results for one document, kept for inspection.
struct DocumentTrace {
  std::vector<text::AnalyzedSentence> sentences;
  std::vector<data::RelationInstance> instances;
  std::vector<data::RelationLabel> predicted;
  gensini::SeverityReport report;
};

/// NER, pair generation, relation prediction and scoring for one document.
/// A malformed document yields a report with `error` set rather than an exception.
DocumentTrace trace_document(const DocumentInput& doc, const model::RcnModel& model, const text::Lexicon& lexicon);

/// Reports in input order. Documents fan out over `threads` workers (0 = hardware);
/// the output does not depend on the thread count.
std::vector<gensini::SeverityReport> run_pipeline(std::span<const DocumentInput> docs, const model::RcnModel& model,
                                                  const text::Lexicon& lexicon, std::size_t threads = 1);

/// Scores a gold document from its gold relations, bypassing the model.
gensini::SeverityReport oracle_report(const syngen::GoldDocument& doc, const text::Lexicon& lexicon);

std::vector<DocumentInput> inputs_from_gold(std::span<const syngen::GoldDocument> docs);

/// Reads plain text (one document per non-empty line, ids "line<N>") or gold
/// JSONL (each line an object with "id" and "text").
std::vector<DocumentInput> read_documents(const std::filesystem::path& path);

}  // namespace cadsev::pipeline
