#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "cadsev/dataset/relation.hpp"
#include "cadsev/gensini/gensini.hpp"

namespace cadsev::pipeline {

/// Counts and derived scores for one class. Scores are fractions in [0, 1].
struct ClassScores {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t support = 0;  // gold count
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Harmonic mean, 0 when both are 0.
double f1_score(double precision, double recall);
/// Fills precision/recall/f1 from tp/fp/fn.
void finalize(ClassScores& s);

struct RelationMetrics {
  std::array<ClassScores, data::kNumLabels> per_class;
  /// Pooled over the five positive classes; no_relation is the null class.
  ClassScores micro;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
  /// confusion[gold][predicted]
  std::array<std::array<std::size_t, data::kNumLabels>, data::kNumLabels> confusion{};
  std::size_t total = 0;
};

/// Throws std::invalid_argument when the lists differ in length.
RelationMetrics evaluate_relations(std::span<const data::RelationLabel> predicted,
                                   std::span<const data::RelationLabel> gold);

struct SeverityMetrics {
  std::array<ClassScores, gensini::kNumLevels> per_level;
  /// confusion[gold][predicted]
  std::array<std::array<std::size_t, gensini::kNumLevels>, gensini::kNumLevels> confusion{};
  std::size_t correct = 0;
  std::size_t total = 0;
  double accuracy = 0.0;
};

SeverityMetrics evaluate_severity(std::span<const gensini::SeverityLevel> predicted,
                                  std::span<const gensini::SeverityLevel> gold);

/// Human-readable tables with percentages to two decimals.
std::string format_table(const RelationMetrics& m);
std::string format_table(const SeverityMetrics& m);

/// Structured renderings (JSON objects, fractions unrounded).
std::string to_json(const RelationMetrics& m);
std::string to_json(const SeverityMetrics& m);

}  // namespace cadsev::pipeline
