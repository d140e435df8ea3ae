#include "cadsev/pipeline/metrics.hpp"

#include <cstdio>
#include <nlohmann/json.hpp>
#include <sstream>
#include <stdexcept>

namespace cadsev::pipeline {

double f1_score(double precision, double recall) {
  const double denom = precision + recall;
  return denom > 0.0 ? 2.0 * precision * recall / denom : 0.0;
}

void finalize(ClassScores& s) {
  s.precision = s.tp + s.fp > 0 ? static_cast<double>(s.tp) / static_cast<double>(s.tp + s.fp) : 0.0;
  s.recall = s.tp + s.fn > 0 ? static_cast<double>(s.tp) / static_cast<double>(s.tp + s.fn) : 0.0;
  s.f1 = f1_score(s.precision, s.recall);
}

namespace {

template <std::size_t K>
void fill_from_confusion(const std::array<std::array<std::size_t, K>, K>& confusion,
                         std::array<ClassScores, K>& per_class) {
  for (std::size_t c = 0; c < K; ++c) {
    ClassScores& s = per_class[c];
    for (std::size_t k = 0; k < K; ++k) {
      s.support += confusion[c][k];
      if (k == c) continue;
      s.fn += confusion[c][k];
      s.fp += confusion[k][c];
    }
    s.tp = confusion[c][c];
    finalize(s);
  }
}

std::string pct(double x) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%6.2f", 100.0 * x);
  return buf;
}

nlohmann::json scores_json(const ClassScores& s) {
  return {{"tp", s.tp}, {"fp", s.fp}, {"fn", s.fn}, {"support", s.support},
          {"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1}};
}

}  // namespace

RelationMetrics evaluate_relations(std::span<const data::RelationLabel> predicted,
                                   std::span<const data::RelationLabel> gold) {
  if (predicted.size() != gold.size()) {
    throw std::invalid_argument("evaluate_relations: " + std::to_string(predicted.size()) +
                                " predictions for " + std::to_string(gold.size()) + " gold labels");
  }
  RelationMetrics m;
  m.total = gold.size();
  for (std::size_t i = 0; i < gold.size(); ++i) ++m.confusion[data::index(gold[i])][data::index(predicted[i])];
  fill_from_confusion(m.confusion, m.per_class);

  for (std::size_t c = 0; c < data::kNumPositiveLabels; ++c) {
    const ClassScores& s = m.per_class[c];
    m.micro.tp += s.tp;
    m.micro.fp += s.fp;
    m.micro.fn += s.fn;
    m.micro.support += s.support;
    m.macro_precision += s.precision;
    m.macro_recall += s.recall;
    m.macro_f1 += s.f1;
  }
  finalize(m.micro);
  const auto k = static_cast<double>(data::kNumPositiveLabels);
  m.macro_precision /= k;
  m.macro_recall /= k;
  m.macro_f1 /= k;
  return m;
}

SeverityMetrics evaluate_severity(std::span<const gensini::SeverityLevel> predicted,
                                  std::span<const gensini::SeverityLevel> gold) {
  if (predicted.size() != gold.size()) {
    throw std::invalid_argument("evaluate_severity: " + std::to_string(predicted.size()) +
                                " predictions for " + std::to_string(gold.size()) + " gold levels");
  }
  SeverityMetrics m;
  m.total = gold.size();
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const auto g = static_cast<std::size_t>(gold[i]);
    const auto p = static_cast<std::size_t>(predicted[i]);
    if (g >= gensini::kNumLevels || p >= gensini::kNumLevels) {
      throw std::invalid_argument("evaluate_severity: unknown severity level at document " + std::to_string(i));
    }
    ++m.confusion[g][p];
    if (g == p) ++m.correct;
  }
  fill_from_confusion(m.confusion, m.per_level);
  m.accuracy = m.total > 0 ? static_cast<double>(m.correct) / static_cast<double>(m.total) : 0.0;
  return m;
}

std::string format_table(const RelationMetrics& m) {
  std::ostringstream os;
  char line[160];
  std::snprintf(line, sizeof line, "%-20s %9s %9s %9s %8s\n", "relation", "P", "R", "F1", "support");
  os << line;
  for (std::size_t c = 0; c < data::kNumLabels; ++c) {
    const auto& s = m.per_class[c];
    std::snprintf(line, sizeof line, "%-20s %9s %9s %9s %8zu\n", std::string(data::to_string(data::label_at(c))).c_str(),
                  pct(s.precision).c_str(), pct(s.recall).c_str(), pct(s.f1).c_str(), s.support);
    os << line;
  }
  std::snprintf(line, sizeof line, "%-20s %9s %9s %9s %8zu\n", "micro (positive)", pct(m.micro.precision).c_str(),
                pct(m.micro.recall).c_str(), pct(m.micro.f1).c_str(), m.micro.support);
  os << line;
  std::snprintf(line, sizeof line, "%-20s %9s %9s %9s\n", "macro (positive)", pct(m.macro_precision).c_str(),
                pct(m.macro_recall).c_str(), pct(m.macro_f1).c_str());
  os << line;
  return os.str();
}

std::string format_table(const SeverityMetrics& m) {
  std::ostringstream os;
  char line[160];
  std::snprintf(line, sizeof line, "%-20s %9s %9s %9s %8s\n", "severity", "P", "R", "F1", "support");
  os << line;
  for (std::size_t c = 0; c < gensini::kNumLevels; ++c) {
    const auto& s = m.per_level[c];
    std::snprintf(line, sizeof line, "%-20s %9s %9s %9s %8zu\n",
                  std::string(gensini::to_string(static_cast<gensini::SeverityLevel>(c))).c_str(),
                  pct(s.precision).c_str(), pct(s.recall).c_str(), pct(s.f1).c_str(), s.support);
    os << line;
  }
  std::snprintf(line, sizeof line, "%-20s %9s %29zu\n", "overall accuracy", pct(m.accuracy).c_str(), m.total);
  os << line;
  os << "confusion (rows gold, columns predicted: mild moderate severe)\n";
  for (std::size_t g = 0; g < gensini::kNumLevels; ++g) {
    std::snprintf(line, sizeof line, "  %-9s %6zu %6zu %6zu\n",
                  std::string(gensini::to_string(static_cast<gensini::SeverityLevel>(g))).c_str(),
                  m.confusion[g][0], m.confusion[g][1], m.confusion[g][2]);
    os << line;
  }
  return os.str();
}

std::string to_json(const RelationMetrics& m) {
  nlohmann::json j;
  auto& per = j["per_class"] = nlohmann::json::object();
  for (std::size_t c = 0; c < data::kNumLabels; ++c) per[std::string(data::to_string(data::label_at(c)))] = scores_json(m.per_class[c]);
  j["micro"] = scores_json(m.micro);
  j["macro"] = {{"precision", m.macro_precision}, {"recall", m.macro_recall}, {"f1", m.macro_f1}};
  j["confusion"] = m.confusion;
  j["total"] = m.total;
  return j.dump(2);
}

std::string to_json(const SeverityMetrics& m) {
  nlohmann::json j;
  auto& per = j["per_level"] = nlohmann::json::object();
  for (std::size_t c = 0; c < gensini::kNumLevels; ++c) {
    per[std::string(gensini::to_string(static_cast<gensini::SeverityLevel>(c)))] = scores_json(m.per_level[c]);
  }
  j["confusion"] = m.confusion;
  j["correct"] = m.correct;
  j["total"] = m.total;
  j["accuracy"] = m.accuracy;
  return j.dump(2);
}

}  // namespace cadsev::pipeline
