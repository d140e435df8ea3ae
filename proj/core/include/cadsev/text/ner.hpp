#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cadsev/text/lexicon.hpp"

namespace cadsev::text {

/// A token with UTF-8 byte offsets [start, end) into its sentence.
struct Token {
  std::string surface;
  std::size_t start = 0;
  std::size_t end = 0;

  friend bool operator==(const Token&, const Token&) = default;
};

/// Inclusive token index range.
struct TokenSpan {
  std::size_t first = 0;
  std::size_t last = 0;

  std::size_t length() const { return last - first + 1; }
  friend bool operator==(const TokenSpan&, const TokenSpan&) = default;
};

struct Entity {
  TokenSpan span;
  EntityType type = EntityType::None;
  std::string surface;

  friend bool operator==(const Entity&, const Entity&) = default;
};

/// Greedy left-to-right segmentation. At each position the longest lexicon
/// term or percentage wins; text between matches splits only on whitespace
/// and each maximal unmatched run becomes one token.
std::vector<Token> tokenize(std::string_view sentence, const Lexicon& lexicon);

/// Lexicon hits and percentages, one entity per matching token, in order.
std::vector<Entity> recognize_entities(std::span<const Token> tokens, const Lexicon& lexicon);

/// 1-3 digits, optional fraction, then '%'.
bool is_percentage(std::string_view surface);
/// Numeric value of a percentage surface ("40%" -> 40).
std::optional<double> parse_percentage(std::string_view surface);

/// Splits a document on sentence-final punctuation ("。", or "." followed by
/// whitespace or end of text). Surrounding whitespace is trimmed.
std::vector<std::string> split_sentences(std::string_view document);

/// Per-token entity type, `None` outside entities.
std::vector<EntityType> type_tags(std::size_t token_count, std::span<const Entity> entities);

struct AnalyzedSentence {
  std::string text;
  std::vector<Token> tokens;
  std::vector<Entity> entities;
};

AnalyzedSentence analyze_sentence(std::string_view sentence, const Lexicon& lexicon);

}  // namespace cadsev::text
