#include "cadsev/text/ner.hpp"

#include <charconv>
#include <regex>
#include <stdexcept>

#include "text_util.hpp"

namespace cadsev::text {
namespace {

const std::regex& percentage_pattern() {
  static const std::regex re(R"([0-9]{1,3}(\.[0-9]+)?%)");
  return re;
}

// Length of a percentage starting at `pos`, or 0.
std::size_t percentage_at(std::string_view text, std::size_t pos) {
  const char c = text[pos];
  if (c < '0' || c > '9') return 0;
  if (pos > 0 && (detail::is_word_char(text[pos - 1]) || text[pos - 1] == '.')) return 0;
  std::cmatch m;
  const char* begin = text.data() + pos;
  const char* end = text.data() + text.size();
  if (!std::regex_search(begin, end, m, percentage_pattern(), std::regex_constants::match_continuous)) {
    return 0;
  }
  const auto len = static_cast<std::size_t>(m.length(0));
  if (!detail::on_word_boundaries(text, pos, len)) return 0;
  return len;
}

}  // namespace

std::vector<Token> tokenize(std::string_view sentence, const Lexicon& lexicon) {
  std::vector<Token> tokens;
  std::size_t run_start = std::string_view::npos;
  auto flush = [&](std::size_t end) {
    if (run_start == std::string_view::npos) return;
    tokens.push_back({std::string(sentence.substr(run_start, end - run_start)), run_start, end});
    run_start = std::string_view::npos;
  };

  std::size_t pos = 0;
  while (pos < sentence.size()) {
    if (const std::size_t ws = detail::whitespace_at(sentence, pos); ws > 0) {
      flush(pos);
      pos += ws;
      continue;
    }
    const std::size_t len = std::max(lexicon.longest_match(sentence, pos), percentage_at(sentence, pos));
    if (len > 0) {
      flush(pos);
      tokens.push_back({std::string(sentence.substr(pos, len)), pos, pos + len});
      pos += len;
      continue;
    }
    if (run_start == std::string_view::npos) run_start = pos;
    pos += detail::utf8_length(static_cast<unsigned char>(sentence[pos]));
  }
  flush(std::min(pos, sentence.size()));
  return tokens;
}

bool is_percentage(std::string_view surface) {
  return std::regex_match(surface.begin(), surface.end(), percentage_pattern());
}

std::optional<double> parse_percentage(std::string_view surface) {
  if (!is_percentage(surface)) return std::nullopt;
  double value = 0.0;
  const auto body = surface.substr(0, surface.size() - 1);
  const auto [ptr, ec] = std::from_chars(body.data(), body.data() + body.size(), value);
  if (ec != std::errc{} || ptr != body.data() + body.size()) return std::nullopt;
  return value;
}

std::vector<Entity> recognize_entities(std::span<const Token> tokens, const Lexicon& lexicon) {
  std::vector<Entity> entities;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const std::string& s = tokens[i].surface;
    if (auto type = lexicon.type_of(s)) {
      entities.push_back({{i, i}, *type, s});
    } else if (is_percentage(s)) {
      entities.push_back({{i, i}, EntityType::Percentage, s});
    }
  }
  return entities;
}

std::vector<std::string> split_sentences(std::string_view document) {
  static constexpr std::string_view kFullStop = "\xE3\x80\x82";  // 。
  std::vector<std::string> sentences;
  auto emit = [&](std::size_t begin, std::size_t end) {
    while (begin < end && detail::whitespace_at(document, begin) > 0) {
      begin += detail::whitespace_at(document, begin);
    }
    while (end > begin && detail::is_ascii_space(document[end - 1])) --end;
    if (end > begin) sentences.emplace_back(document.substr(begin, end - begin));
  };

  std::size_t start = 0;
  std::size_t pos = 0;
  while (pos < document.size()) {
    if (document.substr(pos, kFullStop.size()) == kFullStop) {
      pos += kFullStop.size();
      emit(start, pos);
      start = pos;
      continue;
    }
    if (document[pos] == '.' &&
        (pos + 1 == document.size() || detail::whitespace_at(document, pos + 1) > 0)) {
      ++pos;
      emit(start, pos);
      start = pos;
      continue;
    }
    pos += detail::utf8_length(static_cast<unsigned char>(document[pos]));
  }
  emit(start, document.size());
  return sentences;
}

std::vector<EntityType> type_tags(std::size_t token_count, std::span<const Entity> entities) {
  std::vector<EntityType> tags(token_count, EntityType::None);
  for (const auto& e : entities) {
    if (e.span.last >= token_count || e.span.first > e.span.last) {
      throw std::invalid_argument("entity span [" + std::to_string(e.span.first) + ", " +
                                  std::to_string(e.span.last) + "] outside " +
                                  std::to_string(token_count) + " tokens");
    }
    for (std::size_t i = e.span.first; i <= e.span.last; ++i) tags[i] = e.type;
  }
  return tags;
}

AnalyzedSentence analyze_sentence(std::string_view sentence, const Lexicon& lexicon) {
  AnalyzedSentence out;
  out.text = std::string(sentence);
  out.tokens = tokenize(sentence, lexicon);
  out.entities = recognize_entities(out.tokens, lexicon);
  return out;
}

}  // namespace cadsev::text
