#pragma once

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "shyi/error.hpp"
#include "shyi/hypergraph.hpp"

namespace shyi {

using Lexicon = std::set<std::string>;

// Verbs and prepositions covering the two-object interaction prompt corpus.
inline Lexicon default_verb_lexicon() {
  return {"building", "carrying", "carving",  "catching", "chasing",  "fixing",
          "holding",  "painting", "playing",  "plays",    "reading",  "reeling",
          "sculpting", "weaving", "hugging",  "feeding",  "kicking",  "pushing",
          "pulling",  "riding",   "throwing", "walking",  "watching", "eating"};
}

inline Lexicon default_preposition_lexicon() {
  return {"in", "on", "under", "over", "by", "near", "at", "beside",
          "behind", "inside", "across", "along", "through", "with", "above"};
}

// One word per line; blank lines and lines starting with '#' are ignored.
inline Lexicon read_lexicon(std::istream& in) {
  Lexicon words;
  std::string line;
  while (std::getline(in, line)) {
    std::string w;
    std::istringstream(line) >> w;
    if (w.empty() || w.front() == '#') continue;
    std::transform(w.begin(), w.end(), w.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    words.insert(w);
  }
  return words;
}

inline Lexicon load_lexicon(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read lexicon " + path);
  return read_lexicon(in);
}

namespace detail {

inline bool is_markup(char c) {
  return c == '[' || c == ']' || c == '{' || c == '}' || c == '<' || c == '>' || c == ',';
}

inline std::string strip_punctuation(std::string_view word) {
  std::size_t b = 0;
  std::size_t e = word.size();
  while (b < e && std::ispunct(static_cast<unsigned char>(word[b]))) ++b;
  while (e > b && std::ispunct(static_cast<unsigned char>(word[e - 1]))) --e;
  return std::string(word.substr(b, e - b));
}

inline std::string lowercase(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

class MarkupScanner {
 public:
  explicit MarkupScanner(std::string_view text) : text_(text) {}

  bool done() {
    skip_space();
    return pos_ >= text_.size();
  }
  char peek() const { return text_[pos_]; }
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

  [[noreturn]] void fail(const std::string& what) const { throw ParseError(what, line_, column_); }

  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    ++pos_;
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) advance();
  }

  // Run of non-space, non-markup characters. Empty when none.
  std::string word() {
    std::string w;
    while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_])) &&
           !is_markup(text_[pos_])) {
      w.push_back(text_[pos_]);
      advance();
    }
    return w;
  }

  void expect(char c, const std::string& context) {
    skip_space();
    if (pos_ >= text_.size()) fail("expected '" + std::string(1, c) + "' " + context + ", got end of input");
    if (text_[pos_] != c) {
      fail("expected '" + std::string(1, c) + "' " + context + ", got '" +
           std::string(1, text_[pos_]) + "'");
    }
    advance();
  }

  // Words up to the closing bracket. `open_line/col` locate the opener for
  // the unbalanced-bracket diagnostic.
  std::vector<std::string> words_until(char close, char open, std::size_t open_line,
                                       std::size_t open_col) {
    std::vector<std::string> words;
    for (;;) {
      skip_space();
      if (pos_ >= text_.size()) {
        throw ParseError("unclosed '" + std::string(1, open) + "'", open_line, open_col);
      }
      const char c = text_[pos_];
      if (c == close) {
        advance();
        return words;
      }
      if (is_markup(c)) {
        fail("unexpected '" + std::string(1, c) + "' inside '" + std::string(1, open) + "'");
      }
      auto w = strip_punctuation(word());
      if (!w.empty()) words.push_back(std::move(w));
    }
  }

  std::vector<std::string> id_list(const std::string& context) {
    expect('{', context);
    std::vector<std::string> ids;
    for (;;) {
      skip_space();
      auto id = word();
      if (id.empty()) {
        if (pos_ >= text_.size()) fail("unclosed '{'");
        fail("expected an id " + context);
      }
      ids.push_back(std::move(id));
      skip_space();
      if (pos_ >= text_.size()) fail("unclosed '{'");
      if (text_[pos_] == ',') {
        advance();
        continue;
      }
      if (text_[pos_] == '}') {
        advance();
        return ids;
      }
      fail("unexpected '" + std::string(1, text_[pos_]) + "' in id list");
    }
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t column_ = 1;
};

}  // namespace detail

// Markup:
//   prompt := item+
//   item   := group | action | WORD
//   group  := "[" WORD+ "]" "{" ID "}"
//   action := "<" WORD+ ">" "{" ID ("," ID)+ "}"
// Unmarked words become environment tokens.
inline SemanticHypergraph parse_annotated(std::string_view text) {
  SemanticHypergraph g;
  detail::MarkupScanner scan(text);

  struct PendingEdge {
    ActionEdge edge;
    std::string text;
    std::size_t line, column;
  };
  std::vector<PendingEdge> pending;

  auto push_token = [&](std::string word) {
    const std::size_t idx = g.tokens.size();
    g.tokens.push_back({idx, std::move(word)});
    return idx;
  };

  while (!scan.done()) {
    const std::size_t line = scan.line();
    const std::size_t col = scan.column();
    const char c = scan.peek();
    if (c == '[' || c == '<') {
      scan.advance();
      const char close = c == '[' ? ']' : '>';
      auto words = scan.words_until(close, c, line, col);
      if (words.empty()) throw ParseError("empty '" + std::string(1, c) + "' group", line, col);
      std::vector<std::size_t> indices;
      std::string joined;
      for (auto& w : words) {
        joined += (joined.empty() ? "" : "_") + w;
        indices.push_back(push_token(std::move(w)));
      }
      if (c == '[') {
        auto ids = scan.id_list("after noun group");
        if (ids.size() != 1) {
          throw ParseError("noun group takes exactly one id", line, col);
        }
        if (g.vertex_position(ids[0])) {
          throw ParseError("duplicate id '" + ids[0] + "'", line, col);
        }
        g.vertices.push_back({ids[0], std::move(indices)});
      } else {
        auto ids = scan.id_list("after action");
        if (ids.size() < 2) {
          throw ParseError("action '" + joined + "' needs at least 2 parties", line, col);
        }
        pending.push_back({{"", std::move(indices), std::move(ids)}, joined, line, col});
      }
    } else if (c == ',') {
      scan.advance();  // plain punctuation outside an id list
    } else if (detail::is_markup(c)) {
      scan.fail("unexpected '" + std::string(1, c) + "'");
    } else {
      auto w = detail::strip_punctuation(scan.word());
      if (!w.empty()) g.environment_token_indices.push_back(push_token(std::move(w)));
    }
  }

  std::map<std::string, int> seen;
  for (auto& p : pending) {
    for (const auto& party : p.edge.party_ids) {
      if (!g.vertex_position(party)) {
        throw ParseError("action '" + p.text + "' references unknown id '" + party + "'",
                         p.line, p.column);
      }
    }
    const int n = seen[p.text]++;
    p.edge.id = n == 0 ? p.text : p.text + "#" + std::to_string(n + 1);
    g.edges.push_back(std::move(p.edge));
  }
  if (g.vertices.empty()) throw ParseError("prompt has no noun group", 1, 1);
  g.validate();
  return g;
}

// Whitespace tokenization with punctuation trimmed from token edges.
inline std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::istringstream in{std::string(text)};
  std::string w;
  while (in >> w) {
    auto t = detail::strip_punctuation(w);
    if (!t.empty()) out.push_back(std::move(t));
  }
  return out;
}

// "NP1 VERB NP2 [PREP rest...]". The first lexicon verb splits the noun
// phrases; the first preposition after it starts the environment.
inline SemanticHypergraph parse_template(std::string_view text, const Lexicon& verbs,
                                         const Lexicon& prepositions) {
  const auto words = tokenize(text);
  std::size_t verb = words.size();
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (verbs.count(detail::lowercase(words[i]))) {
      verb = i;
      break;
    }
  }
  if (verb == words.size()) throw ParseError("no verb found", 1, 1);
  if (verb == 0 || verb + 1 == words.size()) {
    throw ParseError("verb '" + words[verb] + "' cannot be the first or last word", 1, 1);
  }
  std::size_t prep = words.size();
  for (std::size_t i = verb + 1; i < words.size(); ++i) {
    if (prepositions.count(detail::lowercase(words[i]))) {
      prep = i;
      break;
    }
  }
  if (prep == verb + 1) throw ParseError("empty noun phrase after '" + words[verb] + "'", 1, 1);

  SemanticHypergraph g;
  for (std::size_t i = 0; i < words.size(); ++i) g.tokens.push_back({i, words[i]});
  NounGroup first{"v1", {}};
  for (std::size_t i = 0; i < verb; ++i) first.token_indices.push_back(i);
  NounGroup second{"v2", {}};
  for (std::size_t i = verb + 1; i < prep; ++i) second.token_indices.push_back(i);
  g.vertices = {std::move(first), std::move(second)};
  g.edges.push_back({words[verb], {verb}, {"v1", "v2"}});
  for (std::size_t i = prep; i < words.size(); ++i) g.environment_token_indices.push_back(i);
  g.validate();
  return g;
}

inline SemanticHypergraph parse_template(std::string_view text) {
  return parse_template(text, default_verb_lexicon(), default_preposition_lexicon());
}

}  // namespace shyi
