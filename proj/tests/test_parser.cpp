#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "shyi/prompt_parser.hpp"

using namespace shyi;

namespace {

std::vector<std::string> words_of(const SemanticHypergraph& g, const std::vector<std::size_t>& idx) {
  std::vector<std::string> out;
  for (auto i : idx) out.push_back(g.tokens[i].text);
  return out;
}

using Words = std::vector<std::string>;

// Every token index is in exactly one of vertex / action / environment.
void expect_partition(const SemanticHypergraph& g) {
  std::vector<int> seen(g.tokens.size(), 0);
  for (const auto& v : g.vertices) {
    for (auto t : v.token_indices) ++seen[t];
  }
  for (const auto& e : g.edges) {
    for (auto t : e.action_token_indices) ++seen[t];
  }
  for (auto t : g.environment_token_indices) ++seen[t];
  for (std::size_t i = 0; i < seen.size(); ++i) EXPECT_EQ(seen[i], 1) << "token " << i;
}

std::string error_of(std::string_view text) {
  try {
    parse_annotated(text);
  } catch (const ParseError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Annotated, WhiteDogGingerCat) {
  const auto g = parse_annotated("[white dog]{d} <plays>{d,c} with [ginger cat]{c} in a forest");
  ASSERT_EQ(g.vertices.size(), 2u);
  EXPECT_EQ(g.vertices[0].id, "d");
  EXPECT_EQ(words_of(g, g.vertices[0].token_indices), (Words{"white", "dog"}));
  EXPECT_EQ(g.vertices[1].id, "c");
  EXPECT_EQ(words_of(g, g.vertices[1].token_indices), (Words{"ginger", "cat"}));
  ASSERT_EQ(g.edges.size(), 1u);
  EXPECT_EQ(words_of(g, g.edges[0].action_token_indices), (Words{"plays"}));
  EXPECT_EQ(g.edges[0].party_ids, (Words{"d", "c"}));
  EXPECT_EQ(words_of(g, g.environment_token_indices), (Words{"with", "in", "a", "forest"}));
  expect_partition(g);
}

TEST(Annotated, MinimalInput) {
  const auto g = parse_annotated("[cat]{a} <catches>{a,b} [mouse]{b}");
  EXPECT_EQ(g.tokens.size(), 3u);
  EXPECT_EQ(g.vertices.size(), 2u);
  EXPECT_EQ(g.edges.size(), 1u);
  EXPECT_TRUE(g.environment_token_indices.empty());
}

TEST(Annotated, MultiWordActionAndPunctuation) {
  const auto g = parse_annotated("A [boy]{b} <is kicking>{b,f} the [ball]{f}, happily.");
  EXPECT_EQ(words_of(g, g.edges[0].action_token_indices), (Words{"is", "kicking"}));
  EXPECT_EQ(g.edges[0].id, "is_kicking");
  EXPECT_EQ(words_of(g, g.environment_token_indices), (Words{"A", "the", "happily"}));
  EXPECT_EQ(g.tokens.back().text, "happily");
  expect_partition(g);
}

TEST(Annotated, RepeatedActionWordsGetDistinctIds) {
  const auto g = parse_annotated("[a]{x} <holds>{x,y} [b]{y} <holds>{y,z} [c]{z}");
  ASSERT_EQ(g.edges.size(), 2u);
  EXPECT_NE(g.edges[0].id, g.edges[1].id);
}

TEST(Annotated, Errors) {
  EXPECT_NE(error_of("[cat]{a} <naps>{a}").find("at least 2 parties"), std::string::npos);
  EXPECT_NE(error_of("[cat{a}").find("'['"), std::string::npos);
  EXPECT_NE(error_of("cat]{a}").find("']'"), std::string::npos);
  EXPECT_NE(error_of("[cat]{a} [dog]{a}").find("duplicate"), std::string::npos);
  EXPECT_NE(error_of("[cat]{a} <sees>{a,q} [dog]{b}").find("'q'"), std::string::npos);
  EXPECT_NE(error_of("[cat] <sees>{a,b}").find("'{'"), std::string::npos);
  EXPECT_NE(error_of("only words here").find("no noun group"), std::string::npos);
  EXPECT_NE(error_of("[]{a}").find("empty"), std::string::npos);
}

TEST(Annotated, ErrorCarriesPosition) {
  try {
    parse_annotated("[cat]{a}\n  [dog sees");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_EQ(e.column(), 3u);
  }
}

TEST(Template, CatChasingMouse) {
  const auto g = parse_template("Cat chasing mouse under tree");
  EXPECT_EQ(words_of(g, g.vertices[0].token_indices), (Words{"Cat"}));
  EXPECT_EQ(words_of(g, g.vertices[1].token_indices), (Words{"mouse"}));
  EXPECT_EQ(g.edges[0].id, "chasing");
  EXPECT_EQ(g.edges[0].party_ids, (Words{"v1", "v2"}));
  EXPECT_EQ(words_of(g, g.environment_token_indices), (Words{"under", "tree"}));
}

TEST(Template, RedRobotFixingBrokenCar) {
  const auto g = parse_template("Red robot fixing broken car in garage");
  EXPECT_EQ(words_of(g, g.vertices[0].token_indices), (Words{"Red", "robot"}));
  EXPECT_EQ(words_of(g, g.vertices[1].token_indices), (Words{"broken", "car"}));
  EXPECT_EQ(words_of(g, g.edges[0].action_token_indices), (Words{"fixing"}));
  EXPECT_EQ(words_of(g, g.environment_token_indices), (Words{"in", "garage"}));
}

TEST(Template, AllCorpusPromptsGiveTwoVerticesOneEdge) {
  const std::vector<std::string> corpus = {
      "Robot painting canvas in studio",
      "Cat chasing mouse under tree",
      "Dog carrying stick over bridge",
      "Child reading book by fireplace",
      "Bird building nest on cliff",
      "Fisherman catching fish near river",
      "Artist sculpting statue in gallery",
      "Red robot fixing broken car in garage",
      "Small cat chasing gray mouse under table",
      "Golden retriever holding wooden stick on beach",
      "Young girl reading thick book by window",
      "Blue bird weaving tiny nest on branch",
      "Old fisherman reeling big fish near lake",
      "Skilled artist carving marble statue in workshop",
  };
  ASSERT_EQ(corpus.size(), 14u);
  for (const auto& prompt : corpus) {
    SCOPED_TRACE(prompt);
    const auto g = parse_template(prompt);
    EXPECT_EQ(g.vertices.size(), 2u);
    EXPECT_EQ(g.edges.size(), 1u);
    EXPECT_EQ(g.environment_token_indices.size(), 2u);
    expect_partition(g);
  }
}

TEST(Template, Errors) {
  EXPECT_THROW(parse_template("sunset over mountains"), ParseError);
  EXPECT_THROW(parse_template("chasing mouse"), ParseError);
  EXPECT_THROW(parse_template("cat chasing"), ParseError);
  EXPECT_THROW(parse_template("cat chasing under tree"), ParseError);
}

TEST(Template, ExplicitLexicons) {
  const auto g = parse_template("moon orbits earth beyond stars", {"orbits"}, {"beyond"});
  EXPECT_EQ(g.edges[0].id, "orbits");
  EXPECT_EQ(words_of(g, g.environment_token_indices), (Words{"beyond", "stars"}));
  EXPECT_THROW(parse_template("moon orbits earth beyond stars"), ParseError);
}

TEST(Lexicon, ShippedFilesMatchBuiltins) {
  EXPECT_EQ(load_lexicon(std::string(SHYI_DATA_DIR) + "/verbs.txt"), default_verb_lexicon());
  EXPECT_EQ(load_lexicon(std::string(SHYI_DATA_DIR) + "/prepositions.txt"),
            default_preposition_lexicon());
  EXPECT_THROW(load_lexicon("/nonexistent/verbs.txt"), IoError);
}
