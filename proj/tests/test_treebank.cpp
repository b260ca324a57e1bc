#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "attnparse/synthetic.hpp"
#include "attnparse/treebank.hpp"

using namespace attnparse;

namespace {

// Offset of the innermost '(' still open at end of input, by plain counting.
std::optional<std::size_t> innermost_unclosed(std::string_view text) {
  std::vector<std::size_t> open;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '(') open.push_back(i);
    if (text[i] == ')' && !open.empty()) open.pop_back();
  }
  if (open.empty()) return std::nullopt;
  return open.back();
}

std::size_t error_offset(std::string_view text) {
  try {
    parse_bracketed(text);
  } catch (const ParseError& e) {
    return e.offset();
  }
  ADD_FAILURE() << "no error for " << text;
  return 0;
}

}  // namespace

TEST(ParseBracketed, SimpleTree) {
  const auto t = parse_bracketed("(S (NP (DT the) (NN cat)) (VP (VBD sat)))");
  EXPECT_EQ(t.label, "S");
  ASSERT_EQ(t.children.size(), 2u);
  EXPECT_EQ(t.children[0].label, "NP");
  EXPECT_EQ(t.children[0].children[1].word, "cat");
  EXPECT_TRUE(t.children[0].children[1].is_terminal());
  EXPECT_EQ(t.num_terminals(), 3u);
  EXPECT_EQ(t.words(), (std::vector<std::string>{"the", "cat", "sat"}));
}

TEST(ParseBracketed, EmptyRootLabel) {
  const auto t = parse_bracketed("( (S (NN x) (NN y)))");
  EXPECT_EQ(t.label, "");
  ASSERT_EQ(t.children.size(), 1u);
  EXPECT_EQ(t.children[0].label, "S");
}

TEST(ParseBracketed, WhitespaceIsFlexible) {
  EXPECT_EQ(parse_bracketed("(S(NN x)(NN y))"), parse_bracketed("  (S\t(NN x)   (NN y) )  "));
}

TEST(ParseBracketed, UnclosedBracketReportsInnermostOpen) {
  EXPECT_EQ(error_offset("(S (NP the cat"), 3u);
  for (std::string_view text : {"(S (NP (DT the) (NN cat)", "(S", "((S (A b)", "(S (A b) (B"}) {
    SCOPED_TRACE(std::string(text));
    EXPECT_EQ(error_offset(text), innermost_unclosed(text).value());
  }
}

TEST(ParseBracketed, TruncationsMatchBalanceOracle) {
  const std::string full = "( (S (NP (DT the) (NN cat)) (VP (VBD sat) (PP (IN on) (NP (DT a) (NN mat))))))";
  for (std::size_t cut = 1; cut < full.size(); ++cut) {
    const std::string_view prefix(full.data(), cut);
    const auto open = innermost_unclosed(prefix);
    if (!open) continue;
    SCOPED_TRACE(std::string(prefix));
    // a prefix that stops inside a bare label or word is still unclosed
    EXPECT_EQ(error_offset(prefix), *open);
  }
}

TEST(ParseBracketed, OtherErrors) {
  EXPECT_EQ(error_offset(""), 0u);
  EXPECT_EQ(error_offset("   "), 0u);
  EXPECT_THROW(parse_bracketed("()"), ParseError);
  EXPECT_THROW(parse_bracketed("(S (NN x)) extra"), ParseError);
  EXPECT_THROW(parse_bracketed("(S (NN x) y)"), ParseError);
  EXPECT_THROW(parse_bracketed("S"), ParseError);
  EXPECT_THROW(parse_bracketed("(S (NN x)))"), ParseError);
}

TEST(ReadTreebank, SkipsBlankLinesAndReportsLine) {
  std::istringstream in("(S (NN a) (NN b))\n\n(S (NN c) (NN d))\n");
  EXPECT_EQ(read_treebank(in).size(), 2u);
  std::istringstream bad("(S (NN a) (NN b))\n(S (NN c)\n");
  try {
    read_treebank(bad);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
}

TEST(ToBracketed, RoundTrip) {
  synthetic::Rng rng(1);
  for (int i = 0; i < 200; ++i) {
    const auto s = synthetic::make_sentence(1 + rng() % 10, rng, {});
    const auto text = to_bracketed(s.gold);
    EXPECT_EQ(parse_bracketed(text), s.gold) << text;
    EXPECT_EQ(to_bracketed(parse_bracketed(text)), text);
  }
}

TEST(BaseLabel, StripsFunctionTags) {
  EXPECT_EQ(base_label("NP-SBJ-1"), "NP");
  EXPECT_EQ(base_label("PP=2"), "PP");
  EXPECT_EQ(base_label("S"), "S");
  EXPECT_EQ(base_label("-NONE-"), "-NONE-");
  EXPECT_EQ(base_label("-LRB-"), "-LRB-");
}

TEST(Preprocess, RemovesPunctuationAndEmptyElements) {
  const auto t = parse_bracketed(
      "( (S (NP-SBJ (DT the) (NN cat)) (VP (VBD sat) (NP (-NONE- *T*))) (. .)))");
  const auto p = preprocess(t, {}, 4);
  EXPECT_EQ(p.sentence.id, 4u);
  EXPECT_EQ(p.sentence.words, (std::vector<std::string>{"the", "cat", "sat"}));
  EXPECT_FALSE(p.skipped);
  // (1,2) is the NP; VP over "sat" alone is trivial; S covers everything
  EXPECT_EQ(p.gold.unlabeled, (std::set<Span>{{1, 2}}));
  ASSERT_EQ(p.gold.labeled.size(), 1u);
  EXPECT_EQ(p.gold.labeled[0].label, "NP");
}

TEST(Preprocess, KeepsFunctionTagsWhenAsked) {
  PreprocessConfig c;
  c.strip_function_tags = false;
  const auto p = preprocess(parse_bracketed("(S (NP-SBJ (DT a) (NN b)) (VBD c))"), c);
  ASSERT_EQ(p.gold.labeled.size(), 1u);
  EXPECT_EQ(p.gold.labeled[0].label, "NP-SBJ");
}

TEST(Preprocess, KeepsEmptyElementsWhenAsked) {
  PreprocessConfig c;
  c.remove_empty_elements = false;
  const auto p = preprocess(parse_bracketed("(S (NN a) (-NONE- *))"), c);
  EXPECT_EQ(p.sentence.size(), 2u);
}

TEST(Preprocess, CustomPunctuationTags) {
  PreprocessConfig c;
  c.punctuation_tags = {"DT"};
  const auto p = preprocess(parse_bracketed("(S (NP (DT the) (NN cat)) (. .))"), c);
  EXPECT_EQ(p.sentence.words, (std::vector<std::string>{"cat", "."}));
}

TEST(Preprocess, UnaryChainsKeepEveryLabel) {
  const auto p = preprocess(parse_bracketed("(S (S (NP (DT a) (NN b))) (VBD c) (RB d))"), {});
  EXPECT_EQ(p.gold.unlabeled, (std::set<Span>{{1, 2}}));
  ASSERT_EQ(p.gold.labeled.size(), 2u);
  EXPECT_EQ(p.gold.labeled[0].label, "NP");
  EXPECT_EQ(p.gold.labeled[1].label, "S");
}

TEST(Preprocess, AllPunctuationIsSkipped) {
  const auto p = preprocess(parse_bracketed("(S (. .) (, ,))"), {});
  EXPECT_TRUE(p.skipped);
  EXPECT_TRUE(p.sentence.words.empty());
  EXPECT_TRUE(p.gold.empty());
}

TEST(Preprocess, SyntheticGoldIsSubsetOfHiddenTree) {
  synthetic::Rng rng(9);
  for (int i = 0; i < 200; ++i) {
    const auto s = synthetic::make_sentence(2 + rng() % 10, rng, {});
    const auto p = preprocess(s.gold, {});
    EXPECT_EQ(p.sentence.words, s.words);
    const auto hidden = s.hidden.nontrivial_spans();
    for (const auto& span : p.gold.unlabeled) EXPECT_TRUE(hidden.count(span));
  }
}

TEST(WriteBracketed, UnlabeledOutput) {
  const auto t = BinaryTree::join(BinaryTree::leaf(1),
                                  BinaryTree::join(BinaryTree::leaf(2), BinaryTree::leaf(3)));
  const Sentence s{0, {"a", "b", "c"}};
  EXPECT_EQ(write_bracketed(t, s), "(X (X a) (X (X b) (X c)))");
  EXPECT_EQ(write_bracketed(BinaryTree::leaf(1), Sentence{0, {"w"}}), "(X w)");
  EXPECT_THROW(write_bracketed(t, Sentence{0, {"a"}}), std::invalid_argument);
}

TEST(WriteBracketed, RoundTripThroughBinaryTree) {
  synthetic::Rng rng(21);
  for (int i = 0; i < 200; ++i) {
    const std::size_t z = 1 + rng() % 12;
    const auto t = synthetic::random_tree(z, rng);
    Sentence s;
    for (std::size_t w = 0; w < z; ++w) s.words.push_back("w" + std::to_string(w));
    const auto text = write_bracketed(t, s);
    EXPECT_EQ(to_binary_tree(parse_bracketed(text)), t) << text;
  }
}

TEST(ToBinaryTree, RejectsWideNodes) {
  EXPECT_THROW(to_binary_tree(parse_bracketed("(X (X a) (X b) (X c))")), std::invalid_argument);
}
