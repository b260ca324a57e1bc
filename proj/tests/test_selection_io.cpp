#include <gtest/gtest.h>

#include "attnparse/selection_io.hpp"
#include "attnparse/version.hpp"

using namespace attnparse;
using nlohmann::json;

namespace {

HeadSelection sample() {
  HeadSelection s;
  s.strategy = Strategy::beam;
  s.beam_size = 5;
  s.chosen = {{1, 3, 2}, {0, 1, 1}};
  s.validation_f1 = 0.625;
  s.measure = Measure::jensen_shannon;
  s.subset = {17, 1700, 42, 0.01};
  s.model_ids = {"bert", "gpt2"};
  s.trace.push_back({0, {{0}}, {{{1, 3, 2}}}, {0.5}, {true}});
  return s;
}

AttentionArchive archive(const std::string& id, std::uint32_t l, std::uint32_t a) {
  SentenceAttention s{0, 1, std::vector<float>(l * a, 1.0f)};
  return AttentionArchive(id, l, a, {s});
}

}  // namespace

TEST(SelectionJson, Layout) {
  const auto j = selection_to_json(sample());
  EXPECT_EQ(j["strategy"], "beam");
  EXPECT_EQ(j["hyperparameters"]["b"], 5);
  EXPECT_FALSE(j["hyperparameters"].contains("K"));
  EXPECT_EQ(j["hyperparameters"]["measure"], "jsd");
  EXPECT_EQ(j["chosen"][0], json::array({"gpt2", 3, 2}));
  EXPECT_EQ(j["validation_subset"]["used"], 17);
  EXPECT_EQ(j["validation_subset"]["seed"], 42);
  EXPECT_EQ(j["version"], kVersion);
  EXPECT_FALSE(j.contains("trace"));
  EXPECT_EQ(selection_to_json(sample(), true)["trace"][0]["candidates"][0]["val"], 0.5);
}

TEST(SelectionJson, RoundTrip) {
  const auto original = sample();
  const auto back = selection_from_json(json::parse(selection_to_json(original).dump()));
  EXPECT_EQ(back.strategy, original.strategy);
  EXPECT_EQ(back.beam_size, original.beam_size);
  EXPECT_EQ(back.chosen, original.chosen);
  EXPECT_EQ(back.validation_f1, original.validation_f1);
  EXPECT_EQ(back.measure, original.measure);
  EXPECT_EQ(back.subset.seed, original.subset.seed);
  EXPECT_EQ(back.subset.fraction, original.subset.fraction);
  EXPECT_EQ(back.model_ids, original.model_ids);
}

TEST(SelectionJson, MalformedDocuments) {
  EXPECT_THROW(selection_from_json(json::object()), std::invalid_argument);
  auto j = selection_to_json(sample());
  j["chosen"] = json::array();
  EXPECT_THROW(selection_from_json(j), std::invalid_argument);
  j = selection_to_json(sample());
  j["chosen"][0][0] = "unknown";
  EXPECT_THROW(selection_from_json(j), std::invalid_argument);
  j = selection_to_json(sample());
  j["strategy"] = "best";
  EXPECT_THROW(selection_from_json(j), std::invalid_argument);
}

TEST(ResolveHeads, MapsByModelId) {
  // archives loaded in the opposite order from the selection's model list
  ArchiveSet set({archive("gpt2", 3, 2), archive("bert", 1, 1)});
  const auto heads = resolve_heads(sample(), set);
  EXPECT_EQ(heads, (std::vector<HeadId>{{0, 3, 2}, {1, 1, 1}}));
}

TEST(ResolveHeads, MissingHeadIsNamed) {
  ArchiveSet set({archive("gpt2", 2, 2), archive("bert", 1, 1)});
  try {
    resolve_heads(sample(), set);
    FAIL();
  } catch (const std::out_of_range& e) {
    EXPECT_NE(std::string(e.what()).find("(gpt2, 3, 2)"), std::string::npos) << e.what();
  }
  ArchiveSet no_bert({archive("gpt2", 3, 2)});
  EXPECT_THROW(resolve_heads(sample(), no_bert), std::out_of_range);
}
