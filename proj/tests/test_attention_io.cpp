#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <limits>

#include "attnparse/attention_io.hpp"
#include "attnparse/synthetic.hpp"
#include "test_util.hpp"

using namespace attnparse;

namespace {

// Same contents as tiny.atna: head k puts peak[k] on column (x + k) % z.
AttentionArchive tiny() {
  const float peak[4] = {0.5f, 0.25f, 0.75f, 1.0f};
  AttentionArchive a("tiny", 2, 2);
  for (std::uint32_t id = 0; id < 2; ++id) {
    SentenceAttention s{id, 3 + id, {}};
    for (std::uint32_t k = 0; k < 4; ++k) {
      for (std::uint32_t x = 0; x < s.z; ++x) {
        for (std::uint32_t y = 0; y < s.z; ++y) {
          s.values.push_back(y == (x + k) % s.z ? peak[k] : (1.0f - peak[k]) / float(s.z - 1));
        }
      }
    }
    a.add_sentence(s);
  }
  return a;
}

SentenceAttention uniform_sentence(std::uint32_t id, std::uint32_t z, std::uint32_t heads) {
  return {id, z, std::vector<float>(std::size_t(heads) * z * z, 1.0f / float(z))};
}

ArchiveErrc kind_of_read(const std::string& path) {
  try {
    read_archive(path);
  } catch (const ArchiveError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "archive was accepted";
  return ArchiveErrc::io_error;
}

std::uint32_t le32(const std::vector<std::uint8_t>& b, std::size_t at) {
  return b[at] | (b[at + 1] << 8) | (b[at + 2] << 16) | (std::uint32_t(b[at + 3]) << 24);
}

}  // namespace

TEST(Archive, GoldenFixtureBytes) {
  EXPECT_EQ(encode_archive(tiny()), testutil::read_bytes(testutil::data_path("tiny.atna")));
}

TEST(Archive, GoldenFixtureContents) {
  const auto a = read_archive(testutil::data_path("tiny.atna"));
  EXPECT_EQ(a.model_id(), "tiny");
  EXPECT_EQ(a.num_layers(), 2u);
  EXPECT_EQ(a.num_heads(), 2u);
  ASSERT_EQ(a.num_sentences(), 2u);
  EXPECT_EQ(a.sentence(0).z, 3u);
  EXPECT_EQ(a.sentence(1).z, 4u);
  const auto m = a.head_map(1, 1, 0);
  for (std::size_t x = 0; x < 3; ++x) {
    for (std::size_t y = 0; y < 3; ++y) EXPECT_EQ(m.at(x, y), x == y ? 0.5f : 0.25f);
  }
  // layer 2, head 2 is a permutation matrix shifted by three columns
  const auto p = a.head_map(2, 2, 1);
  for (std::size_t x = 0; x < 4; ++x) EXPECT_EQ(p.at(x, (x + 3) % 4), 1.0f);
}

TEST(Archive, HeaderLayout) {
  const auto b = encode_archive(tiny());
  ASSERT_GE(b.size(), 22u);
  EXPECT_EQ(std::memcmp(b.data(), "ATNA", 4), 0);
  EXPECT_EQ(le32(b, 4), 1u);
  EXPECT_EQ(b[8] | (b[9] << 8), 4);
  EXPECT_EQ(std::string(b.begin() + 10, b.begin() + 14), "tiny");
  EXPECT_EQ(le32(b, 14), 2u);
  EXPECT_EQ(le32(b, 18), 2u);
  EXPECT_EQ(le32(b, 22), 2u);
  EXPECT_EQ(le32(b, 26), 0u);  // first sentence id
  EXPECT_EQ(le32(b, 30), 3u);  // its z
  float first;
  std::memcpy(&first, b.data() + 34, 4);
  EXPECT_EQ(first, 0.5f);
  EXPECT_EQ(b.size(), 26u + (8 + 4 * 9 * 4) + (8 + 4 * 16 * 4));
}

TEST(Archive, RoundTripRandomArchives) {
  testutil::TempDir dir;
  synthetic::Rng rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    const auto corpus = synthetic::make_corpus(5, rng, {});
    const std::uint32_t l = 1 + rng() % 3, a = 1 + rng() % 3;
    const auto profiles = synthetic::spread_profiles(l * a, 0.2, 1.0, rng);
    const auto archive = synthetic::make_archive("m" + std::to_string(trial), l, a, profiles, corpus, rng);
    const auto path = dir.file("r.atna");
    write_archive(archive, path);
    const auto back = read_archive(path);
    EXPECT_EQ(back.model_id(), archive.model_id());
    ASSERT_EQ(back.num_sentences(), archive.num_sentences());
    for (std::size_t i = 0; i < back.num_sentences(); ++i) {
      EXPECT_EQ(back.sentence(i).id, archive.sentence(i).id);
      EXPECT_EQ(back.sentence(i).z, archive.sentence(i).z);
      EXPECT_EQ(back.sentence(i).values, archive.sentence(i).values);
    }
    EXPECT_EQ(encode_archive(back), testutil::read_bytes(path));
  }
}

TEST(Archive, StreamingMatchesWholeFile) {
  const auto path = testutil::data_path("fixture.atna");
  const auto whole = read_archive(path);
  ArchiveReader reader(path);
  EXPECT_EQ(reader.header().model_id, whole.model_id());
  EXPECT_EQ(reader.header().num_sentences, whole.num_sentences());
  std::size_t i = 0;
  while (auto s = reader.next()) {
    ASSERT_LT(i, whole.num_sentences());
    EXPECT_EQ(s->values, whole.sentence(i).values);
    ++i;
  }
  EXPECT_EQ(i, whole.num_sentences());
}

TEST(Archive, SingleWordSentence) {
  testutil::TempDir dir;
  AttentionArchive a("one", 1, 1, {{7, 1, {1.0f}}});
  write_archive(a, dir.file("a.atna"));
  EXPECT_EQ(read_archive(dir.file("a.atna")).head_map(1, 1, 0).at(0, 0), 1.0f);
}

TEST(Archive, RejectsZeroLayersBeforeWriting) {
  testutil::TempDir dir;
  AttentionArchive a("bad", 0, 2);
  EXPECT_THROW(write_archive(a, dir.file("x.atna")), ArchiveError);
  EXPECT_FALSE(std::filesystem::exists(dir.file("x.atna")));
}

TEST(Archive, InvalidRowNamesLocation) {
  testutil::TempDir dir;
  auto s = uniform_sentence(5, 3, 4);
  // layer 2 head 1 is the third head; scale its second row to sum 0.5
  for (std::size_t y = 0; y < 3; ++y) s.values[2 * 9 + 1 * 3 + y] *= 0.5f;
  AttentionArchive a("m", 2, 2, {s});
  try {
    a.validate();
    FAIL();
  } catch (const ArchiveError& e) {
    EXPECT_EQ(e.kind(), ArchiveErrc::invalid_distribution);
    EXPECT_EQ(e.where().sentence, 5u);
    EXPECT_EQ(e.where().layer, 2u);
    EXPECT_EQ(e.where().head, 1u);
    EXPECT_EQ(e.where().row, 2u);
  }
  EXPECT_THROW(write_archive(a, dir.file("x.atna")), ArchiveError);
}

TEST(Archive, RowSumTolerance) {
  auto s = uniform_sentence(0, 2, 1);
  s.values = {0.5f, 0.5009f, 0.5f, 0.5f};
  EXPECT_NO_THROW(AttentionArchive("m", 1, 1, {s}).validate());
  s.values = {0.5f, 0.502f, 0.5f, 0.5f};
  EXPECT_THROW(AttentionArchive("m", 1, 1, {s}).validate(), ArchiveError);
}

TEST(Archive, ErrorKinds) {
  testutil::TempDir dir;
  const auto good = encode_archive(tiny());

  testutil::write_bytes(dir.file("empty"), {});
  EXPECT_EQ(kind_of_read(dir.file("empty")), ArchiveErrc::bad_magic);

  auto bytes = good;
  bytes[0] = 'X';
  testutil::write_bytes(dir.file("magic"), bytes);
  EXPECT_EQ(kind_of_read(dir.file("magic")), ArchiveErrc::bad_magic);

  bytes = good;
  bytes[4] = 2;
  testutil::write_bytes(dir.file("version"), bytes);
  EXPECT_EQ(kind_of_read(dir.file("version")), ArchiveErrc::unsupported_version);

  bytes.assign(good.begin(), good.end() - 5);
  testutil::write_bytes(dir.file("truncated"), bytes);
  EXPECT_EQ(kind_of_read(dir.file("truncated")), ArchiveErrc::truncated_payload);

  bytes = good;
  bytes.push_back(0);
  testutil::write_bytes(dir.file("trailing"), bytes);
  EXPECT_EQ(kind_of_read(dir.file("trailing")), ArchiveErrc::trailing_bytes);

  bytes = good;
  const float nan = std::numeric_limits<float>::quiet_NaN();
  std::memcpy(bytes.data() + 34, &nan, 4);
  testutil::write_bytes(dir.file("nan"), bytes);
  EXPECT_EQ(kind_of_read(dir.file("nan")), ArchiveErrc::non_finite);

  bytes = good;
  const float half = 0.25f;
  std::memcpy(bytes.data() + 34, &half, 4);
  testutil::write_bytes(dir.file("row"), bytes);
  EXPECT_EQ(kind_of_read(dir.file("row")), ArchiveErrc::invalid_distribution);

  // huge z with too few bytes behind it
  bytes = good;
  bytes[30] = 0xff;
  bytes[31] = 0xff;
  testutil::write_bytes(dir.file("shape"), bytes);
  EXPECT_EQ(kind_of_read(dir.file("shape")), ArchiveErrc::truncated_payload);

  EXPECT_EQ(kind_of_read(dir.file("missing")), ArchiveErrc::io_error);
}

TEST(Archive, ShapeMismatchInMemory) {
  auto s = uniform_sentence(0, 3, 4);
  s.values.pop_back();
  try {
    AttentionArchive("m", 2, 2, {s}).validate();
    FAIL();
  } catch (const ArchiveError& e) {
    EXPECT_EQ(e.kind(), ArchiveErrc::shape_mismatch);
  }
}

TEST(Archive, HeadRangeErrors) {
  const auto a = tiny();
  EXPECT_THROW(a.head_map(3, 1, 0), std::out_of_range);
  EXPECT_THROW(a.head_map(1, 3, 0), std::out_of_range);
  EXPECT_THROW(a.head_map(0, 1, 0), std::out_of_range);
  EXPECT_THROW(a.head_map(1, 1, 2), std::out_of_range);
  const std::vector<AttentionArchive> list = {a};
  EXPECT_THROW(head_distributions(list, HeadId{1, 1, 1}, 0), std::out_of_range);
  EXPECT_EQ(head_distributions(list, HeadId{0, 1, 1}, 0).at(0, 0), 0.5f);
}

TEST(Archive, UniformMatrixComesBackUnchanged) {
  AttentionArchive a("u", 1, 1, {uniform_sentence(0, 4, 1)});
  const auto bytes = encode_archive(a);
  testutil::TempDir dir;
  testutil::write_bytes(dir.file("u.atna"), bytes);
  const auto back = read_archive(dir.file("u.atna"));
  const auto m = back.head_map(1, 1, 0);
  for (std::size_t x = 0; x < 4; ++x)
    for (std::size_t y = 0; y < 4; ++y) EXPECT_EQ(m.at(x, y), 0.25f);
}

TEST(ArchiveSet, AlignsModelsBySentenceId) {
  AttentionArchive a("a", 1, 1, {uniform_sentence(0, 3, 1), uniform_sentence(9, 2, 1)});
  AttentionArchive b("b", 1, 2, {uniform_sentence(9, 2, 2), uniform_sentence(0, 3, 2)});
  ArchiveSet set({a, b});
  EXPECT_EQ(set.num_models(), 2u);
  EXPECT_EQ(set.all_heads().size(), 3u);
  EXPECT_TRUE(set.has_sentence(9));
  EXPECT_FALSE(set.has_sentence(1));
  EXPECT_EQ(set.sentence_length(9), 2u);
  EXPECT_EQ(set.find_model("b"), 1u);
  EXPECT_FALSE(set.find_model("c"));
  EXPECT_EQ(set.head_map(HeadId{1, 1, 2}, 0).z, 3u);
  EXPECT_THROW(set.head_map(HeadId{0, 1, 2}, 0), std::out_of_range);
  EXPECT_THROW(set.head_map(HeadId{0, 1, 1}, 4), std::out_of_range);
}

TEST(ArchiveSet, RejectsLengthDisagreement) {
  AttentionArchive a("a", 1, 1, {uniform_sentence(0, 3, 1)});
  AttentionArchive b("b", 1, 1, {uniform_sentence(0, 4, 1)});
  EXPECT_THROW(ArchiveSet({a, b}), ArchiveError);
  AttentionArchive dup("d", 1, 1, {uniform_sentence(0, 3, 1), uniform_sentence(0, 3, 1)});
  EXPECT_THROW(ArchiveSet({dup}), ArchiveError);
}

TEST(Archive, SidecarPath) { EXPECT_EQ(sidecar_path("x/a.atna"), "x/a.atna.json"); }
