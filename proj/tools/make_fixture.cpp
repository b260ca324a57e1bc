// Writes the small deterministic fixtures used by the tests:
//   tiny.atna       two sentences (z=3, z=4), 2 layers x 2 heads
//   fixture.trees   ten synthetic gold trees
//   fixture.atna    attention for fixture.trees, 2 layers x 3 heads
#include <filesystem>
#include <fstream>
#include <iostream>

#include "attnparse/attention_io.hpp"
#include "attnparse/synthetic.hpp"
#include "attnparse/treebank.hpp"

namespace fs = std::filesystem;
using namespace attnparse;

namespace {

// Head k puts `peak[k]` on column (x + k) % z and spreads the rest evenly.
AttentionArchive tiny_archive() {
  constexpr float peak[4] = {0.5f, 0.25f, 0.75f, 1.0f};
  AttentionArchive archive("tiny", 2, 2);
  for (std::uint32_t id : {0u, 1u}) {
    SentenceAttention s;
    s.id = id;
    s.z = 3 + id;
    for (std::uint32_t k = 0; k < 4; ++k) {
      for (std::uint32_t x = 0; x < s.z; ++x) {
        for (std::uint32_t y = 0; y < s.z; ++y) {
          const float rest = (1.0f - peak[k]) / static_cast<float>(s.z - 1);
          s.values.push_back(y == (x + k) % s.z ? peak[k] : rest);
        }
      }
    }
    archive.add_sentence(std::move(s));
  }
  return archive;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: make_fixture <output-dir>\n";
    return 2;
  }
  const fs::path dir = argv[1];
  fs::create_directories(dir);

  write_archive(tiny_archive(), (dir / "tiny.atna").string());

  synthetic::Rng rng(20240611);
  synthetic::TreebankOptions options;
  options.min_words = 3;
  options.max_words = 9;
  const auto corpus = synthetic::make_corpus(10, rng, options);
  {
    std::ofstream out(dir / "fixture.trees", std::ios::binary);
    for (const auto& s : corpus) out << to_bracketed(s.gold) << "\n";
  }
  const std::vector<synthetic::HeadProfile> profiles = {
      {0.3, 1.5}, {1.2, 1.5}, {0.6, 1.5}, {2.0, 1.0}, {0.9, 2.0}, {0.4, 1.5}};
  write_archive(synthetic::make_archive("synthetic-a", 2, 3, profiles, corpus, rng),
                (dir / "fixture.atna").string());
  return 0;
}
