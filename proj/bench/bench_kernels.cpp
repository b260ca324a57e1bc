// Serial reference vs OpenMP kernels on a synthetic multi-model corpus.
#include <benchmark/benchmark.h>

#include "attnparse/kernels.hpp"
#include "attnparse/synthetic.hpp"

using namespace attnparse;

namespace {

struct Corpus {
  ArchiveSet archives;
  std::vector<HeadId> heads;
  std::vector<std::uint32_t> ids;
};

const Corpus& corpus() {
  static const Corpus c = [] {
    synthetic::Rng rng(2024);
    synthetic::TreebankOptions options;
    options.min_words = 10;
    options.max_words = 40;
    const auto sentences = synthetic::make_corpus(60, rng, options);
    std::vector<AttentionArchive> list;
    for (int p = 0; p < 2; ++p) {
      const auto profiles = synthetic::spread_profiles(4 * 8, 0.3, 2.0, rng);
      list.push_back(synthetic::make_archive("m" + std::to_string(p), 4, 8, profiles, sentences, rng));
    }
    Corpus out{ArchiveSet(std::move(list)), {}, {}};
    out.heads = out.archives.all_heads();
    for (std::uint32_t i = 0; i < sentences.size(); ++i) out.ids.push_back(i);
    return out;
  }();
  return c;
}

void BM_DecodeHeads(benchmark::State& state) {
  const auto exec = state.range(0) == 0 ? Execution::serial : Execution::parallel;
  set_worker_count(static_cast<int>(state.range(1)));
  const auto& c = corpus();
  for (auto _ : state) {
    benchmark::DoNotOptimize(decode_heads(c.archives, c.heads, c.ids, Measure::hellinger, exec));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(c.heads.size() * c.ids.size()));
}

void BM_DistanceMatrices(benchmark::State& state) {
  const auto exec = state.range(0) == 0 ? Execution::serial : Execution::parallel;
  set_worker_count(static_cast<int>(state.range(1)));
  const auto& c = corpus();
  for (auto _ : state) {
    for (auto id : c.ids) {
      benchmark::DoNotOptimize(head_distance_matrices(c.archives, id, Measure::jensen_shannon, exec));
    }
  }
}

}  // namespace

// args: {0 = serial, 1 = parallel}, worker count (0 = all cores)
BENCHMARK(BM_DecodeHeads)->Args({0, 1})->Args({1, 0})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DistanceMatrices)->Args({0, 1})->Args({1, 0})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
