#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "attnparse/attention_io.hpp"
#include "attnparse/distance.hpp"
#include "attnparse/tree.hpp"
#include "attnparse/treebank.hpp"

// Synthetic treebanks and attention archives with a known hidden structure.
// Heads see noisy copies of each sentence's hidden syntactic distance, so
// ensembles of heads can be checked against single heads without a model.

namespace attnparse::synthetic {

using Rng = std::mt19937_64;

/// Uniformly random split points, recursively.
BinaryTree random_tree(std::size_t z, Rng& rng, std::size_t first = 1);

struct TreebankOptions {
  std::size_t min_words = 2;
  std::size_t max_words = 12;
  /// Probability that an internal non-root node is flattened into its parent.
  double flatten_probability = 0.15;
  /// Probability of a sentence-final period terminal.
  double punctuation_probability = 0.5;
};

struct SyntheticSentence {
  BinaryTree hidden;
  LabeledTree gold;
  std::vector<std::string> words;
};

/// Random labelled gold tree whose constituents are a subset of `hidden`'s
/// spans (some flattened), plus optional punctuation that preprocessing removes.
SyntheticSentence make_sentence(std::size_t z, Rng& rng, const TreebankOptions& options);
std::vector<SyntheticSentence> make_corpus(std::size_t count, Rng& rng,
                                           const TreebankOptions& options);

/// Row-stochastic z x z attention where word x attends to y with weight
/// exp(-sharpness * h(x, y)), h being the largest distance between them.
std::vector<float> attention_from_distance(std::span<const double> distances, double sharpness);

struct HeadProfile {
  /// Std-dev of Gaussian noise added to the hidden heights.
  double noise = 0.5;
  double sharpness = 1.5;
};

/// One archive over `sentences`, head (m, n) using profiles[(m-1)*heads+(n-1)].
AttentionArchive make_archive(const std::string& model_id, std::uint32_t num_layers,
                              std::uint32_t num_heads, std::span<const HeadProfile> profiles,
                              std::span<const SyntheticSentence> sentences, Rng& rng);

/// Noise levels spread between `best` and `worst`, shuffled across heads.
std::vector<HeadProfile> spread_profiles(std::size_t count, double best, double worst, Rng& rng);

}  // namespace attnparse::synthetic
