#include "attnparse/synthetic.hpp"

#include <algorithm>
#include <cmath>

namespace attnparse::synthetic {

namespace {

const std::vector<std::string>& phrase_labels() {
  static const std::vector<std::string> labels = {"NP", "VP", "PP", "S", "SBAR", "ADJP", "ADVP"};
  return labels;
}

const std::vector<std::string>& tags() {
  static const std::vector<std::string> t = {"DT", "NN", "VBD", "JJ", "IN", "RB", "NNS", "PRP"};
  return t;
}

const std::vector<std::string>& vocabulary() {
  static const std::vector<std::string> v = {"the", "cat", "sat", "on",  "a",    "mat",
                                             "dog", "ran", "big", "old", "very", "we"};
  return v;
}

template <class T>
const T& pick(const std::vector<T>& items, Rng& rng) {
  return items[static_cast<std::size_t>(rng() % items.size())];
}

double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

// Children of `node` after optionally splicing in flattened grandchildren.
std::vector<LabeledTree> labelled_children(const BinaryTree& tree, int index,
                                           const std::vector<std::string>& words, Rng& rng,
                                           const TreebankOptions& options);

LabeledTree labelled(const BinaryTree& tree, int index, const std::vector<std::string>& words,
                     Rng& rng, const TreebankOptions& options) {
  const auto& n = tree.node(index);
  if (n.is_leaf()) return LabeledTree{pick(tags(), rng), words[n.first - 1], {}};
  LabeledTree out;
  out.label = pick(phrase_labels(), rng);
  out.children = labelled_children(tree, index, words, rng, options);
  return out;
}

std::vector<LabeledTree> labelled_children(const BinaryTree& tree, int index,
                                           const std::vector<std::string>& words, Rng& rng,
                                           const TreebankOptions& options) {
  std::vector<LabeledTree> out;
  const auto& n = tree.node(index);
  for (int child : {n.left, n.right}) {
    const bool flatten = !tree.node(child).is_leaf() && uniform01(rng) < options.flatten_probability;
    if (flatten) {
      for (auto& c : labelled_children(tree, child, words, rng, options)) out.push_back(std::move(c));
    } else {
      out.push_back(labelled(tree, child, words, rng, options));
    }
  }
  return out;
}

}  // namespace

BinaryTree random_tree(std::size_t z, Rng& rng, std::size_t first) {
  return BinaryTree::from_splits(first, first + z - 1, [&](std::size_t f, std::size_t l) {
    return f + static_cast<std::size_t>(rng() % (l - f));
  });
}

SyntheticSentence make_sentence(std::size_t z, Rng& rng, const TreebankOptions& options) {
  SyntheticSentence s;
  s.hidden = random_tree(z, rng);
  for (std::size_t i = 0; i < z; ++i) s.words.push_back(pick(vocabulary(), rng));

  LabeledTree body = labelled(s.hidden, 0, s.words, rng, options);
  if (body.is_terminal()) body = LabeledTree{"NP", "", {body}};
  body.label = "S";
  if (uniform01(rng) < options.punctuation_probability) {
    body.children.push_back(LabeledTree{".", ".", {}});
  }
  s.gold = LabeledTree{"", "", {std::move(body)}};
  return s;
}

std::vector<SyntheticSentence> make_corpus(std::size_t count, Rng& rng,
                                           const TreebankOptions& options) {
  std::vector<SyntheticSentence> out;
  out.reserve(count);
  const std::size_t range = options.max_words - options.min_words + 1;
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t z = options.min_words + static_cast<std::size_t>(rng() % range);
    out.push_back(make_sentence(z, rng, options));
  }
  return out;
}

std::vector<float> attention_from_distance(std::span<const double> distances, double sharpness) {
  const std::size_t z = distances.size() + 1;
  std::vector<double> weights(z * z, 0.0);
  for (std::size_t x = 0; x < z; ++x) {
    double h = 0.0;
    weights[x * z + x] = 1.0;
    for (std::size_t y = x + 1; y < z; ++y) {
      h = std::max(h, distances[y - 1]);
      const double w = std::exp(-sharpness * h);
      weights[x * z + y] = w;
      weights[y * z + x] = w;
    }
  }
  std::vector<float> out(z * z);
  for (std::size_t x = 0; x < z; ++x) {
    double sum = 0.0;
    for (std::size_t y = 0; y < z; ++y) sum += weights[x * z + y];
    for (std::size_t y = 0; y < z; ++y) out[x * z + y] = static_cast<float>(weights[x * z + y] / sum);
  }
  return out;
}

AttentionArchive make_archive(const std::string& model_id, std::uint32_t num_layers,
                              std::uint32_t num_heads, std::span<const HeadProfile> profiles,
                              std::span<const SyntheticSentence> sentences, Rng& rng) {
  if (profiles.size() != static_cast<std::size_t>(num_layers) * num_heads) {
    throw std::invalid_argument("need one head profile per head");
  }
  AttentionArchive archive(model_id, num_layers, num_heads);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    const DistanceVector hidden = tree_to_distance(sentences[i].hidden);
    SentenceAttention s;
    s.id = static_cast<std::uint32_t>(i);
    s.z = static_cast<std::uint32_t>(hidden.size() + 1);
    for (const auto& profile : profiles) {
      DistanceVector noisy = hidden;
      for (auto& v : noisy) v = std::max(0.0, v + profile.noise * gauss(rng));
      const auto map = attention_from_distance(noisy, profile.sharpness);
      s.values.insert(s.values.end(), map.begin(), map.end());
    }
    archive.add_sentence(std::move(s));
  }
  return archive;
}

std::vector<HeadProfile> spread_profiles(std::size_t count, double best, double worst, Rng& rng) {
  std::vector<HeadProfile> out;
  for (std::size_t i = 0; i < count; ++i) {
    const double t = count > 1 ? static_cast<double>(i) / static_cast<double>(count - 1) : 0.0;
    out.push_back({best + t * (worst - best), 1.5});
  }
  std::shuffle(out.begin(), out.end(), rng);
  return out;
}

}  // namespace attnparse::synthetic
