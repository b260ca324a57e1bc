#pragma once

#include <compare>
#include <cstdint>
#include <fstream>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace attnparse {

/// ATNA archive layout (all integers and floats little-endian):
///
///   "ATNA"  u32 version=1  u16 len + model_id bytes  u32 layers  u32 heads
///   u32 sentence_count
///   per sentence: u32 id, u32 z, then layers*heads matrices in layer-major,
///   head-minor order, each z*z float32 row-major.
inline constexpr char kArchiveMagic[4] = {'A', 'T', 'N', 'A'};
inline constexpr std::uint32_t kArchiveVersion = 1;
/// Maximum |row sum - 1| accepted for an attention row.
inline constexpr double kRowSumTolerance = 1e-3;

enum class ArchiveErrc {
  io_error,
  bad_magic,
  unsupported_version,
  truncated_payload,
  shape_mismatch,
  non_finite,
  invalid_distribution,
  trailing_bytes,
};

const char* to_string(ArchiveErrc kind);

/// Where in an archive a problem was found. Layer and head are 1-based.
struct ArchiveLocation {
  std::optional<std::uint32_t> sentence;
  std::optional<std::uint32_t> layer;
  std::optional<std::uint32_t> head;
  std::optional<std::uint32_t> row;

  std::string describe() const;
};

class ArchiveError : public std::runtime_error {
 public:
  ArchiveError(ArchiveErrc kind, const std::string& message, ArchiveLocation where = {});
  ArchiveErrc kind() const { return kind_; }
  const ArchiveLocation& where() const { return where_; }

 private:
  ArchiveErrc kind_;
  ArchiveLocation where_;
};

/// One head's z x z attention map; row x is the distribution of word x.
struct AttentionMap {
  std::span<const float> data;
  std::size_t z = 0;

  std::span<const float> row(std::size_t x) const { return data.subspan(x * z, z); }
  float at(std::size_t x, std::size_t y) const { return data[x * z + y]; }
};

/// Model index into the list of loaded archives (0-based), layer and head
/// (1-based).
struct HeadId {
  std::uint32_t model = 0;
  std::uint32_t layer = 1;
  std::uint32_t head = 1;

  auto operator<=>(const HeadId&) const = default;
  std::string to_string() const;
};

struct SentenceAttention {
  std::uint32_t id = 0;
  std::uint32_t z = 0;
  /// layers * heads * z * z floats, layer-major then head-minor.
  std::vector<float> values;

  AttentionMap map(std::uint32_t layers_heads_index) const;
};

struct ArchiveHeader {
  std::uint32_t version = kArchiveVersion;
  std::string model_id;
  std::uint32_t num_layers = 0;
  std::uint32_t num_heads = 0;
  std::uint32_t num_sentences = 0;
};

class AttentionArchive {
 public:
  AttentionArchive() = default;
  AttentionArchive(std::string model_id, std::uint32_t num_layers, std::uint32_t num_heads,
                   std::vector<SentenceAttention> sentences = {});

  const std::string& model_id() const { return model_id_; }
  std::uint32_t num_layers() const { return num_layers_; }
  std::uint32_t num_heads() const { return num_heads_; }
  std::size_t num_sentences() const { return sentences_.size(); }
  const std::vector<SentenceAttention>& sentences() const { return sentences_; }
  const SentenceAttention& sentence(std::size_t index) const;
  /// Position of the sentence with this id, if present.
  std::optional<std::size_t> find_sentence(std::uint32_t id) const;

  void add_sentence(SentenceAttention sentence);

  /// Zero-copy view of head (layer, head) for the sentence at `sentence_index`.
  /// Throws std::out_of_range.
  AttentionMap head_map(std::uint32_t layer, std::uint32_t head, std::size_t sentence_index) const;

  /// Throws ArchiveError on the first invariant violation.
  void validate() const;

 private:
  std::string model_id_;
  std::uint32_t num_layers_ = 0;
  std::uint32_t num_heads_ = 0;
  std::vector<SentenceAttention> sentences_;
};

/// Non-fatal findings collected while checking a sentence.
struct Violation {
  ArchiveErrc kind;
  ArchiveLocation where;
  std::string message;
};

std::vector<Violation> check_sentence(const SentenceAttention& sentence, std::uint32_t num_layers,
                                      std::uint32_t num_heads, std::size_t max_violations = 64);

/// Sequential reader that loads one sentence at a time.
class ArchiveReader {
 public:
  /// Opens and decodes the header. Throws ArchiveError.
  explicit ArchiveReader(const std::string& path);

  const ArchiveHeader& header() const { return header_; }

  /// Next sentence, validated unless `validate` is false; nullopt after the
  /// last one. Trailing bytes after the declared sentence count are an error.
  std::optional<SentenceAttention> next(bool validate = true);

 private:
  void read_exact(void* dst, std::size_t n, const ArchiveLocation& where);

  std::ifstream in_;
  ArchiveHeader header_;
  std::uint32_t consumed_ = 0;
};

/// Whole-file read with full validation.
AttentionArchive read_archive(const std::string& path);

std::vector<std::uint8_t> encode_archive(const AttentionArchive& archive);
/// Validates first; nothing is written when the archive is invalid.
void write_archive(const AttentionArchive& archive, const std::string& path);

/// View of a head in a list of archives; `sentence_index` is the position of
/// the sentence inside archive `head.model`. Throws std::out_of_range.
AttentionMap head_distributions(std::span<const AttentionArchive> archives, const HeadId& head,
                                std::size_t sentence_index);

/// Archives of several models over the same split, addressed by sentence id.
/// Construction fails with ArchiveErrc::shape_mismatch when two archives
/// disagree on the word count of a shared sentence id, or when an archive
/// repeats an id.
class ArchiveSet {
 public:
  ArchiveSet() = default;
  explicit ArchiveSet(std::vector<AttentionArchive> archives);

  std::size_t num_models() const { return archives_.size(); }
  const AttentionArchive& archive(std::size_t model) const { return archives_.at(model); }
  std::span<const AttentionArchive> archives() const { return archives_; }
  std::vector<std::string> model_ids() const;
  std::optional<std::uint32_t> find_model(const std::string& model_id) const;

  /// Every head of every model in (model, layer, head) order.
  std::vector<HeadId> all_heads() const;
  bool contains(const HeadId& head) const;

  /// True when every archive holds the sentence.
  bool has_sentence(std::uint32_t sentence_id) const;
  std::uint32_t sentence_length(std::uint32_t sentence_id) const;

  /// Throws std::out_of_range for unknown heads or sentences.
  AttentionMap head_map(const HeadId& head, std::uint32_t sentence_id) const;

 private:
  std::vector<AttentionArchive> archives_;
  // per model: sentence id -> position in that archive
  std::vector<std::unordered_map<std::uint32_t, std::size_t>> positions_;
};

/// Sidecar path convention: "<archive>.json".
std::string sidecar_path(const std::string& archive_path);

}  // namespace attnparse
