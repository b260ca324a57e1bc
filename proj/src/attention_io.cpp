#include "attnparse/attention_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <limits>
#include <sstream>

namespace attnparse {

const char* to_string(ArchiveErrc kind) {
  switch (kind) {
    case ArchiveErrc::io_error: return "io error";
    case ArchiveErrc::bad_magic: return "bad magic";
    case ArchiveErrc::unsupported_version: return "unsupported version";
    case ArchiveErrc::truncated_payload: return "truncated payload";
    case ArchiveErrc::shape_mismatch: return "shape mismatch";
    case ArchiveErrc::non_finite: return "non-finite value";
    case ArchiveErrc::invalid_distribution: return "invalid distribution";
    case ArchiveErrc::trailing_bytes: return "trailing bytes";
  }
  return "unknown";
}

std::string ArchiveLocation::describe() const {
  std::ostringstream out;
  const char* sep = "";
  if (sentence) { out << "sentence " << *sentence; sep = ", "; }
  if (layer) { out << sep << "layer " << *layer; sep = ", "; }
  if (head) { out << sep << "head " << *head; sep = ", "; }
  if (row) { out << sep << "row " << *row; }
  return out.str();
}

namespace {

std::string format_error(ArchiveErrc kind, const std::string& message,
                         const ArchiveLocation& where) {
  std::string out = to_string(kind);
  const std::string loc = where.describe();
  if (!loc.empty()) out += " (" + loc + ")";
  if (!message.empty()) out += ": " + message;
  return out;
}

}  // namespace

ArchiveError::ArchiveError(ArchiveErrc kind, const std::string& message, ArchiveLocation where)
    : std::runtime_error(format_error(kind, message, where)), kind_(kind), where_(where) {}

std::string HeadId::to_string() const {
  return "(" + std::to_string(model) + ", " + std::to_string(layer) + ", " +
         std::to_string(head) + ")";
}

AttentionMap SentenceAttention::map(std::uint32_t layers_heads_index) const {
  const std::size_t zz = static_cast<std::size_t>(z) * z;
  return {std::span<const float>(values).subspan(layers_heads_index * zz, zz), z};
}

AttentionArchive::AttentionArchive(std::string model_id, std::uint32_t num_layers,
                                   std::uint32_t num_heads,
                                   std::vector<SentenceAttention> sentences)
    : model_id_(std::move(model_id)),
      num_layers_(num_layers),
      num_heads_(num_heads),
      sentences_(std::move(sentences)) {}

const SentenceAttention& AttentionArchive::sentence(std::size_t index) const {
  if (index >= sentences_.size()) {
    throw std::out_of_range("sentence index " + std::to_string(index) + " out of range (" +
                            std::to_string(sentences_.size()) + " sentences)");
  }
  return sentences_[index];
}

std::optional<std::size_t> AttentionArchive::find_sentence(std::uint32_t id) const {
  // ids are normally dense and ordered; try the direct slot first
  if (id < sentences_.size() && sentences_[id].id == id) return id;
  for (std::size_t i = 0; i < sentences_.size(); ++i) {
    if (sentences_[i].id == id) return i;
  }
  return std::nullopt;
}

void AttentionArchive::add_sentence(SentenceAttention sentence) {
  sentences_.push_back(std::move(sentence));
}

AttentionMap AttentionArchive::head_map(std::uint32_t layer, std::uint32_t head,
                                        std::size_t sentence_index) const {
  if (layer < 1 || layer > num_layers_ || head < 1 || head > num_heads_) {
    throw std::out_of_range("head (" + std::to_string(layer) + ", " + std::to_string(head) +
                            ") outside " + std::to_string(num_layers_) + " layers x " +
                            std::to_string(num_heads_) + " heads of '" + model_id_ + "'");
  }
  return sentence(sentence_index).map((layer - 1) * num_heads_ + (head - 1));
}

std::vector<Violation> check_sentence(const SentenceAttention& s, std::uint32_t num_layers,
                                      std::uint32_t num_heads, std::size_t max_violations) {
  std::vector<Violation> found;
  const std::size_t zz = static_cast<std::size_t>(s.z) * s.z;
  if (s.z == 0 || s.values.size() != zz * num_layers * num_heads) {
    found.push_back({ArchiveErrc::shape_mismatch,
                     {s.id, {}, {}, {}},
                     "expected " + std::to_string(num_layers) + "x" + std::to_string(num_heads) +
                         " matrices of " + std::to_string(s.z) + "x" + std::to_string(s.z) +
                         ", got " + std::to_string(s.values.size()) + " values"});
    return found;
  }
  for (std::uint32_t m = 0; m < num_layers; ++m) {
    for (std::uint32_t n = 0; n < num_heads; ++n) {
      const AttentionMap map = s.map(m * num_heads + n);
      for (std::uint32_t x = 0; x < s.z; ++x) {
        const ArchiveLocation where{s.id, m + 1, n + 1, x + 1};
        double sum = 0.0;
        bool finite = true;
        bool negative = false;
        for (float v : map.row(x)) {
          if (!std::isfinite(v)) finite = false;
          if (v < 0.0f) negative = true;
          sum += v;
        }
        if (!finite) {
          found.push_back({ArchiveErrc::non_finite, where, "row contains NaN or infinity"});
        } else if (negative) {
          found.push_back({ArchiveErrc::invalid_distribution, where, "negative entry"});
        } else if (std::abs(sum - 1.0) > kRowSumTolerance) {
          std::ostringstream msg;
          msg << "row sums to " << sum;
          found.push_back({ArchiveErrc::invalid_distribution, where, msg.str()});
        }
        if (found.size() >= max_violations) return found;
      }
    }
  }
  return found;
}

void AttentionArchive::validate() const {
  if (num_layers_ == 0 || num_heads_ == 0) {
    throw ArchiveError(ArchiveErrc::shape_mismatch, "archive must have at least one layer and head");
  }
  if (model_id_.size() > std::numeric_limits<std::uint16_t>::max()) {
    throw ArchiveError(ArchiveErrc::shape_mismatch, "model id longer than 65535 bytes");
  }
  for (const auto& s : sentences_) {
    auto v = check_sentence(s, num_layers_, num_heads_, 1);
    if (!v.empty()) throw ArchiveError(v.front().kind, v.front().message, v.front().where);
  }
}

// ---------------------------------------------------------------------------
// encoding

namespace {

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int shift = 0; shift < 32; shift += 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
         static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

}  // namespace

std::vector<std::uint8_t> encode_archive(const AttentionArchive& archive) {
  archive.validate();
  std::vector<std::uint8_t> out;
  out.insert(out.end(), std::begin(kArchiveMagic), std::end(kArchiveMagic));
  put_u32(out, kArchiveVersion);
  put_u16(out, static_cast<std::uint16_t>(archive.model_id().size()));
  out.insert(out.end(), archive.model_id().begin(), archive.model_id().end());
  put_u32(out, archive.num_layers());
  put_u32(out, archive.num_heads());
  put_u32(out, static_cast<std::uint32_t>(archive.num_sentences()));
  for (const auto& s : archive.sentences()) {
    put_u32(out, s.id);
    put_u32(out, s.z);
    for (float v : s.values) put_u32(out, std::bit_cast<std::uint32_t>(v));
  }
  return out;
}

void write_archive(const AttentionArchive& archive, const std::string& path) {
  const auto bytes = encode_archive(archive);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ArchiveError(ArchiveErrc::io_error, "cannot open '" + path + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw ArchiveError(ArchiveErrc::io_error, "write to '" + path + "' failed");
}

// ---------------------------------------------------------------------------
// decoding

ArchiveReader::ArchiveReader(const std::string& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    throw ArchiveError(ArchiveErrc::io_error, "cannot open '" + path + "'");
  }
  in_.open(path, std::ios::binary);
  if (!in_) throw ArchiveError(ArchiveErrc::io_error, "cannot open '" + path + "'");

  char magic[4] = {};
  in_.read(magic, 4);
  if (in_.gcount() != 4 || std::memcmp(magic, kArchiveMagic, 4) != 0) {
    throw ArchiveError(ArchiveErrc::bad_magic, "'" + path + "' is not an ATNA archive");
  }
  std::uint8_t buf[4];
  read_exact(buf, 4, {});
  header_.version = get_u32(buf);
  if (header_.version != kArchiveVersion) {
    throw ArchiveError(ArchiveErrc::unsupported_version,
                       "version " + std::to_string(header_.version));
  }
  read_exact(buf, 2, {});
  const std::size_t id_len = static_cast<std::size_t>(buf[0]) | static_cast<std::size_t>(buf[1]) << 8;
  header_.model_id.resize(id_len);
  if (id_len > 0) read_exact(header_.model_id.data(), id_len, {});
  read_exact(buf, 4, {});
  header_.num_layers = get_u32(buf);
  read_exact(buf, 4, {});
  header_.num_heads = get_u32(buf);
  read_exact(buf, 4, {});
  header_.num_sentences = get_u32(buf);
  if (header_.num_layers == 0 || header_.num_heads == 0) {
    throw ArchiveError(ArchiveErrc::shape_mismatch, "archive declares zero layers or heads");
  }
}

void ArchiveReader::read_exact(void* dst, std::size_t n, const ArchiveLocation& where) {
  in_.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in_.gcount()) != n) {
    throw ArchiveError(ArchiveErrc::truncated_payload, "unexpected end of file", where);
  }
}

std::optional<SentenceAttention> ArchiveReader::next(bool validate) {
  if (consumed_ == header_.num_sentences) {
    if (in_.peek() != std::char_traits<char>::eof()) {
      throw ArchiveError(ArchiveErrc::trailing_bytes,
                         "data after " + std::to_string(consumed_) + " declared sentences");
    }
    return std::nullopt;
  }
  SentenceAttention s;
  std::uint8_t buf[8];
  read_exact(buf, 8, {});
  s.id = get_u32(buf);
  s.z = get_u32(buf + 4);
  const ArchiveLocation where{s.id, {}, {}, {}};
  if (s.z == 0) throw ArchiveError(ArchiveErrc::shape_mismatch, "zero-length sentence", where);

  const std::uint64_t count = static_cast<std::uint64_t>(s.z) * s.z * header_.num_layers *
                              header_.num_heads;
  // refuse to allocate more than the file can hold
  const auto here = in_.tellg();
  in_.seekg(0, std::ios::end);
  const auto end = in_.tellg();
  in_.seekg(here);
  if (here < 0 || end < here || static_cast<std::uint64_t>(end - here) < count * 4) {
    throw ArchiveError(ArchiveErrc::truncated_payload,
                       "sentence needs " + std::to_string(count * 4) + " bytes", where);
  }
  std::vector<std::uint8_t> raw(static_cast<std::size_t>(count) * 4);
  read_exact(raw.data(), raw.size(), where);
  s.values.resize(static_cast<std::size_t>(count));
  for (std::size_t i = 0; i < s.values.size(); ++i) {
    s.values[i] = std::bit_cast<float>(get_u32(raw.data() + 4 * i));
  }
  ++consumed_;
  if (validate) {
    auto v = check_sentence(s, header_.num_layers, header_.num_heads, 1);
    if (!v.empty()) throw ArchiveError(v.front().kind, v.front().message, v.front().where);
  }
  return s;
}

AttentionArchive read_archive(const std::string& path) {
  ArchiveReader reader(path);
  const auto& h = reader.header();
  AttentionArchive archive(h.model_id, h.num_layers, h.num_heads);
  while (auto s = reader.next()) archive.add_sentence(std::move(*s));
  return archive;
}

AttentionMap head_distributions(std::span<const AttentionArchive> archives, const HeadId& head,
                                std::size_t sentence_index) {
  if (head.model >= archives.size()) {
    throw std::out_of_range("model index " + std::to_string(head.model) + " out of range (" +
                            std::to_string(archives.size()) + " archives)");
  }
  return archives[head.model].head_map(head.layer, head.head, sentence_index);
}

ArchiveSet::ArchiveSet(std::vector<AttentionArchive> archives) : archives_(std::move(archives)) {
  std::unordered_map<std::uint32_t, std::uint32_t> lengths;
  positions_.resize(archives_.size());
  for (std::size_t p = 0; p < archives_.size(); ++p) {
    const auto& a = archives_[p];
    for (std::size_t i = 0; i < a.num_sentences(); ++i) {
      const auto& s = a.sentences()[i];
      if (!positions_[p].emplace(s.id, i).second) {
        throw ArchiveError(ArchiveErrc::shape_mismatch,
                           "model '" + a.model_id() + "' repeats sentence id",
                           {s.id, {}, {}, {}});
      }
      const auto [it, inserted] = lengths.emplace(s.id, s.z);
      if (!inserted && it->second != s.z) {
        throw ArchiveError(ArchiveErrc::shape_mismatch,
                           "model '" + a.model_id() + "' has z=" + std::to_string(s.z) +
                               " but another archive has z=" + std::to_string(it->second),
                           {s.id, {}, {}, {}});
      }
    }
  }
}

std::vector<std::string> ArchiveSet::model_ids() const {
  std::vector<std::string> ids;
  for (const auto& a : archives_) ids.push_back(a.model_id());
  return ids;
}

std::optional<std::uint32_t> ArchiveSet::find_model(const std::string& model_id) const {
  for (std::size_t p = 0; p < archives_.size(); ++p) {
    if (archives_[p].model_id() == model_id) return static_cast<std::uint32_t>(p);
  }
  return std::nullopt;
}

std::vector<HeadId> ArchiveSet::all_heads() const {
  std::vector<HeadId> heads;
  for (std::uint32_t p = 0; p < archives_.size(); ++p) {
    for (std::uint32_t m = 1; m <= archives_[p].num_layers(); ++m) {
      for (std::uint32_t n = 1; n <= archives_[p].num_heads(); ++n) heads.push_back({p, m, n});
    }
  }
  return heads;
}

bool ArchiveSet::contains(const HeadId& head) const {
  return head.model < archives_.size() && head.layer >= 1 &&
         head.layer <= archives_[head.model].num_layers() && head.head >= 1 &&
         head.head <= archives_[head.model].num_heads();
}

bool ArchiveSet::has_sentence(std::uint32_t sentence_id) const {
  if (archives_.empty()) return false;
  for (const auto& pos : positions_) {
    if (!pos.contains(sentence_id)) return false;
  }
  return true;
}

std::uint32_t ArchiveSet::sentence_length(std::uint32_t sentence_id) const {
  for (std::size_t p = 0; p < archives_.size(); ++p) {
    if (auto it = positions_[p].find(sentence_id); it != positions_[p].end()) {
      return archives_[p].sentences()[it->second].z;
    }
  }
  throw std::out_of_range("no archive holds sentence " + std::to_string(sentence_id));
}

AttentionMap ArchiveSet::head_map(const HeadId& head, std::uint32_t sentence_id) const {
  if (head.model >= archives_.size()) {
    throw std::out_of_range("model index " + std::to_string(head.model) + " out of range");
  }
  const auto& pos = positions_[head.model];
  const auto it = pos.find(sentence_id);
  if (it == pos.end()) {
    throw std::out_of_range("model '" + archives_[head.model].model_id() + "' has no sentence " +
                            std::to_string(sentence_id));
  }
  return archives_[head.model].head_map(head.layer, head.head, it->second);
}

std::string sidecar_path(const std::string& archive_path) { return archive_path + ".json"; }

}  // namespace attnparse
