#include "bandfit/archive.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <set>

#include "bandfit/error.hpp"

namespace bandfit {
namespace {

constexpr std::size_t kLengthPrefix = 8;
constexpr std::size_t kF32Width = 4;
constexpr const char* kMetadataKey = "__metadata__";
constexpr const char* kHeaderName = "__header__";

std::uint64_t read_u64_le(std::span<const std::uint8_t> bytes) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | bytes[static_cast<std::size_t>(i)];
  return v;
}

void append_u64_le(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::size_t product(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

TensorEntry parse_entry(const std::string& name, const nlohmann::json& spec) {
  const auto malformed = [&name](const std::string& why) {
    return ArchiveParseError("tensor '" + name + "': " + why, kLengthPrefix);
  };
  if (!spec.is_object()) throw malformed("entry is not an object");
  if (!spec.contains("dtype") || !spec["dtype"].is_string()) throw malformed("missing dtype");
  const auto dtype = spec["dtype"].get<std::string>();
  if (dtype != "F32") throw UnsupportedDtypeError(name, dtype);

  TensorEntry entry;
  if (!spec.contains("shape") || !spec["shape"].is_array()) throw malformed("missing shape");
  for (const auto& d : spec["shape"]) {
    if (!d.is_number_unsigned() && !(d.is_number_integer() && d.get<std::int64_t>() >= 0)) {
      throw malformed("shape entries must be non-negative integers");
    }
    entry.shape.push_back(d.get<std::size_t>());
  }
  const auto& offsets = spec.contains("data_offsets") ? spec["data_offsets"] : nlohmann::json();
  if (!offsets.is_array() || offsets.size() != 2 || !offsets[0].is_number_unsigned() ||
      !offsets[1].is_number_unsigned()) {
    throw malformed("data_offsets must be two non-negative integers");
  }
  entry.begin = offsets[0].get<std::uint64_t>();
  entry.end = offsets[1].get<std::uint64_t>();
  return entry;
}

}  // namespace

std::size_t TensorEntry::element_count() const { return product(shape); }

std::vector<float> TensorArchive::values(const std::string& name) const {
  const TensorEntry& entry = entries.at(name);
  std::vector<float> out(entry.element_count());
  const std::uint8_t* src = payload.data() + entry.begin;
  for (std::size_t i = 0; i < out.size(); ++i, src += kF32Width) {
    const std::uint32_t bits = std::uint32_t{src[0]} | (std::uint32_t{src[1]} << 8) |
                               (std::uint32_t{src[2]} << 16) | (std::uint32_t{src[3]} << 24);
    out[i] = std::bit_cast<float>(bits);
  }
  return out;
}

TensorArchive parse_archive(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kLengthPrefix) {
    throw TruncationError(kHeaderName, kLengthPrefix, bytes.size());
  }
  const std::uint64_t header_length = read_u64_le(bytes.first(kLengthPrefix));
  if (header_length > bytes.size() - kLengthPrefix) {
    throw TruncationError(kHeaderName, header_length, bytes.size() - kLengthPrefix);
  }
  const auto header = bytes.subspan(kLengthPrefix, header_length);
  const auto payload = bytes.subspan(kLengthPrefix + header_length);

  TensorArchive archive;
  archive.payload.assign(payload.begin(), payload.end());
  if (header_length == 0) return archive;

  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(header.begin(), header.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw ArchiveParseError(std::string("malformed header JSON: ") + e.what(),
                            kLengthPrefix + (e.byte > 0 ? e.byte - 1 : 0));
  }
  if (!doc.is_object()) throw ArchiveParseError("header is not a JSON object", kLengthPrefix);

  for (const auto& [name, spec] : doc.items()) {
    if (name == kMetadataKey) {
      archive.metadata = spec;
      continue;
    }
    archive.entries.emplace(name, parse_entry(name, spec));
  }

  std::vector<std::pair<const std::string*, const TensorEntry*>> ranges;
  for (const auto& [name, entry] : archive.entries) {
    if (entry.end < entry.begin || entry.end - entry.begin != entry.element_count() * kF32Width) {
      throw ArchiveLayoutError("tensor '" + name + "': byte range [" + std::to_string(entry.begin) +
                               ", " + std::to_string(entry.end) + ") does not match its shape");
    }
    if (entry.end > archive.payload.size()) {
      throw TruncationError(name, entry.end, archive.payload.size());
    }
    ranges.emplace_back(&name, &entry);
  }
  std::sort(ranges.begin(), ranges.end(),
            [](const auto& a, const auto& b) { return a.second->begin < b.second->begin; });
  for (std::size_t i = 1; i < ranges.size(); ++i) {
    if (ranges[i].second->begin < ranges[i - 1].second->end) {
      throw ArchiveLayoutError("tensors '" + *ranges[i - 1].first + "' and '" + *ranges[i].first +
                               "' overlap");
    }
  }
  return archive;
}

TensorArchive load_archive(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open archive '" + path.string() + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("failed reading archive '" + path.string() + "'");
  return parse_archive(bytes);
}

std::vector<std::uint8_t> serialize_archive(std::span<const NamedTensor> tensors,
                                            const nlohmann::json& metadata) {
  nlohmann::json header = nlohmann::json::object();
  std::set<std::string> seen;
  std::uint64_t offset = 0;
  for (const NamedTensor& t : tensors) {
    if (t.name == kMetadataKey || !seen.insert(t.name).second) {
      throw InvalidParameterError("duplicate or reserved tensor name '" + t.name + "'");
    }
    if (product(t.shape) != t.values.size()) {
      throw SizeMismatchError("tensor '" + t.name + "' has " + std::to_string(t.values.size()) +
                              " values for its shape");
    }
    const std::uint64_t bytes = t.values.size() * kF32Width;
    header[t.name] = {{"dtype", "F32"}, {"shape", t.shape}, {"data_offsets", {offset, offset + bytes}}};
    offset += bytes;
  }
  if (!metadata.is_null()) header[kMetadataKey] = metadata;

  std::string text = header.dump();
  while (text.size() % 8 != 0) text.push_back(' ');

  std::vector<std::uint8_t> out;
  out.reserve(kLengthPrefix + text.size() + offset);
  append_u64_le(out, text.size());
  out.insert(out.end(), text.begin(), text.end());
  for (const NamedTensor& t : tensors) {
    for (float v : t.values) {
      const auto bits = std::bit_cast<std::uint32_t>(v);
      for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
    }
  }
  return out;
}

void write_archive(const std::filesystem::path& path, std::span<const NamedTensor> tensors,
                   const nlohmann::json& metadata) {
  const std::vector<std::uint8_t> bytes = serialize_archive(tensors, metadata);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

}  // namespace bandfit
