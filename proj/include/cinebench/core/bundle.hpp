#pragma once

// CBF1 feature bundle container.
//
//   bytes 0..3   magic "CBF1"
//   bytes 4..7   header length N, unsigned little-endian
//   bytes 8..    N bytes of UTF-8 JSON header:
//                  {"schema_version":1,"clip_id":...,"tensors":[{"name","shape","offset","length"}],"meta":{...}}
//                offset/length are byte counts relative to the start of the payload
//   then         raw little-endian float32 payload
//
// write_feature_bundle lays tensors out contiguously in name order, so
// read(write(b)) == b and write(read(bytes)) == bytes for canonical files.

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cinebench/core/types.hpp"

namespace cinebench {

inline constexpr int kBundleSchemaVersion = 1;
inline constexpr std::string_view kBundleMagic = "CBF1";

struct Tensor {
  std::vector<std::int64_t> shape;
  std::vector<float> data;

  std::size_t rank() const { return shape.size(); }
  std::int64_t dim(std::size_t i) const { return shape.at(i); }

  static std::size_t element_count(std::span<const std::int64_t> shape) {
    std::size_t n = 1;
    for (auto d : shape) n *= static_cast<std::size_t>(d);
    return n;
  }

  friend bool operator==(const Tensor& a, const Tensor& b) {
    // Bitwise payload comparison so NaN payloads compare equal to themselves.
    return a.shape == b.shape && a.data.size() == b.data.size() &&
           (a.data.empty() || std::memcmp(a.data.data(), b.data.data(), a.data.size() * sizeof(float)) == 0);
  }
};

struct FeatureBundle {
  std::string clip_id;
  int schema_version = kBundleSchemaVersion;
  std::map<std::string, Tensor> tensors;
  ordered_json meta = ordered_json::object();  // provenance etc., carried through untouched

  const Tensor* find(const std::string& name) const {
    auto it = tensors.find(name);
    return it == tensors.end() ? nullptr : &it->second;
  }

  friend bool operator==(const FeatureBundle&, const FeatureBundle&) = default;
};

/// Checks that reserved tensor names carry their documented rank and trailing
/// dimensions. Returns an empty string when the tensor is fine.
inline std::string reserved_layout_problem(const std::string& name, const Tensor& t) {
  auto rank_is = [&](std::size_t r) { return t.rank() == r; };
  if (name == "keypoints") {
    if (!rank_is(3) || t.dim(2) != 3) return "keypoints must be [F, J, 3]";
  } else if (name == "subject_emb" || name == "face_emb" || name == "background_emb") {
    if (!rank_is(2)) return name + " must be rank 2";
  } else if (name == "text_sim" || name == "flow_mag" || name == "boundaries" || name == "coherence") {
    if (!rank_is(1)) return name + " must be rank 1";
  } else if (name == "detections") {
    if (!rank_is(2) || t.dim(1) != 7) return "detections must be [N, 7]";
  }
  return {};
}

namespace detail {

inline void check_tensor(const std::string& name, const Tensor& t) {
  if (name.empty()) throw Error(ErrorCode::Format, "tensor with empty name");
  for (auto d : t.shape) {
    if (d < 0) throw Error(ErrorCode::ShapeMismatch, "tensor '" + name + "' has a negative dimension");
  }
  if (Tensor::element_count(t.shape) != t.data.size())
    throw Error(ErrorCode::ShapeMismatch, "tensor '" + name + "': shape product != payload length");
  if (auto p = reserved_layout_problem(name, t); !p.empty()) throw Error(ErrorCode::Layout, p);
}

inline void put_u32_le(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

inline std::uint32_t get_u32_le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace detail

inline std::string write_feature_bundle(const FeatureBundle& b) {
  ordered_json header;
  header["schema_version"] = b.schema_version;
  header["clip_id"] = b.clip_id;
  ordered_json entries = ordered_json::array();
  std::uint64_t offset = 0;
  for (const auto& [name, t] : b.tensors) {
    detail::check_tensor(name, t);
    const std::uint64_t length = t.data.size() * sizeof(float);
    entries.push_back(ordered_json{{"name", name}, {"shape", t.shape}, {"offset", offset}, {"length", length}});
    offset += length;
  }
  header["tensors"] = std::move(entries);
  header["meta"] = b.meta;
  const std::string header_text = header.dump();

  std::string out;
  out.reserve(8 + header_text.size() + offset);
  out.append(kBundleMagic);
  detail::put_u32_le(out, static_cast<std::uint32_t>(header_text.size()));
  out.append(header_text);
  for (const auto& [name, t] : b.tensors) {
    for (float f : t.data) detail::put_u32_le(out, std::bit_cast<std::uint32_t>(f));
  }
  return out;
}

inline FeatureBundle read_feature_bundle(std::string_view bytes) {
  if (bytes.size() < 4 || bytes.substr(0, 4) != kBundleMagic) throw Error(ErrorCode::BadMagic, "not a CBF1 bundle");
  if (bytes.size() < 8) throw Error(ErrorCode::Truncated, "missing header length");
  const auto* raw = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::uint64_t header_len = detail::get_u32_le(raw + 4);
  if (bytes.size() < 8 + header_len) throw Error(ErrorCode::Truncated, "header extends past end of data");

  ordered_json header;
  try {
    header = ordered_json::parse(bytes.substr(8, header_len));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Format, std::string("header is not valid JSON: ") + e.what());
  }

  FeatureBundle b;
  std::uint64_t payload_end = 0;
  const std::string_view payload = bytes.substr(8 + header_len);
  try {
    b.schema_version = header.at("schema_version").get<int>();
    if (b.schema_version != kBundleSchemaVersion) throw Error(ErrorCode::Format, "unsupported schema_version");
    b.clip_id = header.at("clip_id").get<std::string>();
    if (header.contains("meta")) b.meta = header.at("meta");
    for (const auto& e : header.at("tensors")) {
      const auto name = e.at("name").get<std::string>();
      Tensor t;
      t.shape = e.at("shape").get<std::vector<std::int64_t>>();
      const auto offset = e.at("offset").get<std::uint64_t>();
      const auto length = e.at("length").get<std::uint64_t>();
      for (auto d : t.shape) {
        if (d < 0) throw Error(ErrorCode::ShapeMismatch, "tensor '" + name + "' has a negative dimension");
      }
      if (length != Tensor::element_count(t.shape) * sizeof(float))
        throw Error(ErrorCode::ShapeMismatch, "tensor '" + name + "': declared length does not match its shape");
      if (offset % sizeof(float) != 0) throw Error(ErrorCode::Format, "tensor '" + name + "' is misaligned");
      if (offset + length > payload.size()) throw Error(ErrorCode::Truncated, "tensor '" + name + "' payload truncated");
      t.data.resize(length / sizeof(float));
      const auto* src = reinterpret_cast<const unsigned char*>(payload.data()) + offset;
      for (std::size_t i = 0; i < t.data.size(); ++i) t.data[i] = std::bit_cast<float>(detail::get_u32_le(src + 4 * i));
      if (auto p = reserved_layout_problem(name, t); !p.empty()) throw Error(ErrorCode::Layout, p);
      if (!b.tensors.emplace(name, std::move(t)).second)
        throw Error(ErrorCode::Format, "duplicate tensor '" + name + "'");
      payload_end = std::max(payload_end, offset + length);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Format, std::string("bad header: ") + e.what());
  }
  if (payload_end != payload.size()) throw Error(ErrorCode::Format, "trailing bytes after the last tensor");
  return b;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Writes through a temporary file and renames, so readers never see a partial file.
inline void write_file_atomic(const std::filesystem::path& path, std::string_view bytes) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::Io, "short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline std::filesystem::path bundle_path(const std::filesystem::path& dir, const std::string& clip_id) {
  return dir / (clip_id + ".cbf1");
}

inline FeatureBundle load_bundle(const std::filesystem::path& path) { return read_feature_bundle(read_file(path)); }

inline void save_bundle(const std::filesystem::path& dir, const FeatureBundle& b) {
  write_file_atomic(bundle_path(dir, b.clip_id), write_feature_bundle(b));
}

}  // namespace cinebench
