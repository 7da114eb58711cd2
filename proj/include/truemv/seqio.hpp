#pragma once

// Frame / motion-field / depth-map types and their on-disk formats:
// binary PGM (P5, maxval 255), "MVF1" motion sidecars, "DPT1" depth
// sidecars, and the plain-text sequence manifest.

#include <bit>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "truemv/error.hpp"

namespace truemv {

struct Frame {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> samples;  // raster order

  std::uint8_t at(int x, int y) const {
    return samples[static_cast<std::size_t>(y) * width + x];
  }
  std::uint8_t& at(int x, int y) {
    return samples[static_cast<std::size_t>(y) * width + x];
  }
  bool operator==(const Frame&) const = default;
};

// Quarter-pel 2D displacement. All motion in this library lives on the
// quarter-pel integer grid.
struct Mv {
  int x = 0;
  int y = 0;
  bool operator==(const Mv&) const = default;
};

// Per-pixel backward 3D motion: previous-frame position = current + (mx/4, my/4),
// previous depth = current depth + mz.
struct MotionVec {
  int mx = 0;
  int my = 0;
  float mz = 0.0f;
  bool operator==(const MotionVec&) const = default;
};

struct MotionField {
  int width = 0;
  int height = 0;
  std::vector<MotionVec> vectors;  // raster order

  const MotionVec& at(int x, int y) const {
    return vectors[static_cast<std::size_t>(y) * width + x];
  }
  MotionVec& at(int x, int y) {
    return vectors[static_cast<std::size_t>(y) * width + x];
  }
  bool operator==(const MotionField&) const = default;
};

// Normalized scene depth of the visible surface, in [0, 1]; 1.0 = background.
struct DepthMap {
  int width = 0;
  int height = 0;
  std::vector<float> depths;  // raster order

  float at(int x, int y) const {
    return depths[static_cast<std::size_t>(y) * width + x];
  }
  float& at(int x, int y) {
    return depths[static_cast<std::size_t>(y) * width + x];
  }
};

namespace detail {

constexpr int kMaxDimension = 1 << 15;

inline void check_dimensions(int width, int height, const char* what) {
  if (width <= 0 || height <= 0 || width > kMaxDimension || height > kMaxDimension)
    throw Error(std::string(what) + ": dimension overflow");
}

inline std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in),
                                   std::istreambuf_iterator<char>());
}

inline void write_file_bytes(const std::filesystem::path& path,
                             const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("write failed: " + path.string());
}

inline void put_u32le(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 24));
}

inline void put_i32le(std::vector<std::uint8_t>& out, std::int32_t v) {
  put_u32le(out, static_cast<std::uint32_t>(v));
}

inline void put_f32le(std::vector<std::uint8_t>& out, float v) {
  put_u32le(out, std::bit_cast<std::uint32_t>(v));
}

class ByteReader {
 public:
  ByteReader(const std::vector<std::uint8_t>& bytes, std::string name)
      : bytes_(bytes), name_(std::move(name)) {}

  std::uint32_t u32le() {
    need(4);
    std::uint32_t v = static_cast<std::uint32_t>(bytes_[pos_]) |
                      static_cast<std::uint32_t>(bytes_[pos_ + 1]) << 8 |
                      static_cast<std::uint32_t>(bytes_[pos_ + 2]) << 16 |
                      static_cast<std::uint32_t>(bytes_[pos_ + 3]) << 24;
    pos_ += 4;
    return v;
  }
  std::int32_t i32le() { return static_cast<std::int32_t>(u32le()); }
  float f32le() { return std::bit_cast<float>(u32le()); }

  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n) {
    if (bytes_.size() - pos_ < n) throw Error(name_ + ": truncated");
  }
  const std::vector<std::uint8_t>& bytes_;
  std::string name_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline Frame make_frame(int width, int height, std::uint8_t fill = 0) {
  detail::check_dimensions(width, height, "frame");
  Frame f;
  f.width = width;
  f.height = height;
  f.samples.assign(static_cast<std::size_t>(width) * height, fill);
  return f;
}

inline MotionField make_motion_field(int width, int height) {
  detail::check_dimensions(width, height, "motion field");
  MotionField mf;
  mf.width = width;
  mf.height = height;
  mf.vectors.assign(static_cast<std::size_t>(width) * height, MotionVec{});
  return mf;
}

inline DepthMap make_depth_map(int width, int height, float fill = 1.0f) {
  detail::check_dimensions(width, height, "depth map");
  DepthMap dm;
  dm.width = width;
  dm.height = height;
  dm.depths.assign(static_cast<std::size_t>(width) * height, fill);
  return dm;
}

// ---------------------------------------------------------------------------
// PGM (binary P5, maxval 255)

namespace detail {

// Reads one whitespace/comment-delimited PGM header token.
inline std::string pgm_token(const std::vector<std::uint8_t>& bytes, std::size_t& pos,
                             const std::string& name, const char* field) {
  while (pos < bytes.size()) {
    char c = static_cast<char>(bytes[pos]);
    if (c == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      ++pos;
    } else {
      break;
    }
  }
  std::size_t start = pos;
  while (pos < bytes.size()) {
    char c = static_cast<char>(bytes[pos]);
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '#') break;
    ++pos;
  }
  if (pos == start)
    throw Error(name + ": missing " + field + " in PGM header");
  return std::string(bytes.begin() + static_cast<std::ptrdiff_t>(start),
                     bytes.begin() + static_cast<std::ptrdiff_t>(pos));
}

inline int pgm_int(const std::vector<std::uint8_t>& bytes, std::size_t& pos,
                   const std::string& name, const char* field) {
  std::string tok = pgm_token(bytes, pos, name, field);
  int value = 0;
  for (char c : tok) {
    if (c < '0' || c > '9')
      throw Error(name + ": invalid " + field + " '" + tok + "'");
    if (value > kMaxDimension * 1024)
      throw Error(name + ": invalid " + field + " '" + tok + "'");
    value = value * 10 + (c - '0');
  }
  return value;
}

}  // namespace detail

inline Frame read_frame(const std::filesystem::path& path) {
  const std::vector<std::uint8_t> bytes = detail::read_file_bytes(path);
  const std::string name = path.filename().string();
  std::size_t pos = 0;
  if (detail::pgm_token(bytes, pos, name, "magic") != "P5")
    throw Error(name + ": not a binary PGM (expected magic P5)");
  int width = detail::pgm_int(bytes, pos, name, "width");
  int height = detail::pgm_int(bytes, pos, name, "height");
  int maxval = detail::pgm_int(bytes, pos, name, "maxval");
  detail::check_dimensions(width, height, name.c_str());
  if (maxval != 255)
    throw Error(name + ": unsupported maxval " + std::to_string(maxval));
  // Exactly one whitespace byte separates the header from the payload.
  if (pos >= bytes.size())
    throw Error(name + ": truncated");
  ++pos;
  const std::size_t count = static_cast<std::size_t>(width) * height;
  if (bytes.size() - pos < count) throw Error(name + ": truncated");
  if (bytes.size() - pos > count) throw Error(name + ": trailing bytes after payload");
  Frame f;
  f.width = width;
  f.height = height;
  f.samples.assign(bytes.begin() + static_cast<std::ptrdiff_t>(pos), bytes.end());
  return f;
}

inline void write_frame(const Frame& frame, const std::filesystem::path& path) {
  if (frame.width <= 0 || frame.height <= 0)
    throw Error("frame: invalid dimensions");
  if (frame.samples.size() != static_cast<std::size_t>(frame.width) * frame.height)
    throw Error("frame: sample count does not match dimensions");
  std::vector<std::uint8_t> bytes;
  std::string header = "P5\n" + std::to_string(frame.width) + " " +
                       std::to_string(frame.height) + "\n255\n";
  bytes.assign(header.begin(), header.end());
  bytes.insert(bytes.end(), frame.samples.begin(), frame.samples.end());
  detail::write_file_bytes(path, bytes);
}

// ---------------------------------------------------------------------------
// MVF1: magic, u32le width, u32le height, per pixel { i32le mx, i32le my, f32le mz }

inline MotionField read_motion_field(const std::filesystem::path& path) {
  const std::vector<std::uint8_t> bytes = detail::read_file_bytes(path);
  const std::string name = path.filename().string();
  if (bytes.size() < 4) throw Error(name + ": truncated");
  if (!(bytes[0] == 'M' && bytes[1] == 'V' && bytes[2] == 'F')) {
    throw Error(name + ": bad magic");
  }
  if (bytes[3] != '1') throw Error(name + ": unsupported version");
  std::vector<std::uint8_t> body(bytes.begin() + 4, bytes.end());
  detail::ByteReader reader(body, name);
  std::uint32_t width = reader.u32le();
  std::uint32_t height = reader.u32le();
  if (width == 0 || height == 0 || width > detail::kMaxDimension ||
      height > detail::kMaxDimension)
    throw Error(name + ": dimension overflow");
  MotionField mf;
  mf.width = static_cast<int>(width);
  mf.height = static_cast<int>(height);
  const std::size_t count = static_cast<std::size_t>(width) * height;
  if (reader.remaining() != count * 12)
    throw Error(reader.remaining() < count * 12 ? name + ": truncated"
                                                : name + ": trailing bytes after payload");
  mf.vectors.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    MotionVec v;
    v.mx = reader.i32le();
    v.my = reader.i32le();
    v.mz = reader.f32le();
    if (!std::isfinite(v.mz))
      throw Error(name + ": non-finite mz at pixel (" +
                  std::to_string(i % width) + "," + std::to_string(i / width) + ")");
    mf.vectors.push_back(v);
  }
  return mf;
}

inline void write_motion_field(const MotionField& mf, const std::filesystem::path& path) {
  detail::check_dimensions(mf.width, mf.height, "motion field");
  if (mf.vectors.size() != static_cast<std::size_t>(mf.width) * mf.height)
    throw Error("motion field: vector count does not match dimensions");
  std::vector<std::uint8_t> bytes = {'M', 'V', 'F', '1'};
  detail::put_u32le(bytes, static_cast<std::uint32_t>(mf.width));
  detail::put_u32le(bytes, static_cast<std::uint32_t>(mf.height));
  for (const MotionVec& v : mf.vectors) {
    detail::put_i32le(bytes, v.mx);
    detail::put_i32le(bytes, v.my);
    detail::put_f32le(bytes, v.mz);
  }
  detail::write_file_bytes(path, bytes);
}

// ---------------------------------------------------------------------------
// DPT1: magic, u32le width, u32le height, f32le per pixel; depths must be in [0, 1]

inline DepthMap read_depth_map(const std::filesystem::path& path) {
  const std::vector<std::uint8_t> bytes = detail::read_file_bytes(path);
  const std::string name = path.filename().string();
  if (bytes.size() < 4) throw Error(name + ": truncated");
  if (!(bytes[0] == 'D' && bytes[1] == 'P' && bytes[2] == 'T')) {
    throw Error(name + ": bad magic");
  }
  if (bytes[3] != '1') throw Error(name + ": unsupported version");
  std::vector<std::uint8_t> body(bytes.begin() + 4, bytes.end());
  detail::ByteReader reader(body, name);
  std::uint32_t width = reader.u32le();
  std::uint32_t height = reader.u32le();
  if (width == 0 || height == 0 || width > detail::kMaxDimension ||
      height > detail::kMaxDimension)
    throw Error(name + ": dimension overflow");
  DepthMap dm;
  dm.width = static_cast<int>(width);
  dm.height = static_cast<int>(height);
  const std::size_t count = static_cast<std::size_t>(width) * height;
  if (reader.remaining() != count * 4)
    throw Error(reader.remaining() < count * 4 ? name + ": truncated"
                                               : name + ": trailing bytes after payload");
  dm.depths.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    float d = reader.f32le();
    if (!(d >= 0.0f && d <= 1.0f))
      throw Error(name + ": depth out of range at pixel (" +
                  std::to_string(i % width) + "," + std::to_string(i / width) + ")");
    dm.depths.push_back(d);
  }
  return dm;
}

inline void write_depth_map(const DepthMap& dm, const std::filesystem::path& path) {
  detail::check_dimensions(dm.width, dm.height, "depth map");
  if (dm.depths.size() != static_cast<std::size_t>(dm.width) * dm.height)
    throw Error("depth map: depth count does not match dimensions");
  for (std::size_t i = 0; i < dm.depths.size(); ++i) {
    if (!(dm.depths[i] >= 0.0f && dm.depths[i] <= 1.0f))
      throw Error("depth map: depth out of range at pixel (" +
                  std::to_string(i % dm.width) + "," + std::to_string(i / dm.width) + ")");
  }
  std::vector<std::uint8_t> bytes = {'D', 'P', 'T', '1'};
  detail::put_u32le(bytes, static_cast<std::uint32_t>(dm.width));
  detail::put_u32le(bytes, static_cast<std::uint32_t>(dm.height));
  for (float d : dm.depths) detail::put_f32le(bytes, d);
  detail::write_file_bytes(path, bytes);
}

// ---------------------------------------------------------------------------
// Manifest: UTF-8 text, lines width=/height=/frames=/frame=/mvf=/depth=.
// Path patterns carry exactly one %d / %0Nd frame-index placeholder and are
// resolved relative to the manifest's directory.

struct SequenceManifest {
  int width = 0;
  int height = 0;
  int frame_count = 0;
  std::string frame_pattern;
  std::string mvf_pattern;
  std::string depth_pattern;
  std::filesystem::path base_dir;
};

inline std::string format_index_pattern(const std::string& pattern, int index) {
  std::size_t pct = pattern.find('%');
  if (pct == std::string::npos)
    throw Error("pattern '" + pattern + "' has no %d placeholder");
  std::size_t p = pct + 1;
  int pad = 0;
  if (p < pattern.size() && pattern[p] == '0') {
    ++p;
    while (p < pattern.size() && pattern[p] >= '0' && pattern[p] <= '9') {
      pad = pad * 10 + (pattern[p] - '0');
      ++p;
    }
    if (pad == 0 || pad > 9)
      throw Error("pattern '" + pattern + "' has an invalid width specifier");
  }
  if (p >= pattern.size() || pattern[p] != 'd')
    throw Error("pattern '" + pattern + "' has an invalid placeholder");
  if (pattern.find('%', p) != std::string::npos)
    throw Error("pattern '" + pattern + "' has more than one placeholder");
  std::string digits = std::to_string(index);
  if (static_cast<int>(digits.size()) < pad)
    digits.insert(0, static_cast<std::size_t>(pad) - digits.size(), '0');
  return pattern.substr(0, pct) + digits + pattern.substr(p + 1);
}

inline SequenceManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open manifest " + path.string());
  SequenceManifest m;
  m.base_dir = path.parent_path();
  bool have[6] = {};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(path.string() + ":" + std::to_string(line_no) + ": expected key=value");
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    auto to_int = [&](const std::string& v) {
      if (v.empty()) throw Error(path.string() + ": empty value for " + key);
      int n = 0;
      for (char c : v) {
        if (c < '0' || c > '9')
          throw Error(path.string() + ": invalid integer for " + key);
        n = n * 10 + (c - '0');
        if (n > 100000000) throw Error(path.string() + ": value too large for " + key);
      }
      return n;
    };
    if (key == "width") { m.width = to_int(value); have[0] = true; }
    else if (key == "height") { m.height = to_int(value); have[1] = true; }
    else if (key == "frames") { m.frame_count = to_int(value); have[2] = true; }
    else if (key == "frame") { m.frame_pattern = value; have[3] = true; }
    else if (key == "mvf") { m.mvf_pattern = value; have[4] = true; }
    else if (key == "depth") { m.depth_pattern = value; have[5] = true; }
    else throw Error(path.string() + ": unknown manifest key '" + key + "'");
  }
  static const char* kKeys[6] = {"width", "height", "frames", "frame", "mvf", "depth"};
  for (int i = 0; i < 6; ++i)
    if (!have[i]) throw Error(path.string() + ": missing manifest key '" + std::string(kKeys[i]) + "'");
  detail::check_dimensions(m.width, m.height, "manifest");
  if (m.frame_count < 1) throw Error(path.string() + ": frames must be positive");
  // Reject malformed placeholders up front.
  format_index_pattern(m.frame_pattern, 0);
  format_index_pattern(m.mvf_pattern, 0);
  format_index_pattern(m.depth_pattern, 0);
  return m;
}

inline void write_manifest(const SequenceManifest& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << "width=" << m.width << "\n"
      << "height=" << m.height << "\n"
      << "frames=" << m.frame_count << "\n"
      << "frame=" << m.frame_pattern << "\n"
      << "mvf=" << m.mvf_pattern << "\n"
      << "depth=" << m.depth_pattern << "\n";
  if (!out) throw Error("write failed: " + path.string());
}

inline std::filesystem::path frame_path(const SequenceManifest& m, int index) {
  return m.base_dir / format_index_pattern(m.frame_pattern, index);
}
inline std::filesystem::path mvf_path(const SequenceManifest& m, int index) {
  return m.base_dir / format_index_pattern(m.mvf_pattern, index);
}
inline std::filesystem::path depth_path(const SequenceManifest& m, int index) {
  return m.base_dir / format_index_pattern(m.depth_pattern, index);
}

// Loads per-frame data through a manifest and enforces that all planes agree
// with the manifest dimensions.
class SequenceLoader {
 public:
  explicit SequenceLoader(const std::filesystem::path& manifest_file)
      : manifest_(read_manifest(manifest_file)) {}
  explicit SequenceLoader(SequenceManifest manifest) : manifest_(std::move(manifest)) {}

  const SequenceManifest& manifest() const { return manifest_; }

  Frame frame(int t) const {
    check_index(t, 0);
    Frame f = read_frame(frame_path(manifest_, t));
    check_dims(f.width, f.height, "frame", t);
    return f;
  }

  // Motion references the previous frame, so index 0 has no field.
  MotionField motion(int t) const {
    check_index(t, 1);
    MotionField mf = read_motion_field(mvf_path(manifest_, t));
    check_dims(mf.width, mf.height, "motion field", t);
    return mf;
  }

  DepthMap depth(int t) const {
    check_index(t, 0);
    DepthMap dm = read_depth_map(depth_path(manifest_, t));
    check_dims(dm.width, dm.height, "depth map", t);
    return dm;
  }

  bool has_motion(int t) const {
    return t >= 1 && t < manifest_.frame_count &&
           std::filesystem::exists(mvf_path(manifest_, t));
  }
  bool has_depth(int t) const {
    return t >= 0 && t < manifest_.frame_count &&
           std::filesystem::exists(depth_path(manifest_, t));
  }

 private:
  void check_index(int t, int lo) const {
    if (t < lo || t >= manifest_.frame_count)
      throw Error("frame index " + std::to_string(t) + " out of range");
  }
  void check_dims(int w, int h, const char* what, int t) const {
    if (w != manifest_.width || h != manifest_.height)
      throw Error(std::string(what) + " " + std::to_string(t) +
                  ": dimensions " + std::to_string(w) + "x" + std::to_string(h) +
                  " do not match manifest " + std::to_string(manifest_.width) + "x" +
                  std::to_string(manifest_.height));
  }
  SequenceManifest manifest_;
};

}  // namespace truemv
