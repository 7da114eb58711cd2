#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "truemv/error.hpp"
#include "truemv/seqio.hpp"

namespace truemv {

// Axis-aligned textured rectangle. Positions and velocities live on the
// quarter-pel grid, so every frame position is exact at 4x supersampling.
struct SpriteSpec {
  int width_px = 0;
  int height_px = 0;
  int x0_qpel = 0;
  int y0_qpel = 0;
  int vx_qpel = 0;
  int vy_qpel = 0;
  float depth = 0.5f;          // in (0,1); background sits at 1.0
  float depth_velocity = 0.0f;  // per frame
  std::uint64_t texture_seed = 0;
};

struct SceneSpec {
  int width = 0;
  int height = 0;
  int frame_count = 0;
  std::uint64_t background_seed = 0;
  std::vector<SpriteSpec> sprites;
  std::uint64_t global_seed = 0;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

inline double lattice_value(std::uint64_t seed, int octave, int ix, int iy) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ (static_cast<std::uint64_t>(octave) << 32 ^
                      static_cast<std::uint32_t>(ix)));
  h = splitmix64(h ^ static_cast<std::uint32_t>(iy));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

}  // namespace detail

// Two-octave bilinear value noise in [32, 224]; purely a function of its
// arguments.
inline Frame texture(std::uint64_t seed, int w, int h) {
  Frame f = make_frame(w, h);
  constexpr int cells[2] = {64, 4};
  constexpr double weights[2] = {4.0, 1.0};
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double n = 0;
      for (int o = 0; o < 2; ++o) {
        const int c = cells[o];
        const int ix = x / c, iy = y / c;
        const double fx = static_cast<double>(x % c) / c;
        const double fy = static_cast<double>(y % c) / c;
        const double v00 = detail::lattice_value(seed, o, ix, iy);
        const double v10 = detail::lattice_value(seed, o, ix + 1, iy);
        const double v01 = detail::lattice_value(seed, o, ix, iy + 1);
        const double v11 = detail::lattice_value(seed, o, ix + 1, iy + 1);
        const double v = (1 - fx) * (1 - fy) * v00 + fx * (1 - fy) * v10 +
                         (1 - fx) * fy * v01 + fx * fy * v11;
        n += weights[o] * v;
      }
      n /= weights[0] + weights[1];
      f.at(x, y) = static_cast<std::uint8_t>(32 + std::lround(n * 192.0));
    }
  return f;
}

inline float sprite_depth_at(const SpriteSpec& s, int t) {
  return static_cast<float>(static_cast<double>(s.depth) +
                            static_cast<double>(t) * s.depth_velocity);
}

inline void validate_scene(const SceneSpec& scene) {
  if (scene.width < 16 || scene.height < 16 || scene.width % 16 != 0 ||
      scene.height % 16 != 0)
    throw Error("scene: dimensions must be multiples of 16");
  if (scene.frame_count < 1) throw Error("scene: needs at least one frame");
  for (std::size_t i = 0; i < scene.sprites.size(); ++i) {
    const SpriteSpec& s = scene.sprites[i];
    const std::string tag = "sprite " + std::to_string(i);
    if (s.width_px < 1 || s.height_px < 1) throw Error(tag + ": empty shape");
    for (int t = 0; t < scene.frame_count; ++t) {
      const float d = sprite_depth_at(s, t);
      if (!(d > 0.0f) || !(d < 1.0f))
        throw Error(tag + ": depth leaves (0,1) at frame " + std::to_string(t));
      const int x = s.x0_qpel + t * s.vx_qpel;
      const int y = s.y0_qpel + t * s.vy_qpel;
      if (x >= 4 * scene.width || x + 4 * s.width_px <= 0 ||
          y >= 4 * scene.height || y + 4 * s.height_px <= 0)
        throw Error(tag + ": leaves the canvas at frame " + std::to_string(t));
    }
  }
}

namespace detail {

// Visible surface per 4x sample: 0 = background, i+1 = sprite i.
struct SurfaceMap {
  int w4 = 0, h4 = 0;
  std::vector<std::int32_t> ids;

  std::int32_t at(int sx, int sy) const {
    return ids[static_cast<std::size_t>(sy) * w4 + sx];
  }
};

inline SurfaceMap composite_surfaces(const SceneSpec& scene, int t) {
  SurfaceMap map;
  map.w4 = 4 * scene.width;
  map.h4 = 4 * scene.height;
  map.ids.assign(static_cast<std::size_t>(map.w4) * map.h4, 0);
  std::vector<float> depth(map.ids.size(), 1.0f);

  for (std::size_t i = 0; i < scene.sprites.size(); ++i) {
    const SpriteSpec& s = scene.sprites[i];
    const float d = sprite_depth_at(s, t);
    const int x0 = s.x0_qpel + t * s.vx_qpel;
    const int y0 = s.y0_qpel + t * s.vy_qpel;
    const int sx0 = std::max(x0, 0), sx1 = std::min(x0 + 4 * s.width_px, map.w4);
    const int sy0 = std::max(y0, 0), sy1 = std::min(y0 + 4 * s.height_px, map.h4);
    for (int sy = sy0; sy < sy1; ++sy)
      for (int sx = sx0; sx < sx1; ++sx) {
        const std::size_t k = static_cast<std::size_t>(sy) * map.w4 + sx;
        if (d < depth[k]) {
          depth[k] = d;
          map.ids[k] = static_cast<std::int32_t>(i) + 1;
        }
      }
  }
  return map;
}

}  // namespace detail

// Renders every frame at 4x resolution, composites by depth, box-filters to
// output size, and takes ground truth from each pixel's center sample:
// depth of the covering surface, its backward motion (previous minus current
// position), its depth change, and a disocclusion flag set when the mapped
// previous-frame center shows a different surface. Produces
// frame_/mvf_/depth_/gtmask_ files plus the manifest.
inline SequenceManifest render_sequence(const SceneSpec& scene,
                                        const std::filesystem::path& out_dir) {
  validate_scene(scene);
  std::filesystem::create_directories(out_dir);

  SequenceManifest manifest;
  manifest.width = scene.width;
  manifest.height = scene.height;
  manifest.frame_count = scene.frame_count;
  manifest.frame_pattern = "frame_%04d.pgm";
  manifest.mvf_pattern = "mvf_%04d.mvf";
  manifest.depth_pattern = "depth_%04d.dpt";
  manifest.base_dir = out_dir;

  const int w4 = 4 * scene.width, h4 = 4 * scene.height;
  const Frame background = texture(scene.background_seed, w4, h4);
  std::vector<Frame> sprite_tex;
  sprite_tex.reserve(scene.sprites.size());
  for (const SpriteSpec& s : scene.sprites)
    sprite_tex.push_back(texture(s.texture_seed, 4 * s.width_px, 4 * s.height_px));

  auto sample_color = [&](const detail::SurfaceMap& map, int t, int sx, int sy) {
    const std::int32_t id = map.at(sx, sy);
    if (id == 0) return background.at(sx, sy);
    const SpriteSpec& s = scene.sprites[static_cast<std::size_t>(id - 1)];
    const int x0 = s.x0_qpel + t * s.vx_qpel;
    const int y0 = s.y0_qpel + t * s.vy_qpel;
    return sprite_tex[static_cast<std::size_t>(id - 1)].at(sx - x0, sy - y0);
  };

  detail::SurfaceMap prev;
  for (int t = 0; t < scene.frame_count; ++t) {
    detail::SurfaceMap cur = detail::composite_surfaces(scene, t);

    Frame frame = make_frame(scene.width, scene.height);
    DepthMap depth = make_depth_map(scene.width, scene.height, 1.0f);
    MotionField mvf = make_motion_field(scene.width, scene.height);
    Frame gtmask = make_frame(scene.width, scene.height, 0);

    for (int y = 0; y < scene.height; ++y)
      for (int x = 0; x < scene.width; ++x) {
        int sum = 0;
        for (int dy = 0; dy < 4; ++dy)
          for (int dx = 0; dx < 4; ++dx)
            sum += sample_color(cur, t, 4 * x + dx, 4 * y + dy);
        frame.at(x, y) = static_cast<std::uint8_t>((sum + 8) >> 4);

        const int cx = 4 * x + 2, cy = 4 * y + 2;
        const std::int32_t id = cur.at(cx, cy);
        MotionVec m{0, 0, 0.0f};
        float d;
        if (id == 0) {
          d = 1.0f;
        } else {
          const SpriteSpec& s = scene.sprites[static_cast<std::size_t>(id - 1)];
          d = sprite_depth_at(s, t);
          if (t > 0)
            m = {-s.vx_qpel, -s.vy_qpel, sprite_depth_at(s, t - 1) - d};
        }
        depth.at(x, y) = d;
        if (t > 0) {
          mvf.at(x, y) = m;
          const int px = cx + m.mx, py = cy + m.my;
          const bool visible_before = px >= 0 && py >= 0 && px < w4 && py < h4 &&
                                      prev.at(px, py) == id;
          if (!visible_before) gtmask.at(x, y) = 255;
        }
      }

    write_frame(frame, frame_path(manifest, t));
    write_depth_map(depth, depth_path(manifest, t));
    if (t > 0) {
      write_motion_field(mvf, mvf_path(manifest, t));
      write_frame(gtmask, out_dir / format_index_pattern("gtmask_%04d.pgm", t));
    }
    prev = std::move(cur);
  }

  write_manifest(manifest, out_dir / "manifest.txt");
  return manifest;
}

// Named scene families at a requested size, frame count and seed. Sprite
// geometry derives deterministically from the seed; velocity regimes are
// fixed per family.
inline SceneSpec preset(std::string_view name, int width, int height, int frames,
                        std::uint64_t seed) {
  SceneSpec scene;
  scene.width = width;
  scene.height = height;
  scene.frame_count = frames;
  scene.global_seed = seed;
  scene.background_seed = detail::splitmix64(seed ^ 0xB0ull);

  std::uint64_t state = detail::splitmix64(seed);
  auto next = [&state] {
    state = detail::splitmix64(state);
    return state;
  };
  // Places a sprite so its whole trajectory stays inside the canvas.
  auto place = [&](SpriteSpec& s, double fx, double fy) {
    const int drift_x = s.vx_qpel * (frames - 1);
    const int drift_y = s.vy_qpel * (frames - 1);
    const int lo_x = std::max(0, -drift_x);
    const int hi_x = 4 * width - 4 * s.width_px - std::max(0, drift_x);
    const int lo_y = std::max(0, -drift_y);
    const int hi_y = 4 * height - 4 * s.height_px - std::max(0, drift_y);
    if (hi_x < lo_x || hi_y < lo_y)
      throw Error("preset: canvas too small for the requested frame count");
    const int jitter_x = static_cast<int>(next() % 65) - 32;
    const int jitter_y = static_cast<int>(next() % 65) - 32;
    s.x0_qpel = std::clamp(static_cast<int>(lo_x + fx * (hi_x - lo_x)) + jitter_x,
                           lo_x, hi_x);
    s.y0_qpel = std::clamp(static_cast<int>(lo_y + fy * (hi_y - lo_y)) + jitter_y,
                           lo_y, hi_y);
  };

  if (name == "arrows") {
    // Six moving objects at distinct depths, everything within 3 px/frame.
    // They come as three look-alike pairs on opposing courses, so objects
    // keep crossing and previously hidden content resembles visible content
    // elsewhere in the frame (repeated scene elements).
    static constexpr int vel[6][2] = {{11, 0}, {-11, 0}, {0, 11},
                                      {0, -11}, {9, 7},  {-9, -7}};
    const int base = std::max(16, std::min(width, height) / 3);
    for (int pair = 0; pair < 3; ++pair) {
      const int w_px = base + 4 * static_cast<int>(next() % 5);
      const int h_px = base + 4 * static_cast<int>(next() % 5);
      const std::uint64_t tex = detail::splitmix64(seed ^ (0xA0ull + pair));
      for (int k = 0; k < 2; ++k) {
        const int i = 2 * pair + k;
        SpriteSpec s;
        s.width_px = w_px;
        s.height_px = h_px;
        s.vx_qpel = vel[i][0];
        s.vy_qpel = vel[i][1];
        s.depth = 0.25f + 0.1f * static_cast<float>(i);
        s.texture_seed = tex;
        place(s, 0.35 + 0.1 * k + 0.08 * pair, 0.3 + 0.1 * k + 0.12 * pair);
        scene.sprites.push_back(s);
      }
    }
  } else if (name == "layers") {
    // Eight overlapping layers on integer-pel velocities; opposing motion at
    // neighboring depths forces crossings and disocclusions.
    static constexpr int vel[8][2] = {{8, 0},  {-8, 0}, {12, 0}, {-12, 0},
                                      {4, 4},  {-4, -4}, {0, 8},  {8, -4}};
    const int base = std::max(24, std::min(width, height) / 4);
    for (int i = 0; i < 8; ++i) {
      SpriteSpec s;
      s.width_px = base + 4 * static_cast<int>(next() % 4);
      s.height_px = base + 4 * static_cast<int>(next() % 4);
      s.vx_qpel = vel[i][0];
      s.vy_qpel = vel[i][1];
      s.depth = 0.15f + 0.1f * static_cast<float>(i);
      s.texture_seed = detail::splitmix64(seed ^ (0xC0ull + i));
      place(s, 0.25 + 0.18 * (i % 4), 0.2 + 0.3 * (i / 4));
      scene.sprites.push_back(s);
    }
  } else if (name == "largemotion") {
    // One wide surface sweeping 80 px/frame, always covering the canvas.
    SpriteSpec s;
    s.width_px = width + 80 * (frames - 1) + 4;
    s.height_px = height;
    s.x0_qpel = 4 * (-80 * (frames - 1) - 2);
    s.y0_qpel = 0;
    s.vx_qpel = 320;
    s.vy_qpel = 0;
    s.depth = 0.5f;
    s.texture_seed = detail::splitmix64(seed ^ 0xD0ull);
    scene.sprites.push_back(s);
  } else if (name == "approach") {
    // One object moving toward the camera: nonzero depth motion.
    SpriteSpec s;
    s.width_px = std::max(16, width / 2);
    s.height_px = std::max(16, height / 2);
    s.vx_qpel = 6;
    s.vy_qpel = 2;
    s.depth = 0.7f;
    s.depth_velocity = -std::min(0.03f, 0.6f / static_cast<float>(frames));
    s.texture_seed = detail::splitmix64(seed ^ 0xE0ull);
    place(s, 0.3, 0.3);
    scene.sprites.push_back(s);
  } else {
    throw Error("unknown preset: " + std::string(name));
  }

  validate_scene(scene);
  return scene;
}

}  // namespace truemv
