#pragma once

#include <cstdint>
#include <vector>

#include "truemv/error.hpp"
#include "truemv/mvmap.hpp"
#include "truemv/seqio.hpp"

namespace truemv {

struct DisocclusionParams {
  float threshold = 0.004f;  // depth slack suppressing same-surface fighting
};

enum class PixelDisocclusion { visible, disoccluded, motion_exits_frame };

// Per-pixel flags, raster order, nonzero = disoccluded.
struct DisocclusionMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> flags;

  bool at(int x, int y) const {
    return flags[static_cast<std::size_t>(y) * width + x] != 0;
  }
};

// Follows the pixel back along its motion vector and compares its depth
// (advanced by mz) against the previous frame's depth at the nearest integer
// position. Depth strictly above stored depth plus threshold means the
// surface was hidden there.
inline PixelDisocclusion pixel_disoccluded(int x, int y, const DepthMap& z_cur,
                                           const DepthMap& z_prev,
                                           const MotionField& mf,
                                           const DisocclusionParams& params) {
  const MotionVec& m = mf.at(x, y);
  // Nearest integer pixel of (x + mx/4, y + my/4), half rounding up.
  const int xr = (4 * x + m.mx + 2) >> 2;
  const int yr = (4 * y + m.my + 2) >> 2;
  if (xr < 0 || yr < 0 || xr >= z_prev.width || yr >= z_prev.height)
    return PixelDisocclusion::motion_exits_frame;

  const float z_test = z_cur.at(x, y) + m.mz;
  return z_test > z_prev.at(xr, yr) + params.threshold
             ? PixelDisocclusion::disoccluded
             : PixelDisocclusion::visible;
}

inline DisocclusionMask mask_frame(const DepthMap& z_cur, const DepthMap& z_prev,
                                   const MotionField& mf,
                                   const DisocclusionParams& params = {}) {
  if (params.threshold < 0) throw Error("mask_frame: negative threshold");
  if (z_cur.width != mf.width || z_cur.height != mf.height ||
      z_prev.width != mf.width || z_prev.height != mf.height)
    throw Error("mask_frame: depth/motion dimensions differ");

  DisocclusionMask mask;
  mask.width = mf.width;
  mask.height = mf.height;
  mask.flags.resize(static_cast<std::size_t>(mf.width) * mf.height);
  for (int y = 0; y < mf.height; ++y)
    for (int x = 0; x < mf.width; ++x)
      mask.flags[static_cast<std::size_t>(y) * mf.width + x] =
          pixel_disoccluded(x, y, z_cur, z_prev, mf, params) !=
          PixelDisocclusion::visible;
  return mask;
}

// Invalidates every block vector whose 4x4 tile has more than 8 disoccluded
// pixels. Never re-validates.
inline BlockGrid invalidate_blocks(BlockGrid grid, const DisocclusionMask& mask) {
  if (mask.width != grid.blocks_x * 4 || mask.height != grid.blocks_y * 4)
    throw Error("invalidate_blocks: mask/grid dimensions differ");

  for (int by = 0; by < grid.blocks_y; ++by)
    for (int bx = 0; bx < grid.blocks_x; ++bx) {
      int count = 0;
      for (int dy = 0; dy < 4; ++dy)
        for (int dx = 0; dx < 4; ++dx) count += mask.at(bx * 4 + dx, by * 4 + dy);
      if (count > 8) grid.at(bx, by).valid = false;
    }
  return grid;
}

// 0 = visible, 255 = disoccluded.
inline Frame mask_to_frame(const DisocclusionMask& mask) {
  Frame f = make_frame(mask.width, mask.height, 0);
  for (std::size_t i = 0; i < mask.flags.size(); ++i)
    if (mask.flags[i]) f.samples[i] = 255;
  return f;
}

}  // namespace truemv
