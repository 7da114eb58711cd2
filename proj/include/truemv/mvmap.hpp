#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "truemv/error.hpp"
#include "truemv/seqio.hpp"

namespace truemv {

// Representative quarter-pel vector of one 4x4 pixel block.
struct BlockMv {
  int mx = 0;
  int my = 0;
  bool valid = false;

  friend bool operator==(const BlockMv&, const BlockMv&) = default;
};

// Per-frame grid of block vectors, raster order, blocks_x = width/4.
struct BlockGrid {
  int blocks_x = 0;
  int blocks_y = 0;
  std::vector<BlockMv> entries;

  const BlockMv& at(int bx, int by) const {
    return entries[static_cast<std::size_t>(by) * blocks_x + bx];
  }
  BlockMv& at(int bx, int by) {
    return entries[static_cast<std::size_t>(by) * blocks_x + bx];
  }
};

namespace detail {

// Lower median of 16 values: the 8th smallest.
inline int lower_median16(std::array<int, 16> comps) {
  std::nth_element(comps.begin(), comps.begin() + 7, comps.end());
  return comps[7];
}

// The displaced 4x4 block, plus one pixel of bilinear support on each axis
// with a nonzero fractional phase, must stay inside the frame.
inline bool displaced_block_in_frame(int mx, int my, int origin_x, int origin_y,
                                     int frame_w, int frame_h) {
  const int ix = mx >> 2, fx = mx & 3;
  const int iy = my >> 2, fy = my & 3;
  const int x0 = origin_x + ix;
  const int x1 = origin_x + 3 + ix + (fx ? 1 : 0);
  const int y0 = origin_y + iy;
  const int y1 = origin_y + 3 + iy + (fy ? 1 : 0);
  return x0 >= 0 && y0 >= 0 && x1 < frame_w && y1 < frame_h;
}

}  // namespace detail

// Pick the representative of one 4x4 tile from its 16 per-pixel vectors
// (raster order): take the vector carrying the lower-median mx and the one
// carrying the lower-median my, keep whichever has the smaller sum of squared
// differences to all 16 vectors (tie keeps the mx candidate), then invalidate
// it if it displaces any part of the tile outside the frame.
inline BlockMv map_block(std::span<const Mv> vectors16, int block_origin_x,
                         int block_origin_y, int frame_width, int frame_height) {
  if (vectors16.size() != 16) throw Error("map_block: expected 16 vectors");

  std::array<int, 16> xs{}, ys{};
  for (int i = 0; i < 16; ++i) {
    xs[i] = vectors16[i].x;
    ys[i] = vectors16[i].y;
  }
  const int med_x = detail::lower_median16(xs);
  const int med_y = detail::lower_median16(ys);

  Mv cand_x{}, cand_y{};
  for (const Mv& v : vectors16)
    if (v.x == med_x) {
      cand_x = v;
      break;
    }
  for (const Mv& v : vectors16)
    if (v.y == med_y) {
      cand_y = v;
      break;
    }

  auto ssd = [&](const Mv& c) {
    long long s = 0;
    for (const Mv& v : vectors16) {
      const long long dx = c.x - v.x;
      const long long dy = c.y - v.y;
      s += dx * dx + dy * dy;
    }
    return s;
  };
  const Mv rep = ssd(cand_y) < ssd(cand_x) ? cand_y : cand_x;

  BlockMv out{rep.x, rep.y, true};
  if (!detail::displaced_block_in_frame(rep.x, rep.y, block_origin_x,
                                        block_origin_y, frame_width, frame_height))
    out.valid = false;
  return out;
}

inline BlockGrid map_frame(const MotionField& mf) {
  if (mf.width % 4 != 0 || mf.height % 4 != 0)
    throw Error("map_frame: field dimensions must be multiples of 4");

  BlockGrid grid;
  grid.blocks_x = mf.width / 4;
  grid.blocks_y = mf.height / 4;
  grid.entries.resize(static_cast<std::size_t>(grid.blocks_x) * grid.blocks_y);
  for (int by = 0; by < grid.blocks_y; ++by)
    for (int bx = 0; bx < grid.blocks_x; ++bx) {
      std::array<Mv, 16> tile{};
      for (int dy = 0; dy < 4; ++dy)
        for (int dx = 0; dx < 4; ++dx) {
          const MotionVec& v = mf.at(bx * 4 + dx, by * 4 + dy);
          tile[static_cast<std::size_t>(dy) * 4 + dx] = Mv{v.mx, v.my};
        }
      grid.at(bx, by) = map_block(tile, bx * 4, by * 4, mf.width, mf.height);
    }
  return grid;
}

}  // namespace truemv
