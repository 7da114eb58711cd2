#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "truemv/error.hpp"
#include "truemv/mvmap.hpp"
#include "truemv/seqio.hpp"

namespace truemv {

enum class SearchMode { conventional, proposed_only, combined };
enum class DecisionOrigin { conventional, proposed };

struct SearchConfig {
  int pu_size = 16;       // one of 8, 16, 32, 64
  int search_range = 64;  // pixels, integer stage
  double lambda_mode = 0;
  double lambda_motion = 0;
  SearchMode mode = SearchMode::combined;
};

inline double lambda_mode_for_qp(int qp) {
  return 0.85 * std::pow(2.0, (qp - 12) / 3.0);
}

inline double lambda_motion_for_qp(int qp) {
  return std::sqrt(lambda_mode_for_qp(qp));
}

inline void validate_search_config(const SearchConfig& c) {
  if (c.pu_size != 8 && c.pu_size != 16 && c.pu_size != 32 && c.pu_size != 64)
    throw Error("search config: pu size must be 8, 16, 32 or 64");
  if (c.search_range <= 0) throw Error("search config: search range must be positive");
  if (!(c.lambda_mode > 0) || !(c.lambda_motion > 0))
    throw Error("search config: lambdas must be positive");
}

// Left-neighbor and above-neighbor predictors; zero when unavailable.
struct MvpPair {
  Mv a{0, 0};
  Mv b{0, 0};
};

struct PuDecision {
  Mv mv{0, 0};
  int mvp_index = 0;
  long long sad = 0;
  int mv_bits = 0;
  double motion_cost = 0;  // sad + lambda_motion * mv_bits
  DecisionOrigin origin = DecisionOrigin::conventional;
};

// Signed order-0 exp-Golomb code length.
inline int eg0_bits(int v) {
  const std::uint32_t code_num =
      v > 0 ? 2u * static_cast<std::uint32_t>(v) - 1
            : 2u * static_cast<std::uint32_t>(-static_cast<std::int64_t>(v));
  return 2 * (std::bit_width(code_num + 1) - 1) + 1;
}

// Difference coding cost plus one bit selecting the predictor.
inline int mv_rate_bits(Mv mv, Mv mvp) {
  return eg0_bits(mv.x - mvp.x) + eg0_bits(mv.y - mvp.y) + 1;
}

namespace detail {

inline int clamp_coord(int v, int hi) { return v < 0 ? 0 : (v > hi ? hi : v); }

// Bilinear sample at quarter-pel position (qx, qy), edge-clamped,
// rounded half up.
inline int interp_sample(const Frame& ref, int qx, int qy) {
  const int ix = qx >> 2, fx = qx & 3;
  const int iy = qy >> 2, fy = qy & 3;
  const int x0 = clamp_coord(ix, ref.width - 1);
  const int x1 = clamp_coord(ix + 1, ref.width - 1);
  const int y0 = clamp_coord(iy, ref.height - 1);
  const int y1 = clamp_coord(iy + 1, ref.height - 1);
  const int s00 = ref.at(x0, y0), s10 = ref.at(x1, y0);
  const int s01 = ref.at(x0, y1), s11 = ref.at(x1, y1);
  const int num = (4 - fx) * (4 - fy) * s00 + fx * (4 - fy) * s10 +
                  (4 - fx) * fy * s01 + fx * fy * s11;
  return (num + 8) >> 4;
}

// Rate against the better of the two predictors; ties keep the first.
inline std::pair<int, int> best_mvp_bits(Mv mv, const MvpPair& mvps) {
  const int bits_a = mv_rate_bits(mv, mvps.a);
  const int bits_b = mv_rate_bits(mv, mvps.b);
  if (bits_b < bits_a) return {bits_b, 1};
  return {bits_a, 0};
}

inline int round_qpel_to_pel(int q) {
  return q >= 0 ? (q + 2) >> 2 : -((-q + 2) >> 2);
}

}  // namespace detail

// Motion-compensated prediction of a w*h block at (origin_x, origin_y),
// displaced by a quarter-pel vector. Reference reads are edge-clamped, so
// every vector is evaluable.
inline std::vector<std::uint8_t> interpolate_block(const Frame& ref, int origin_x,
                                                   int origin_y, int w, int h, Mv mv) {
  std::vector<std::uint8_t> pred(static_cast<std::size_t>(w) * h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const int qx = 4 * (origin_x + x) + mv.x;
      const int qy = 4 * (origin_y + y) + mv.y;
      pred[static_cast<std::size_t>(y) * w + x] =
          static_cast<std::uint8_t>(detail::interp_sample(ref, qx, qy));
    }
  return pred;
}

inline long long sad_block(const Frame& cur, const Frame& ref, int origin_x,
                           int origin_y, int w, int h, Mv mv) {
  long long sad = 0;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const int qx = 4 * (origin_x + x) + mv.x;
      const int qy = 4 * (origin_y + y) + mv.y;
      const int p = detail::interp_sample(ref, qx, qy);
      sad += std::abs(cur.at(origin_x + x, origin_y + y) - p);
    }
  return sad;
}

namespace detail {

struct Probe {
  Mv mv;
  long long sad;
  int bits;
  int mvp_index;
  double cost;
};

inline Probe evaluate_probe(const Frame& cur, const Frame& ref, int origin_x,
                            int origin_y, int pu, const SearchConfig& cfg,
                            const MvpPair& mvps, Mv mv) {
  Probe p;
  p.mv = mv;
  p.sad = sad_block(cur, ref, origin_x, origin_y, pu, pu, mv);
  const auto [bits, index] = best_mvp_bits(mv, mvps);
  p.bits = bits;
  p.mvp_index = index;
  p.cost = static_cast<double>(p.sad) + cfg.lambda_motion * bits;
  return p;
}

}  // namespace detail

// Eight-point diamond search on integer positions (steps 32 down to 1 pixel,
// recentring while the cost strictly improves), then one half-pel and one
// quarter-pel refinement pass. Integer probes are confined to +-search_range
// pixels, fractional probes to the same bound in quarter-pel units.
inline PuDecision conventional_search(const Frame& cur, const Frame& ref,
                                      int origin_x, int origin_y,
                                      const SearchConfig& cfg, const MvpPair& mvps) {
  validate_search_config(cfg);
  const int range_q = 4 * cfg.search_range;
  auto clamp_q = [&](Mv m) {
    m.x = std::clamp(m.x, -range_q, range_q);
    m.y = std::clamp(m.y, -range_q, range_q);
    return m;
  };
  auto eval = [&](Mv m) {
    return detail::evaluate_probe(cur, ref, origin_x, origin_y, cfg.pu_size, cfg,
                                  mvps, m);
  };

  const int r = cfg.search_range;
  Mv starts[3] = {
      {0, 0},
      {4 * std::clamp(detail::round_qpel_to_pel(mvps.a.x), -r, r),
       4 * std::clamp(detail::round_qpel_to_pel(mvps.a.y), -r, r)},
      {4 * std::clamp(detail::round_qpel_to_pel(mvps.b.x), -r, r),
       4 * std::clamp(detail::round_qpel_to_pel(mvps.b.y), -r, r)}};

  detail::Probe best = eval(starts[0]);
  for (int i = 1; i < 3; ++i) {
    if (starts[i] == best.mv) continue;
    detail::Probe p = eval(starts[i]);
    if (p.cost < best.cost) best = p;
  }

  static constexpr int kOffsets[8][2] = {{-1, 0}, {1, 0},  {0, -1}, {0, 1},
                                         {-1, -1}, {1, -1}, {-1, 1}, {1, 1}};
  for (int step : {32, 16, 8, 4, 2, 1}) {
    const int step_q = 4 * step;
    for (;;) {
      detail::Probe pass_best = best;
      for (const auto& off : kOffsets) {
        const Mv m = clamp_q({best.mv.x + off[0] * step_q, best.mv.y + off[1] * step_q});
        if (m == best.mv) continue;
        detail::Probe p = eval(m);
        if (p.cost < pass_best.cost) pass_best = p;
      }
      if (pass_best.mv == best.mv) break;
      best = pass_best;
    }
  }

  for (int frac_step : {2, 1}) {
    detail::Probe pass_best = best;
    for (const auto& off : kOffsets) {
      const Mv m = clamp_q({best.mv.x + off[0] * frac_step, best.mv.y + off[1] * frac_step});
      if (m == best.mv) continue;
      detail::Probe p = eval(m);
      if (p.cost < pass_best.cost) pass_best = p;
    }
    best = pass_best;
  }

  return PuDecision{best.mv, best.mvp_index, best.sad,
                    best.bits, best.cost, DecisionOrigin::conventional};
}

// Valid block vectors under the PU, raster order with exact duplicates
// removed, then the two predictors when not already present.
inline std::vector<Mv> build_candidate_list(const BlockGrid& grid, int origin_x,
                                            int origin_y, int pu_size,
                                            const MvpPair& mvps) {
  const int bx0 = origin_x / 4;
  const int by0 = origin_y / 4;
  const int nb = pu_size / 4;
  if (bx0 + nb > grid.blocks_x || by0 + nb > grid.blocks_y)
    throw Error("candidate list: unit exceeds grid");

  std::vector<Mv> list;
  auto push_unique = [&](Mv m) {
    if (std::find(list.begin(), list.end(), m) == list.end()) list.push_back(m);
  };
  for (int by = by0; by < by0 + nb; ++by)
    for (int bx = bx0; bx < bx0 + nb; ++bx) {
      const BlockMv& b = grid.at(bx, by);
      if (b.valid) push_unique({b.mx, b.my});
    }
  push_unique(mvps.a);
  push_unique(mvps.b);
  return list;
}

// Tests every candidate at its exact quarter-pel position; first least-cost
// candidate in list order wins.
inline PuDecision proposed_search(const Frame& cur, const Frame& ref, int origin_x,
                                  int origin_y, const SearchConfig& cfg,
                                  const MvpPair& mvps,
                                  const std::vector<Mv>& candidates) {
  validate_search_config(cfg);
  if (candidates.empty()) throw Error("proposed search: empty candidate list");

  std::optional<detail::Probe> best;
  for (const Mv& m : candidates) {
    detail::Probe p =
        detail::evaluate_probe(cur, ref, origin_x, origin_y, cfg.pu_size, cfg, mvps, m);
    if (!best || p.cost < best->cost) best = p;
  }
  return PuDecision{best->mv, best->mvp_index, best->sad,
                    best->bits, best->cost, DecisionOrigin::proposed};
}

// Combined mode keeps the cheaper decision, ties going to the conventional
// search; single modes pass their decision through.
inline PuDecision select_best(const std::optional<PuDecision>& conv,
                              const std::optional<PuDecision>& prop,
                              SearchMode mode) {
  switch (mode) {
    case SearchMode::conventional:
      if (!conv) throw Error("select_best: conventional decision missing");
      return *conv;
    case SearchMode::proposed_only:
      if (!prop) throw Error("select_best: proposed decision missing");
      return *prop;
    case SearchMode::combined:
      if (!conv || !prop) throw Error("select_best: combined mode needs both decisions");
      return prop->motion_cost < conv->motion_cost ? *prop : *conv;
  }
  throw Error("select_best: bad mode");
}

}  // namespace truemv
