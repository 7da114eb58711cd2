#pragma once

#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "truemv/disocclusion.hpp"
#include "truemv/error.hpp"
#include "truemv/eval.hpp"
#include "truemv/mvmap.hpp"
#include "truemv/search.hpp"
#include "truemv/seqio.hpp"

namespace truemv {

struct EncoderConfig {
  int qp = 27;
  SearchConfig search;
  DisocclusionParams disocclusion;
  int transform_size = 8;         // fixed
  int header_bits_per_frame = 16;  // nominal per-frame overhead
};

inline EncoderConfig make_encoder_config(int qp, SearchMode mode, int pu_size = 16,
                                         int search_range = 64) {
  EncoderConfig cfg;
  cfg.qp = qp;
  cfg.search.pu_size = pu_size;
  cfg.search.search_range = search_range;
  cfg.search.lambda_mode = lambda_mode_for_qp(qp);
  cfg.search.lambda_motion = lambda_motion_for_qp(qp);
  cfg.search.mode = mode;
  return cfg;
}

inline void validate_encoder_config(const EncoderConfig& cfg) {
  if (cfg.qp < 0 || cfg.qp > 51) throw Error("encoder config: qp outside [0, 51]");
  if (cfg.transform_size != 8) throw Error("encoder config: transform size is fixed at 8");
  validate_search_config(cfg.search);
  if (cfg.search.pu_size < cfg.transform_size)
    throw Error("encoder config: unit size below transform size");
}

using Block8x8 = std::array<double, 64>;
using Levels8x8 = std::array<int, 64>;

namespace detail {

inline const std::array<std::array<double, 8>, 8>& dct_basis() {
  static const std::array<std::array<double, 8>, 8> basis = [] {
    std::array<std::array<double, 8>, 8> a{};
    constexpr double pi = 3.14159265358979323846;
    for (int u = 0; u < 8; ++u) {
      const double scale = u == 0 ? std::sqrt(1.0 / 8.0) : std::sqrt(2.0 / 8.0);
      for (int x = 0; x < 8; ++x)
        a[u][x] = scale * std::cos((2 * x + 1) * u * pi / 16.0);
    }
    return a;
  }();
  return basis;
}

}  // namespace detail

// Orthonormal 8x8 DCT-II; coefficients stored with the vertical frequency as
// the row index.
inline Block8x8 forward_transform(const Block8x8& block) {
  const auto& a = detail::dct_basis();
  std::array<std::array<double, 8>, 8> rows{};
  for (int y = 0; y < 8; ++y)
    for (int u = 0; u < 8; ++u) {
      double s = 0;
      for (int x = 0; x < 8; ++x) s += a[u][x] * block[y * 8 + x];
      rows[y][u] = s;
    }
  Block8x8 out{};
  for (int v = 0; v < 8; ++v)
    for (int u = 0; u < 8; ++u) {
      double s = 0;
      for (int y = 0; y < 8; ++y) s += a[v][y] * rows[y][u];
      out[v * 8 + u] = s;
    }
  return out;
}

inline Block8x8 inverse_transform(const Block8x8& coeffs) {
  const auto& a = detail::dct_basis();
  std::array<std::array<double, 8>, 8> rows{};
  for (int y = 0; y < 8; ++y)
    for (int u = 0; u < 8; ++u) {
      double s = 0;
      for (int v = 0; v < 8; ++v) s += a[v][y] * coeffs[v * 8 + u];
      rows[y][u] = s;
    }
  Block8x8 out{};
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) {
      double s = 0;
      for (int u = 0; u < 8; ++u) s += a[u][x] * rows[y][u];
      out[y * 8 + x] = s;
    }
  return out;
}

inline double qstep_for_qp(int qp) { return std::pow(2.0, (qp - 4) / 6.0); }

// Uniform quantizer, half rounding away from zero.
inline Levels8x8 quantize(const Block8x8& coeffs, int qp) {
  const double qstep = qstep_for_qp(qp);
  Levels8x8 levels{};
  for (int i = 0; i < 64; ++i)
    levels[i] = static_cast<int>(std::llround(coeffs[i] / qstep));
  return levels;
}

inline Block8x8 dequantize(const Levels8x8& levels, int qp) {
  const double qstep = qstep_for_qp(qp);
  Block8x8 coeffs{};
  for (int i = 0; i < 64; ++i) coeffs[i] = levels[i] * qstep;
  return coeffs;
}

// One coded-block flag, then the level codes when any level is nonzero.
inline int residual_bits(const Levels8x8& levels) {
  bool any = false;
  for (int v : levels) any = any || v != 0;
  int bits = 1;
  if (any)
    for (int v : levels) bits += eg0_bits(v);
  return bits;
}

struct FrameStats {
  int frame_index = 0;
  long long bits = 0;
  double psnr_y = 0;
  double wall_seconds = 0;
  long long pu_conventional = 0;
  long long pu_proposed = 0;
};

// Everything a decoder needs for one frame: unit decisions in raster order
// (empty for the first frame), then per-8x8 quantized levels, units raster,
// blocks raster inside each unit.
struct FramePayload {
  std::vector<PuDecision> decisions;
  std::vector<Levels8x8> levels;
};

struct EncodedFrame {
  Frame recon;
  FrameStats stats;
  FramePayload payload;
};

// Predictors from the already-decided left and above units of this frame.
inline MvpPair mvp_context(const std::vector<PuDecision>& decisions, int pu_x,
                           int pu_y, int pus_x) {
  MvpPair mvps;
  if (pu_x > 0) mvps.a = decisions[static_cast<std::size_t>(pu_y) * pus_x + pu_x - 1].mv;
  if (pu_y > 0) mvps.b = decisions[static_cast<std::size_t>(pu_y - 1) * pus_x + pu_x].mv;
  return mvps;
}

namespace detail {

// Shared by encoder and decoder: residual-code one unit given its prediction
// and write the reconstruction. The encoder pushes fresh levels, the decoder
// replays stored ones.
template <typename LevelSource>
void reconstruct_unit(Frame& recon, int x0, int y0, int pu,
                      const std::vector<std::uint8_t>& pred, int qp,
                      LevelSource&& level_for_block) {
  for (int by = 0; by < pu; by += 8)
    for (int bx = 0; bx < pu; bx += 8) {
      const Levels8x8& levels = level_for_block(bx, by);
      const Block8x8 resid = inverse_transform(dequantize(levels, qp));
      for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x) {
          const int p = pred[static_cast<std::size_t>(by + y) * pu + bx + x];
          const long long r = std::llround(resid[y * 8 + x]);
          const long long s = std::clamp<long long>(p + r, 0, 255);
          recon.at(x0 + bx + x, y0 + by + y) = static_cast<std::uint8_t>(s);
        }
    }
}

}  // namespace detail

// Closed-loop encode of one frame. First frame (no reference): constant-128
// prediction. Inter frames: per unit, the configured searches against the
// previous reconstruction, then transform-coded residual. The candidate grid
// must already be disocclusion-filtered and is required exactly when a mode
// tests candidates.
inline EncodedFrame encode_frame(const Frame& cur, const Frame* ref_recon,
                                 const BlockGrid* grid, const EncoderConfig& cfg) {
  validate_encoder_config(cfg);
  const int pu = cfg.search.pu_size;
  if (cur.width % pu != 0 || cur.height % pu != 0)
    throw Error("encode_frame: frame dimensions must be multiples of the unit size");
  const bool inter = ref_recon != nullptr;
  if (inter && (ref_recon->width != cur.width || ref_recon->height != cur.height))
    throw Error("encode_frame: reference dimensions differ");
  const bool needs_grid = inter && cfg.search.mode != SearchMode::conventional;
  if (needs_grid && grid == nullptr)
    throw Error("encode_frame: candidate grid required for this mode");
  if (!inter && grid != nullptr)
    throw Error("encode_frame: first frame takes no candidate grid");
  if (needs_grid &&
      (grid->blocks_x * 4 != cur.width || grid->blocks_y * 4 != cur.height))
    throw Error("encode_frame: grid dimensions differ");

  EncodedFrame out;
  out.recon = make_frame(cur.width, cur.height);
  out.stats.bits = cfg.header_bits_per_frame;

  const int pus_x = cur.width / pu;
  const int pus_y = cur.height / pu;
  const std::vector<std::uint8_t> flat(static_cast<std::size_t>(pu) * pu, 128);

  for (int py = 0; py < pus_y; ++py)
    for (int px = 0; px < pus_x; ++px) {
      const int x0 = px * pu;
      const int y0 = py * pu;
      std::vector<std::uint8_t> pred;
      if (inter) {
        const MvpPair mvps = mvp_context(out.payload.decisions, px, py, pus_x);
        std::optional<PuDecision> conv, prop;
        if (cfg.search.mode != SearchMode::proposed_only)
          conv = conventional_search(cur, *ref_recon, x0, y0, cfg.search, mvps);
        if (cfg.search.mode != SearchMode::conventional) {
          const auto candidates = build_candidate_list(*grid, x0, y0, pu, mvps);
          prop = proposed_search(cur, *ref_recon, x0, y0, cfg.search, mvps, candidates);
        }
        const PuDecision sel = select_best(conv, prop, cfg.search.mode);
        pred = interpolate_block(*ref_recon, x0, y0, pu, pu, sel.mv);
        out.stats.bits += sel.mv_bits;
        if (sel.origin == DecisionOrigin::conventional)
          ++out.stats.pu_conventional;
        else
          ++out.stats.pu_proposed;
        out.payload.decisions.push_back(sel);
      } else {
        pred = flat;
      }

      detail::reconstruct_unit(
          out.recon, x0, y0, pu, pred, cfg.qp,
          [&](int bx, int by) -> const Levels8x8& {
            Block8x8 resid{};
            for (int y = 0; y < 8; ++y)
              for (int x = 0; x < 8; ++x)
                resid[y * 8 + x] =
                    static_cast<double>(cur.at(x0 + bx + x, y0 + by + y)) -
                    pred[static_cast<std::size_t>(by + y) * pu + bx + x];
            out.payload.levels.push_back(quantize(forward_transform(resid), cfg.qp));
            out.stats.bits += residual_bits(out.payload.levels.back());
            return out.payload.levels.back();
          });
    }

  out.stats.psnr_y = psnr(cur, out.recon);
  return out;
}

// Standalone reconstruction from a payload; must reproduce the encoder's
// reconstruction bit-exactly.
inline Frame decode_frame(const Frame* ref_recon, const FramePayload& payload,
                          const EncoderConfig& cfg, int width, int height) {
  validate_encoder_config(cfg);
  const int pu = cfg.search.pu_size;
  if (width % pu != 0 || height % pu != 0)
    throw Error("decode_frame: frame dimensions must be multiples of the unit size");
  const bool inter = ref_recon != nullptr;
  const std::size_t pus =
      static_cast<std::size_t>(width / pu) * static_cast<std::size_t>(height / pu);
  if (payload.decisions.size() != (inter ? pus : 0))
    throw Error("decode_frame: decision count mismatch");
  const std::size_t blocks_per_pu = static_cast<std::size_t>(pu / 8) * (pu / 8);
  if (payload.levels.size() != pus * blocks_per_pu)
    throw Error("decode_frame: level count mismatch");

  Frame recon = make_frame(width, height);
  const int pus_x = width / pu;
  const int pus_y = height / pu;
  const std::vector<std::uint8_t> flat(static_cast<std::size_t>(pu) * pu, 128);
  std::size_t level_index = 0;

  for (int py = 0; py < pus_y; ++py)
    for (int px = 0; px < pus_x; ++px) {
      const int x0 = px * pu;
      const int y0 = py * pu;
      std::vector<std::uint8_t> pred;
      if (inter) {
        const Mv mv = payload.decisions[static_cast<std::size_t>(py) * pus_x + px].mv;
        pred = interpolate_block(*ref_recon, x0, y0, pu, pu, mv);
      } else {
        pred = flat;
      }
      detail::reconstruct_unit(recon, x0, y0, pu, pred, cfg.qp,
                               [&](int, int) -> const Levels8x8& {
                                 return payload.levels[level_index++];
                               });
    }
  return recon;
}

// Per-frame reconstructions and payloads of a whole encode, for analysis.
struct SequenceTrace {
  std::vector<Frame> recons;
  std::vector<FramePayload> payloads;
};

// Encodes a sequence front to back against the previous reconstruction.
// Motion and depth sidecars are read (and required) only in candidate-testing
// modes; file reads stay outside the per-frame wall-clock, the mapping,
// disocclusion and search work inside it.
inline std::vector<FrameStats> encode_sequence(SequenceLoader& loader,
                                               const EncoderConfig& cfg,
                                               SequenceTrace* trace = nullptr) {
  validate_encoder_config(cfg);
  const bool wants_candidates = cfg.search.mode != SearchMode::conventional;
  std::vector<FrameStats> stats;
  Frame prev_recon;

  for (int t = 0; t < loader.manifest().frame_count; ++t) {
    const Frame cur = loader.frame(t);
    MotionField mvf;
    DepthMap z_cur, z_prev;
    const bool inter = t > 0;
    if (inter && wants_candidates) {
      if (!loader.has_motion(t))
        throw Error("missing motion sidecar for frame " + std::to_string(t));
      if (!loader.has_depth(t) || !loader.has_depth(t - 1))
        throw Error("missing depth sidecar for frame " + std::to_string(t));
      mvf = loader.motion(t);
      z_cur = loader.depth(t);
      z_prev = loader.depth(t - 1);
    }

    const auto start = std::chrono::steady_clock::now();
    std::optional<BlockGrid> grid;
    if (inter && wants_candidates)
      grid = invalidate_blocks(map_frame(mvf),
                               mask_frame(z_cur, z_prev, mvf, cfg.disocclusion));
    EncodedFrame enc = encode_frame(cur, inter ? &prev_recon : nullptr,
                                    grid ? &*grid : nullptr, cfg);
    const auto stop = std::chrono::steady_clock::now();

    enc.stats.frame_index = t;
    enc.stats.wall_seconds = std::chrono::duration<double>(stop - start).count();
    stats.push_back(enc.stats);
    prev_recon = std::move(enc.recon);
    if (trace) {
      trace->recons.push_back(prev_recon);
      trace->payloads.push_back(std::move(enc.payload));
    }
  }
  return stats;
}

inline void write_stats_csv(const std::vector<FrameStats>& stats,
                            const std::filesystem::path& path) {
  std::string text = "frame,bits,psnr_y,wall_s,pu_conv,pu_prop\n";
  char line[160];
  long long bits = 0, conv = 0, prop = 0;
  double psnr_sum = 0, wall = 0;
  for (const FrameStats& s : stats) {
    std::snprintf(line, sizeof line, "%d,%lld,%.4f,%.6f,%lld,%lld\n", s.frame_index,
                  s.bits, s.psnr_y, s.wall_seconds, s.pu_conventional, s.pu_proposed);
    text += line;
    bits += s.bits;
    psnr_sum += s.psnr_y;
    wall += s.wall_seconds;
    conv += s.pu_conventional;
    prop += s.pu_proposed;
  }
  const double mean_psnr = stats.empty() ? 0.0 : psnr_sum / stats.size();
  std::snprintf(line, sizeof line, "total,%lld,%.4f,%.6f,%lld,%lld\n", bits, mean_psnr,
                wall, conv, prop);
  text += line;

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open for writing: " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error("write failed: " + path.string());
}

struct StatsSummary {
  long long total_bits = 0;
  double mean_psnr = 0;
  double total_wall = 0;
  long long pu_conventional = 0;
  long long pu_proposed = 0;
};

inline StatsSummary read_stats_csv_totals(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open: " + path.string());
  std::string line;
  while (std::getline(in, line)) {
    if (!line.starts_with("total,")) continue;
    StatsSummary s;
    if (std::sscanf(line.c_str(), "total,%lld,%lf,%lf,%lld,%lld", &s.total_bits,
                    &s.mean_psnr, &s.total_wall, &s.pu_conventional,
                    &s.pu_proposed) != 5)
      throw Error("malformed total row in " + path.string());
    return s;
  }
  throw Error("stats csv has no total row: " + path.string());
}

}  // namespace truemv
