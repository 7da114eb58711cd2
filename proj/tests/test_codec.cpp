#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "truemv/codec.hpp"

using namespace truemv;
namespace fs = std::filesystem;

namespace {

Frame textured_frame(int w, int h, unsigned seed = 1) {
  Frame f = make_frame(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double v = 128.0 + 45.0 * std::sin(x * 0.13 + seed) + 35.0 * std::cos(y * 0.11);
      f.at(x, y) = static_cast<std::uint8_t>(std::lround(std::clamp(v, 32.0, 224.0)));
    }
  return f;
}

fs::path temp_dir(const std::string& tag) {
  static int counter = 0;
  fs::path dir = fs::temp_directory_path() /
                 ("truemv_codec_" + tag + "_" + std::to_string(++counter));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("transform round trip is lossless to tolerance", "[codec]") {
  std::mt19937_64 rng(17);
  for (int iter = 0; iter < 500; ++iter) {
    Block8x8 b{};
    for (double& v : b) v = static_cast<int>(rng() % 512) - 256;
    Block8x8 back = inverse_transform(forward_transform(b));
    for (int i = 0; i < 64; ++i) REQUIRE(std::abs(back[i] - b[i]) < 1e-6);
  }
}

TEST_CASE("constant blocks concentrate in the DC coefficient", "[codec]") {
  Block8x8 b{};
  b.fill(31.0);
  Block8x8 f = forward_transform(b);
  CHECK(f[0] == Catch::Approx(8.0 * 31.0));
  for (int i = 1; i < 64; ++i) CHECK(std::abs(f[i]) < 1e-9);
}

TEST_CASE("transform preserves energy", "[codec]") {
  std::mt19937_64 rng(18);
  Block8x8 b{};
  for (double& v : b) v = static_cast<int>(rng() % 512) - 256;
  Block8x8 f = forward_transform(b);
  double ein = 0, eout = 0;
  for (int i = 0; i < 64; ++i) {
    ein += b[i] * b[i];
    eout += f[i] * f[i];
  }
  CHECK(eout == Catch::Approx(ein).epsilon(1e-9));
}

TEST_CASE("quantizer steps are exact powers of two at aligned qps", "[codec]") {
  CHECK(qstep_for_qp(22) == 8.0);
  CHECK(qstep_for_qp(4) == 1.0);
  Block8x8 c{};
  c[0] = 12.0;
  c[1] = -12.0;
  Levels8x8 l = quantize(c, 22);
  CHECK(l[0] == 2);  // 1.5 rounds away from zero
  CHECK(l[1] == -2);
  CHECK(dequantize(l, 22)[0] == 16.0);
}

TEST_CASE("residual bit counts follow the flag-plus-codes rule", "[codec]") {
  Levels8x8 zero{};
  CHECK(residual_bits(zero) == 1);
  Levels8x8 one{};
  one[10] = 1;
  CHECK(residual_bits(one) == 67);
  Levels8x8 ones;
  for (int i = 0; i < 64; ++i) ones[i] = (i % 2) ? 1 : -1;
  CHECK(residual_bits(ones) == 193);
}

TEST_CASE("first frame of constant 128 codes to the floor bit count", "[codec]") {
  Frame cur = make_frame(32, 32, 128);
  EncoderConfig cfg = make_encoder_config(22, SearchMode::conventional);
  EncodedFrame enc = encode_frame(cur, nullptr, nullptr, cfg);
  CHECK(enc.recon == cur);
  CHECK(enc.stats.psnr_y == 99.0);
  // Header plus one flag bit per 8x8 block.
  CHECK(enc.stats.bits == 16 + (32 / 8) * (32 / 8));
  CHECK(enc.payload.decisions.empty());
}

TEST_CASE("static constant pair hits the analytic inter bit count", "[codec]") {
  Frame f = make_frame(64, 48, 90);
  EncoderConfig cfg = make_encoder_config(22, SearchMode::conventional);
  EncodedFrame first = encode_frame(f, nullptr, nullptr, cfg);
  REQUIRE(first.recon == f);  // constant residual quantizes exactly at qp 22
  EncodedFrame second = encode_frame(f, &first.recon, nullptr, cfg);
  // 12 units, each 3 vector bits and 4 empty-block flags.
  CHECK(second.stats.bits == 16 + 12 * (3 + 4));
  CHECK(second.stats.pu_conventional == 12);
  CHECK(second.stats.pu_proposed == 0);
  for (const PuDecision& d : second.payload.decisions) {
    CHECK(d.mv == Mv{0, 0});
    CHECK(d.sad == 0);
  }
  for (const Levels8x8& l : second.payload.levels)
    for (int v : l) CHECK(v == 0);
  CHECK(second.recon == f);
}

TEST_CASE("static textured pair stays within a pixel of zero motion", "[codec]") {
  // The reference is the lossy reconstruction, so fractional positions can
  // denoise slightly; anything beyond one pixel would be a search defect.
  Frame f = textured_frame(64, 32);
  EncoderConfig cfg = make_encoder_config(27, SearchMode::conventional);
  EncodedFrame first = encode_frame(f, nullptr, nullptr, cfg);
  EncodedFrame second = encode_frame(f, &first.recon, nullptr, cfg);
  for (const PuDecision& d : second.payload.decisions) {
    CHECK(std::abs(d.mv.x) <= 4);
    CHECK(std::abs(d.mv.y) <= 4);
  }
  CHECK(second.stats.psnr_y > 35.0);
}

TEST_CASE("decoder replays the encoder reconstruction bit-exactly", "[codec]") {
  Frame f0 = textured_frame(64, 32, 5);
  Frame f1 = textured_frame(64, 32, 6);
  for (int qp : {22, 32, 45}) {
    EncoderConfig cfg = make_encoder_config(qp, SearchMode::conventional);
    EncodedFrame first = encode_frame(f0, nullptr, nullptr, cfg);
    CHECK(decode_frame(nullptr, first.payload, cfg, 64, 32) == first.recon);
    EncodedFrame second = encode_frame(f1, &first.recon, nullptr, cfg);
    CHECK(decode_frame(&first.recon, second.payload, cfg, 64, 32) == second.recon);
  }
}

TEST_CASE("combined mode consumes a candidate grid", "[codec]") {
  Frame ref = textured_frame(64, 32, 9);
  Frame cur = make_frame(64, 32);
  // Content displaced one integer pixel right: cur(x) = ref(x-1).
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 64; ++x) cur.at(x, y) = ref.at(std::max(x - 1, 0), y);

  MotionField mf = make_motion_field(64, 32);
  for (auto& v : mf.vectors) v = {-4, 0, 0};
  BlockGrid grid = map_frame(mf);

  EncoderConfig cfg = make_encoder_config(27, SearchMode::combined);
  EncodedFrame first = encode_frame(ref, nullptr, nullptr, cfg);
  EncodedFrame second = encode_frame(cur, &first.recon, &grid, cfg);
  CHECK(second.stats.pu_conventional + second.stats.pu_proposed == 8);
  CHECK(decode_frame(&first.recon, second.payload, cfg, 64, 32) == second.recon);

  CHECK_THROWS_AS(encode_frame(cur, &first.recon, nullptr, cfg), Error);
  CHECK_THROWS_AS(encode_frame(ref, nullptr, &grid, cfg), Error);
}

TEST_CASE("frame dimensions must align with the unit size", "[codec]") {
  Frame odd = make_frame(40, 32, 128);
  EncoderConfig cfg = make_encoder_config(27, SearchMode::conventional);
  CHECK_THROWS_AS(encode_frame(odd, nullptr, nullptr, cfg), Error);
}

TEST_CASE("config validation bounds qp", "[codec]") {
  EncoderConfig cfg = make_encoder_config(27, SearchMode::conventional);
  cfg.qp = 52;
  CHECK_THROWS_AS(validate_encoder_config(cfg), Error);
  cfg.qp = -1;
  CHECK_THROWS_AS(validate_encoder_config(cfg), Error);
}

TEST_CASE("predictor context tracks left and above decisions", "[codec]") {
  std::vector<PuDecision> decisions(4);
  decisions[0].mv = {4, 0};
  decisions[1].mv = {8, 0};
  decisions[2].mv = {0, 4};
  MvpPair at00 = mvp_context({}, 0, 0, 2);
  CHECK(at00.a == Mv{0, 0});
  CHECK(at00.b == Mv{0, 0});
  MvpPair at10 = mvp_context(decisions, 1, 0, 2);
  CHECK(at10.a == Mv{4, 0});
  CHECK(at10.b == Mv{0, 0});
  MvpPair at11 = mvp_context(decisions, 1, 1, 2);
  CHECK(at11.a == Mv{0, 4});
  CHECK(at11.b == Mv{8, 0});
}

TEST_CASE("decoder validates payload sizes", "[codec]") {
  Frame f = make_frame(32, 32, 128);
  EncoderConfig cfg = make_encoder_config(27, SearchMode::conventional);
  EncodedFrame enc = encode_frame(f, nullptr, nullptr, cfg);
  FramePayload bad = enc.payload;
  bad.levels.pop_back();
  CHECK_THROWS_AS(decode_frame(nullptr, bad, cfg, 32, 32), Error);
  FramePayload extra = enc.payload;
  extra.decisions.push_back({});
  CHECK_THROWS_AS(decode_frame(nullptr, extra, cfg, 32, 32), Error);
}

TEST_CASE("stats csv round trips through the total row", "[codec]") {
  std::vector<FrameStats> stats(3);
  stats[0] = {0, 500, 99.0, 0.25, 0, 0};
  stats[1] = {1, 300, 41.5, 0.5, 10, 2};
  stats[2] = {2, 200, 40.0, 0.25, 9, 3};
  fs::path p = temp_dir("csv") / "stats.csv";
  write_stats_csv(stats, p);

  std::ifstream in(p);
  std::string header;
  std::getline(in, header);
  CHECK(header == "frame,bits,psnr_y,wall_s,pu_conv,pu_prop");
  int rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  CHECK(rows == 4);

  StatsSummary s = read_stats_csv_totals(p);
  CHECK(s.total_bits == 1000);
  CHECK(s.mean_psnr == Catch::Approx((99.0 + 41.5 + 40.0) / 3));
  CHECK(s.total_wall == Catch::Approx(1.0));
  CHECK(s.pu_conventional == 19);
  CHECK(s.pu_proposed == 5);
}

TEST_CASE("totals reader rejects files without a total row", "[codec]") {
  fs::path p = temp_dir("csv") / "no_total.csv";
  std::ofstream(p) << "frame,bits,psnr_y,wall_s,pu_conv,pu_prop\n0,1,2,3,4,5\n";
  CHECK_THROWS_WITH(read_stats_csv_totals(p),
                    Catch::Matchers::ContainsSubstring("no total row"));
  CHECK_THROWS_AS(read_stats_csv_totals(temp_dir("csv") / "absent.csv"), Error);
}

TEST_CASE("sequences encode front to back with sidecar rules", "[codec]") {
  fs::path dir = temp_dir("seq");
  SequenceManifest m;
  m.width = 32;
  m.height = 32;
  m.frame_count = 3;
  m.frame_pattern = "frame_%04d.pgm";
  m.mvf_pattern = "mvf_%04d.mvf";
  m.depth_pattern = "depth_%04d.dpt";
  m.base_dir = dir;
  for (int t = 0; t < 3; ++t) write_frame(textured_frame(32, 32, 4), dir / ("frame_000" + std::to_string(t) + ".pgm"));
  write_manifest(m, dir / "manifest.txt");

  SequenceLoader loader(m);
  EncoderConfig conv = make_encoder_config(27, SearchMode::conventional);
  SequenceTrace trace;
  auto stats = encode_sequence(loader, conv, &trace);
  REQUIRE(stats.size() == 3);
  CHECK(stats[0].frame_index == 0);
  CHECK(stats[1].pu_conventional == 4);
  CHECK(trace.recons.size() == 3);
  CHECK(trace.payloads[1].decisions.size() == 4);
  for (const auto& s : stats) CHECK(s.wall_seconds >= 0.0);

  // Candidate-testing modes refuse to run without sidecars.
  EncoderConfig comb = make_encoder_config(27, SearchMode::combined);
  CHECK_THROWS_WITH(encode_sequence(loader, comb),
                    Catch::Matchers::ContainsSubstring("missing motion sidecar"));

  for (int t = 1; t < 3; ++t)
    write_motion_field(make_motion_field(32, 32),
                       dir / ("mvf_000" + std::to_string(t) + ".mvf"));
  CHECK_THROWS_WITH(encode_sequence(loader, comb),
                    Catch::Matchers::ContainsSubstring("missing depth sidecar"));
  for (int t = 0; t < 3; ++t)
    write_depth_map(make_depth_map(32, 32, 0.5f),
                    dir / ("depth_000" + std::to_string(t) + ".dpt"));

  auto comb_stats = encode_sequence(loader, comb);
  REQUIRE(comb_stats.size() == 3);
  // Static scene, zero candidates match the conventional result; bits agree.
  CHECK(comb_stats[1].bits == stats[1].bits);
  CHECK(comb_stats[1].pu_conventional + comb_stats[1].pu_proposed == 4);
}
