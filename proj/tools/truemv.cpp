#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "truemv/truemv.hpp"

namespace fs = std::filesystem;

namespace {

// Shortest fixed-point form with at least one decimal: 0 -> "0.0".
std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  std::string s(buf);
  while (s.size() > 1 && s.back() == '0') s.pop_back();
  if (s.back() == '.') s.push_back('0');
  return s;
}

fs::path manifest_file(const std::string& in) {
  fs::path p(in);
  return fs::is_directory(p) ? p / "manifest.txt" : p;
}

truemv::SearchMode parse_mode(const std::string& name) {
  if (name == "conventional") return truemv::SearchMode::conventional;
  if (name == "proposed-only") return truemv::SearchMode::proposed_only;
  return truemv::SearchMode::combined;
}

int run_synthgen(const std::string& preset_name, int width, int height,
                 int frames, std::uint64_t seed, const std::string& out) {
  truemv::SceneSpec scene =
      truemv::preset(preset_name, width, height, frames, seed);
  truemv::render_sequence(scene, out);
  std::cout << "sequence_dir=" << out << "\n";
  return 0;
}

int run_encode(const std::string& in, int qp, const std::string& mode,
               int pu_size, int search_range, const std::string& out,
               const std::string& recon_dir) {
  truemv::EncoderConfig cfg = truemv::make_encoder_config(
      qp, parse_mode(mode), pu_size, search_range);
  truemv::validate_encoder_config(cfg);
  truemv::SequenceLoader loader(manifest_file(in));
  truemv::SequenceTrace trace;
  std::vector<truemv::FrameStats> stats =
      truemv::encode_sequence(loader, cfg, recon_dir.empty() ? nullptr : &trace);
  truemv::write_stats_csv(stats, out);

  if (!recon_dir.empty()) {
    fs::create_directories(recon_dir);
    for (std::size_t t = 0; t < trace.recons.size(); ++t)
      truemv::write_frame(trace.recons[t],
                          fs::path(recon_dir) /
                              truemv::format_index_pattern("recon_%04d.pgm",
                                                           static_cast<int>(t)));
  }

  long long total_bits = 0;
  double psnr_sum = 0.0, wall = 0.0;
  for (const truemv::FrameStats& s : stats) {
    total_bits += s.bits;
    psnr_sum += s.psnr_y;
    wall += s.wall_seconds;
  }
  std::cout << "total_bits=" << total_bits << "\n"
            << "mean_psnr=" << format_number(psnr_sum / stats.size()) << "\n"
            << "wall_seconds=" << format_number(wall) << "\n";
  return 0;
}

int run_maskdump(const std::string& in, int frame, const std::string& out) {
  truemv::SequenceLoader loader(manifest_file(in));
  if (frame <= 0)
    throw truemv::Error("maskdump: frame must be at least 1 (frame 0 has no motion)");
  if (frame >= loader.manifest().frame_count)
    throw truemv::Error("maskdump: frame index out of range");
  truemv::DisocclusionMask mask =
      truemv::mask_frame(loader.depth(frame), loader.depth(frame - 1),
                         loader.motion(frame), {});
  truemv::write_frame(truemv::mask_to_frame(mask), out);
  std::cout << "mask=" << out << "\n";
  return 0;
}

truemv::RdCurve load_curve(const fs::path& dir, double* total_wall) {
  std::array<truemv::RdPoint, 4> pts{};
  const int qps[4] = {22, 27, 32, 37};
  for (int i = 0; i < 4; ++i) {
    truemv::StatsSummary s = truemv::read_stats_csv_totals(
        dir / ("qp" + std::to_string(qps[i]) + ".csv"));
    pts[i] = {static_cast<double>(s.total_bits), s.mean_psnr};
    *total_wall += s.total_wall;
  }
  return truemv::make_rd_curve(pts);
}

int run_bdrate(const std::string& anchor, const std::string& test) {
  double anchor_wall = 0.0, test_wall = 0.0;
  truemv::RdCurve anchor_curve = load_curve(anchor, &anchor_wall);
  truemv::RdCurve test_curve = load_curve(test, &test_wall);
  std::cout << "bd_rate_percent="
            << format_number(truemv::bd_rate(anchor_curve, test_curve)) << "\n"
            << "delta_t_percent="
            << format_number(truemv::time_delta(anchor_wall, test_wall))
            << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Render-aware motion estimation toolkit"};
  app.require_subcommand(1);

  std::string preset_name, seq_dir, csv_out, recon_dir, mask_out;
  std::string mode = "conventional", anchor_dir, test_dir;
  int width = 352, height = 288, frames = 15, qp = 27;
  int pu_size = 16, search_range = 64, frame_index = 1;
  std::uint64_t seed = 1;

  CLI::App* gen = app.add_subcommand("synthgen", "Generate a synthetic sequence");
  gen->add_option("--preset", preset_name, "Scene preset")
      ->required()
      ->check(CLI::IsMember({"arrows", "layers", "largemotion", "approach"}));
  gen->add_option("--width", width, "Frame width in pixels");
  gen->add_option("--height", height, "Frame height in pixels");
  gen->add_option("--frames", frames, "Number of frames");
  gen->add_option("--seed", seed, "Random seed");
  gen->add_option("--out", seq_dir, "Output sequence directory")->required();

  CLI::App* enc = app.add_subcommand("encode", "Encode a sequence");
  enc->add_option("--in", seq_dir, "Input sequence directory")->required();
  enc->add_option("--qp", qp, "Quantization parameter")->check(CLI::Range(0, 51));
  enc->add_option("--mode", mode, "Motion search mode")
      ->check(CLI::IsMember({"conventional", "proposed-only", "combined"}));
  enc->add_option("--pu-size", pu_size, "Prediction unit size")
      ->check(CLI::IsMember({8, 16, 32, 64}));
  enc->add_option("--search-range", search_range, "Search range in pixels");
  enc->add_option("--out", csv_out, "Output stats CSV path")->required();
  enc->add_option("--recon", recon_dir, "Directory for reconstructed frames");

  CLI::App* dump = app.add_subcommand("maskdump", "Write a disocclusion mask");
  dump->add_option("--in", seq_dir, "Input sequence directory")->required();
  dump->add_option("--frame", frame_index, "Frame index (1-based)")->required();
  dump->add_option("--out", mask_out, "Output PGM path")->required();

  CLI::App* bd = app.add_subcommand("bdrate", "Compare two rate-distortion runs");
  bd->add_option("--anchor", anchor_dir, "Anchor stats directory")->required();
  bd->add_option("--test", test_dir, "Test stats directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (gen->parsed())
      return run_synthgen(preset_name, width, height, frames, seed, seq_dir);
    if (enc->parsed())
      return run_encode(seq_dir, qp, mode, pu_size, search_range, csv_out,
                        recon_dir);
    if (dump->parsed()) return run_maskdump(seq_dir, frame_index, mask_out);
    return run_bdrate(anchor_dir, test_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
