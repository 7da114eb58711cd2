// Renders a small scene, encodes it with and without render-supplied motion
// candidates, and prints the rate difference at matched quality.
#include <array>
#include <cstdio>
#include <filesystem>

#include "truemv/truemv.hpp"

int main() {
  namespace fs = std::filesystem;
  using namespace truemv;

  const fs::path dir = fs::temp_directory_path() / "truemv_compare_modes";
  fs::remove_all(dir);
  render_sequence(preset("largemotion", 192, 96, 6, 1), dir);

  auto curve = [&](SearchMode mode, double& wall) {
    std::array<RdPoint, 4> pts{};
    const int qps[4] = {22, 27, 32, 37};
    wall = 0;
    for (int i = 0; i < 4; ++i) {
      SequenceLoader loader(dir / "manifest.txt");
      long long bits = 0;
      double psnr_sum = 0;
      const auto stats = encode_sequence(loader, make_encoder_config(qps[i], mode));
      for (const FrameStats& s : stats) {
        bits += s.bits;
        psnr_sum += s.psnr_y;
        wall += s.wall_seconds;
      }
      pts[i] = {static_cast<double>(bits),
                psnr_sum / static_cast<double>(stats.size())};
    }
    return make_rd_curve(pts);
  };

  double wall_conv = 0, wall_comb = 0;
  const RdCurve conv = curve(SearchMode::conventional, wall_conv);
  const RdCurve comb = curve(SearchMode::combined, wall_comb);

  std::printf("bd_rate_percent=%.2f\n", bd_rate(conv, comb));
  std::printf("delta_t_percent=%.1f\n", time_delta(wall_conv, wall_comb));
  return 0;
}
