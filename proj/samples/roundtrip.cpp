// Writes a tiny frame to a temp file and reads it back.
#include <cstdio>
#include <filesystem>

#include "truemv/seqio.hpp"

int main() {
  namespace fs = std::filesystem;
  fs::path p = fs::temp_directory_path() / "truemv_sample.pgm";
  truemv::Frame f = truemv::make_frame(16, 16, 128);
  truemv::write_frame(f, p);
  truemv::Frame back = truemv::read_frame(p);
  std::printf("round trip %s (%dx%d)\n", back == f ? "ok" : "FAILED",
              back.width, back.height);
  return back == f ? 0 : 1;
}
