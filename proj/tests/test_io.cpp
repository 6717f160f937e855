#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "fpp/io.hpp"
#include "fpp/rng.hpp"

using namespace fpp;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const char* name) {
  return fs::temp_directory_path() / name;
}

}  // namespace

TEST_CASE("FPA v1 round trip preserves shape and f32 payload") {
  Rng rng(4);
  io::FpaArray array;
  array.shape = {5, 7, 2};
  array.data.resize(70);
  for (float& v : array.data) v = static_cast<float>(rng.uniform(-1e3, 1e3));

  const fs::path path = temp_file("fpp_io_test.fpa");
  io::write_fpa(path, array);
  const io::FpaArray back = io::read_fpa(path);
  CHECK(back.shape == array.shape);
  CHECK(back.data == array.data);
  fs::remove(path);
}

TEST_CASE("FPA header is the documented ASCII block") {
  Grid g(2, 3, 1.0);
  const fs::path path = temp_file("fpp_io_header.fpa");
  io::write_fpa(path, g);
  std::ifstream in(path, std::ios::binary);
  std::string l1, l2, l3, l4;
  std::getline(in, l1);
  std::getline(in, l2);
  std::getline(in, l3);
  std::getline(in, l4);
  CHECK(l1 == "FPA 1");
  CHECK(l2 == "dtype f32");
  CHECK(l3 == "shape 2 3");
  CHECK(l4.empty());
  fs::remove(path);
}

TEST_CASE("FPA rejects corrupt input") {
  const fs::path path = temp_file("fpp_io_bad.fpa");
  io::write_text_file(path, "FPB 1\ndtype f32\nshape 2 2\n\n");
  CHECK_THROWS_AS(io::read_fpa(path), io::IoError);
  io::write_text_file(path, "FPA 1\ndtype f64\nshape 2 2\n\n");
  CHECK_THROWS_AS(io::read_fpa(path), io::IoError);
  io::write_text_file(path, "FPA 1\ndtype f32\nshape 2 2\n\nshort");
  CHECK_THROWS_AS(io::read_fpa(path), io::IoError);
  CHECK_THROWS_AS(io::read_fpa(temp_file("fpp_does_not_exist.fpa")), io::IoError);
  fs::remove(path);
}

TEST_CASE("grid and mask adapters") {
  Rng rng(5);
  Grid g(6, 4);
  for (double& v : g) v = rng.uniform(-10.0, 10.0);
  const fs::path path = temp_file("fpp_io_grid.fpa");
  io::write_fpa(path, g);
  const Grid back = io::read_fpa_grid(path);
  REQUIRE(back.same_shape(g));
  for (std::size_t i = 0; i < g.size(); ++i)
    CHECK(back[i] == static_cast<double>(static_cast<float>(g[i])));

  Mask m(3, 3, 0);
  m(1, 1) = 1;
  io::write_fpa(path, m);
  const Mask mask_back = io::read_fpa_mask(path);
  CHECK(mask_back == m);
  fs::remove(path);
}

TEST_CASE("PGM export writes a valid P5 header") {
  Grid g(4, 5);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = static_cast<double>(i);
  const fs::path path = temp_file("fpp_io_test.pgm");
  io::write_pgm(path, g);
  std::ifstream in(path, std::ios::binary);
  std::string magic;
  std::size_t w = 0, h = 0, maxval = 0;
  in >> magic >> w >> h >> maxval;
  CHECK(magic == "P5");
  CHECK(w == 5);
  CHECK(h == 4);
  CHECK(maxval == 255);
  in.get();
  std::vector<char> payload(w * h);
  in.read(payload.data(), static_cast<std::streamsize>(payload.size()));
  CHECK(in.gcount() == static_cast<std::streamsize>(w * h));
  fs::remove(path);
}

TEST_CASE("histogram CSV covers all pixels") {
  Rng rng(6);
  Grid g(10, 10);
  for (double& v : g) v = rng.uniform(0.0, 1.0);
  const fs::path path = temp_file("fpp_io_hist.csv");
  io::write_histogram_csv(path, g, 8);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "bin_lo,bin_hi,count");
  std::size_t total = 0;
  std::string line;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    const auto last_comma = line.rfind(',');
    total += static_cast<std::size_t>(std::stoul(line.substr(last_comma + 1)));
    ++rows;
  }
  CHECK(rows == 8);
  CHECK(total == 100);
  fs::remove(path);
}
