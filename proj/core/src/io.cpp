#include "fpp/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

static_assert(std::endian::native == std::endian::little,
              "FPA payloads are little-endian; big-endian hosts need byte swaps");

namespace fpp::io {

namespace {

std::size_t shape_product(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

}  // namespace

void write_fpa(const std::filesystem::path& path, const FpaArray& array) {
  if (array.shape.size() < 2 || array.shape.size() > 3)
    throw std::invalid_argument("FPA shape must be H W or H W C");
  if (shape_product(array.shape) != array.data.size())
    throw std::invalid_argument("FPA data size does not match shape");

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path.string(), "cannot open for writing");

  out << "FPA 1\n";
  out << "dtype f32\n";
  out << "shape";
  for (std::size_t d : array.shape) out << ' ' << d;
  out << "\n\n";
  out.write(reinterpret_cast<const char*>(array.data.data()),
            static_cast<std::streamsize>(array.data.size() * sizeof(float)));
  if (!out) throw IoError(path.string(), "write failed");
}

FpaArray read_fpa(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot open for reading");

  std::string line;
  if (!std::getline(in, line) || line != "FPA 1")
    throw IoError(path.string(), "bad magic, expected 'FPA 1'");
  if (!std::getline(in, line) || line != "dtype f32")
    throw IoError(path.string(), "unsupported dtype, expected 'dtype f32'");
  if (!std::getline(in, line) || line.rfind("shape", 0) != 0)
    throw IoError(path.string(), "missing shape line");

  FpaArray array;
  {
    std::istringstream ss(line.substr(5));
    std::size_t d;
    while (ss >> d) array.shape.push_back(d);
  }
  if (array.shape.size() < 2 || array.shape.size() > 3)
    throw IoError(path.string(), "shape must have 2 or 3 dimensions");
  if (!std::getline(in, line) || !line.empty())
    throw IoError(path.string(), "missing blank line before payload");

  const std::size_t count = shape_product(array.shape);
  array.data.resize(count);
  in.read(reinterpret_cast<char*>(array.data.data()),
          static_cast<std::streamsize>(count * sizeof(float)));
  if (static_cast<std::size_t>(in.gcount()) != count * sizeof(float))
    throw IoError(path.string(), "truncated payload");
  return array;
}

void write_fpa(const std::filesystem::path& path, const Grid& grid) {
  FpaArray array;
  array.shape = {grid.rows(), grid.cols()};
  array.data.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i)
    array.data[i] = static_cast<float>(grid[i]);
  write_fpa(path, array);
}

void write_fpa(const std::filesystem::path& path, const Mask& mask) {
  FpaArray array;
  array.shape = {mask.rows(), mask.cols()};
  array.data.resize(mask.size());
  for (std::size_t i = 0; i < mask.size(); ++i)
    array.data[i] = mask[i] ? 1.0f : 0.0f;
  write_fpa(path, array);
}

Grid read_fpa_grid(const std::filesystem::path& path) {
  FpaArray array = read_fpa(path);
  if (array.channels() != 1)
    throw IoError(path.string(), "expected single-channel array");
  Grid grid(array.rows(), array.cols());
  for (std::size_t i = 0; i < grid.size(); ++i)
    grid[i] = static_cast<double>(array.data[i]);
  return grid;
}

Mask read_fpa_mask(const std::filesystem::path& path) {
  FpaArray array = read_fpa(path);
  if (array.channels() != 1)
    throw IoError(path.string(), "expected single-channel array");
  Mask mask(array.rows(), array.cols());
  for (std::size_t i = 0; i < mask.size(); ++i)
    mask[i] = array.data[i] != 0.0f ? 1 : 0;
  return mask;
}

void write_pgm(const std::filesystem::path& path, const Grid& grid) {
  double lo = grid[0], hi = grid[0];
  for (std::size_t i = 0; i < grid.size(); ++i) {
    lo = std::min(lo, grid[i]);
    hi = std::max(hi, grid[i]);
  }
  const bool already_8bit = lo >= 0.0 && hi <= 255.0;
  const double scale = (hi > lo) ? 255.0 / (hi - lo) : 0.0;

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  out << "P5\n" << grid.cols() << ' ' << grid.rows() << "\n255\n";
  std::vector<unsigned char> row(grid.cols());
  for (std::size_t r = 0; r < grid.rows(); ++r) {
    for (std::size_t c = 0; c < grid.cols(); ++c) {
      const double v = grid(r, c);
      const double mapped = already_8bit ? v : (v - lo) * scale;
      row[c] = static_cast<unsigned char>(std::clamp(std::lround(mapped), 0l, 255l));
    }
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(row.size()));
  }
  if (!out) throw IoError(path.string(), "write failed");
}

void write_histogram_csv(const std::filesystem::path& path, const Grid& grid,
                         std::size_t bins) {
  if (bins == 0) throw std::invalid_argument("histogram needs at least one bin");
  double lo = grid[0], hi = grid[0];
  for (std::size_t i = 0; i < grid.size(); ++i) {
    lo = std::min(lo, grid[i]);
    hi = std::max(hi, grid[i]);
  }
  if (hi == lo) hi = lo + 1.0;
  std::vector<std::size_t> counts(bins, 0);
  const double width = (hi - lo) / static_cast<double>(bins);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    auto b = static_cast<std::size_t>((grid[i] - lo) / width);
    counts[std::min(b, bins - 1)]++;
  }
  std::ofstream out(path);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  out << "bin_lo,bin_hi,count\n";
  for (std::size_t b = 0; b < bins; ++b)
    out << lo + width * static_cast<double>(b) << ','
        << lo + width * static_cast<double>(b + 1) << ',' << counts[b] << '\n';
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot open for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  out << text;
  if (!out) throw IoError(path.string(), "write failed");
}

}  // namespace fpp::io
