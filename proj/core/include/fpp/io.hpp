#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "fpp/grid.hpp"

namespace fpp::io {

/// Raised on unreadable/corrupt files; carries the offending path.
class IoError : public std::runtime_error {
 public:
  IoError(const std::string& path, const std::string& what)
      : std::runtime_error(path + ": " + what), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

/// FPA v1: ASCII header ("FPA 1", "dtype f32", "shape H W [C]", blank line)
/// followed by a row-major little-endian IEEE-754 binary payload.
struct FpaArray {
  std::vector<std::size_t> shape;  // 2 or 3 entries: H W [C]
  std::vector<float> data;         // shape product elements

  std::size_t rows() const { return shape[0]; }
  std::size_t cols() const { return shape[1]; }
  std::size_t channels() const { return shape.size() == 3 ? shape[2] : 1; }
};

void write_fpa(const std::filesystem::path& path, const FpaArray& array);
FpaArray read_fpa(const std::filesystem::path& path);

void write_fpa(const std::filesystem::path& path, const Grid& grid);
void write_fpa(const std::filesystem::path& path, const Mask& mask);
Grid read_fpa_grid(const std::filesystem::path& path);
Mask read_fpa_mask(const std::filesystem::path& path);

/// 8-bit binary PGM (P5). Values are min-max normalized unless the grid
/// already lies in [0, 255], in which case it is written verbatim.
void write_pgm(const std::filesystem::path& path, const Grid& grid);

/// Value histogram as CSV (bin_lo,bin_hi,count), for quick inspection plots.
void write_histogram_csv(const std::filesystem::path& path, const Grid& grid,
                         std::size_t bins);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace fpp::io
