#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace fpp {

/// Dense row-major H×W raster. The common currency for images, phase maps
/// and masks throughout the library.
template <typename T>
class BasicGrid {
 public:
  BasicGrid() = default;
  BasicGrid(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {
    if (rows == 0 || cols == 0)
      throw std::invalid_argument("grid dimensions must be positive");
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  T* begin() { return data_.data(); }
  T* end() { return data_.data() + data_.size(); }
  const T* begin() const { return data_.data(); }
  const T* end() const { return data_.data() + data_.size(); }
  T* row(std::size_t r) { return data_.data() + r * cols_; }
  const T* row(std::size_t r) const { return data_.data() + r * cols_; }

  bool same_shape(const BasicGrid& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  friend bool operator==(const BasicGrid& a, const BasicGrid& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

using Grid = BasicGrid<double>;
using Mask = BasicGrid<std::uint8_t>;

inline std::size_t count_true(const Mask& m) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < m.size(); ++i) n += m[i] ? 1 : 0;
  return n;
}

inline void require_same_shape(const Grid& a, const Grid& b, const char* what) {
  if (!a.same_shape(b)) throw std::invalid_argument(std::string(what) + ": size mismatch");
}

}  // namespace fpp
