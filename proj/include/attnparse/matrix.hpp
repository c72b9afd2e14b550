#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace attnparse {

/// Dense row-major square matrix with 0-based indexing.
template <typename T>
class SquareMatrix {
 public:
  SquareMatrix() = default;
  explicit SquareMatrix(std::size_t size, T fill = T{}) : size_(size), data_(size * size, fill) {}
  SquareMatrix(std::size_t size, std::vector<T> data) : size_(size), data_(std::move(data)) {}

  std::size_t size() const noexcept { return size_; }

  T& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * size_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * size_ + c]; }

  std::span<T> row(std::size_t r) noexcept { return {data_.data() + r * size_, size_}; }
  std::span<const T> row(std::size_t r) const noexcept { return {data_.data() + r * size_, size_}; }

  std::span<const T> data() const noexcept { return data_; }

  friend bool operator==(const SquareMatrix&, const SquareMatrix&) = default;

 private:
  std::size_t size_ = 0;
  std::vector<T> data_;
};

}  // namespace attnparse
