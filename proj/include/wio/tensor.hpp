#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <new>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "wio/errors.hpp"

namespace wio::ad {

using Shape = std::vector<std::size_t>;

std::string shape_to_string(const Shape& shape);

inline std::size_t shape_size(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>{});
}

/// Cache-line aligned storage. Eigen's vectorized reductions peel a different
/// number of leading scalars depending on the buffer address, so unaligned
/// buffers make float results vary from run to run.
template <typename S>
struct AlignedAllocator {
  using value_type = S;
  static constexpr std::align_val_t kAlignment{64};

  AlignedAllocator() = default;
  template <typename T>
  AlignedAllocator(const AlignedAllocator<T>&) noexcept {}

  S* allocate(std::size_t n) { return static_cast<S*>(::operator new(n * sizeof(S), kAlignment)); }
  void deallocate(S* p, std::size_t) noexcept { ::operator delete(p, kAlignment); }

  template <typename T>
  friend bool operator==(const AlignedAllocator&, const AlignedAllocator<T>&) noexcept {
    return true;
  }
};

/// Dense row-major n-dimensional array.
template <typename S>
class BasicTensor {
 public:
  using value_type = S;

  BasicTensor() = default;
  explicit BasicTensor(Shape shape, S fill = S(0))
      : shape_(std::move(shape)), data_(shape_size(shape_), fill) {}
  BasicTensor(Shape shape, const std::vector<S>& data)
      : BasicTensor(std::move(shape), Storage(data.begin(), data.end())) {}
  BasicTensor(Shape shape, std::span<const S> data)
      : BasicTensor(std::move(shape), Storage(data.begin(), data.end())) {}

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  S* data() noexcept { return data_.data(); }
  const S* data() const noexcept { return data_.data(); }
  std::span<S> values() noexcept { return data_; }
  std::span<const S> values() const noexcept { return data_; }

  S& operator[](std::size_t i) { return data_[i]; }
  const S& operator[](std::size_t i) const { return data_[i]; }

  void fill(S value) { std::fill(data_.begin(), data_.end(), value); }

  bool all_finite() const {
    for (S v : data_) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  }

  BasicTensor reshaped(Shape shape) const {
    if (shape_size(shape) != data_.size()) {
      throw Error(ErrorCode::shape_mismatch,
                  "cannot reshape " + shape_to_string(shape_) + " to " + shape_to_string(shape));
    }
    return BasicTensor(std::move(shape), Storage(data_));
  }

  template <typename T>
  BasicTensor<T> cast() const {
    return BasicTensor<T>(shape_, std::vector<T>(data_.begin(), data_.end()));
  }

  friend bool operator==(const BasicTensor&, const BasicTensor&) = default;

 private:
  using Storage = std::vector<S, AlignedAllocator<S>>;

  BasicTensor(Shape shape, Storage data) : shape_(std::move(shape)), data_(std::move(data)) {
    if (data_.size() != shape_size(shape_)) {
      throw Error(ErrorCode::shape_mismatch, "data length " + std::to_string(data_.size()) +
                                                 " does not match shape " + shape_to_string(shape_));
    }
  }

  Shape shape_;
  Storage data_;
};

using Tensor = BasicTensor<float>;

template <typename S>
struct NamedTensor {
  std::string name;
  BasicTensor<S> value;

  friend bool operator==(const NamedTensor&, const NamedTensor&) = default;
};

template <typename S>
using ParameterList = std::vector<NamedTensor<S>>;

}  // namespace wio::ad
