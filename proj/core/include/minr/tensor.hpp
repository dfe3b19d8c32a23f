#pragma once

#include <cstddef>
#include <new>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "minr/error.hpp"

namespace minr {

// Eigen peels vectorized loops according to the address of the data, so the
// summation order (and the low bits of results) would otherwise depend on
// where the allocator happened to place a buffer.
template <typename T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::align_val_t alignment{64};

  AlignedAllocator() = default;
  template <typename U>
  AlignedAllocator(const AlignedAllocator<U>&) {}

  T* allocate(std::size_t n) { return static_cast<T*>(::operator new(n * sizeof(T), alignment)); }
  void deallocate(T* p, std::size_t) { ::operator delete(p, alignment); }

  template <typename U>
  bool operator==(const AlignedAllocator<U>&) const {
    return true;
  }
};

// Dense row-major matrix. Activations are stored feature-major: one row per
// feature, one column per coordinate in the batch.
template <typename T>
class Tensor2D {
 public:
  using Scalar = T;
  using EigenMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using Map = Eigen::Map<EigenMat>;
  using ConstMap = Eigen::Map<const EigenMat>;

  Tensor2D() = default;
  Tensor2D(std::size_t rows, std::size_t cols, T fill = T(0))
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Tensor2D(std::size_t rows, std::size_t cols, const std::vector<T>& data);

  static Tensor2D from_rows(std::initializer_list<std::initializer_list<T>> rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  T operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }
  std::span<T> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const T> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  Map mat() { return Map(data_.data(), Eigen::Index(rows_), Eigen::Index(cols_)); }
  ConstMap mat() const { return ConstMap(data_.data(), Eigen::Index(rows_), Eigen::Index(cols_)); }

  // Reshapes without preserving contents; keeps capacity for reuse.
  void resize(std::size_t rows, std::size_t cols);
  void fill(T value);
  bool all_finite() const;

  template <typename U>
  Tensor2D<U> cast() const {
    Tensor2D<U> out(rows_, cols_);
    for (std::size_t i = 0; i < data_.size(); ++i) out.data()[i] = static_cast<U>(data_[i]);
    return out;
  }

  bool operator==(const Tensor2D& other) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T, AlignedAllocator<T>> data_;
};

using Tensor2Df = Tensor2D<float>;
using Tensor2Dd = Tensor2D<double>;

// Throws NumericError naming `what` if t holds a NaN or Inf.
template <typename T>
void require_finite(const Tensor2D<T>& t, const char* what);

void require_shape(bool ok, const char* what);

template <typename T>
Tensor2D<T> matmul(const Tensor2D<T>& a, const Tensor2D<T>& b);

template <typename T>
Tensor2D<T> transpose(const Tensor2D<T>& a);

extern template class Tensor2D<float>;
extern template class Tensor2D<double>;

}  // namespace minr
