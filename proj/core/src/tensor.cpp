#include "minr/tensor.hpp"

#include <cmath>
#include <string>

#include "fpenv.hpp"

namespace minr {

template <typename T>
Tensor2D<T>::Tensor2D(std::size_t rows, std::size_t cols, const std::vector<T>& data)
    : rows_(rows), cols_(cols), data_(data.begin(), data.end()) {
  require_shape(data_.size() == rows_ * cols_, "Tensor2D: data length must equal rows*cols");
}

template <typename T>
Tensor2D<T> Tensor2D<T>::from_rows(std::initializer_list<std::initializer_list<T>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r ? rows.begin()->size() : 0;
  std::vector<T> data;
  data.reserve(r * c);
  for (const auto& row : rows) {
    require_shape(row.size() == c, "Tensor2D::from_rows: ragged rows");
    data.insert(data.end(), row.begin(), row.end());
  }
  return Tensor2D(r, c, data);
}

template <typename T>
void Tensor2D<T>::resize(std::size_t rows, std::size_t cols) {
  rows_ = rows;
  cols_ = cols;
  data_.resize(rows * cols);
}

template <typename T>
void Tensor2D<T>::fill(T value) {
  std::fill(data_.begin(), data_.end(), value);
}

template <typename T>
bool Tensor2D<T>::all_finite() const {
  // x * 0 is NaN exactly when x is NaN or Inf, and NaN survives the sum.
  return std::isfinite((mat().array() * T(0)).sum());
}

template <typename T>
void require_finite(const Tensor2D<T>& t, const char* what) {
  if (!t.all_finite()) throw NumericError(std::string(what) + ": non-finite value");
}

void require_shape(bool ok, const char* what) {
  if (!ok) throw ShapeError(what);
}

template <typename T>
Tensor2D<T> matmul(const Tensor2D<T>& a, const Tensor2D<T>& b) {
  const detail::FlushSubnormals flush;
  require_shape(a.cols() == b.rows(), "matmul: a.cols must equal b.rows");
  Tensor2D<T> out(a.rows(), b.cols());
  if (a.cols() > 0) out.mat().noalias() = a.mat() * b.mat();
  require_finite(out, "matmul");
  return out;
}

template <typename T>
Tensor2D<T> transpose(const Tensor2D<T>& a) {
  Tensor2D<T> out(a.cols(), a.rows());
  out.mat() = a.mat().transpose();
  return out;
}

template class Tensor2D<float>;
template class Tensor2D<double>;
template void require_finite(const Tensor2D<float>&, const char*);
template void require_finite(const Tensor2D<double>&, const char*);
template Tensor2D<float> matmul(const Tensor2D<float>&, const Tensor2D<float>&);
template Tensor2D<double> matmul(const Tensor2D<double>&, const Tensor2D<double>&);
template Tensor2D<float> transpose(const Tensor2D<float>&);
template Tensor2D<double> transpose(const Tensor2D<double>&);

}  // namespace minr
