// SPDX-License-Identifier: Apache-2.0
#include "nre/core/tensor.hpp"

#include <cmath>
#include <functional>
#include <numeric>

#include "nre/core/error.hpp"

namespace nre {

std::string to_string(const Shape& shape) {
  std::string out = "(";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(shape[i]);
  }
  return out + ")";
}

std::size_t shape_size(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

template <typename T>
Tensor<T>::Tensor(Shape shape, T fill) : shape_(std::move(shape)), data_(shape_size(shape_), fill) {
  for (auto d : shape_) {
    if (d == 0) throw ShapeError("tensor dimensions must be positive, got " + to_string(shape_));
  }
}

template <typename T>
Tensor<T>::Tensor(Shape shape, std::vector<T> data) : Tensor(std::move(shape), AlignedVector<T>(data.begin(), data.end())) {}

template <typename T>
Tensor<T>::Tensor(Shape shape, AlignedVector<T> data) : shape_(std::move(shape)), data_(std::move(data)) {
  for (auto d : shape_) {
    if (d == 0) throw ShapeError("tensor dimensions must be positive, got " + to_string(shape_));
  }
  if (shape_size(shape_) != data_.size()) {
    throw ShapeError("shape " + to_string(shape_) + " does not match " + std::to_string(data_.size()) +
                     " values");
  }
}

template <typename T>
std::size_t Tensor<T>::dim(std::size_t axis) const {
  if (axis >= shape_.size()) throw ShapeError("axis out of range for shape " + to_string(shape_));
  return shape_[axis];
}

template <typename T>
std::size_t Tensor<T>::rows() const noexcept {
  if (shape_.empty()) return 0;
  return shape_.size() == 1 ? 1 : shape_[0];
}

template <typename T>
std::size_t Tensor<T>::cols() const noexcept {
  if (shape_.empty()) return 0;
  return shape_.size() == 1 ? shape_[0] : data_.size() / shape_[0];
}

template <typename T>
std::span<T> Tensor<T>::row(std::size_t r) noexcept {
  const auto c = cols();
  return std::span<T>(data_).subspan(r * c, c);
}

template <typename T>
std::span<const T> Tensor<T>::row(std::size_t r) const noexcept {
  const auto c = cols();
  return std::span<const T>(data_).subspan(r * c, c);
}

template <typename T>
Tensor<T> Tensor<T>::reshaped(Shape shape) const {
  return Tensor(std::move(shape), data_);
}

template <typename T>
Tensor<T> Tensor<T>::gather_rows(std::span<const std::size_t> indices) const {
  const auto c = cols();
  const auto n = rows();
  AlignedVector<T> out;
  out.reserve(indices.size() * c);
  for (auto i : indices) {
    if (i >= n) throw ShapeError("row index " + std::to_string(i) + " out of range");
    auto r = row(i);
    out.insert(out.end(), r.begin(), r.end());
  }
  Shape shape = shape_;
  if (shape.size() == 1) shape.insert(shape.begin(), 1);
  shape[0] = indices.size();
  return Tensor(std::move(shape), std::move(out));
}

template <typename T>
bool Tensor<T>::all_finite() const noexcept {
  for (auto v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

template <typename T>
void Tensor<T>::require_finite(const char* what) const {
  if (!all_finite()) throw NumericError(std::string("non-finite values in ") + what);
}

template class Tensor<float>;
template class Tensor<double>;

}  // namespace nre
