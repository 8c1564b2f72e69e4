#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <vector>

#include "mcl/core/shape.hpp"

namespace mcl {

// Dense row-major tensor with shared storage. Graph code treats tensors as
// immutable once published; call mutable_data() only on freshly built ones.
template <typename T>
class Tensor {
 public:
  Tensor() : shape_{}, data_(std::make_shared<std::vector<T>>()) {}

  explicit Tensor(Shape shape)
      : shape_(shape), data_(std::make_shared<std::vector<T>>(shape.numel(), T(0))) {}

  Tensor(Shape shape, std::vector<T> values)
      : shape_(shape), data_(std::make_shared<std::vector<T>>(std::move(values))) {
    if (static_cast<int64_t>(data_->size()) != shape_.numel())
      throw ShapeError("tensor data size does not match shape " + shape_.str());
  }

  static Tensor full(Shape shape, T v) {
    Tensor t(shape);
    std::fill(t.mutable_data(), t.mutable_data() + t.numel(), v);
    return t;
  }
  static Tensor zeros(Shape shape) { return Tensor(shape); }
  static Tensor ones(Shape shape) { return full(shape, T(1)); }
  static Tensor scalar(T v) { return full(Shape{1}, v); }

  const Shape& shape() const { return shape_; }
  int64_t numel() const { return shape_.numel(); }
  int64_t dim(int i) const { return shape_[i]; }
  int rank() const { return shape_.rank(); }

  const T* data() const { return data_->data(); }
  T* mutable_data() { return data_->data(); }

  T operator[](int64_t i) const { return (*data_)[i]; }
  T& operator[](int64_t i) { return (*data_)[i]; }

  // Same storage, new shape. numel must match.
  Tensor reshaped(Shape s) const {
    if (s.numel() != shape_.numel())
      throw ShapeError("reshape " + shape_.str() + " -> " + s.str());
    Tensor t;
    t.shape_ = s;
    t.data_ = data_;
    return t;
  }

  Tensor clone() const {
    Tensor t;
    t.shape_ = shape_;
    t.data_ = std::make_shared<std::vector<T>>(*data_);
    return t;
  }

  template <typename U>
  Tensor<U> cast() const {
    Tensor<U> t{shape_};
    const T* s = data();
    U* d = t.mutable_data();
    for (int64_t i = 0; i < numel(); ++i) d[i] = static_cast<U>(s[i]);
    return t;
  }

  bool all_finite() const {
    const T* p = data();
    for (int64_t i = 0; i < numel(); ++i)
      if (!std::isfinite(static_cast<double>(p[i]))) return false;
    return true;
  }

 private:
  template <typename U>
  friend class Tensor;
  Shape shape_;
  std::shared_ptr<std::vector<T>> data_;
};

using TensorF = Tensor<float>;
using TensorD = Tensor<double>;

}  // namespace mcl
