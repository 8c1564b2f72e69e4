#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <string>

#include "mcl/core/error.hpp"

namespace mcl {

// Dense row-major shape, rank <= 5 ([N,C,T,H,W] is the largest layout used).
class Shape {
 public:
  static constexpr int kMaxRank = 5;

  Shape() = default;
  Shape(std::initializer_list<int64_t> dims) {
    if (static_cast<int>(dims.size()) > kMaxRank) throw ShapeError("shape rank > 5");
    for (int64_t d : dims) d_[rank_++] = d;
  }

  int rank() const { return rank_; }
  int64_t operator[](int i) const { return d_[i]; }
  int64_t& operator[](int i) { return d_[i]; }

  int64_t numel() const {
    int64_t n = 1;
    for (int i = 0; i < rank_; ++i) n *= d_[i];
    return n;
  }

  bool operator==(const Shape& o) const {
    if (rank_ != o.rank_) return false;
    for (int i = 0; i < rank_; ++i)
      if (d_[i] != o.d_[i]) return false;
    return true;
  }
  bool operator!=(const Shape& o) const { return !(*this == o); }

  std::string str() const {
    std::string s = "[";
    for (int i = 0; i < rank_; ++i) {
      if (i) s += ",";
      s += std::to_string(d_[i]);
    }
    return s + "]";
  }

 private:
  std::array<int64_t, kMaxRank> d_{};
  int rank_ = 0;
};

}  // namespace mcl
