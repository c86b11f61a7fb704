#pragma once

#include <cassert>
#include <cstddef>
#include <vector>

namespace midsim {

// Dense row-major (channel, row, column) buffer. Rows are the raster v axis,
// columns the u axis.
template <typename T>
struct Tensor {
  int c = 0, h = 0, w = 0;
  std::vector<T> v;

  Tensor() = default;
  Tensor(int c_, int h_, int w_)
      : c(c_), h(h_), w(w_), v(static_cast<std::size_t>(c_) * h_ * w_, T(0)) {}

  std::size_t size() const { return v.size(); }
  int plane_size() const { return h * w; }

  T* data() { return v.data(); }
  const T* data() const { return v.data(); }

  T* plane(int ci) { return v.data() + static_cast<std::size_t>(ci) * h * w; }
  const T* plane(int ci) const {
    return v.data() + static_cast<std::size_t>(ci) * h * w;
  }

  T& at(int ci, int y, int x) {
    assert(ci >= 0 && ci < c && y >= 0 && y < h && x >= 0 && x < w);
    return v[(static_cast<std::size_t>(ci) * h + y) * w + x];
  }
  T at(int ci, int y, int x) const {
    assert(ci >= 0 && ci < c && y >= 0 && y < h && x >= 0 && x < w);
    return v[(static_cast<std::size_t>(ci) * h + y) * w + x];
  }

  void zero() { std::fill(v.begin(), v.end(), T(0)); }

  bool same_shape(const Tensor& o) const {
    return c == o.c && h == o.h && w == o.w;
  }

  template <typename U>
  Tensor<U> cast() const {
    Tensor<U> out(c, h, w);
    for (std::size_t i = 0; i < v.size(); ++i)
      out.v[i] = static_cast<U>(v[i]);
    return out;
  }
};

using TensorF = Tensor<float>;
using TensorD = Tensor<double>;

}  // namespace midsim
