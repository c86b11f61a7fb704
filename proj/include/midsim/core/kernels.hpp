#pragma once

#include <cstddef>
#include <vector>

#include "midsim/core/tensor.hpp"

// Dense compute kernels. The OpenMP variants in midsim::kernels parallelize
// only over disjoint output slices and keep every per-element accumulation
// order fixed, so results are bit-identical for any thread count. The plain
// loop twins in midsim::kernels::serial are kept as the reference
// implementation for tests and the kernel benchmark.

namespace midsim::kernels {

// C[M x N] (+)= A[M x K] * B[K x N], all row-major.
template <typename T>
void gemm(int M, int N, int K, const T* A, const T* B, T* C,
          bool accumulate) {
#pragma omp parallel for schedule(static)
  for (int m = 0; m < M; ++m) {
    T* c = C + static_cast<std::size_t>(m) * N;
    if (!accumulate)
      for (int n = 0; n < N; ++n) c[n] = T(0);
    const T* a = A + static_cast<std::size_t>(m) * K;
    for (int k = 0; k < K; ++k) {
      const T av = a[k];
      const T* b = B + static_cast<std::size_t>(k) * N;
#pragma omp simd
      for (int n = 0; n < N; ++n) c[n] += av * b[n];
    }
  }
}

// C[M x N] (+)= A[M x K] * B^T where B is [N x K] row-major (dot-product
// form; both operand rows are contiguous).
template <typename T>
void gemm_bt(int M, int N, int K, const T* A, const T* B, T* C,
             bool accumulate) {
#pragma omp parallel for schedule(static)
  for (int m = 0; m < M; ++m) {
    const T* a = A + static_cast<std::size_t>(m) * K;
    T* c = C + static_cast<std::size_t>(m) * N;
    for (int n = 0; n < N; ++n) {
      const T* b = B + static_cast<std::size_t>(n) * K;
      T acc = T(0);
#pragma omp simd reduction(+ : acc)
      for (int k = 0; k < K; ++k) acc += a[k] * b[k];
      c[n] = accumulate ? c[n] + acc : acc;
    }
  }
}

inline int conv_out_dim(int in, int k, int stride, int pad) {
  return (in + 2 * pad - k) / stride + 1;
}

// Unfolds x into cols[(cin*kh*kw) x (oh*ow)].
template <typename T>
void im2col(const Tensor<T>& x, int kh, int kw, int stride, int pad,
            std::vector<T>& cols) {
  const int oh = conv_out_dim(x.h, kh, stride, pad);
  const int ow = conv_out_dim(x.w, kw, stride, pad);
  const std::size_t rows = static_cast<std::size_t>(x.c) * kh * kw;
  cols.assign(rows * oh * ow, T(0));
#pragma omp parallel for schedule(static)
  for (int ci = 0; ci < x.c; ++ci) {
    const T* xp = x.plane(ci);
    for (int ky = 0; ky < kh; ++ky) {
      for (int kx = 0; kx < kw; ++kx) {
        T* col = cols.data() +
                 ((static_cast<std::size_t>(ci) * kh + ky) * kw + kx) * oh * ow;
        for (int oy = 0; oy < oh; ++oy) {
          const int iy = oy * stride + ky - pad;
          T* dst = col + static_cast<std::size_t>(oy) * ow;
          if (iy < 0 || iy >= x.h) continue;  // row stays zero
          const T* src = xp + static_cast<std::size_t>(iy) * x.w;
          for (int ox = 0; ox < ow; ++ox) {
            const int ix = ox * stride + kx - pad;
            if (ix >= 0 && ix < x.w) dst[ox] = src[ix];
          }
        }
      }
    }
  }
}

// Weights are (cout, cin*kh*kw) flattened row-major; pad = k/2 ("same" at
// stride 1). `cols` is caller-provided scratch.
template <typename T>
void conv2d_forward(const Tensor<T>& x, const Tensor<T>& weight,
                    const std::vector<T>& bias, int kh, int kw, int stride,
                    Tensor<T>& out, std::vector<T>& cols) {
  const int pad = kh / 2;
  const int oh = conv_out_dim(x.h, kh, stride, pad);
  const int ow = conv_out_dim(x.w, kw, stride, pad);
  const int cout = weight.c;
  const int K = x.c * kh * kw;
  out = Tensor<T>(cout, oh, ow);
  im2col(x, kh, kw, stride, pad, cols);
  gemm(cout, oh * ow, K, weight.data(), cols.data(), out.data(), false);
#pragma omp parallel for schedule(static)
  for (int co = 0; co < cout; ++co) {
    T* p = out.plane(co);
    const T b = bias[co];
#pragma omp simd
    for (int i = 0; i < oh * ow; ++i) p[i] += b;
  }
}

// Accumulates dW/db, overwrites dx. Recomputes im2col(x) internally.
template <typename T>
void conv2d_backward(const Tensor<T>& x, const Tensor<T>& weight,
                     const Tensor<T>& dy, int kh, int kw, int stride,
                     Tensor<T>& dweight, std::vector<T>& dbias, Tensor<T>& dx,
                     std::vector<T>& cols, std::vector<T>& dcols,
                     bool need_dx = true) {
  const int pad = kh / 2;
  const int oh = dy.h, ow = dy.w;
  const int cout = weight.c;
  const int K = x.c * kh * kw;
  const int P = oh * ow;

  im2col(x, kh, kw, stride, pad, cols);
  // dW += dy * cols^T
  gemm_bt(cout, K, P, dy.data(), cols.data(), dweight.data(), true);
  // db += row sums of dy
  for (int co = 0; co < cout; ++co) {
    const T* p = dy.plane(co);
    T acc = T(0);
    for (int i = 0; i < P; ++i) acc += p[i];
    dbias[co] += acc;
  }
  if (!need_dx) return;
  // dcols = W^T * dy  (parallel over the K rows of dcols)
  dcols.assign(static_cast<std::size_t>(K) * P, T(0));
#pragma omp parallel for schedule(static)
  for (int k = 0; k < K; ++k) {
    T* drow = dcols.data() + static_cast<std::size_t>(k) * P;
    for (int co = 0; co < cout; ++co) {
      const T wv = weight.data()[static_cast<std::size_t>(co) * K + k];
      const T* dyp = dy.plane(co);
#pragma omp simd
      for (int i = 0; i < P; ++i) drow[i] += wv * dyp[i];
    }
  }
  // col2im scatter (parallel over input channels; writes are disjoint)
  dx = Tensor<T>(x.c, x.h, x.w);
#pragma omp parallel for schedule(static)
  for (int ci = 0; ci < x.c; ++ci) {
    T* dxp = dx.plane(ci);
    for (int ky = 0; ky < kh; ++ky) {
      for (int kx = 0; kx < kw; ++kx) {
        const T* drow =
            dcols.data() +
            ((static_cast<std::size_t>(ci) * kh + ky) * kw + kx) * P;
        for (int oy = 0; oy < oh; ++oy) {
          const int iy = oy * stride + ky - pad;
          if (iy < 0 || iy >= x.h) continue;
          for (int ox = 0; ox < ow; ++ox) {
            const int ix = ox * stride + kx - pad;
            if (ix >= 0 && ix < x.w)
              dxp[static_cast<std::size_t>(iy) * x.w + ix] +=
                  drow[static_cast<std::size_t>(oy) * ow + ox];
          }
        }
      }
    }
  }
}

namespace serial {

// Direct nested-loop convolution; no unfolding, no OpenMP.
template <typename T>
void conv2d_forward(const Tensor<T>& x, const Tensor<T>& weight,
                    const std::vector<T>& bias, int kh, int kw, int stride,
                    Tensor<T>& out) {
  const int pad = kh / 2;
  const int oh = conv_out_dim(x.h, kh, stride, pad);
  const int ow = conv_out_dim(x.w, kw, stride, pad);
  const int cout = weight.c;
  out = Tensor<T>(cout, oh, ow);
  for (int co = 0; co < cout; ++co) {
    const T* wrow = weight.data() + static_cast<std::size_t>(co) * x.c * kh * kw;
    for (int oy = 0; oy < oh; ++oy) {
      for (int ox = 0; ox < ow; ++ox) {
        T acc = bias[co];
        for (int ci = 0; ci < x.c; ++ci) {
          for (int ky = 0; ky < kh; ++ky) {
            const int iy = oy * stride + ky - pad;
            if (iy < 0 || iy >= x.h) continue;
            for (int kx = 0; kx < kw; ++kx) {
              const int ix = ox * stride + kx - pad;
              if (ix < 0 || ix >= x.w) continue;
              acc += wrow[(ci * kh + ky) * kw + kx] * x.at(ci, iy, ix);
            }
          }
        }
        out.at(co, oy, ox) = acc;
      }
    }
  }
}

template <typename T>
void conv2d_backward(const Tensor<T>& x, const Tensor<T>& weight,
                     const Tensor<T>& dy, int kh, int kw, int stride,
                     Tensor<T>& dweight, std::vector<T>& dbias,
                     Tensor<T>& dx) {
  const int pad = kh / 2;
  const int cout = weight.c;
  dx = Tensor<T>(x.c, x.h, x.w);
  for (int co = 0; co < cout; ++co) {
    const T* wrow = weight.data() + static_cast<std::size_t>(co) * x.c * kh * kw;
    T* dwrow =
        dweight.data() + static_cast<std::size_t>(co) * x.c * kh * kw;
    for (int oy = 0; oy < dy.h; ++oy) {
      for (int ox = 0; ox < dy.w; ++ox) {
        const T g = dy.at(co, oy, ox);
        dbias[co] += g;
        for (int ci = 0; ci < x.c; ++ci) {
          for (int ky = 0; ky < kh; ++ky) {
            const int iy = oy * stride + ky - pad;
            if (iy < 0 || iy >= x.h) continue;
            for (int kx = 0; kx < kw; ++kx) {
              const int ix = ox * stride + kx - pad;
              if (ix < 0 || ix >= x.w) continue;
              dwrow[(ci * kh + ky) * kw + kx] += g * x.at(ci, iy, ix);
              dx.at(ci, iy, ix) += g * wrow[(ci * kh + ky) * kw + kx];
            }
          }
        }
      }
    }
  }
}

template <typename T>
void gemm(int M, int N, int K, const T* A, const T* B, T* C,
          bool accumulate) {
  for (int m = 0; m < M; ++m) {
    for (int n = 0; n < N; ++n) {
      T acc = accumulate ? C[static_cast<std::size_t>(m) * N + n] : T(0);
      for (int k = 0; k < K; ++k)
        acc += A[static_cast<std::size_t>(m) * K + k] *
               B[static_cast<std::size_t>(k) * N + n];
      C[static_cast<std::size_t>(m) * N + n] = acc;
    }
  }
}

}  // namespace serial

}  // namespace midsim::kernels
