#pragma once

#include <cmath>
#include <vector>

#include "midsim/core/error.hpp"
#include "midsim/core/kernels.hpp"
#include "midsim/net/tape.hpp"

namespace midsim::net {

template <typename T>
std::vector<T>& conv_scratch() {
  thread_local std::vector<T> buf;
  return buf;
}
template <typename T>
std::vector<T>& conv_scratch2() {
  thread_local std::vector<T> buf;
  return buf;
}

// weight (cout, cin*kh*kw, 1), bias (cout, 1, 1). dweight/dbias may be null
// when parameter gradients are not wanted (inference).
template <typename T>
Var<T> conv2d(Tape<T>& tape, const Var<T>& x, const Tensor<T>& weight,
              const Tensor<T>& bias, Tensor<T>* dweight, Tensor<T>* dbias,
              int k, int stride) {
  const int cin = x.value().c;
  if (weight.h != cin * k * k)
    throw ShapeMismatch("conv2d weight does not match input channels");
  Tensor<T> out;
  std::vector<T> bias_vec(bias.v.begin(), bias.v.end());
  kernels::conv2d_forward(x.value(), weight, bias_vec, k, k, stride, out,
                          conv_scratch<T>());
  Var<T> y = Var<T>::tracked(std::move(out));
  tape.record([x, weight = &weight, dweight, dbias, y, k, stride]() {
    Tensor<T> dw_local;
    Tensor<T>* dw = dweight;
    if (dw == nullptr) {
      dw_local = Tensor<T>(weight->c, weight->h, 1);
      dw = &dw_local;
    }
    std::vector<T> db_vec(weight->c, T(0));
    Tensor<T> dx;
    kernels::conv2d_backward(x.value(), *weight, y.g(), k, k, stride, *dw,
                             db_vec, dx, conv_scratch<T>(), conv_scratch2<T>(),
                             /*need_dx=*/x.tracks());
    if (dbias != nullptr)
      for (int i = 0; i < dbias->c; ++i) dbias->v[i] += db_vec[i];
    if (x.tracks()) {
      T* xg = x.g().data();
      const T* d = dx.data();
      for (std::size_t i = 0; i < dx.size(); ++i) xg[i] += d[i];
    }
  });
  return y;
}

template <typename T>
Var<T> relu(Tape<T>& tape, const Var<T>& x) {
  Var<T> y = Var<T>::tracked(x.value());
  for (auto& v : y.value().v) v = v > T(0) ? v : T(0);
  if (x.tracks()) {
    tape.record([x, y]() {
      const T* xv = x.value().data();
      const T* dy = y.g().data();
      T* dx = x.g().data();
      for (std::size_t i = 0; i < x.value().size(); ++i)
        if (xv[i] > T(0)) dx[i] += dy[i];
    });
  }
  return y;
}

template <typename T>
Var<T> sigmoid(Tape<T>& tape, const Var<T>& x) {
  Var<T> y = Var<T>::tracked(x.value());
  for (auto& v : y.value().v) v = T(1) / (T(1) + std::exp(-v));
  if (x.tracks()) {
    tape.record([x, y]() {
      const T* yv = y.value().data();
      const T* dy = y.g().data();
      T* dx = x.g().data();
      for (std::size_t i = 0; i < y.value().size(); ++i)
        dx[i] += dy[i] * yv[i] * (T(1) - yv[i]);
    });
  }
  return y;
}

template <typename T>
Var<T> add(Tape<T>& tape, const Var<T>& a, const Var<T>& b) {
  if (!a.value().same_shape(b.value())) throw ShapeMismatch("add shapes");
  Var<T> y = Var<T>::tracked(a.value());
  const T* bv = b.value().data();
  for (std::size_t i = 0; i < y.value().size(); ++i) y.value().v[i] += bv[i];
  tape.record([a, b, y]() {
    const T* dy = y.g().data();
    if (a.tracks()) {
      T* da = a.g().data();
      for (std::size_t i = 0; i < y.value().size(); ++i) da[i] += dy[i];
    }
    if (b.tracks()) {
      T* db = b.g().data();
      for (std::size_t i = 0; i < y.value().size(); ++i) db[i] += dy[i];
    }
  });
  return y;
}

template <typename T>
Var<T> avgpool(Tape<T>& tape, const Var<T>& x, int r) {
  const Tensor<T>& xv = x.value();
  Tensor<T> out(xv.c, xv.h / r, xv.w / r);
  const T inv = T(1) / static_cast<T>(r * r);
  for (int c = 0; c < xv.c; ++c)
    for (int y = 0; y < out.h; ++y)
      for (int xc = 0; xc < out.w; ++xc) {
        T acc = T(0);
        for (int dy = 0; dy < r; ++dy)
          for (int dx = 0; dx < r; ++dx)
            acc += xv.at(c, y * r + dy, xc * r + dx);
        out.at(c, y, xc) = acc * inv;
      }
  Var<T> yv = Var<T>::tracked(std::move(out));
  if (x.tracks()) {
    tape.record([x, yv, r, inv]() {
      Tensor<T>& dx = x.g();
      const Tensor<T>& dy = yv.g();
      for (int c = 0; c < dy.c; ++c)
        for (int y = 0; y < dy.h; ++y)
          for (int xc = 0; xc < dy.w; ++xc) {
            const T g = dy.at(c, y, xc) * inv;
            for (int py = 0; py < r; ++py)
              for (int px = 0; px < r; ++px)
                dx.at(c, y * r + py, xc * r + px) += g;
          }
    });
  }
  return yv;
}

template <typename T>
Var<T> upsample_nearest(Tape<T>& tape, const Var<T>& x, int r) {
  const Tensor<T>& xv = x.value();
  Tensor<T> out(xv.c, xv.h * r, xv.w * r);
  for (int c = 0; c < xv.c; ++c)
    for (int y = 0; y < out.h; ++y)
      for (int xc = 0; xc < out.w; ++xc)
        out.at(c, y, xc) = xv.at(c, y / r, xc / r);
  Var<T> yv = Var<T>::tracked(std::move(out));
  if (x.tracks()) {
    tape.record([x, yv, r]() {
      Tensor<T>& dx = x.g();
      const Tensor<T>& dy = yv.g();
      for (int c = 0; c < dy.c; ++c)
        for (int y = 0; y < dy.h; ++y)
          for (int xc = 0; xc < dy.w; ++xc)
            dx.at(c, y / r, xc / r) += dy.at(c, y, xc);
    });
  }
  return yv;
}

// (c0*r*r, h, w) -> (c0, h*r, w*r); out[c, y*r+dy, x*r+dx] comes from
// channel c*r*r + dy*r + dx.
template <typename T>
Var<T> pixel_shuffle(Tape<T>& tape, const Var<T>& x, int r) {
  const Tensor<T>& xv = x.value();
  if (xv.c % (r * r) != 0) throw ShapeMismatch("pixel_shuffle channels");
  const int c0 = xv.c / (r * r);
  Tensor<T> out(c0, xv.h * r, xv.w * r);
  for (int c = 0; c < c0; ++c)
    for (int y = 0; y < xv.h; ++y)
      for (int xc = 0; xc < xv.w; ++xc)
        for (int dy = 0; dy < r; ++dy)
          for (int dx = 0; dx < r; ++dx)
            out.at(c, y * r + dy, xc * r + dx) =
                xv.at(c * r * r + dy * r + dx, y, xc);
  Var<T> yv = Var<T>::tracked(std::move(out));
  if (x.tracks()) {
    tape.record([x, yv, r, c0]() {
      Tensor<T>& dx = x.g();
      const Tensor<T>& dy = yv.g();
      const Tensor<T>& xval = x.value();
      for (int c = 0; c < c0; ++c)
        for (int y = 0; y < xval.h; ++y)
          for (int xc = 0; xc < xval.w; ++xc)
            for (int py = 0; py < r; ++py)
              for (int px = 0; px < r; ++px)
                dx.at(c * r * r + py * r + px, y, xc) +=
                    dy.at(c, y * r + py, xc * r + px);
    });
  }
  return yv;
}

template <typename T>
Var<T> concat(Tape<T>& tape, const std::vector<Var<T>>& xs) {
  int c_total = 0;
  for (const auto& x : xs) c_total += x.value().c;
  const int h = xs.front().value().h;
  const int w = xs.front().value().w;
  Tensor<T> out(c_total, h, w);
  int c_off = 0;
  for (const auto& x : xs) {
    if (x.value().h != h || x.value().w != w)
      throw ShapeMismatch("concat spatial dims");
    std::copy(x.value().v.begin(), x.value().v.end(),
              out.plane(c_off));
    c_off += x.value().c;
  }
  Var<T> y = Var<T>::tracked(std::move(out));
  tape.record([xs, y]() {
    int off = 0;
    for (const auto& x : xs) {
      const int n = x.value().c * x.value().h * x.value().w;
      if (x.tracks()) {
        const T* dy = y.g().plane(off);
        T* dx = x.g().data();
        for (int i = 0; i < n; ++i) dx[i] += dy[i];
      }
      off += x.value().c;
    }
  });
  return y;
}

// Takes channel [c_lo, c_lo+count) as a view copy.
template <typename T>
Var<T> slice_channels(Tape<T>& tape, const Var<T>& x, int c_lo, int count) {
  const Tensor<T>& xv = x.value();
  Tensor<T> out(count, xv.h, xv.w);
  std::copy(xv.plane(c_lo), xv.plane(c_lo) + out.size(), out.data());
  Var<T> y = Var<T>::tracked(std::move(out));
  if (x.tracks()) {
    tape.record([x, y, c_lo]() {
      T* dx = x.g().plane(c_lo);
      const T* dy = y.g().data();
      for (std::size_t i = 0; i < y.value().size(); ++i) dx[i] += dy[i];
    });
  }
  return y;
}

// weight (out, in, 1), bias (out, 1, 1); x is flattened.
template <typename T>
Var<T> fc(Tape<T>& tape, const Var<T>& x, const Tensor<T>& weight,
          const Tensor<T>& bias, Tensor<T>* dweight, Tensor<T>* dbias) {
  const int in = static_cast<int>(x.value().size());
  if (weight.h != in) throw ShapeMismatch("fc weight does not match input");
  const int out_n = weight.c;
  Tensor<T> out(out_n, 1, 1);
  for (int o = 0; o < out_n; ++o) {
    const T* wrow = weight.data() + static_cast<std::size_t>(o) * in;
    T acc = bias.v[o];
    for (int i = 0; i < in; ++i) acc += wrow[i] * x.value().v[i];
    out.v[o] = acc;
  }
  Var<T> y = Var<T>::tracked(std::move(out));
  tape.record([x, y, weight = &weight, dweight, dbias, in, out_n]() {
    const T* dy = y.g().data();
    for (int o = 0; o < out_n; ++o) {
      const T g = dy[o];
      if (g == T(0)) continue;
      const T* wrow = weight->data() + static_cast<std::size_t>(o) * in;
      if (dweight != nullptr) {
        T* dwrow = dweight->data() + static_cast<std::size_t>(o) * in;
        const T* xv = x.value().data();
        for (int i = 0; i < in; ++i) dwrow[i] += g * xv[i];
      }
      if (dbias != nullptr) dbias->v[o] += g;
      if (x.tracks()) {
        T* dx = x.g().data();
        for (int i = 0; i < in; ++i) dx[i] += g * wrow[i];
      }
    }
  });
  return y;
}

// size x size patch centered at (cy, cx), zero padded at the borders.
template <typename T>
Var<T> gather_patch(Tape<T>& tape, const Var<T>& x, int cy, int cx, int size) {
  const Tensor<T>& xv = x.value();
  const int half = size / 2;
  Tensor<T> out(xv.c, size, size);
  for (int c = 0; c < xv.c; ++c)
    for (int py = 0; py < size; ++py)
      for (int px = 0; px < size; ++px) {
        const int sy = cy - half + py;
        const int sx = cx - half + px;
        if (sy >= 0 && sy < xv.h && sx >= 0 && sx < xv.w)
          out.at(c, py, px) = xv.at(c, sy, sx);
      }
  Var<T> y = Var<T>::tracked(std::move(out));
  if (x.tracks()) {
    tape.record([x, y, cy, cx, size, half]() {
      Tensor<T>& dx = x.g();
      const Tensor<T>& dy = y.g();
      for (int c = 0; c < dx.c; ++c)
        for (int py = 0; py < size; ++py)
          for (int px = 0; px < size; ++px) {
            const int sy = cy - half + py;
            const int sx = cx - half + px;
            if (sy >= 0 && sy < dx.h && sx >= 0 && sx < dx.w)
              dx.at(c, sy, sx) += dy.at(c, py, px);
          }
    });
  }
  return y;
}

// Softmax over all pixels of a single-channel logit image.
template <typename T>
Var<T> spatial_softmax(Tape<T>& tape, const Var<T>& logits) {
  const Tensor<T>& lv = logits.value();
  if (lv.c != 1) throw ShapeMismatch("spatial_softmax expects one channel");
  Tensor<T> out(1, lv.h, lv.w);
  T max_logit = lv.v[0];
  for (T v : lv.v) max_logit = std::max(max_logit, v);
  T sum = T(0);
  for (std::size_t i = 0; i < lv.size(); ++i) {
    out.v[i] = std::exp(lv.v[i] - max_logit);
    sum += out.v[i];
  }
  const T inv = T(1) / sum;
  for (auto& v : out.v) v *= inv;
  Var<T> y = Var<T>::tracked(std::move(out));
  if (logits.tracks()) {
    tape.record([logits, y]() {
      const T* p = y.value().data();
      const T* dp = y.g().data();
      T dot = T(0);
      for (std::size_t i = 0; i < y.value().size(); ++i) dot += p[i] * dp[i];
      T* dl = logits.g().data();
      for (std::size_t i = 0; i < y.value().size(); ++i)
        dl[i] += p[i] * (dp[i] - dot);
    });
  }
  return y;
}

// Sigmoid on components [0, n_sigmoid), identity on the rest. Used by the
// meta head: subpixel outputs live in (0,1), heading and speed are raw.
template <typename T>
Var<T> partial_sigmoid(Tape<T>& tape, const Var<T>& x, int n_sigmoid) {
  Var<T> y = Var<T>::tracked(x.value());
  for (int i = 0; i < n_sigmoid; ++i)
    y.value().v[i] = T(1) / (T(1) + std::exp(-y.value().v[i]));
  if (x.tracks()) {
    tape.record([x, y, n_sigmoid]() {
      const T* yv = y.value().data();
      const T* dy = y.g().data();
      T* dx = x.g().data();
      for (std::size_t i = 0; i < y.value().size(); ++i) {
        if (static_cast<int>(i) < n_sigmoid)
          dx[i] += dy[i] * yv[i] * (T(1) - yv[i]);
        else
          dx[i] += dy[i];
      }
    });
  }
  return y;
}

}  // namespace midsim::net
