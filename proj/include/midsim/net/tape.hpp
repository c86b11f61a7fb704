#pragma once

#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "midsim/core/tensor.hpp"

namespace midsim::net {

// Value + gradient pair. A null grad pointer means the value is a constant
// (rendered inputs, crafted memory) and upstream gradients stop there.
template <typename T>
struct Var {
  std::shared_ptr<Tensor<T>> val;
  std::shared_ptr<Tensor<T>> grad;

  Var() = default;

  static Var constant(Tensor<T> v) {
    Var out;
    out.val = std::make_shared<Tensor<T>>(std::move(v));
    return out;
  }

  static Var tracked(Tensor<T> v) {
    Var out;
    out.val = std::make_shared<Tensor<T>>(std::move(v));
    out.grad = std::make_shared<Tensor<T>>(out.val->c, out.val->h, out.val->w);
    return out;
  }

  Tensor<T>& value() const { return *val; }
  Tensor<T>& g() const { return *grad; }
  bool tracks() const { return grad != nullptr; }
  T scalar() const { return val->v[0]; }
};

// Reverse-mode tape: forward code records closures, backward() replays them
// in reverse. Closures run serially, so accumulation order is fixed.
template <typename T>
class Tape {
 public:
  void record(std::function<void()> op) { ops_.push_back(std::move(op)); }

  // Seeds d(loss)/d(loss) = 1 and propagates.
  void backward(const Var<T>& loss) {
    loss.g().v[0] = T(1);
    for (auto it = ops_.rbegin(); it != ops_.rend(); ++it) (*it)();
  }

  void clear() { ops_.clear(); }
  std::size_t size() const { return ops_.size(); }

 private:
  std::vector<std::function<void()>> ops_;
};

}  // namespace midsim::net
