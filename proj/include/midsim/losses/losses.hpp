#pragma once

#include <array>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "midsim/core/rng.hpp"
#include "midsim/geom/pose.hpp"
#include "midsim/net/model.hpp"
#include "midsim/raster/render.hpp"

namespace midsim::losses {

inline constexpr double kCeClip = 1e-7;

// The ten named loss terms, each summed over the unrolled steps.
struct LossBundle {
  double waypoint_ce = 0.0;
  double box_ce = 0.0;
  double heading_l1 = 0.0;
  double subpixel_l1 = 0.0;
  double speed_l1 = 0.0;
  double collision = 0.0;
  double onroad = 0.0;
  double geometry = 0.0;
  double objects_ce = 0.0;
  double road_ce = 0.0;

  static const std::array<const char*, 10>& term_names();
  double term(int i) const;
  double imitation_sum() const {
    return waypoint_ce + box_ce + heading_l1 + subpixel_l1 + speed_l1;
  }
  double environment_sum() const {
    return collision + onroad + geometry + objects_ce + road_ce;
  }
  bool finite() const;
};

enum class ModelId { M0, M1, M2, M3, M4 };

// Training configurations of the ablation ladder: imitation only, plus
// perturbations, plus environment losses, re-weighted imitation, and
// imitation dropout.
struct ModelConfig {
  ModelId id = ModelId::M0;
  double w_imit = 1.0;
  double w_env = 0.0;
  double imitation_dropout_prob = 0.0;
  bool use_perturbations = false;
  std::array<double, 10> term_multipliers{1.0, 1.0, 1.0, 1.0, 1.0,
                                          1.0, 1.0, 1.0, 1.0, 1.0};

  bool needs_env() const { return w_env != 0.0; }
  const char* name() const;
  static ModelConfig standard(ModelId id);
  static bool from_name(const std::string& s, ModelConfig* out);
};

// w_imit for one example: 1 unless imitation dropout zeroes it.
double draw_imitation_weight(const ModelConfig& cfg, Rng& rng);

// Plain-value combination (the training path re-derives the same weighted
// sum on the tape). Returns (loss, w_imit used).
std::pair<double, double> total_loss(const LossBundle& bundle,
                                     const ModelConfig& cfg,
                                     double example_weight, Rng& rng);

// ---- Tape-level loss terms ----

using net::Tape;
using net::Var;

template <typename T>
void check_finite(const Var<T>& v, const char* what) {
  if (!std::isfinite(static_cast<double>(v.scalar())))
    throw NonFiniteInput(std::string("non-finite ") + what);
}

// Cross entropy against a one-hot target: -log(clamp(P at (u,v))).
template <typename T>
Var<T> onehot_ce(Tape<T>& tape, const Var<T>& probs, int u, int v) {
  const T p = probs.value().at(0, v, u);
  const T pc = std::max(p, static_cast<T>(kCeClip));
  Var<T> loss = Var<T>::tracked(Tensor<T>(1, 1, 1));
  loss.value().v[0] = -std::log(pc);
  if (probs.tracks()) {
    tape.record([probs, loss, u, v, pc, p]() {
      if (p < static_cast<T>(kCeClip)) return;  // clamped: zero slope
      probs.g().at(0, v, u) += -loss.g().v[0] / pc;
    });
  }
  return loss;
}

// Mean binary cross entropy with clipped probabilities.
template <typename T>
Var<T> bce_mean(Tape<T>& tape, const Var<T>& probs, const Tensor<T>& target) {
  if (!probs.value().same_shape(target)) throw ShapeMismatch("bce shapes");
  const std::size_t n = target.size();
  const T lo = static_cast<T>(kCeClip);
  const T hi = T(1) - lo;
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const T pc = std::min(std::max(probs.value().v[i], lo), hi);
    const T t = target.v[i];
    acc += -static_cast<double>(t) * std::log(static_cast<double>(pc)) -
           (1.0 - static_cast<double>(t)) *
               std::log(1.0 - static_cast<double>(pc));
  }
  Var<T> loss = Var<T>::tracked(Tensor<T>(1, 1, 1));
  loss.value().v[0] = static_cast<T>(acc / static_cast<double>(n));
  if (probs.tracks()) {
    tape.record([probs, loss, target = target, lo, hi, n]() {
      const T g = loss.g().v[0] / static_cast<T>(n);
      T* dp = probs.g().data();
      const T* pv = probs.value().data();
      const T* tv = target.v.data();
      for (std::size_t i = 0; i < n; ++i) {
        if (pv[i] <= lo || pv[i] >= hi) continue;  // clamped: zero slope
        dp[i] += g * (pv[i] - tv[i]) / (pv[i] * (T(1) - pv[i]));
      }
    });
  }
  return loss;
}

// (1/WH) sum B .* mask, or B .* (1 - mask) with complement set.
template <typename T>
Var<T> overlap_mean(Tape<T>& tape, const Var<T>& b, const Tensor<T>& mask,
                    bool complement) {
  if (!b.value().same_shape(mask)) throw ShapeMismatch("overlap shapes");
  const std::size_t n = mask.size();
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double m = complement ? 1.0 - static_cast<double>(mask.v[i])
                                : static_cast<double>(mask.v[i]);
    acc += static_cast<double>(b.value().v[i]) * m;
  }
  Var<T> loss = Var<T>::tracked(Tensor<T>(1, 1, 1));
  loss.value().v[0] = static_cast<T>(acc / static_cast<double>(n));
  if (b.tracks()) {
    tape.record([b, loss, mask = mask, complement, n]() {
      const T g = loss.g().v[0] / static_cast<T>(n);
      T* db = b.g().data();
      const T* mv = mask.v.data();
      for (std::size_t i = 0; i < n; ++i)
        db[i] += g * (complement ? T(1) - mv[i] : mv[i]);
    });
  }
  return loss;
}

// |x[idx] - target|, optionally through the wrapped angular difference.
template <typename T>
Var<T> l1_component(Tape<T>& tape, const Var<T>& vec, int idx, double target,
                    bool wrap) {
  const double x = static_cast<double>(vec.value().v[idx]);
  const double d = wrap ? geom::wrap_angle(x - target) : x - target;
  Var<T> loss = Var<T>::tracked(Tensor<T>(1, 1, 1));
  loss.value().v[0] = static_cast<T>(std::abs(d));
  if (vec.tracks()) {
    const T slope = d > 0.0 ? T(1) : (d < 0.0 ? T(-1) : T(0));
    tape.record([vec, loss, idx, slope]() {
      vec.g().v[idx] += slope * loss.g().v[0];
    });
  }
  return loss;
}

// Weighted sum of scalar terms.
template <typename T>
Var<T> weighted_sum(Tape<T>& tape,
                    const std::vector<std::pair<Var<T>, double>>& terms) {
  Var<T> out = Var<T>::tracked(Tensor<T>(1, 1, 1));
  double acc = 0.0;
  for (const auto& [v, c] : terms) acc += static_cast<double>(v.scalar()) * c;
  out.value().v[0] = static_cast<T>(acc);
  tape.record([terms, out]() {
    for (const auto& [v, c] : terms)
      if (v.tracks()) v.g().v[0] += static_cast<T>(c) * out.g().v[0];
  });
  return out;
}

// ---- Per-example assembly ----

template <typename T>
struct ExampleLoss {
  Var<T> total;
  LossBundle bundle;
  double w_imit_used = 1.0;
};

// Builds every applicable term from a rollout and its targets. occupancy /
// road may be empty/untracked when the config has no environment weight.
template <typename T>
ExampleLoss<T> example_loss(Tape<T>& tape, const net::Rollout<T>& rollout,
                            const std::vector<Var<T>>& occupancy,
                            const Var<T>* road,
                            const raster::TargetStack& targets,
                            const ModelConfig& cfg, double example_weight,
                            double w_imit_draw);

extern template ExampleLoss<float> example_loss<float>(
    Tape<float>&, const net::Rollout<float>&, const std::vector<Var<float>>&,
    const Var<float>*, const raster::TargetStack&, const ModelConfig&, double,
    double);
extern template ExampleLoss<double> example_loss<double>(
    Tape<double>&, const net::Rollout<double>&,
    const std::vector<Var<double>>&, const Var<double>*,
    const raster::TargetStack&, const ModelConfig&, double, double);

// Single-plane slice of a stacked mask tensor, cast to T.
template <typename T>
Tensor<T> mask_plane(const TensorF& stack, int k) {
  Tensor<T> out(1, stack.h, stack.w);
  const float* src = stack.plane(k);
  for (int i = 0; i < stack.plane_size(); ++i)
    out.v[i] = static_cast<T>(src[i]);
  return out;
}

}  // namespace midsim::losses
