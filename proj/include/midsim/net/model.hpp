#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "midsim/geom/frame.hpp"
#include "midsim/geom/pose.hpp"
#include "midsim/net/layers.hpp"
#include "midsim/net/tape.hpp"
#include "midsim/raster/render_config.hpp"

namespace midsim::net {

// Layer widths of the trainable stack. The encoder runs at stride 4 with
// two additive skips and a pooled context branch that pushes the receptive
// field past the image size; the recurrent decoders run at stride 2 and
// upsample their logits by pixel shuffle.
struct ArchConfig {
  int input_channels = 19;
  int height = 64;
  int width = 64;
  int n_steps = 10;

  int f1 = 16, f2 = 24, f3 = 24, f4 = 32, f5 = 32, f6 = 32;
  int reduce_ch = 8;
  int dec1 = 16, dec2 = 16;
  int meta_hidden = 32;
  int patch = 5;
  int occ1 = 12;
  int road1 = 16;

  std::uint64_t hash() const;

  // Receptive field of one feature cell in input pixels, from the layer
  // arithmetic (kernel 3, strides 1,2,1,2,1,1, then a 4x pooled context
  // conv at stride 16).
  static constexpr int kTrunkReceptiveField = 29;
  static constexpr int kContextReceptiveField = 29 + 3 * 4 + 2 * 16;

  static ArchConfig for_render(const raster::RenderConfig& cfg);
  // Reduced widths for the 16x16 finite-difference checks.
  static ArchConfig tiny();
};

template <typename T>
struct NetParams {
  ArchConfig arch;
  std::vector<std::string> names;
  std::vector<Tensor<T>> values;

  int index_of(const std::string& name) const;
  Tensor<T>& at(const std::string& name);
  const Tensor<T>& at(const std::string& name) const;
  std::size_t total_scalars() const;

  void init(std::uint64_t seed);

  template <typename U>
  NetParams<U> cast() const {
    NetParams<U> out;
    out.arch = arch;
    out.names = names;
    out.values.reserve(values.size());
    for (const auto& t : values) out.values.push_back(t.template cast<U>());
    return out;
  }
};

template <typename T>
using GradBuf = std::vector<Tensor<T>>;

template <typename T>
GradBuf<T> make_grad_buf(const NetParams<T>& params) {
  GradBuf<T> g;
  g.reserve(params.values.size());
  for (const auto& t : params.values) g.emplace_back(t.c, t.h, t.w);
  return g;
}

enum class RolloutMode { Argmax, Sample, ConstrainedSample };

template <typename T>
struct StepOutput {
  Var<T> waypoint_probs;  // (1,H,W), sums to 1
  Var<T> box_probs;       // (1,H,W) in (0,1)
  Var<T> meta;            // (4,1,1): du, dv in (0,1); theta; speed
  int coarse_u = 0;
  int coarse_v = 0;
};

template <typename T>
struct Rollout {
  std::vector<StepOutput<T>> steps;
  Tensor<T> memory;  // M_N
  geom::Trajectory world_trajectory;
};

// Shared convolutional feature stack.
template <typename T>
Var<T> feature_forward(Tape<T>& tape, const Var<T>& input,
                       const NetParams<T>& params, GradBuf<T>* grads);

// One recurrent waypoint step k (1-based), exposed for unit tests; rollouts
// use unroll().
template <typename T>
StepOutput<T> waypoint_step(Tape<T>& tape, int k, const Var<T>& features_up,
                            const Tensor<T>& memory, const Var<T>& box_prev,
                            const NetParams<T>& params, GradBuf<T>* grads);

// memory(1,H,W) += 1 at (u, v). Throws OutOfRange outside the image.
template <typename T>
void memory_update(Tensor<T>& memory, int u, int v);

// Row-major argmax with strict improvement: ties resolve to the lowest v,
// then the lowest u. Returns (u, v).
template <typename T>
std::pair<int, int> argmax_pixel(const Tensor<T>& img);

// Full recurrent rollout from M_0 = 0, B_0 = the rendered current agent
// box. Sampling modes draw the coarse pixel from the waypoint distribution;
// ConstrainedSample renormalizes it over `mask` first and throws
// EmptyMaskSupport when the mask kills all probability mass.
template <typename T>
Rollout<T> unroll(Tape<T>& tape, const Var<T>& input,
                  const NetParams<T>& params, GradBuf<T>* grads, int n_steps,
                  const geom::RasterFrame& frame, double t0, double dt,
                  RolloutMode mode, std::uint64_t seed,
                  const Tensor<float>* mask, const Tensor<T>& box0);

// Occupancy forecast head: one sigmoid heatmap per step, seeded with the
// ground-truth objects at the current time.
template <typename T>
std::vector<Var<T>> occupancy_unroll(Tape<T>& tape, const Var<T>& features,
                                     const Tensor<T>& objects0,
                                     const NetParams<T>& params,
                                     GradBuf<T>* grads, int n_steps);

// Road / non-road mask head.
template <typename T>
Var<T> road_forward(Tape<T>& tape, const Var<T>& features,
                    const NetParams<T>& params, GradBuf<T>* grads);

// Decoder inputs shared across steps: reduced features upsampled to the
// decoder grid.
template <typename T>
Var<T> reduce_features(Tape<T>& tape, const Var<T>& features,
                       const NetParams<T>& params, GradBuf<T>* grads,
                       const std::string& prefix);

}  // namespace midsim::net
