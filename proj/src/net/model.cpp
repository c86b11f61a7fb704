#include "midsim/net/model.hpp"

#include <cmath>

#include "midsim/core/rng.hpp"

namespace midsim::net {

namespace {

// Box-Muller normal draw; self-contained for cross-platform determinism.
double normal_draw(Rng& rng) {
  const double u1 = std::max(rng.uniform(), 1e-12);
  const double u2 = rng.uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

struct LayerSpec {
  std::string name;
  int cout, cin, k;  // k == 0 marks a fully connected layer (cin = inputs)
};

std::vector<LayerSpec> layer_specs(const ArchConfig& a) {
  return {
      {"feat.conv1", a.f1, a.input_channels, 3},
      {"feat.conv2", a.f2, a.f1, 3},
      {"feat.conv3", a.f3, a.f2, 3},
      {"feat.conv4", a.f4, a.f3, 3},
      {"feat.conv5", a.f5, a.f4, 3},
      {"feat.conv6", a.f6, a.f5, 3},
      {"feat.ctx", a.f6, a.f6, 3},
      {"dec.reduce", a.reduce_ch, a.f6, 1},
      {"dec.conv1", a.dec1, a.reduce_ch + 3, 3},
      {"dec.conv2", a.dec2, a.dec1, 3},
      {"dec.conv3", 8, a.dec2, 3},
      {"meta.fc1", a.meta_hidden, a.dec2 * a.patch * a.patch, 0},
      {"meta.fc2", 4, a.meta_hidden, 0},
      {"occ.reduce", a.reduce_ch, a.f6, 1},
      {"occ.conv1", a.occ1, a.reduce_ch + 1, 3},
      {"occ.conv2", 4, a.occ1, 3},
      {"road.conv1", a.road1, a.f6, 3},
      {"road.conv2", 16, a.road1, 3},
  };
}

}  // namespace

std::uint64_t ArchConfig::hash() const {
  std::uint64_t h = fnv1a("midsim-arch");
  for (int v : {input_channels, height, width, n_steps, f1, f2, f3, f4, f5, f6,
                reduce_ch, dec1, dec2, meta_hidden, patch, occ1, road1})
    h = hash_mix(h, static_cast<std::uint64_t>(v));
  return h;
}

ArchConfig ArchConfig::for_render(const raster::RenderConfig& cfg) {
  ArchConfig a;
  a.input_channels = cfg.input_channels();
  a.height = cfg.height_px;
  a.width = cfg.width_px;
  a.n_steps = cfg.n_future;
  if (cfg.width_px <= 16) return tiny();
  return a;
}

ArchConfig ArchConfig::tiny() {
  ArchConfig a;
  a.input_channels = 19;
  a.height = 16;
  a.width = 16;
  a.n_steps = 3;
  a.f1 = 6;
  a.f2 = 8;
  a.f3 = 8;
  a.f4 = 12;
  a.f5 = 12;
  a.f6 = 12;
  a.reduce_ch = 4;
  a.dec1 = 8;
  a.dec2 = 8;
  a.meta_hidden = 16;
  a.occ1 = 6;
  a.road1 = 8;
  return a;
}

template <typename T>
int NetParams<T>::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return static_cast<int>(i);
  return -1;
}

template <typename T>
Tensor<T>& NetParams<T>::at(const std::string& name) {
  const int i = index_of(name);
  if (i < 0) throw ShapeMismatch("unknown parameter " + name);
  return values[i];
}

template <typename T>
const Tensor<T>& NetParams<T>::at(const std::string& name) const {
  const int i = index_of(name);
  if (i < 0) throw ShapeMismatch("unknown parameter " + name);
  return values[i];
}

template <typename T>
std::size_t NetParams<T>::total_scalars() const {
  std::size_t n = 0;
  for (const auto& t : values) n += t.size();
  return n;
}

template <typename T>
void NetParams<T>::init(std::uint64_t seed) {
  names.clear();
  values.clear();
  for (const auto& spec : layer_specs(arch)) {
    const int fan_in = spec.k > 0 ? spec.cin * spec.k * spec.k : spec.cin;
    const double std_dev = std::sqrt(2.0 / fan_in);
    Rng rng = derived_rng(seed, spec.name);
    Tensor<T> w(spec.cout, fan_in, 1);
    for (auto& v : w.v) v = static_cast<T>(normal_draw(rng) * std_dev);
    Tensor<T> b(spec.cout, 1, 1);
    names.push_back(spec.name + ".w");
    values.push_back(std::move(w));
    names.push_back(spec.name + ".b");
    values.push_back(std::move(b));
  }
}

namespace {

// Weight/grad lookup bound to one (params, grads) pair.
template <typename T>
struct ParamView {
  const NetParams<T>& p;
  GradBuf<T>* g;

  const Tensor<T>& w(const std::string& name, int* idx) const {
    *idx = p.index_of(name);
    if (*idx < 0) throw ShapeMismatch("unknown parameter " + name);
    return p.values[*idx];
  }

  Var<T> conv(Tape<T>& tape, const Var<T>& x, const std::string& layer, int k,
              int stride) const {
    int wi, bi;
    const Tensor<T>& weight = w(layer + ".w", &wi);
    const Tensor<T>& bias = w(layer + ".b", &bi);
    Tensor<T>* dw = g != nullptr ? &(*g)[wi] : nullptr;
    Tensor<T>* db = g != nullptr ? &(*g)[bi] : nullptr;
    return conv2d(tape, x, weight, bias, dw, db, k, stride);
  }

  Var<T> fully(Tape<T>& tape, const Var<T>& x, const std::string& layer) const {
    int wi, bi;
    const Tensor<T>& weight = w(layer + ".w", &wi);
    const Tensor<T>& bias = w(layer + ".b", &bi);
    Tensor<T>* dw = g != nullptr ? &(*g)[wi] : nullptr;
    Tensor<T>* db = g != nullptr ? &(*g)[bi] : nullptr;
    return fc(tape, x, weight, bias, dw, db);
  }
};

template <typename T>
int pick_pixel(const Tensor<T>& probs, RolloutMode mode, Rng& rng,
               const Tensor<float>* mask, int* out_v) {
  const int h = probs.h, w = probs.w;
  if (mode == RolloutMode::Argmax) {
    const auto [u, v] = argmax_pixel(probs);
    *out_v = v;
    return u;
  }
  double total = 0.0;
  if (mode == RolloutMode::ConstrainedSample) {
    if (mask == nullptr) throw EmptyMaskSupport("constrained sampling needs a mask");
    for (int i = 0; i < h * w; ++i)
      if (mask->v[i] > 0.0f) total += static_cast<double>(probs.v[i]);
    if (total <= 0.0)
      throw EmptyMaskSupport("mask support carries no probability");
  } else {
    for (int i = 0; i < h * w; ++i) total += static_cast<double>(probs.v[i]);
  }
  const double r = rng.uniform() * total;
  double acc = 0.0;
  int last_valid = -1;
  for (int i = 0; i < h * w; ++i) {
    if (mode == RolloutMode::ConstrainedSample && mask->v[i] <= 0.0f) continue;
    acc += static_cast<double>(probs.v[i]);
    last_valid = i;
    if (acc >= r) break;
  }
  *out_v = last_valid / w;
  return last_valid % w;
}

}  // namespace

template <typename T>
Var<T> feature_forward(Tape<T>& tape, const Var<T>& input,
                       const NetParams<T>& params, GradBuf<T>* grads) {
  const ArchConfig& a = params.arch;
  if (input.value().c != a.input_channels || input.value().h != a.height ||
      input.value().w != a.width)
    throw ShapeMismatch("input stack does not match the architecture");
  ParamView<T> pv{params, grads};

  Var<T> x1 = relu(tape, pv.conv(tape, input, "feat.conv1", 3, 1));
  Var<T> x2 = relu(tape, pv.conv(tape, x1, "feat.conv2", 3, 2));
  Var<T> x3 = relu(tape, add(tape, pv.conv(tape, x2, "feat.conv3", 3, 1), x2));
  Var<T> x4 = relu(tape, pv.conv(tape, x3, "feat.conv4", 3, 2));
  Var<T> x5 = relu(tape, add(tape, pv.conv(tape, x4, "feat.conv5", 3, 1), x4));
  Var<T> x6 = relu(tape, pv.conv(tape, x5, "feat.conv6", 3, 1));

  Var<T> pooled = avgpool(tape, x6, 4);
  Var<T> ctx = relu(tape, pv.conv(tape, pooled, "feat.ctx", 3, 1));
  Var<T> ctx_up = upsample_nearest(tape, ctx, 4);
  return relu(tape, add(tape, x6, ctx_up));
}

template <typename T>
Var<T> reduce_features(Tape<T>& tape, const Var<T>& features,
                       const NetParams<T>& params, GradBuf<T>* grads,
                       const std::string& prefix) {
  ParamView<T> pv{params, grads};
  Var<T> red = relu(tape, pv.conv(tape, features, prefix + ".reduce", 1, 1));
  return upsample_nearest(tape, red, 2);
}

template <typename T>
std::pair<int, int> argmax_pixel(const Tensor<T>& img) {
  int best = 0;
  T best_p = img.v[0];
  const int n = img.h * img.w;
  for (int i = 1; i < n; ++i)
    if (img.v[i] > best_p) {
      best_p = img.v[i];
      best = i;
    }
  return {best % img.w, best / img.w};
}

template <typename T>
void memory_update(Tensor<T>& memory, int u, int v) {
  if (u < 0 || u >= memory.w || v < 0 || v >= memory.h)
    throw OutOfRange("memory update outside the image");
  memory.at(0, v, u) += T(1);
}

template <typename T>
StepOutput<T> step_with_pick(Tape<T>& tape, int k, const Var<T>& features_up,
                             const Tensor<T>& memory, const Var<T>& box_prev,
                             const NetParams<T>& params, GradBuf<T>* grads,
                             RolloutMode mode, Rng& rng,
                             const Tensor<float>* mask) {
  const ArchConfig& a = params.arch;
  ParamView<T> pv{params, grads};
  const int hd = a.height / 2, wd = a.width / 2;

  // Crafted memory and previous box enter at decoder resolution.
  Var<T> mem_var = Var<T>::constant(memory);
  Var<T> mem_pooled = avgpool(tape, mem_var, 2);
  Var<T> box_pooled = avgpool(tape, box_prev, 2);
  Tensor<T> kplane(1, hd, wd);
  const T kval = static_cast<T>(k) / static_cast<T>(a.n_steps);
  for (auto& v : kplane.v) v = kval;

  Var<T> din = concat
      (tape, std::vector<Var<T>>{features_up, mem_pooled, box_pooled,
                                 Var<T>::constant(std::move(kplane))});
  Var<T> h1 = relu(tape, pv.conv(tape, din, "dec.conv1", 3, 1));
  Var<T> h2 = relu(tape, pv.conv(tape, h1, "dec.conv2", 3, 1));
  Var<T> logits8 = pv.conv(tape, h2, "dec.conv3", 3, 1);
  Var<T> logits = pixel_shuffle(tape, logits8, 2);

  StepOutput<T> out;
  out.waypoint_probs =
      spatial_softmax(tape, slice_channels(tape, logits, 0, 1));
  out.box_probs = sigmoid(tape, slice_channels(tape, logits, 1, 1));
  out.coarse_u =
      pick_pixel(out.waypoint_probs.value(), mode, rng, mask, &out.coarse_v);

  Var<T> patch = gather_patch(tape, h2, out.coarse_v / 2, out.coarse_u / 2,
                              a.patch);
  Var<T> m1 = relu(tape, pv.fully(tape, patch, "meta.fc1"));
  out.meta = partial_sigmoid(tape, pv.fully(tape, m1, "meta.fc2"), 2);
  return out;
}

template <typename T>
StepOutput<T> waypoint_step(Tape<T>& tape, int k, const Var<T>& features_up,
                            const Tensor<T>& memory, const Var<T>& box_prev,
                            const NetParams<T>& params, GradBuf<T>* grads) {
  Rng rng(0);
  return step_with_pick(tape, k, features_up, memory, box_prev, params, grads,
                        RolloutMode::Argmax, rng, nullptr);
}

template <typename T>
Rollout<T> unroll(Tape<T>& tape, const Var<T>& input,
                  const NetParams<T>& params, GradBuf<T>* grads, int n_steps,
                  const geom::RasterFrame& frame, double t0, double dt,
                  RolloutMode mode, std::uint64_t seed,
                  const Tensor<float>* mask, const Tensor<T>& box0) {
  const ArchConfig& a = params.arch;
  Rng rng = derived_rng(seed, "rollout");

  Var<T> features = feature_forward(tape, input, params, grads);
  Var<T> features_up = reduce_features(tape, features, params, grads, "dec");

  Rollout<T> out;
  out.memory = Tensor<T>(1, a.height, a.width);
  Var<T> box_prev = Var<T>::constant(box0);

  out.world_trajectory.start_time = t0 + dt;
  out.world_trajectory.dt = dt;

  for (int k = 1; k <= n_steps; ++k) {
    StepOutput<T> step = step_with_pick(tape, k, features_up, out.memory,
                                        box_prev, params, grads, mode, rng,
                                        mask);
    memory_update(out.memory, step.coarse_u, step.coarse_v);
    box_prev = step.box_probs;

    const double u = step.coarse_u + static_cast<double>(step.meta.value().v[0]);
    const double v = step.coarse_v + static_cast<double>(step.meta.value().v[1]);
    const geom::Vec2 pos = frame.raster_to_world(u, v);
    const double theta =
        frame.heading_from_frame(static_cast<double>(step.meta.value().v[2]));
    const double speed =
        std::max(0.0, static_cast<double>(step.meta.value().v[3]));
    out.world_trajectory.poses.emplace_back(pos.x, pos.y, theta, speed);
    out.steps.push_back(std::move(step));
  }
  return out;
}

template <typename T>
std::vector<Var<T>> occupancy_unroll(Tape<T>& tape, const Var<T>& features,
                                     const Tensor<T>& objects0,
                                     const NetParams<T>& params,
                                     GradBuf<T>* grads, int n_steps) {
  ParamView<T> pv{params, grads};
  Var<T> features_up = reduce_features(tape, features, params, grads, "occ");

  std::vector<Var<T>> outputs;
  Var<T> prev = Var<T>::constant(objects0);
  for (int k = 1; k <= n_steps; ++k) {
    Var<T> prev_pooled = avgpool(tape, prev, 2);
    Var<T> din =
        concat(tape, std::vector<Var<T>>{features_up, prev_pooled});
    Var<T> h = relu(tape, pv.conv(tape, din, "occ.conv1", 3, 1));
    Var<T> logits4 = pv.conv(tape, h, "occ.conv2", 3, 1);
    Var<T> obj = sigmoid(tape, pixel_shuffle(tape, logits4, 2));
    outputs.push_back(obj);
    prev = obj;
  }
  return outputs;
}

template <typename T>
Var<T> road_forward(Tape<T>& tape, const Var<T>& features,
                    const NetParams<T>& params, GradBuf<T>* grads) {
  ParamView<T> pv{params, grads};
  Var<T> h = relu(tape, pv.conv(tape, features, "road.conv1", 3, 1));
  Var<T> logits16 = pv.conv(tape, h, "road.conv2", 3, 1);
  return sigmoid(tape, pixel_shuffle(tape, logits16, 4));
}

// Explicit instantiations: float for training/inference, double for the
// finite-difference verification path.
#define MIDSIM_INSTANTIATE(T)                                                  \
  template struct NetParams<T>;                                                \
  template Var<T> feature_forward<T>(Tape<T>&, const Var<T>&,                  \
                                     const NetParams<T>&, GradBuf<T>*);        \
  template Var<T> reduce_features<T>(Tape<T>&, const Var<T>&,                  \
                                     const NetParams<T>&, GradBuf<T>*,         \
                                     const std::string&);                      \
  template void memory_update<T>(Tensor<T>&, int, int);                        \
  template std::pair<int, int> argmax_pixel<T>(const Tensor<T>&);              \
  template StepOutput<T> waypoint_step<T>(Tape<T>&, int, const Var<T>&,        \
                                          const Tensor<T>&, const Var<T>&,     \
                                          const NetParams<T>&, GradBuf<T>*);   \
  template Rollout<T> unroll<T>(Tape<T>&, const Var<T>&, const NetParams<T>&,  \
                                GradBuf<T>*, int, const geom::RasterFrame&,    \
                                double, double, RolloutMode, std::uint64_t,    \
                                const Tensor<float>*, const Tensor<T>&);       \
  template std::vector<Var<T>> occupancy_unroll<T>(                            \
      Tape<T>&, const Var<T>&, const Tensor<T>&, const NetParams<T>&,          \
      GradBuf<T>*, int);                                                       \
  template Var<T> road_forward<T>(Tape<T>&, const Var<T>&,                     \
                                  const NetParams<T>&, GradBuf<T>*);

MIDSIM_INSTANTIATE(float)
MIDSIM_INSTANTIATE(double)

#undef MIDSIM_INSTANTIATE

}  // namespace midsim::net
