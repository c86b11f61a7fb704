#pragma once

// Finite-difference verification of the analytic gradients on the reduced
// 16x16 / N=3 configuration, double precision throughout. Shared by the
// unit tests and the acceptance suite.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "midsim/core/rng.hpp"
#include "midsim/losses/losses.hpp"
#include "midsim/net/model.hpp"
#include "midsim/raster/render_config.hpp"

namespace gradcheck {

using midsim::Rng;
using midsim::Tensor;
using midsim::TensorF;

struct Problem {
  midsim::net::NetParams<double> params;
  Tensor<double> input;
  Tensor<double> box0;
  Tensor<double> objects0;
  midsim::raster::TargetStack targets;
  midsim::geom::RasterFrame frame;
  midsim::losses::ModelConfig config;
};

inline Problem make_problem(std::uint64_t seed) {
  using namespace midsim;

  Problem prob;
  prob.params.arch = net::ArchConfig::tiny();
  prob.params.init(seed);
  const auto& a = prob.params.arch;

  Rng rng = derived_rng(seed, "gradcheck-data");
  prob.input = Tensor<double>(a.input_channels, a.height, a.width);
  for (auto& v : prob.input.v) v = rng.uniform();

  prob.box0 = Tensor<double>(1, a.height, a.width);
  for (int y = 6; y < 10; ++y)
    for (int x = 7; x < 9; ++x) prob.box0.at(0, y, x) = 1.0;
  prob.objects0 = Tensor<double>(1, a.height, a.width);
  for (int y = 2; y < 5; ++y)
    for (int x = 10; x < 13; ++x) prob.objects0.at(0, y, x) = 1.0;

  const raster::RenderConfig cfg = raster::RenderConfig::named_profile("tiny");
  prob.frame = cfg.frame_for(geom::Pose(0, 0, 0, 2.0), 0.0);

  auto& t = prob.targets;
  t.ego_box_masks = TensorF(a.n_steps, a.height, a.width);
  t.object_masks = TensorF(a.n_steps, a.height, a.width);
  t.road_mask = TensorF(1, a.height, a.width);
  t.geometry_mask = TensorF(1, a.height, a.width);
  for (int k = 0; k < a.n_steps; ++k) {
    const int gu = 4 + rng.uniform_int(8);
    const int gv = 3 + rng.uniform_int(8);
    t.coarse_px.push_back({gu, gv});
    t.waypoint_px.push_back({gu + 0.3, gv + 0.6});
    t.subpixel.push_back({0.27 + 0.05 * k, 0.61 - 0.03 * k});
    t.theta_frame.push_back(0.35 + 0.2 * k);
    t.speed.push_back(2.0 + 0.7 * k);
    for (int i = 0; i < t.ego_box_masks.plane_size(); ++i) {
      t.ego_box_masks.plane(k)[i] = rng.bernoulli(0.2) ? 1.0f : 0.0f;
      t.object_masks.plane(k)[i] = rng.bernoulli(0.15) ? 1.0f : 0.0f;
    }
  }
  for (int i = 0; i < t.road_mask.plane_size(); ++i) {
    t.road_mask.v[i] = rng.bernoulli(0.6) ? 1.0f : 0.0f;
    t.geometry_mask.v[i] = rng.bernoulli(0.25) ? 1.0f : 0.0f;
  }

  prob.config = losses::ModelConfig::standard(losses::ModelId::M2);
  return prob;
}

// Total M2 loss (every term active) for the current parameter values.
inline double forward_loss(Problem& prob,
                           midsim::net::GradBuf<double>* grads) {
  using namespace midsim;
  net::Tape<double> tape;
  net::Var<double> input = net::Var<double>::constant(prob.input);
  net::Rollout<double> rollout =
      net::unroll(tape, input, prob.params, grads, prob.params.arch.n_steps,
                  prob.frame, 0.0, 0.2, net::RolloutMode::Argmax, 7, nullptr,
                  prob.box0);
  net::Var<double> features =
      net::feature_forward(tape, input, prob.params, grads);
  std::vector<net::Var<double>> occupancy = net::occupancy_unroll(
      tape, features, prob.objects0, prob.params, grads,
      prob.params.arch.n_steps);
  net::Var<double> road = net::road_forward(tape, features, prob.params, grads);

  losses::ExampleLoss<double> loss = losses::example_loss(
      tape, rollout, occupancy, &road, prob.targets, prob.config, 1.0, 1.0);
  if (grads != nullptr) tape.backward(loss.total);
  return static_cast<double>(loss.total.scalar());
}

struct Result {
  double max_rel_err = 0.0;
  int coordinates = 0;
  std::string worst;
};

// Central differences with h = 1e-3 over `per_tensor` coordinates of every
// parameter tensor.
inline Result run(std::uint64_t seed, int per_tensor) {
  using namespace midsim;
  Problem prob = make_problem(seed);

  net::GradBuf<double> grads = net::make_grad_buf(prob.params);
  forward_loss(prob, &grads);

  Result res;
  const double h = 1e-3;
  Rng pick = derived_rng(seed, "gradcheck-pick");
  for (std::size_t ti = 0; ti < prob.params.values.size(); ++ti) {
    Tensor<double>& tensor = prob.params.values[ti];
    for (int c = 0; c < per_tensor; ++c) {
      const int idx = pick.uniform_int(static_cast<int>(tensor.size()));
      const double saved = tensor.v[idx];
      tensor.v[idx] = saved + h;
      const double up = forward_loss(prob, nullptr);
      tensor.v[idx] = saved - h;
      const double down = forward_loss(prob, nullptr);
      tensor.v[idx] = saved;
      const double fd = (up - down) / (2.0 * h);
      const double analytic = grads[ti].v[idx];
      const double denom = std::max({std::abs(fd), std::abs(analytic), 1e-6});
      const double rel = std::abs(fd - analytic) / denom;
      ++res.coordinates;
      if (rel > res.max_rel_err) {
        res.max_rel_err = rel;
        res.worst = prob.params.names[ti] + "[" + std::to_string(idx) + "]";
      }
    }
  }
  return res;
}

}  // namespace gradcheck
