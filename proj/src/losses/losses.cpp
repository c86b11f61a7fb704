#include "midsim/losses/losses.hpp"

namespace midsim::losses {

const std::array<const char*, 10>& LossBundle::term_names() {
  static const std::array<const char*, 10> names = {
      "waypoint_ce", "box_ce",  "heading_l1", "subpixel_l1", "speed_l1",
      "collision",   "onroad",  "geometry",   "objects_ce",  "road_ce"};
  return names;
}

double LossBundle::term(int i) const {
  switch (i) {
    case 0: return waypoint_ce;
    case 1: return box_ce;
    case 2: return heading_l1;
    case 3: return subpixel_l1;
    case 4: return speed_l1;
    case 5: return collision;
    case 6: return onroad;
    case 7: return geometry;
    case 8: return objects_ce;
    case 9: return road_ce;
  }
  throw OutOfRange("loss term index");
}

bool LossBundle::finite() const {
  for (int i = 0; i < 10; ++i)
    if (!std::isfinite(term(i))) return false;
  return true;
}

const char* ModelConfig::name() const {
  switch (id) {
    case ModelId::M0: return "M0";
    case ModelId::M1: return "M1";
    case ModelId::M2: return "M2";
    case ModelId::M3: return "M3";
    case ModelId::M4: return "M4";
  }
  return "?";
}

ModelConfig ModelConfig::standard(ModelId id) {
  ModelConfig cfg;
  cfg.id = id;
  switch (id) {
    case ModelId::M0:
      cfg.w_imit = 1.0;
      cfg.w_env = 0.0;
      cfg.use_perturbations = false;
      break;
    case ModelId::M1:
      cfg.w_imit = 1.0;
      cfg.w_env = 0.0;
      cfg.use_perturbations = true;
      break;
    case ModelId::M2:
      cfg.w_imit = 1.0;
      cfg.w_env = 1.0;
      cfg.use_perturbations = true;
      break;
    case ModelId::M3:
      cfg.w_imit = 0.5;
      cfg.w_env = 1.0;
      cfg.use_perturbations = true;
      break;
    case ModelId::M4:
      cfg.w_imit = 1.0;
      cfg.w_env = 1.0;
      cfg.imitation_dropout_prob = 0.5;
      cfg.use_perturbations = true;
      break;
  }
  return cfg;
}

bool ModelConfig::from_name(const std::string& s, ModelConfig* out) {
  for (ModelId id :
       {ModelId::M0, ModelId::M1, ModelId::M2, ModelId::M3, ModelId::M4}) {
    ModelConfig cfg = standard(id);
    if (s == cfg.name()) {
      *out = cfg;
      return true;
    }
  }
  return false;
}

double draw_imitation_weight(const ModelConfig& cfg, Rng& rng) {
  if (cfg.imitation_dropout_prob <= 0.0) return cfg.w_imit;
  return rng.uniform() < cfg.imitation_dropout_prob ? 0.0 : 1.0;
}

std::pair<double, double> total_loss(const LossBundle& bundle,
                                     const ModelConfig& cfg,
                                     double example_weight, Rng& rng) {
  const double w_imit = draw_imitation_weight(cfg, rng);
  double imit = 0.0, env = 0.0;
  for (int i = 0; i < 5; ++i) imit += bundle.term(i) * cfg.term_multipliers[i];
  for (int i = 5; i < 10; ++i) env += bundle.term(i) * cfg.term_multipliers[i];
  return {example_weight * (w_imit * imit + cfg.w_env * env), w_imit};
}

template <typename T>
ExampleLoss<T> example_loss(Tape<T>& tape, const net::Rollout<T>& rollout,
                            const std::vector<Var<T>>& occupancy,
                            const Var<T>* road,
                            const raster::TargetStack& targets,
                            const ModelConfig& cfg, double example_weight,
                            double w_imit_draw) {
  const int n = static_cast<int>(rollout.steps.size());
  std::vector<std::pair<Var<T>, double>> to_total;
  ExampleLoss<T> out;
  out.w_imit_used = w_imit_draw;

  const auto push_term = [&](const Var<T>& term, int term_idx, double* slot) {
    check_finite(term, LossBundle::term_names()[term_idx]);
    *slot += static_cast<double>(term.scalar());
    const double group_w = term_idx < 5 ? w_imit_draw : cfg.w_env;
    const double coeff =
        example_weight * group_w * cfg.term_multipliers[term_idx];
    if (coeff != 0.0) to_total.push_back({term, coeff});
  };

  const bool env_active = cfg.needs_env();

  for (int k = 0; k < n; ++k) {
    const auto& step = rollout.steps[k];
    const auto [gu, gv] = targets.coarse_px[k];

    push_term(onehot_ce(tape, step.waypoint_probs, gu, gv), 0,
              &out.bundle.waypoint_ce);
    push_term(bce_mean(tape, step.box_probs,
                       mask_plane<T>(targets.ego_box_masks, k)),
              1, &out.bundle.box_ce);
    push_term(l1_component(tape, step.meta, 2, targets.theta_frame[k], true),
              2, &out.bundle.heading_l1);
    push_term(weighted_sum(
                  tape, {{l1_component(tape, step.meta, 0,
                                       targets.subpixel[k].x, false),
                          1.0},
                         {l1_component(tape, step.meta, 1,
                                       targets.subpixel[k].y, false),
                          1.0}}),
              3, &out.bundle.subpixel_l1);
    push_term(l1_component(tape, step.meta, 3, targets.speed[k], false), 4,
              &out.bundle.speed_l1);

    if (env_active) {
      push_term(overlap_mean(tape, step.box_probs,
                             mask_plane<T>(targets.object_masks, k), false),
                5, &out.bundle.collision);
      push_term(overlap_mean(tape, step.box_probs,
                             mask_plane<T>(targets.road_mask, 0), true),
                6, &out.bundle.onroad);
      push_term(overlap_mean(tape, step.box_probs,
                             mask_plane<T>(targets.geometry_mask, 0), true),
                7, &out.bundle.geometry);
      if (!occupancy.empty())
        push_term(bce_mean(tape, occupancy[k],
                           mask_plane<T>(targets.object_masks, k)),
                  8, &out.bundle.objects_ce);
    }
  }
  if (env_active && road != nullptr)
    push_term(bce_mean(tape, *road, mask_plane<T>(targets.road_mask, 0)), 9,
              &out.bundle.road_ce);

  out.total = weighted_sum(tape, to_total);
  return out;
}

template ExampleLoss<float> example_loss<float>(
    Tape<float>&, const net::Rollout<float>&, const std::vector<Var<float>>&,
    const Var<float>*, const raster::TargetStack&, const ModelConfig&, double,
    double);
template ExampleLoss<double> example_loss<double>(
    Tape<double>&, const net::Rollout<double>&,
    const std::vector<Var<double>>&, const Var<double>*,
    const raster::TargetStack&, const ModelConfig&, double, double);

}  // namespace midsim::losses
