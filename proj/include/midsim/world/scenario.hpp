#pragma once

#include <cstdint>

#include "midsim/world/world.hpp"

namespace midsim::world {

inline constexpr int kScenarioVariations = 20;

// Deterministic per (kind, variation_index, seed). Throws BadIndex when
// variation_index is outside [0, 20).
Scenario make_scenario(ScenarioKind kind, int variation_index,
                       std::uint64_t seed);

enum class AblationToggle { RemoveStopSigns, RemoveDynamicAgents };

// Returns the scenario with the named element class removed; everything
// else is copied unchanged. Idempotent.
Scenario ablate(const Scenario& scenario, AblationToggle toggle);

}  // namespace midsim::world
