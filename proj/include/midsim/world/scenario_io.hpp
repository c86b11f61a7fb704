#pragma once

#include <iosfwd>
#include <string>

#include "midsim/world/world.hpp"

namespace midsim::world {

// `midsim-scenario v1`: line-based key/value + polyline blocks. Doubles are
// printed with round-trip precision so serialization is lossless and
// byte-stable per seed.
void write_scenario(std::ostream& os, const Scenario& scenario);
Scenario read_scenario(std::istream& is);

void save_scenario(const std::string& path, const Scenario& scenario);
Scenario load_scenario(const std::string& path);

std::string scenario_to_string(const Scenario& scenario);

}  // namespace midsim::world
