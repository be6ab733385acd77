#pragma once

#include <cstdint>

#include "duio/network.hpp"
#include "duio/plant.hpp"

namespace duio {

// Two-mass-spring plant with five sensor nodes. Input column 0 is the known
// input shared by every node, column 1 the unknown input; node i sees the
// unknown column scaled by 1, 0.5, 0.33, 0.25, 0.2.
PlantModel two_mass_spring();

// Default five-node topology: ring 1-2-3-4-5-1 with unit weights.
SensorGraph two_mass_spring_graph();

// Online signals of the benchmark: known input u' = ln(0.5) u with u(0) =
// known_initial, unknown input 0.2 cos(0.2 t + 2), disturbance uniform in
// [-disturbance_amplitude, disturbance_amplitude] held for `hold` seconds.
PlantInputs two_mass_spring_inputs(double known_initial, double disturbance_amplitude, double hold,
                                   std::uint64_t seed);

}  // namespace duio
