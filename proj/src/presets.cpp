#include "duio/presets.hpp"

#include <cmath>

namespace duio {

PlantModel two_mass_spring() {
    Matrix A(4, 4);
    A << 0, 1, 0, 0,
        -5.3333, 0, 2.6667, 0,
        0, 0, 0, 1,
        2.6667, 0, -2.6667, 0;
    Matrix B(4, 2);
    B << 0, 1,
        1.3333, 1,
        0, 1,
        0, 1;
    Matrix E(4, 1);
    E << 0.1, 0, 0.1, 0;

    std::vector<Matrix> C(5, Matrix(4, 4));
    C[0] << 1, 0, 1, 0,
        0, 1, 0, 0,
        0, 0, 1, 1,
        0, 0, 0, 1;
    C[1] << 0, 1, 0, 0,
        1, 0, 1, 0,
        0, 0, 0, 1,
        0, 0, 1, 1;
    C[2] << 0, 0, 1, 1,
        0, 1, 0, 0,
        1, 0, 1, 0,
        0, 1, 1, 0;
    C[3] << 1, 0, 1, 1,
        0, 1, 0, 0,
        0, 0, 1, 1,
        1, 0, 1, 0;
    C[4] << 1, 0, 1, 0,
        0, 0, 1, 1,
        0, 0, 1, 1,
        0, 0, 0, 1;

    const double scale[5] = {1.0, 0.5, 0.33, 0.25, 0.2};
    std::vector<NodeView> nodes;
    for (int i = 0; i < 5; ++i) {
        nodes.push_back(make_node_view(B, E, C[static_cast<std::size_t>(i)], {0}, {scale[i]}));
    }
    return PlantModel(A, B, E, std::move(nodes));
}

SensorGraph two_mass_spring_graph() {
    return ring_graph(5);
}

PlantInputs two_mass_spring_inputs(double known_initial, double disturbance_amplitude, double hold,
                                   std::uint64_t seed) {
    PlantInputs in;
    in.u.emplace_back(AutonomousLinear{std::log(0.5), known_initial});
    in.u.emplace_back(Sinusoid{0.2, 0.2, 2.0});
    if (disturbance_amplitude > 0.0) {
        in.d.emplace_back(PiecewiseConstantRandom{-disturbance_amplitude, disturbance_amplitude, hold, seed});
    } else {
        in.d.emplace_back(Zero{});
    }
    return in;
}

}  // namespace duio
