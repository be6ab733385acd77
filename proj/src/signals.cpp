#include "duio/signals.hpp"

#include <cmath>

namespace duio {

std::uint64_t mix_seed(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    return mix_seed(mix_seed(master) ^ mix_seed(stream + 0x632BE59BD9B4E019ULL));
}

double uniform_from_bits(std::uint64_t bits) {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

double SignalGenerator::value(double t, double step_start) const {
    return std::visit(
        [&](const auto& s) -> double {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Zero>) {
                return 0.0;
            } else if constexpr (std::is_same_v<T, Sinusoid>) {
                return s.amplitude * std::cos(s.frequency * t + s.phase);
            } else if constexpr (std::is_same_v<T, AutonomousLinear>) {
                return s.initial * std::exp(s.rate * t);
            } else {
                const double mid = step_start + 0.5 * (t - step_start);
                const double slot = std::floor(mid / s.hold + 1e-9);
                const auto index = static_cast<std::uint64_t>(static_cast<std::int64_t>(slot));
                const double unit = uniform_from_bits(mix_seed(s.seed ^ mix_seed(index)));
                return s.low + (s.high - s.low) * unit;
            }
        },
        kind_);
}

std::string SignalGenerator::kind_name() const {
    return std::visit(
        [](const auto& s) -> std::string {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Zero>) {
                return "zero";
            } else if constexpr (std::is_same_v<T, Sinusoid>) {
                return "sinusoid";
            } else if constexpr (std::is_same_v<T, AutonomousLinear>) {
                return "autonomous-linear";
            } else {
                return "piecewise-constant-random";
            }
        },
        kind_);
}

std::vector<double> evaluate(const std::vector<SignalGenerator>& signals, double t, double step_start) {
    std::vector<double> out;
    out.reserve(signals.size());
    for (const auto& s : signals) {
        out.push_back(s.value(t, step_start));
    }
    return out;
}

}  // namespace duio
