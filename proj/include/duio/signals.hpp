#pragma once

#include <cstdint>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

namespace duio {

// amplitude * cos(frequency * t + phase)
struct Sinusoid {
    double amplitude = 1.0;
    double frequency = 0.0;
    double phase = 0.0;
};

// Scalar autonomous system  v' = rate * v,  v(0) = initial.
struct AutonomousLinear {
    double rate = 0.0;
    double initial = 0.0;
};

// Uniform value in [low, high], redrawn every `hold` seconds from a
// counter-based stream keyed by `seed`.
struct PiecewiseConstantRandom {
    double low = -1.0;
    double high = 1.0;
    double hold = 1.0;
    std::uint64_t seed = 0;
};

struct Zero {};

class SignalGenerator {
public:
    using Kind = std::variant<Zero, Sinusoid, AutonomousLinear, PiecewiseConstantRandom>;

    SignalGenerator() = default;
    template <class T>
        requires std::is_constructible_v<Kind, T>
    SignalGenerator(T kind) : kind_(std::move(kind)) {}  // NOLINT(google-explicit-constructor)

    // Value at `t` during the integration step that started at `step_start`.
    // Held signals are read at the midpoint of [step_start, t] so that every
    // stage of one step falls inside the same hold interval.
    double value(double t, double step_start) const;
    double value(double t) const { return value(t, t); }

    bool is_held() const { return std::holds_alternative<PiecewiseConstantRandom>(kind_); }
    const Kind& kind() const { return kind_; }
    std::string kind_name() const;

private:
    Kind kind_ = Zero{};
};

std::vector<double> evaluate(const std::vector<SignalGenerator>& signals, double t, double step_start);

// splitmix64 finaliser; used for counter-based streams and seed derivation.
std::uint64_t mix_seed(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);
double uniform_from_bits(std::uint64_t bits);

}  // namespace duio
