#pragma once

#include <array>
#include <cstdint>

#include "cpl/param_vector.hpp"

namespace cpl {

struct AdamConfig {
    double learning_rate{1e-3};
    double beta1{0.9};
    double beta2{0.999};
    double epsilon{1e-8};

    void validate() const {
        if (!(std::isfinite(learning_rate) && learning_rate > 0.0))
            throw InvalidArgument("learning rate must be > 0");
        if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0))
            throw InvalidArgument("adam betas must lie in [0, 1)");
        if (!(std::isfinite(epsilon) && epsilon > 0.0))
            throw InvalidArgument("adam epsilon must be > 0");
    }
};

// First and second moment estimates plus running beta powers for bias
// correction.
struct AdamState {
    std::array<double, kParamCount> m{};
    std::array<double, kParamCount> v{};
    double beta1_pow{1.0};
    double beta2_pow{1.0};
    std::uint64_t steps{0};
};

// Standard bias-corrected Adam update applied in place to params.
// Throws NonFiniteGradient before touching any state.
void adam_step(AdamState& state, std::array<double, kParamCount>& params,
               const std::array<double, kParamCount>& grad, const AdamConfig& cfg);

} // namespace cpl
