#include "cpl/adam.hpp"

#include <cmath>

namespace cpl {

void adam_step(AdamState& state, std::array<double, kParamCount>& params,
               const std::array<double, kParamCount>& grad, const AdamConfig& cfg) {
    cfg.validate();
    for (double g : grad)
        if (!std::isfinite(g)) throw NonFiniteGradient("gradient entry is not finite");

    state.steps += 1;
    state.beta1_pow *= cfg.beta1;
    state.beta2_pow *= cfg.beta2;
    const double m_correction = 1.0 - state.beta1_pow;
    const double v_correction = 1.0 - state.beta2_pow;

    for (std::size_t i = 0; i < kParamCount; ++i) {
        state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * grad[i];
        state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * grad[i] * grad[i];
        const double m_hat = state.m[i] / m_correction;
        const double v_hat = state.v[i] / v_correction;
        params[i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
    }
}

} // namespace cpl
