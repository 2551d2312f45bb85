#pragma once

#include <vector>

#include "cpl/adam.hpp"
#include "cpl/loss.hpp"
#include "cpl/scene.hpp"

namespace cpl {

enum class WeightingMode { kUniform, kAdaptive };

struct WeightConfig {
    double decay{0.99};
    std::size_t burn_in{10}; // iterations with uniform weights before adapting
    double epsilon{1e-8};
    // A term is balanced only while its EMA is within this factor of the
    // largest EMA; smaller ones (converged or structurally zero) keep
    // uniform weight instead of flooding the normalization with 1/epsilon.
    double active_rel_threshold{1e-3};
};

// Exponential moving average of each loss term.
struct WeightState {
    std::array<double, kParamCount> ema{};
    std::size_t updates{0};
};

// Terms the balancer currently treats as active.
std::array<bool, kParamCount> adaptive_active_terms(const std::array<double, kParamCount>& ema,
                                                    const WeightConfig& cfg = {});

// Inverse-EMA balancing over the active terms: alpha_i proportional to
// 1 / (ema_i + epsilon), normalized so the full weight vector sums to 13
// (inactive terms stay at 1). Uniform during burn-in.
AdaptiveWeights update_adaptive_weights(WeightState& state, const LossBreakdown& breakdown,
                                        const WeightConfig& cfg = {});

struct EstimatorConfig {
    AdamConfig adam{};
    std::size_t max_iterations{5000};
    std::size_t batch_size{16};
    std::size_t early_stop_patience{50};
    double early_stop_rel_tol{1e-10};
    WeightingMode weighting{WeightingMode::kUniform};
    BreakdownMode mode{BreakdownMode::kTenParam};
    WeightConfig weight_cfg{};
    std::array<bool, kParamCount> fixed{}; // entries held at their init value
    std::uint64_t seed{0};
    double divergence_factor{1e6};

    void validate() const {
        adam.validate();
        if (batch_size < 1) throw InvalidArgument("batch size must be >= 1");
        if (early_stop_patience < 1) throw InvalidArgument("patience must be >= 1");
        if (!(std::isfinite(early_stop_rel_tol) && early_stop_rel_tol >= 0.0))
            throw InvalidArgument("early-stop tolerance must be >= 0");
    }
};

struct EstimateResult {
    ParamVector13 omega_hat{};
    LossBreakdown final_breakdown{};                // at omega_hat, full dataset
    std::array<double, kParamCount> nmae{};         // per parameter vs ground truth
    std::size_t iterations{0};
    bool converged{false};
    double best_loss{0.0};
    std::vector<double> loss_trace;                 // uniform aggregate; [0] is the initial loss
    AdaptiveWeights final_weights{};
    std::array<double, kParamCount> weight_ema{};
    std::size_t kink_iterations{0};
};

// Recovers camera parameters from stereo correspondences by mini-batch Adam
// on the disentangled projection loss. Deterministic in (dataset, init, cfg).
EstimateResult estimate(const Dataset& dataset, const ParamVector13& init,
                        const EstimatorConfig& cfg);

} // namespace cpl
