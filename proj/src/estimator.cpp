#include "cpl/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cpl/gradient.hpp"
#include "cpl/rng.hpp"

namespace cpl {

std::array<bool, kParamCount> adaptive_active_terms(const std::array<double, kParamCount>& ema,
                                                    const WeightConfig& cfg) {
    double max_ema = 0.0;
    for (double m : ema) max_ema = std::max(max_ema, m);
    const double floor = std::max(cfg.epsilon, cfg.active_rel_threshold * max_ema);
    std::array<bool, kParamCount> active{};
    for (std::size_t i = 0; i < kParamCount; ++i) active[i] = ema[i] > floor;
    return active;
}

AdaptiveWeights update_adaptive_weights(WeightState& state, const LossBreakdown& breakdown,
                                        const WeightConfig& cfg) {
    for (std::size_t i = 0; i < kParamCount; ++i)
        state.ema[i] = cfg.decay * state.ema[i] + (1.0 - cfg.decay) * breakdown.terms[i];
    state.updates += 1;
    if (state.updates <= cfg.burn_in) return AdaptiveWeights::uniform();

    // Balance only the active set. Structurally dead terms and terms that
    // have already converged keep weight 1: their near-zero EMAs would
    // otherwise dominate the normalization and starve whatever loss is
    // still left.
    const std::array<bool, kParamCount> active = adaptive_active_terms(state.ema, cfg);
    std::array<double, kParamCount> raw{};
    double total = 0.0;
    double n_active = 0.0;
    for (std::size_t i = 0; i < kParamCount; ++i) {
        if (active[i]) {
            raw[i] = 1.0 / (state.ema[i] + cfg.epsilon);
            total += raw[i];
            n_active += 1.0;
        }
    }
    AdaptiveWeights w;
    if (n_active == 0.0) return w;
    for (std::size_t i = 0; i < kParamCount; ++i)
        if (active[i]) w.alpha[i] = n_active * raw[i] / total;
    return w;
}

namespace {

std::array<double, kParamCount> nmae_per_param(const ParamVector13& truth,
                                               const ParamVector13& estimate) {
    std::array<double, kParamCount> out{};
    for (std::size_t i = 0; i < kParamCount; ++i) {
        const double diff = std::abs(estimate[i] - truth[i]);
        const double denom = std::abs(truth[i]);
        out[i] = denom > 0.0 ? diff / denom : diff;
    }
    return out;
}

} // namespace

EstimateResult estimate(const Dataset& dataset, const ParamVector13& init,
                        const EstimatorConfig& cfg) {
    cfg.validate();
    if (dataset.observations.empty()) throw EmptyPixelSet("dataset has no correspondences");
    init.validate();

    const ParamVector13& truth = dataset.ground_truth;
    const std::span<const ImageObservation> all_obs(dataset.observations);

    // Adam runs on coordinates normalized by the init magnitude (floored at
    // 1), so its per-step cap of ~learning_rate moves every parameter in
    // relative rather than absolute units. Pixel-scale parameters would
    // otherwise be unreachable within the step budget.
    std::array<double, kParamCount> scale{};
    std::array<double, kParamCount> x{};
    for (std::size_t i = 0; i < kParamCount; ++i) {
        scale[i] = std::max(1.0, std::abs(init[i]));
        x[i] = init[i] / scale[i];
    }

    ParamVector13 omega = init;
    AdamState adam;
    WeightState weight_state;
    AdaptiveWeights weights = AdaptiveWeights::uniform();

    LossOptions grad_options;
    grad_options.variant = LossVariant::kWeighted;
    grad_options.mode = cfg.mode;
    grad_options.weights = weights;

    EstimateResult result;
    LossBreakdown bd = cpl_disentangled(truth, omega, all_obs, cfg.mode);
    const double initial_loss = bd.aggregate;
    result.loss_trace.reserve(cfg.max_iterations + 1);
    result.loss_trace.push_back(bd.aggregate);
    result.omega_hat = omega;
    result.final_breakdown = bd;
    result.best_loss = bd.aggregate;

    if (bd.aggregate == 0.0) {
        result.converged = true;
        result.nmae = nmae_per_param(truth, result.omega_hat);
        result.final_weights = weights;
        result.weight_ema = weight_state.ema;
        return result;
    }

    Rng batch_rng(Rng::derive(cfg.seed, 0xBA7C8ULL));
    std::vector<std::size_t> order(dataset.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::size_t cursor = order.size(); // force a shuffle on first use
    std::vector<ImageObservation> batch;
    batch.reserve(std::min(cfg.batch_size, dataset.size()));

    std::size_t patience = 0;
    for (std::size_t it = 0; it < cfg.max_iterations; ++it) {
        if (cursor >= order.size()) {
            batch_rng.shuffle(std::span<std::size_t>(order));
            cursor = 0;
        }
        batch.clear();
        for (; cursor < order.size() && batch.size() < cfg.batch_size; ++cursor)
            batch.push_back(dataset.observations[order[cursor]]);

        grad_options.weights = weights;
        Gradient13 g = grad_cpl(truth, omega, batch, grad_options);
        if (g.at_kink()) result.kink_iterations += 1;
        for (std::size_t i = 0; i < kParamCount; ++i) {
            if (cfg.fixed[i]) {
                g.d[i] = 0.0;
            } else {
                g.d[i] *= scale[i]; // chain rule into normalized coordinates
            }
        }

        adam_step(adam, x, g.d, cfg.adam);
        for (std::size_t i = 0; i < kParamCount; ++i)
            omega[i] = x[i] * scale[i];
        result.iterations = it + 1;

        // Leaving the feasible region (e.g. disparity scale driven negative)
        // is divergence, not a projection error.
        if (!omega.valid()) throw DivergenceDetected("parameters left the valid domain");

        bd = cpl_disentangled(truth, omega, all_obs, cfg.mode);
        result.loss_trace.push_back(bd.aggregate);
        if (bd.aggregate > cfg.divergence_factor * initial_loss)
            throw DivergenceDetected("loss exceeded divergence threshold");

        if (bd.aggregate < result.best_loss * (1.0 - cfg.early_stop_rel_tol)) {
            result.best_loss = bd.aggregate;
            result.omega_hat = omega;
            result.final_breakdown = bd;
            patience = 0;
        } else {
            patience += 1;
        }

        if (cfg.weighting == WeightingMode::kAdaptive)
            weights = update_adaptive_weights(weight_state, bd, cfg.weight_cfg);

        if (result.best_loss == 0.0) {
            result.converged = true;
            break;
        }
        if (patience >= cfg.early_stop_patience) {
            result.converged = true;
            break;
        }
    }

    result.nmae = nmae_per_param(truth, result.omega_hat);
    result.final_weights = weights;
    result.weight_ema = weight_state.ema;
    return result;
}

} // namespace cpl
