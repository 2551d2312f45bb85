#include "cpl/gradient.hpp"

#include <cmath>
#include <cstdint>
#include <vector>

#include "cpl/detail/loss_eval.hpp"
#include "cpl/kernels.hpp"

namespace cpl {

namespace {

std::vector<ImageObservation> pixels_to_observations(std::span<const Pixel> pixels) {
    std::vector<ImageObservation> obs(pixels.size());
    for (std::size_t i = 0; i < pixels.size(); ++i) obs[i] = {pixels[i].u, pixels[i].v, 1.0};
    return obs;
}

void validate_grad_inputs(const ParamVector13& omega_true, const ParamVector13& omega_pred,
                          std::span<const ImageObservation> observations,
                          const LossOptions& options) {
    if (observations.empty()) throw EmptyPixelSet("gradient requires at least one point");
    detail::validate_batch_inputs(omega_true, observations);
    omega_pred.validate();
    if (options.variant == LossVariant::kWeighted) options.weights.validate();
}

std::vector<detail::Recon> true_recons(const ParamVector13& omega_true,
                                       std::span<const ImageObservation> observations) {
    std::vector<detail::Recon> tr(observations.size());
    for (std::size_t i = 0; i < observations.size(); ++i)
        tr[i] = detail::true_reconstruction(omega_true.entries, observations[i]);
    return tr;
}

// One dual pass: seed entry `seed` of omega_pred and evaluate the loss.
Dual seeded_pass(const ParamVector13& omega_true, const ParamVector13& omega_pred,
                 std::span<const ImageObservation> observations,
                 std::span<const detail::Recon> tr, const LossOptions& options, std::size_t seed,
                 detail::EvalStats* stats) {
    std::array<Dual, kParamCount> w{};
    for (std::size_t k = 0; k < kParamCount; ++k)
        w[k] = (k == seed) ? Dual::seeded(omega_pred.entries[k]) : Dual(omega_pred.entries[k]);
    return detail::eval_loss(omega_true.entries, w, observations, tr, options.variant,
                             options.mode, options.weights.alpha, stats);
}

} // namespace

Gradient13 grad_cpl_serial(const ParamVector13& omega_true, const ParamVector13& omega_pred,
                           std::span<const ImageObservation> observations,
                           const LossOptions& options) {
    validate_grad_inputs(omega_true, omega_pred, observations, options);
    const auto tr = true_recons(omega_true, observations);
    Gradient13 g;
    detail::EvalStats stats;
    for (std::size_t s = 0; s < kParamCount; ++s) {
        const Dual L = seeded_pass(omega_true, omega_pred, observations, tr, options, s,
                                   s == 0 ? &stats : nullptr);
        g.d[s] = L.deriv;
    }
    g.kink_hits = stats.kink_hits;
    return g;
}

Gradient13 grad_cpl(const ParamVector13& omega_true, const ParamVector13& omega_pred,
                    std::span<const ImageObservation> observations, const LossOptions& options) {
    validate_grad_inputs(omega_true, omega_pred, observations, options);
    const auto tr = true_recons(omega_true, observations);
    Gradient13 g;

    // Kink statistics are a property of the value path, which is identical
    // in every pass; one double evaluation collects them.
    detail::EvalStats stats;
    detail::eval_loss(omega_true.entries, omega_pred.entries, observations, tr, options.variant,
                      options.mode, options.weights.alpha, &stats);
    g.kink_hits = stats.kink_hits;

    const std::int64_t passes = static_cast<std::int64_t>(kParamCount);
    if (options.variant == LossVariant::kPlain) {
#pragma omp parallel for schedule(static)
        for (std::int64_t s = 0; s < passes; ++s) {
            const Dual L = seeded_pass(omega_true, omega_pred, observations, tr, options,
                                       static_cast<std::size_t>(s), nullptr);
            g.d[static_cast<std::size_t>(s)] = L.deriv;
        }
        return g;
    }

    // Disentangled variants: term i depends on omega_pred[i] alone, so in
    // pass j every term but j is a structural zero in the derivative and is
    // skipped. The result is bit-identical to the full 13-pass evaluation.
    const double n = static_cast<double>(observations.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t s = 0; s < passes; ++s) {
        const std::size_t j = static_cast<std::size_t>(s);
        if (options.mode == BreakdownMode::kTenParam && j >= kX) {
            g.d[j] = 0.0;
            continue;
        }
        const Dual pred = Dual::seeded(omega_pred.entries[j]);
        Dual term_sum(0.0);
        for (std::size_t i = 0; i < observations.size(); ++i)
            term_sum = term_sum + detail::point_term_disentangled(omega_true.entries, pred, j,
                                                                  observations[i], tr[i], nullptr);
        Dual term = term_sum / n;
        if (options.variant == LossVariant::kWeighted) term = options.weights.alpha[j] * term;
        g.d[j] = (term / 13.0).deriv;
    }
    return g;
}

Gradient13 grad_cpl(const ParamVector13& omega_true, const ParamVector13& omega_pred,
                    std::span<const Pixel> pixels, const LossOptions& options) {
    const auto obs = pixels_to_observations(pixels);
    return grad_cpl(omega_true, omega_pred, std::span<const ImageObservation>(obs), options);
}

Gradient13 finite_difference_grad(const ParamVector13& omega_true,
                                  const ParamVector13& omega_pred,
                                  std::span<const ImageObservation> observations, double h,
                                  const LossOptions& options) {
    if (!(std::isfinite(h) && h > 0.0))
        throw InvalidArgument("finite-difference step must be > 0");
    validate_grad_inputs(omega_true, omega_pred, observations, options);
    const auto tr = true_recons(omega_true, observations);

    const auto value_at = [&](const std::array<double, kParamCount>& w) {
        ParamVector13{w}.validate();
        return detail::eval_loss(omega_true.entries, w, observations, tr, options.variant,
                                 options.mode, options.weights.alpha, nullptr);
    };

    Gradient13 g;
    for (std::size_t i = 0; i < kParamCount; ++i) {
        const double scale = std::max(1.0, std::abs(omega_pred.entries[i]));
        const double step = h * scale;
        std::array<double, kParamCount> plus = omega_pred.entries;
        std::array<double, kParamCount> minus = omega_pred.entries;
        plus[i] += step;
        minus[i] -= step;
        g.d[i] = (value_at(plus) - value_at(minus)) / (2.0 * step);
    }
    return g;
}

Gradient13 finite_difference_grad(const ParamVector13& omega_true,
                                  const ParamVector13& omega_pred, std::span<const Pixel> pixels,
                                  double h, const LossOptions& options) {
    const auto obs = pixels_to_observations(pixels);
    return finite_difference_grad(omega_true, omega_pred,
                                  std::span<const ImageObservation>(obs), h, options);
}

SmoothnessReport probe_smoothness(const ParamVector13& omega_true,
                                  const ParamVector13& omega_pred,
                                  std::span<const ImageObservation> observations,
                                  const LossOptions& options) {
    validate_grad_inputs(omega_true, omega_pred, observations, options);
    const auto tr = true_recons(omega_true, observations);
    detail::EvalStats stats;
    detail::eval_loss(omega_true.entries, omega_pred.entries, observations, tr, options.variant,
                      options.mode, options.weights.alpha, &stats);
    return {stats.min_nonzero_abs_arg, stats.kink_hits};
}

} // namespace cpl
