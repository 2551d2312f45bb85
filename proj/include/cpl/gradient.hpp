#pragma once

#include <span>

#include "cpl/loss.hpp"

namespace cpl {

// Derivative of the selected loss with respect to each omega entry.
// kink_hits counts absolute-difference arguments that were exactly zero
// during evaluation; their subgradient is taken as 0 and the result is
// flagged so callers can tell the gradient is one-sided there.
struct Gradient13 {
    std::array<double, kParamCount> d{};
    std::size_t kink_hits{0};

    bool at_kink() const { return kink_hits > 0; }
};

// Exact forward-mode gradient of the selected loss with respect to
// omega_pred: one dual pass per entry, 13 passes total. Passes run in
// parallel; each writes its own slot.
Gradient13 grad_cpl(const ParamVector13& omega_true, const ParamVector13& omega_pred,
                    std::span<const ImageObservation> observations,
                    const LossOptions& options = {});
Gradient13 grad_cpl(const ParamVector13& omega_true, const ParamVector13& omega_pred,
                    std::span<const Pixel> pixels, const LossOptions& options = {});

// Serial reference for the parallel pass loop; bitwise-identical output.
Gradient13 grad_cpl_serial(const ParamVector13& omega_true, const ParamVector13& omega_pred,
                           std::span<const ImageObservation> observations,
                           const LossOptions& options = {});

// Central-difference oracle, step h scaled per entry by max(1, |omega_i|).
Gradient13 finite_difference_grad(const ParamVector13& omega_true,
                                  const ParamVector13& omega_pred,
                                  std::span<const ImageObservation> observations, double h = 1e-6,
                                  const LossOptions& options = {});
Gradient13 finite_difference_grad(const ParamVector13& omega_true,
                                  const ParamVector13& omega_pred, std::span<const Pixel> pixels,
                                  double h = 1e-6, const LossOptions& options = {});

// Distance of the evaluation from the nearest data-dependent kink: the
// smallest nonzero |absolute-difference| argument. Arguments sitting exactly
// at zero are constants of the evaluation (a hybrid never moves every world
// component), where the dual subgradient and central differences agree
// exactly; near-zero arguments are the ones a finite-difference step can
// push across the kink.
struct SmoothnessReport {
    double min_nonzero_abs_arg{0.0};
    std::size_t kink_hits{0};

    bool smooth(double margin) const { return min_nonzero_abs_arg > margin; }
};

SmoothnessReport probe_smoothness(const ParamVector13& omega_true,
                                  const ParamVector13& omega_pred,
                                  std::span<const ImageObservation> observations,
                                  const LossOptions& options = {});

} // namespace cpl
