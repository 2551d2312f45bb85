#pragma once

#include <array>
#include <limits>
#include <span>

#include "cpl/dual.hpp"
#include "cpl/loss.hpp"
#include "cpl/projection.hpp"

// Templated evaluation core shared by the value path, the forward-mode
// gradient, and the finite-difference oracle. Reduction order is fixed
// (ascending indices) everywhere so that all routes agree bitwise.

namespace cpl::detail {

struct EvalStats {
    std::size_t kink_hits{0};
    // Smallest nonzero |argument| seen; exact zeros are tallied separately
    // because their subgradient matches central differences exactly.
    double min_nonzero_abs_arg{std::numeric_limits<double>::infinity()};
};

// |x| with the exact-zero case treated as a kink: subgradient 0, recorded in
// stats. Zeros here are what make the MAE non-differentiable.
template <class T>
T abs_or_kink(const T& x, EvalStats* stats) {
    const double v = value_of(x);
    if (v > 0.0) {
        if (stats && v < stats->min_nonzero_abs_arg) stats->min_nonzero_abs_arg = v;
        return x;
    }
    if (v < 0.0) {
        if (stats && -v < stats->min_nonzero_abs_arg) stats->min_nonzero_abs_arg = -v;
        return -x;
    }
    if (stats) ++stats->kink_hits;
    return T(0.0);
}

struct Recon {
    double X{0.0}, Y{0.0}, Z{0.0};
};

// Reconstruction components under the first 10 entries of w. The effective
// disparity is w[kD] * d_ref: pixel-mode callers pass d_ref = 1 so w[kD] is
// the disparity itself; observation-mode callers pass the stored disparity
// so w[kD] acts as a shared scale.
template <class T>
void recon_components(const std::array<T, kParamCount>& w, double u, double v, double d_ref, T& X,
                      T& Y, T& Z) {
    const T d_eff = w[kD] * d_ref;
    T x_cam{}, y_cam{}, z_cam{};
    stereo_image_to_camera(w[kFx], w[kFy], w[kU0], w[kV0], w[kB], d_eff, u, v, x_cam, y_cam,
                           z_cam);
    camera_to_world_components(w[kThetaP], w[kTx], w[kTy], w[kTz], x_cam, y_cam, z_cam, X, Y, Z);
}

inline Recon true_reconstruction(const std::array<double, kParamCount>& w_true,
                                 const ImageObservation& o) {
    Recon r;
    recon_components(w_true, o.u, o.v, o.d, r.X, r.Y, r.Z);
    return r;
}

// One point's plain loss term: mean absolute difference across the three
// world components between the prediction under w_pred and the fixed true
// reconstruction.
template <class T>
T point_term_plain(const std::array<T, kParamCount>& w_pred, const ImageObservation& o,
                   const Recon& t, EvalStats* stats) {
    T X{}, Y{}, Z{};
    recon_components(w_pred, o.u, o.v, o.d, X, Y, Z);
    const T ax = abs_or_kink(X - t.X, stats);
    const T ay = abs_or_kink(Y - t.Y, stats);
    const T az = abs_or_kink(Z - t.Z, stats);
    return (ax + ay + az) / 3.0;
}

// One point's contribution to disentangled term j. For camera-parameter
// indices the hybrid takes entry j from the prediction and everything else
// from the truth, so the reconstructions differ through entry j alone. The
// world-coordinate heads are direct predictions: each side substitutes its
// own explicit value into the true reconstruction, leaving a single
// component in the absolute value (the other two are structurally zero).
template <class T>
T point_term_disentangled(const std::array<double, kParamCount>& w_true, const T& pred_entry,
                          std::size_t j, const ImageObservation& o, const Recon& t,
                          EvalStats* stats) {
    if (j >= kX) {
        const T a = abs_or_kink(pred_entry - w_true[j], stats);
        return a / 3.0;
    }
    std::array<T, kParamCount> hybrid{};
    for (std::size_t k = 0; k < kParamCount; ++k) hybrid[k] = T(w_true[k]);
    hybrid[j] = pred_entry;
    return point_term_plain(hybrid, o, t, stats);
}

// Selected-loss evaluation over a point set with precomputed true-side
// reconstructions. Serves as the serial reference for the batch kernels and
// as the per-seed pass of the forward-mode gradient.
template <class T>
T eval_loss(const std::array<double, kParamCount>& w_true,
            const std::array<T, kParamCount>& w_pred, std::span<const ImageObservation> obs,
            std::span<const Recon> true_recon, LossVariant variant, BreakdownMode mode,
            const std::array<double, kParamCount>& alpha, EvalStats* stats) {
    const std::size_t n = obs.size();
    if (variant == LossVariant::kPlain) {
        T sum(0.0);
        for (std::size_t i = 0; i < n; ++i)
            sum = sum + point_term_plain(w_pred, obs[i], true_recon[i], stats);
        return sum / static_cast<double>(n);
    }
    T acc(0.0);
    for (std::size_t j = 0; j < kParamCount; ++j) {
        T term(0.0);
        if (!(mode == BreakdownMode::kTenParam && j >= kX)) {
            T term_sum(0.0);
            for (std::size_t i = 0; i < n; ++i)
                term_sum = term_sum +
                           point_term_disentangled(w_true, w_pred[j], j, obs[i], true_recon[i],
                                                   stats);
            term = term_sum / static_cast<double>(n);
        }
        acc = acc + (variant == LossVariant::kWeighted ? alpha[j] * term : term);
    }
    return acc / 13.0;
}

} // namespace cpl::detail
