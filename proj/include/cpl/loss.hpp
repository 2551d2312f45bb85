#pragma once

#include <span>

#include "cpl/param_vector.hpp"
#include "cpl/projection.hpp"

namespace cpl {

// How the 13-term breakdown treats the world-coordinate entries.
// kThirteenTerm: the X/Y/Z heads are direct predictions, compared against
// the true vector's explicit X/Y/Z values.
// kTenParam: the X/Y/Z terms are defined as zero; only the 10 camera
// parameters carry loss. This is the estimator's default.
enum class BreakdownMode { kThirteenTerm, kTenParam };

enum class LossVariant { kPlain, kDisentangled, kWeighted };

// Per-parameter loss terms plus their uniform mean. Terms are world-space
// MAE contributions in meters.
struct LossBreakdown {
    std::array<double, kParamCount> terms{};
    double aggregate{0.0};
};

// Per-term weights, normalized so that the uniform weighting is all ones
// (sum = 13).
struct AdaptiveWeights {
    std::array<double, kParamCount> alpha{make_uniform()};

    static constexpr std::array<double, kParamCount> make_uniform() {
        std::array<double, kParamCount> a{};
        a.fill(1.0);
        return a;
    }
    static AdaptiveWeights uniform() { return {}; }

    double sum() const {
        double s = 0.0;
        for (double a : alpha) s += a;
        return s;
    }
    void validate() const {
        for (double a : alpha)
            if (!(std::isfinite(a) && a > 0.0))
                throw NonPositiveWeight("adaptive weights must be positive and finite");
    }
};

struct LossOptions {
    LossVariant variant = LossVariant::kDisentangled;
    BreakdownMode mode = BreakdownMode::kThirteenTerm;
    AdaptiveWeights weights{};
};

// World-space reconstruction from the first 10 entries of omega. The pixel
// overload uses omega's disparity entry directly; the observation overload
// treats it as a multiplicative scale on the observation's stored disparity.
WorldPoint reconstruct(const ParamVector13& omega, Pixel pixel);
WorldPoint reconstruct(const ParamVector13& omega, const ImageObservation& obs);

// Plain camera projection loss: mean over points of the mean absolute
// difference across the three world components of the two reconstructions.
double cpl_plain(const ParamVector13& omega_true, const ParamVector13& omega_pred,
           std::span<const Pixel> pixels);
double cpl_plain(const ParamVector13& omega_true, const ParamVector13& omega_pred,
           std::span<const ImageObservation> observations);

// Disentangled loss: term i evaluates the plain loss against a hybrid vector
// that takes entry i from omega_pred and everything else from omega_true, so
// errors cannot bleed between parameters.
LossBreakdown cpl_disentangled(const ParamVector13& omega_true, const ParamVector13& omega_pred,
                               std::span<const Pixel> pixels,
                               BreakdownMode mode = BreakdownMode::kThirteenTerm);
LossBreakdown cpl_disentangled(const ParamVector13& omega_true, const ParamVector13& omega_pred,
                               std::span<const ImageObservation> observations,
                               BreakdownMode mode = BreakdownMode::kThirteenTerm);

// Weighted aggregate, normalized so uniform weights reproduce the mean.
double cpl_weighted(const LossBreakdown& breakdown, const AdaptiveWeights& weights);

// Value of the selected loss variant; the single dispatch point shared by
// the finite-difference oracle and the estimator.
double loss_value(const ParamVector13& omega_true, const ParamVector13& omega_pred,
                  std::span<const ImageObservation> observations, const LossOptions& options);

// Normalized mean absolute error: MAE(y, y_hat) / mean(|y|).
double nmae(std::span<const double> y_true, std::span<const double> y_pred);

} // namespace cpl
