#include "cpl/loss.hpp"

#include <cmath>
#include <vector>

#include "cpl/detail/loss_eval.hpp"
#include "cpl/kernels.hpp"

namespace cpl {

static std::vector<ImageObservation> pixels_to_observations(std::span<const Pixel> pixels) {
    std::vector<ImageObservation> obs(pixels.size());
    for (std::size_t i = 0; i < pixels.size(); ++i) obs[i] = {pixels[i].u, pixels[i].v, 1.0};
    return obs;
}

WorldPoint reconstruct(const ParamVector13& omega, const ImageObservation& obs) {
    omega.validate();
    if (!(std::isfinite(obs.d) && obs.d > 0.0))
        throw DisparityZeroOrNegative("observation disparity must be > 0");
    double X = 0.0, Y = 0.0, Z = 0.0;
    detail::recon_components(omega.entries, obs.u, obs.v, obs.d, X, Y, Z);
    return WorldPoint(X, Y, Z);
}

WorldPoint reconstruct(const ParamVector13& omega, Pixel pixel) {
    return reconstruct(omega, ImageObservation{pixel.u, pixel.v, 1.0});
}

double cpl_plain(const ParamVector13& omega_true, const ParamVector13& omega_pred,
           std::span<const ImageObservation> observations) {
    if (observations.empty()) throw EmptyPixelSet("loss requires at least one point");
    std::vector<double> terms(observations.size());
    cpl_point_terms(omega_true, omega_pred, observations, terms);
    return sequential_sum(terms) / static_cast<double>(terms.size());
}

double cpl_plain(const ParamVector13& omega_true, const ParamVector13& omega_pred,
           std::span<const Pixel> pixels) {
    const auto obs = pixels_to_observations(pixels);
    return cpl_plain(omega_true, omega_pred, std::span<const ImageObservation>(obs));
}

LossBreakdown cpl_disentangled(const ParamVector13& omega_true, const ParamVector13& omega_pred,
                               std::span<const ImageObservation> observations,
                               BreakdownMode mode) {
    if (observations.empty()) throw EmptyPixelSet("loss requires at least one point");
    const std::size_t n = observations.size();
    std::vector<double> matrix(kParamCount * n);
    breakdown_point_terms(omega_true, omega_pred, observations, mode, matrix);

    LossBreakdown b;
    for (std::size_t j = 0; j < kParamCount; ++j) {
        const std::span<const double> row(matrix.data() + j * n, n);
        b.terms[j] = sequential_sum(row) / static_cast<double>(n);
    }
    double acc = 0.0;
    for (std::size_t j = 0; j < kParamCount; ++j) acc += b.terms[j];
    b.aggregate = acc / 13.0;
    return b;
}

LossBreakdown cpl_disentangled(const ParamVector13& omega_true, const ParamVector13& omega_pred,
                               std::span<const Pixel> pixels, BreakdownMode mode) {
    const auto obs = pixels_to_observations(pixels);
    return cpl_disentangled(omega_true, omega_pred, std::span<const ImageObservation>(obs), mode);
}

double cpl_weighted(const LossBreakdown& breakdown, const AdaptiveWeights& weights) {
    weights.validate();
    double acc = 0.0;
    for (std::size_t j = 0; j < kParamCount; ++j) acc += weights.alpha[j] * breakdown.terms[j];
    return acc / 13.0;
}

double loss_value(const ParamVector13& omega_true, const ParamVector13& omega_pred,
                  std::span<const ImageObservation> observations, const LossOptions& options) {
    switch (options.variant) {
    case LossVariant::kPlain:
        return cpl_plain(omega_true, omega_pred, observations);
    case LossVariant::kDisentangled:
        return cpl_disentangled(omega_true, omega_pred, observations, options.mode).aggregate;
    case LossVariant::kWeighted:
        return cpl_weighted(cpl_disentangled(omega_true, omega_pred, observations, options.mode),
                            options.weights);
    }
    throw InvalidArgument("unknown loss variant");
}

double nmae(std::span<const double> y_true, std::span<const double> y_pred) {
    if (y_true.size() != y_pred.size() || y_true.empty())
        throw LengthMismatch("nmae requires equal-length, non-empty inputs");
    const double n = static_cast<double>(y_true.size());
    double abs_err = 0.0;
    double abs_true = 0.0;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        abs_err += std::abs(y_true[i] - y_pred[i]);
        abs_true += std::abs(y_true[i]);
    }
    const double mae = abs_err / n;
    const double denom = abs_true / n;
    if (denom == 0.0) throw ZeroDenominator("nmae undefined when mean(|y_true|) is zero");
    return mae / denom;
}

} // namespace cpl
