#include "cpl/kernels.hpp"

#include <cstdint>

#include "cpl/detail/loss_eval.hpp"

namespace cpl {

namespace detail {

void validate_batch_inputs(const ParamVector13& omega,
                           std::span<const ImageObservation> observations) {
    omega.validate();
    for (const ImageObservation& o : observations) {
        if (!(std::isfinite(o.u) && std::isfinite(o.v)))
            throw InvalidParams("observation has non-finite pixel coordinates");
        if (!(std::isfinite(o.d) && o.d > 0.0))
            throw DisparityZeroOrNegative("observation disparity must be > 0");
    }
}

} // namespace detail

double sequential_sum(std::span<const double> values) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
}

static void reconstruct_one(const std::array<double, kParamCount>& w, const ImageObservation& o,
                            WorldPoint& out) {
    detail::recon_components(w, o.u, o.v, o.d, out.X, out.Y, out.Z);
}

void reconstruct_batch_serial(const ParamVector13& omega,
                              std::span<const ImageObservation> observations,
                              std::span<WorldPoint> out) {
    detail::validate_batch_inputs(omega, observations);
    if (out.size() != observations.size())
        throw LengthMismatch("output span size does not match observation count");
    for (std::size_t i = 0; i < observations.size(); ++i)
        reconstruct_one(omega.entries, observations[i], out[i]);
}

void reconstruct_batch(const ParamVector13& omega, std::span<const ImageObservation> observations,
                       std::span<WorldPoint> out) {
    detail::validate_batch_inputs(omega, observations);
    if (out.size() != observations.size())
        throw LengthMismatch("output span size does not match observation count");
    const std::int64_t n = static_cast<std::int64_t>(observations.size());
#pragma omp parallel for schedule(static) if (n >= static_cast<std::int64_t>(kParallelGrain))
    for (std::int64_t i = 0; i < n; ++i)
        reconstruct_one(omega.entries, observations[i], out[i]);
}

void cpl_point_terms_serial(const ParamVector13& omega_true, const ParamVector13& omega_pred,
                            std::span<const ImageObservation> observations,
                            std::span<double> out) {
    detail::validate_batch_inputs(omega_true, observations);
    omega_pred.validate();
    if (out.size() != observations.size())
        throw LengthMismatch("output span size does not match observation count");
    for (std::size_t i = 0; i < observations.size(); ++i) {
        const detail::Recon t = detail::true_reconstruction(omega_true.entries, observations[i]);
        out[i] = detail::point_term_plain(omega_pred.entries, observations[i], t, nullptr);
    }
}

void cpl_point_terms(const ParamVector13& omega_true, const ParamVector13& omega_pred,
                     std::span<const ImageObservation> observations, std::span<double> out) {
    detail::validate_batch_inputs(omega_true, observations);
    omega_pred.validate();
    if (out.size() != observations.size())
        throw LengthMismatch("output span size does not match observation count");
    const std::int64_t n = static_cast<std::int64_t>(observations.size());
#pragma omp parallel for schedule(static) if (n >= static_cast<std::int64_t>(kParallelGrain))
    for (std::int64_t i = 0; i < n; ++i) {
        const detail::Recon t = detail::true_reconstruction(omega_true.entries, observations[i]);
        out[i] = detail::point_term_plain(omega_pred.entries, observations[i], t, nullptr);
    }
}

static void breakdown_point(const ParamVector13& omega_true, const ParamVector13& omega_pred,
                            const ImageObservation& o, BreakdownMode mode, std::size_t i,
                            std::size_t n, std::span<double> out) {
    const detail::Recon t = detail::true_reconstruction(omega_true.entries, o);
    for (std::size_t j = 0; j < kParamCount; ++j) {
        double term = 0.0;
        if (!(mode == BreakdownMode::kTenParam && j >= kX))
            term = detail::point_term_disentangled(omega_true.entries, omega_pred.entries[j], j, o,
                                                   t, nullptr);
        out[j * n + i] = term;
    }
}

void breakdown_point_terms_serial(const ParamVector13& omega_true, const ParamVector13& omega_pred,
                                  std::span<const ImageObservation> observations,
                                  BreakdownMode mode, std::span<double> out) {
    detail::validate_batch_inputs(omega_true, observations);
    omega_pred.validate();
    const std::size_t n = observations.size();
    if (out.size() != kParamCount * n)
        throw LengthMismatch("output span must hold 13 * n entries");
    for (std::size_t i = 0; i < n; ++i)
        breakdown_point(omega_true, omega_pred, observations[i], mode, i, n, out);
}

void breakdown_point_terms(const ParamVector13& omega_true, const ParamVector13& omega_pred,
                           std::span<const ImageObservation> observations, BreakdownMode mode,
                           std::span<double> out) {
    detail::validate_batch_inputs(omega_true, observations);
    omega_pred.validate();
    const std::size_t n = observations.size();
    if (out.size() != kParamCount * n)
        throw LengthMismatch("output span must hold 13 * n entries");
    const std::int64_t count = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static) if (count >= static_cast<std::int64_t>(kParallelGrain))
    for (std::int64_t i = 0; i < count; ++i)
        breakdown_point(omega_true, omega_pred, observations[i], mode, static_cast<std::size_t>(i),
                        n, out);
}

} // namespace cpl
