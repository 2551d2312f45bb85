#pragma once

#include <span>

#include "cpl/loss.hpp"

// Data-parallel batch kernels. Each kernel has an OpenMP-parallel default
// and a _serial reference twin. Parallel variants only ever write disjoint
// output slots and leave every reduction to a fixed-order sequential pass,
// so they are bitwise identical to the serial reference at any thread count.

namespace cpl {

// Minimum batch size before the parallel variants spin up a team.
inline constexpr std::size_t kParallelGrain = 256;

// out[i] = world reconstruction of observations[i] under omega (disparity
// entry acts as a scale on each observation's stored disparity).
void reconstruct_batch(const ParamVector13& omega, std::span<const ImageObservation> observations,
                       std::span<WorldPoint> out);
void reconstruct_batch_serial(const ParamVector13& omega,
                              std::span<const ImageObservation> observations,
                              std::span<WorldPoint> out);

// out[i] = plain per-point loss term for observations[i].
void cpl_point_terms(const ParamVector13& omega_true, const ParamVector13& omega_pred,
                     std::span<const ImageObservation> observations, std::span<double> out);
void cpl_point_terms_serial(const ParamVector13& omega_true, const ParamVector13& omega_pred,
                            std::span<const ImageObservation> observations,
                            std::span<double> out);

// Term-major matrix of disentangled contributions: out[j * n + i] is point
// i's contribution to term j. out must hold 13 * n entries.
void breakdown_point_terms(const ParamVector13& omega_true, const ParamVector13& omega_pred,
                           std::span<const ImageObservation> observations, BreakdownMode mode,
                           std::span<double> out);
void breakdown_point_terms_serial(const ParamVector13& omega_true, const ParamVector13& omega_pred,
                                  std::span<const ImageObservation> observations,
                                  BreakdownMode mode, std::span<double> out);

// Fixed-order (left-to-right) sum; the only reduction used on kernel output.
double sequential_sum(std::span<const double> values);

namespace detail {
// Shared input validation: parameter invariants plus positive, finite
// per-observation disparities. Throws before any parallel region starts.
void validate_batch_inputs(const ParamVector13& omega,
                           std::span<const ImageObservation> observations);
} // namespace detail

} // namespace cpl
