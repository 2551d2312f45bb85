#pragma once

#include <array>
#include <cstddef>
#include <string_view>

#include "cpl/types.hpp"

namespace cpl {

// Fixed index order of the 13-entry parameter vector. The ordering is part
// of the public contract; serialized artifacts rely on it.
enum ParamIndex : std::size_t {
    kFx = 0,
    kFy = 1,
    kU0 = 2,
    kV0 = 3,
    kB = 4,
    kD = 5,
    kThetaP = 6,
    kTx = 7,
    kTy = 8,
    kTz = 9,
    kX = 10,
    kY = 11,
    kZ = 12,
};

inline constexpr std::size_t kParamCount = 13;

inline constexpr std::array<std::string_view, kParamCount> kParamNames = {
    "f_x", "f_y", "u_0", "v_0", "b", "d", "theta_p", "t_x", "t_y", "t_z", "X", "Y", "Z"};

struct ParamVector13 {
    std::array<double, kParamCount> entries{};

    double& operator[](std::size_t i) { return entries[i]; }
    double operator[](std::size_t i) const { return entries[i]; }

    bool operator==(const ParamVector13&) const = default;

    // Packs camera parameters, a disparity entry, and a world point into the
    // fixed order; unpacking is lossless.
    static ParamVector13 pack(const CameraParams& params, double d, const WorldPoint& point) {
        ParamVector13 w;
        w.entries = {params.intrinsics.f_x, params.intrinsics.f_y, params.intrinsics.u_0,
                     params.intrinsics.v_0, params.rig.b,          d,
                     params.extrinsics.theta_p, params.extrinsics.t_x, params.extrinsics.t_y,
                     params.extrinsics.t_z, point.X, point.Y, point.Z};
        return w;
    }

    CameraParams camera_params() const {
        CameraParams p;
        p.intrinsics = {entries[kFx], entries[kFy], entries[kU0], entries[kV0]};
        p.rig = {entries[kB]};
        p.extrinsics.theta_p = entries[kThetaP];
        p.extrinsics.t_x = entries[kTx];
        p.extrinsics.t_y = entries[kTy];
        p.extrinsics.t_z = entries[kTz];
        return p;
    }

    double disparity() const { return entries[kD]; }
    WorldPoint world_point() const { return WorldPoint(entries[kX], entries[kY], entries[kZ]); }

    // Valid when the camera-parameter slice passes its invariants and the
    // disparity entry is positive.
    bool valid() const {
        return camera_params().valid() && std::isfinite(entries[kD]) && entries[kD] > 0.0 &&
               std::isfinite(entries[kX]) && std::isfinite(entries[kY]) &&
               std::isfinite(entries[kZ]);
    }
    void validate() const {
        camera_params().validate();
        if (!(std::isfinite(entries[kD]) && entries[kD] > 0.0))
            throw DisparityZeroOrNegative("parameter vector disparity entry must be > 0");
        if (!(std::isfinite(entries[kX]) && std::isfinite(entries[kY]) &&
              std::isfinite(entries[kZ])))
            throw InvalidParams("parameter vector X/Y/Z entries must be finite");
    }
};

} // namespace cpl
