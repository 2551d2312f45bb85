#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace cpl {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidParams : Error {
    using Error::Error;
};
struct DisparityZeroOrNegative : Error {
    using Error::Error;
};
struct NonFiniteValue : Error {
    using Error::Error;
};
struct EmptyPixelSet : Error {
    using Error::Error;
};
struct NonPositiveWeight : Error {
    using Error::Error;
};
struct ZeroDenominator : Error {
    using Error::Error;
};
struct LengthMismatch : Error {
    using Error::Error;
};
struct NonFiniteGradient : Error {
    using Error::Error;
};
struct DivergenceDetected : Error {
    using Error::Error;
};
struct InvalidArgument : Error {
    using Error::Error;
};
struct IoError : Error {
    using Error::Error;
};
struct SchemaError : Error {
    using Error::Error;
};
struct ConsistencyError : Error {
    using Error::Error;
};

inline constexpr double kPi = 3.14159265358979323846;

inline double deg2rad(double deg) { return deg * kPi / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / kPi; }

// Wraps into [-pi, pi]; values already inside pass through bit-exactly.
inline double normalize_angle(double rad) { return std::remainder(rad, 2.0 * kPi); }

// Focal lengths and principal point, all in pixels.
struct Intrinsics {
    double f_x{0.0};
    double f_y{0.0};
    double u_0{0.0};
    double v_0{0.0};

    bool valid() const {
        return std::isfinite(f_x) && std::isfinite(f_y) && std::isfinite(u_0) &&
               std::isfinite(v_0) && f_x > 0.0 && f_y > 0.0 && u_0 >= 0.0 && v_0 >= 0.0;
    }
    void validate() const {
        if (!valid()) throw InvalidParams("intrinsics invalid: require f_x, f_y > 0 and u_0, v_0 >= 0");
    }
};

// Pitch-only rotation plus translation. Pitch is stored in radians and is
// wrapped into [-pi, pi] on construction.
struct Extrinsics {
    double theta_p{0.0};
    double t_x{0.0};
    double t_y{0.0};
    double t_z{0.0};

    Extrinsics() = default;
    Extrinsics(double pitch_rad, double tx, double ty, double tz)
        : theta_p(normalize_angle(pitch_rad)), t_x(tx), t_y(ty), t_z(tz) {}

    bool valid() const {
        return std::isfinite(theta_p) && std::isfinite(t_x) && std::isfinite(t_y) &&
               std::isfinite(t_z);
    }
    void validate() const {
        if (!valid()) throw InvalidParams("extrinsics invalid: non-finite entry");
    }
};

// Stereo rig geometry.
struct RigParams {
    double b{0.0}; // baseline, meters

    bool valid() const { return std::isfinite(b) && b > 0.0; }
    void validate() const {
        if (!valid()) throw InvalidParams("rig invalid: baseline must be > 0");
    }
};

// The 9 scalar camera parameters; the 10th (disparity) lives per observation.
struct CameraParams {
    Intrinsics intrinsics;
    RigParams rig;
    Extrinsics extrinsics;

    bool valid() const { return intrinsics.valid() && rig.valid() && extrinsics.valid(); }
    void validate() const {
        intrinsics.validate();
        rig.validate();
        extrinsics.validate();
    }
};

// One stereo measurement: left-image pixel plus disparity, all in pixels.
struct ImageObservation {
    double u{0.0};
    double v{0.0};
    double d{0.0};
};

// Camera frame: x forward (depth), y lateral, z vertical. Meters.
struct CameraPoint {
    double x_cam{0.0};
    double y_cam{0.0};
    double z_cam{0.0};
};

// World frame point, meters. Construction rejects non-finite coordinates.
struct WorldPoint {
    double X{0.0};
    double Y{0.0};
    double Z{0.0};

    WorldPoint() = default;
    WorldPoint(double x, double y, double z) : X(x), Y(y), Z(z) {
        if (!(std::isfinite(X) && std::isfinite(Y) && std::isfinite(Z)))
            throw NonFiniteValue("world point has non-finite coordinate");
    }
};

// A left-image pixel without disparity.
struct Pixel {
    double u{0.0};
    double v{0.0};
};

} // namespace cpl
