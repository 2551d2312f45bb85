#pragma once

#include <array>
#include <cmath>

#include "cpl/types.hpp"

namespace cpl {

namespace detail {

// Stereo image->camera transform. Templated so the same expression tree runs
// on plain doubles and on dual numbers; every higher-level guarantee about
// bitwise agreement between routes depends on this being the single
// implementation.
template <class T>
void stereo_image_to_camera(const T& f_x, const T& f_y, const T& u_0, const T& v_0, const T& b,
                            const T& d, double u, double v, T& x_cam, T& y_cam, T& z_cam) {
    x_cam = f_x * b / d;
    y_cam = -(x_cam / f_x) * (u - u_0);
    z_cam = (x_cam / f_y) * (v_0 - v);
}

// Pitch-only camera->world transform.
template <class T>
void camera_to_world_components(const T& theta_p, const T& t_x, const T& t_y, const T& t_z,
                                const T& x_cam, const T& y_cam, const T& z_cam, T& X, T& Y, T& Z) {
    using std::cos;
    using std::sin;
    const T c = cos(theta_p);
    const T s = sin(theta_p);
    X = x_cam * c + z_cam * s + t_x;
    Y = y_cam + t_y;
    Z = -(x_cam * s) + z_cam * c + t_z;
}

} // namespace detail

// Back-projected ray through a pixel: origin is the camera center in world
// coordinates, direction is the world-frame viewing direction scaled so that
// the forward (depth) component of the camera-frame ray is 1.
struct Ray {
    std::array<double, 3> origin{};
    std::array<double, 3> direction{};
};

// Metric stereo reconstruction of one observation into the camera frame.
// Throws DisparityZeroOrNegative when d <= 0, InvalidParams on bad params.
CameraPoint image_to_camera_stereo(const CameraParams& params, const ImageObservation& obs);

// Normalized (depth = 1) monocular back-projection. Note the lateral sign
// convention differs from the stereo form; both are deliberate.
CameraPoint image_to_camera_normalized(const Intrinsics& intr, double u, double v);

WorldPoint camera_to_world(const Extrinsics& ext, const CameraPoint& p);

// camera_to_world(image_to_camera_stereo(...)), same operation order, so the
// composition is bitwise identical to calling the two stages yourself.
WorldPoint project_to_world(const CameraParams& params, const ImageObservation& obs);

Ray inverse_full_projection(const Intrinsics& intr, const Extrinsics& ext, double u, double v);

// Row-major pitch rotation matrix used by camera_to_world.
std::array<std::array<double, 3>, 3> pitch_rotation_matrix(double theta_p);

} // namespace cpl
