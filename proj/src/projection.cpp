#include "cpl/projection.hpp"

namespace cpl {

CameraPoint image_to_camera_stereo(const CameraParams& params, const ImageObservation& obs) {
    params.intrinsics.validate();
    params.rig.validate();
    if (!(obs.d > 0.0))
        throw DisparityZeroOrNegative("disparity must be > 0, got " + std::to_string(obs.d));
    CameraPoint p;
    detail::stereo_image_to_camera(params.intrinsics.f_x, params.intrinsics.f_y,
                                   params.intrinsics.u_0, params.intrinsics.v_0, params.rig.b,
                                   obs.d, obs.u, obs.v, p.x_cam, p.y_cam, p.z_cam);
    return p;
}

CameraPoint image_to_camera_normalized(const Intrinsics& intr, double u, double v) {
    intr.validate();
    CameraPoint p;
    p.x_cam = 1.0;
    p.y_cam = (u - intr.u_0) / intr.f_x;
    p.z_cam = (v - intr.v_0) / intr.f_y;
    return p;
}

WorldPoint camera_to_world(const Extrinsics& ext, const CameraPoint& p) {
    ext.validate();
    double X = 0.0, Y = 0.0, Z = 0.0;
    detail::camera_to_world_components(ext.theta_p, ext.t_x, ext.t_y, ext.t_z, p.x_cam, p.y_cam,
                                       p.z_cam, X, Y, Z);
    return WorldPoint(X, Y, Z);
}

WorldPoint project_to_world(const CameraParams& params, const ImageObservation& obs) {
    return camera_to_world(params.extrinsics, image_to_camera_stereo(params, obs));
}

Ray inverse_full_projection(const Intrinsics& intr, const Extrinsics& ext, double u, double v) {
    intr.validate();
    ext.validate();
    // Camera-frame viewing direction with unit depth. Uses the stereo chain's
    // sign convention so reconstructed points lie on the returned ray.
    CameraPoint dir_cam;
    dir_cam.x_cam = 1.0;
    dir_cam.y_cam = -(u - intr.u_0) / intr.f_x;
    dir_cam.z_cam = (intr.v_0 - v) / intr.f_y;

    const double c = std::cos(ext.theta_p);
    const double s = std::sin(ext.theta_p);
    Ray ray;
    ray.origin = {ext.t_x, ext.t_y, ext.t_z};
    ray.direction = {dir_cam.x_cam * c + dir_cam.z_cam * s, dir_cam.y_cam,
                     -(dir_cam.x_cam * s) + dir_cam.z_cam * c};
    return ray;
}

std::array<std::array<double, 3>, 3> pitch_rotation_matrix(double theta_p) {
    const double c = std::cos(theta_p);
    const double s = std::sin(theta_p);
    return {{{c, 0.0, s}, {0.0, 1.0, 0.0}, {-s, 0.0, c}}};
}

} // namespace cpl
