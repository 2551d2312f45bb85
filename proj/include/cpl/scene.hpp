#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "cpl/param_vector.hpp"

namespace cpl {

// One CARLA-style camera configuration. Angles in degrees, translation in
// meters. Yaw and roll are carried as metadata; the projection chain models
// pitch only, so generated data keeps them at zero.
struct SceneConfig {
    int town_id{1};
    double fov_deg{90.0};
    double x{0.0};
    double y{0.0};
    double z{0.0};
    double pitch_deg{0.0};
    double yaw_deg{0.0};
    double roll_deg{0.0};

    bool operator==(const SceneConfig&) const = default;
};

// The fixed 49-configuration grid: town 1 crosses five fields of view with
// five pitches (25), town 2 crosses the same fields of view with five
// lateral offsets minus the final cell (24).
std::vector<SceneConfig> build_config_grid();

// Pinhole relation f = (width / 2) / tan(fov / 2).
double fov_to_focal(double fov_deg, double image_width_px);

// Ground-truth camera parameters implied by a configuration: square pixels
// (f_x = f_y from the horizontal fov), principal point at the image center,
// pitch converted to radians, translation taken verbatim.
CameraParams derive_camera_params(const SceneConfig& config, int width, int height,
                                  double baseline);

struct Dataset {
    SceneConfig config{};
    int width{0};
    int height{0};
    std::uint64_t seed{0};
    CameraParams params{};
    ParamVector13 ground_truth{}; // d entry is the disparity scale (1), X/Y/Z zero
    std::vector<ImageObservation> observations;
    std::vector<WorldPoint> world_points;

    std::size_t size() const { return observations.size(); }
};

inline constexpr int kDatasetSchemaVersion = 1;
inline constexpr double kMinDepth = 2.0;  // meters
inline constexpr double kMaxDepth = 50.0; // meters
inline constexpr double kSelfConsistencyTol = 1e-9;

// Samples n points uniformly in the visible frustum (pixel box x depth
// range), computes their exact stereo observations, and stores the pairs.
// Pure function of its arguments.
Dataset generate(const SceneConfig& config, std::size_t n_points, int width, int height,
                 double baseline, std::uint64_t seed);

// One-line JSON header followed by a full-precision u,v,d,X,Y,Z CSV body.
// Angles are stored in degrees and converted back on load; save/load is a
// bitwise round trip.
void save(const Dataset& dataset, const std::filesystem::path& path);
Dataset load(const std::filesystem::path& path);

} // namespace cpl
