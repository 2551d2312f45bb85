#include "cpl/scene.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "cpl/detail/loss_eval.hpp"
#include "cpl/kernels.hpp"
#include "cpl/projection.hpp"
#include "cpl/rng.hpp"

namespace cpl {

using nlohmann::json;

std::vector<SceneConfig> build_config_grid() {
    const double fovs[] = {60.0, 75.0, 90.0, 105.0, 120.0};
    const double pitches[] = {-15.0, -7.5, 0.0, 7.5, 15.0};
    const double x_offsets[] = {0.0, 0.5, 1.0, 1.5, 2.0};
    const double camera_height = 1.5;

    std::vector<SceneConfig> grid;
    grid.reserve(49);
    for (double fov : fovs)
        for (double pitch : pitches)
            grid.push_back({1, fov, 0.0, 0.0, camera_height, pitch, 0.0, 0.0});
    // Town 2 varies lateral offset at zero pitch; the last cell is dropped to
    // keep the documented 25/24 split.
    for (double fov : fovs)
        for (double x : x_offsets) {
            if (fov == 120.0 && x == 2.0) continue;
            grid.push_back({2, fov, x, 0.0, camera_height, 0.0, 0.0, 0.0});
        }
    return grid;
}

double fov_to_focal(double fov_deg, double image_width_px) {
    if (!(fov_deg > 0.0 && fov_deg < 180.0))
        throw InvalidArgument("fov must lie in (0, 180) degrees");
    if (!(image_width_px > 0.0)) throw InvalidArgument("image width must be > 0");
    return (image_width_px / 2.0) / std::tan(0.5 * deg2rad(fov_deg));
}

CameraParams derive_camera_params(const SceneConfig& config, int width, int height,
                                  double baseline) {
    if (width <= 0 || height <= 0) throw InvalidArgument("image size must be positive");
    const double f = fov_to_focal(config.fov_deg, static_cast<double>(width));
    CameraParams p;
    p.intrinsics = {f, f, width / 2.0, height / 2.0};
    p.rig = {baseline};
    p.extrinsics = Extrinsics(deg2rad(config.pitch_deg), config.x, config.y, config.z);
    p.validate();
    return p;
}

Dataset generate(const SceneConfig& config, std::size_t n_points, int width, int height,
                 double baseline, std::uint64_t seed) {
    if (n_points < 1) throw InvalidArgument("need at least one point");
    Dataset ds;
    ds.config = config;
    ds.width = width;
    ds.height = height;
    ds.seed = seed;
    ds.params = derive_camera_params(config, width, height, baseline);
    ds.ground_truth = ParamVector13::pack(ds.params, 1.0, WorldPoint(0.0, 0.0, 0.0));
    ds.observations.resize(n_points);
    ds.world_points.resize(n_points);

    const Intrinsics& intr = ds.params.intrinsics;
    const Extrinsics& ext = ds.params.extrinsics;
    const std::int64_t n = static_cast<std::int64_t>(n_points);
#pragma omp parallel for schedule(static) if (n >= static_cast<std::int64_t>(kParallelGrain))
    for (std::int64_t i = 0; i < n; ++i) {
        // Per-index generator: the dataset does not depend on thread count.
        Rng rng(Rng::derive(seed, static_cast<std::uint64_t>(i)));
        const double u = rng.uniform(0.0, static_cast<double>(width));
        const double v = rng.uniform(0.0, static_cast<double>(height));
        const double depth = rng.uniform(kMinDepth, kMaxDepth);

        const double x_cam = depth;
        const double y_cam = -(x_cam / intr.f_x) * (u - intr.u_0);
        const double z_cam = (x_cam / intr.f_y) * (intr.v_0 - v);
        const double d = intr.f_x * baseline / depth;

        ds.observations[i] = {u, v, d};
        detail::camera_to_world_components(ext.theta_p, ext.t_x, ext.t_y, ext.t_z, x_cam, y_cam,
                                           z_cam, ds.world_points[i].X, ds.world_points[i].Y,
                                           ds.world_points[i].Z);
    }
    return ds;
}

namespace {

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

double parse_double(std::string_view s, const char* what) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw SchemaError(std::string("malformed number in ") + what);
    return v;
}

json header_json(const Dataset& ds) {
    return json{
        {"schema_version", kDatasetSchemaVersion},
        {"format", "cpl-dataset"},
        {"config",
         {{"town_id", ds.config.town_id},
          {"fov_deg", ds.config.fov_deg},
          {"x", ds.config.x},
          {"y", ds.config.y},
          {"z", ds.config.z},
          {"pitch_deg", ds.config.pitch_deg},
          {"yaw_deg", ds.config.yaw_deg},
          {"roll_deg", ds.config.roll_deg}}},
        {"image", {{"width", ds.width}, {"height", ds.height}}},
        {"baseline", ds.params.rig.b},
        {"seed", ds.seed},
        {"n_points", ds.observations.size()},
        {"ground_truth",
         {{"f_x", ds.params.intrinsics.f_x},
          {"f_y", ds.params.intrinsics.f_y},
          {"u_0", ds.params.intrinsics.u_0},
          {"v_0", ds.params.intrinsics.v_0},
          {"b", ds.params.rig.b},
          {"d_scale", ds.ground_truth[kD]},
          {"pitch_deg", ds.config.pitch_deg},
          {"t_x", ds.params.extrinsics.t_x},
          {"t_y", ds.params.extrinsics.t_y},
          {"t_z", ds.params.extrinsics.t_z}}},
        {"units", {{"angles", "degrees"}, {"lengths", "meters"}, {"image", "pixels"}}},
    };
}

} // namespace

void save(const Dataset& dataset, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out << header_json(dataset).dump() << '\n';
    out << "u,v,d,X,Y,Z\n";
    for (std::size_t i = 0; i < dataset.observations.size(); ++i) {
        const ImageObservation& o = dataset.observations[i];
        const WorldPoint& w = dataset.world_points[i];
        out << format_double(o.u) << ',' << format_double(o.v) << ',' << format_double(o.d) << ','
            << format_double(w.X) << ',' << format_double(w.Y) << ',' << format_double(w.Z)
            << '\n';
    }
    if (!out) throw IoError("write failed: " + path.string());
}

Dataset load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open: " + path.string());

    std::string header_line;
    if (!std::getline(in, header_line)) throw SchemaError("missing header: " + path.string());
    json header;
    try {
        header = json::parse(header_line);
    } catch (const json::exception&) {
        throw SchemaError("malformed header: " + path.string());
    }

    Dataset ds;
    std::size_t n_points = 0;
    double baseline = 0.0;
    try {
        if (header.at("format").get<std::string>() != "cpl-dataset")
            throw SchemaError("not a cpl-dataset file: " + path.string());
        if (header.at("schema_version").get<int>() != kDatasetSchemaVersion)
            throw SchemaError("unsupported schema version in " + path.string());
        const json& c = header.at("config");
        ds.config = {c.at("town_id").get<int>(),    c.at("fov_deg").get<double>(),
                     c.at("x").get<double>(),       c.at("y").get<double>(),
                     c.at("z").get<double>(),       c.at("pitch_deg").get<double>(),
                     c.at("yaw_deg").get<double>(), c.at("roll_deg").get<double>()};
        ds.width = header.at("image").at("width").get<int>();
        ds.height = header.at("image").at("height").get<int>();
        baseline = header.at("baseline").get<double>();
        ds.seed = header.at("seed").get<std::uint64_t>();
        n_points = header.at("n_points").get<std::size_t>();
    } catch (const json::exception&) {
        throw SchemaError("header missing required fields: " + path.string());
    }

    ds.params = derive_camera_params(ds.config, ds.width, ds.height, baseline);
    ds.ground_truth = ParamVector13::pack(ds.params, 1.0, WorldPoint(0.0, 0.0, 0.0));

    // The redundant ground-truth block must match what the config derives to;
    // a mismatch means the header was edited inconsistently.
    try {
        const json& g = header.at("ground_truth");
        const bool consistent = g.at("f_x").get<double>() == ds.params.intrinsics.f_x &&
                                g.at("f_y").get<double>() == ds.params.intrinsics.f_y &&
                                g.at("u_0").get<double>() == ds.params.intrinsics.u_0 &&
                                g.at("v_0").get<double>() == ds.params.intrinsics.v_0 &&
                                g.at("b").get<double>() == ds.params.rig.b &&
                                g.at("d_scale").get<double>() == 1.0 &&
                                g.at("pitch_deg").get<double>() == ds.config.pitch_deg &&
                                g.at("t_x").get<double>() == ds.params.extrinsics.t_x &&
                                g.at("t_y").get<double>() == ds.params.extrinsics.t_y &&
                                g.at("t_z").get<double>() == ds.params.extrinsics.t_z;
        if (!consistent)
            throw ConsistencyError("ground-truth block inconsistent with config: " +
                                   path.string());
    } catch (const json::exception&) {
        throw SchemaError("header missing ground-truth fields: " + path.string());
    }

    std::string line;
    if (!std::getline(in, line) || line != "u,v,d,X,Y,Z")
        throw SchemaError("missing column header: " + path.string());

    ds.observations.reserve(n_points);
    ds.world_points.reserve(n_points);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::array<std::string_view, 6> fields;
        std::string_view rest(line);
        for (std::size_t f = 0; f < 6; ++f) {
            const std::size_t comma = rest.find(',');
            if (f < 5) {
                if (comma == std::string_view::npos)
                    throw SchemaError("short row in " + path.string());
                fields[f] = rest.substr(0, comma);
                rest = rest.substr(comma + 1);
            } else {
                if (comma != std::string_view::npos)
                    throw SchemaError("excess columns in " + path.string());
                fields[f] = rest;
            }
        }
        ds.observations.push_back({parse_double(fields[0], "u"), parse_double(fields[1], "v"),
                                   parse_double(fields[2], "d")});
        WorldPoint w;
        w.X = parse_double(fields[3], "X");
        w.Y = parse_double(fields[4], "Y");
        w.Z = parse_double(fields[5], "Z");
        ds.world_points.push_back(w);
    }
    if (ds.observations.size() != n_points)
        throw SchemaError("row count does not match n_points: " + path.string());

    // Validate the loaded data against its own header.
    for (const ImageObservation& o : ds.observations) {
        if (!(o.d > 0.0)) throw ConsistencyError("non-positive disparity in " + path.string());
        if (!(o.u >= 0.0 && o.u < ds.width && o.v >= 0.0 && o.v < ds.height))
            throw ConsistencyError("observation outside image bounds in " + path.string());
    }
    std::vector<WorldPoint> recon(ds.observations.size());
    reconstruct_batch(ds.ground_truth, ds.observations, recon);
    for (std::size_t i = 0; i < recon.size(); ++i) {
        const double err = std::max({std::abs(recon[i].X - ds.world_points[i].X),
                                     std::abs(recon[i].Y - ds.world_points[i].Y),
                                     std::abs(recon[i].Z - ds.world_points[i].Z)});
        if (!(err < kSelfConsistencyTol))
            throw ConsistencyError("stored world point fails projection self-consistency in " +
                                   path.string());
    }
    return ds;
}

} // namespace cpl
