#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <unistd.h>

#include "cpl/projection.hpp"
#include "cpl/scene.hpp"

using namespace cpl;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("cpl_scene_test_" + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("config grid: 49 configurations split 25/24, distinct and stable") {
    const auto grid = build_config_grid();
    CHECK(grid.size() == 49);
    std::size_t town1 = 0, town2 = 0;
    for (const auto& c : grid) (c.town_id == 1 ? town1 : town2) += 1;
    CHECK(town1 == 25);
    CHECK(town2 == 24);

    std::set<std::string> seen;
    for (const auto& c : grid) {
        std::ostringstream key;
        key << c.town_id << '|' << c.fov_deg << '|' << c.x << '|' << c.y << '|' << c.z << '|'
            << c.pitch_deg << '|' << c.yaw_deg << '|' << c.roll_deg;
        seen.insert(key.str());
    }
    CHECK(seen.size() == 49);

    const auto again = build_config_grid();
    CHECK(std::equal(grid.begin(), grid.end(), again.begin()));
}

TEST_CASE("fov_to_focal: hand-evaluated values and range checks") {
    CHECK(fov_to_focal(90.0, 1280.0) == doctest::Approx(640.0).epsilon(1e-12));
    CHECK(fov_to_focal(60.0, 1280.0) == doctest::Approx(1108.5125168440814).epsilon(1e-12));
    CHECK_THROWS_AS(fov_to_focal(180.0, 1280.0), InvalidArgument);
    CHECK_THROWS_AS(fov_to_focal(0.0, 1280.0), InvalidArgument);
    CHECK_THROWS_AS(fov_to_focal(90.0, 0.0), InvalidArgument);
}

TEST_CASE("generate: stereo round trip reproduces every stored world point") {
    const SceneConfig config{1, 75.0, 0.5, -0.25, 1.5, -7.5, 0.0, 0.0};
    const Dataset ds = generate(config, 2000, 1280, 960, 0.5, 7);
    CHECK(ds.size() == 2000);
    double max_err = 0.0;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const WorldPoint w = project_to_world(ds.params, ds.observations[i]);
        max_err = std::max({max_err, std::abs(w.X - ds.world_points[i].X),
                            std::abs(w.Y - ds.world_points[i].Y),
                            std::abs(w.Z - ds.world_points[i].Z)});
    }
    CHECK(max_err < 1e-9);
}

TEST_CASE("generate: observations stay inside the image with positive disparity") {
    const Dataset ds = generate({2, 105.0, 1.0, 0.0, 1.5, 0.0, 0.0, 0.0}, 800, 1024, 768, 0.4,
                                 11);
    for (const auto& o : ds.observations) {
        CHECK(o.u >= 0.0);
        CHECK(o.u < 1024.0);
        CHECK(o.v >= 0.0);
        CHECK(o.v < 768.0);
        CHECK(o.d > 0.0);
    }
    CHECK(ds.ground_truth[kD] == 1.0);
    CHECK(ds.ground_truth[kX] == 0.0);
}

TEST_CASE("generate: a principal-ray observation reconstructs on the forward axis") {
    const Dataset ds = generate({1, 90.0, 0.0, 0.0, 1.5, 0.0, 0.0, 0.0}, 1, 1280, 960, 0.5, 3);
    const Intrinsics& intr = ds.params.intrinsics;
    const double depth = 10.0;
    const ImageObservation on_axis{intr.u_0, intr.v_0, intr.f_x * ds.params.rig.b / depth};
    const WorldPoint w = project_to_world(ds.params, on_axis);
    const WorldPoint expected = camera_to_world(ds.params.extrinsics, {depth, 0.0, 0.0});
    CHECK(w.X == expected.X);
    CHECK(w.Y == expected.Y);
    CHECK(w.Z == expected.Z);
}

TEST_CASE("generate: pure function of its seed") {
    const SceneConfig config{1, 90.0, 0.0, 0.0, 1.5, 7.5, 0.0, 0.0};
    const Dataset a = generate(config, 500, 1280, 960, 0.5, 42);
    const Dataset b = generate(config, 500, 1280, 960, 0.5, 42);
    const Dataset c = generate(config, 500, 1280, 960, 0.5, 43);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a.observations[i].u == b.observations[i].u);
        CHECK(a.observations[i].d == b.observations[i].d);
        CHECK(a.world_points[i].X == b.world_points[i].X);
    }
    bool any_different = false;
    for (std::size_t i = 0; i < a.size(); ++i)
        any_different = any_different || a.observations[i].u != c.observations[i].u;
    CHECK(any_different);
}

TEST_CASE("generate: argument validation") {
    const SceneConfig config{1, 90.0, 0.0, 0.0, 1.5, 0.0, 0.0, 0.0};
    CHECK_THROWS_AS(generate(config, 0, 1280, 960, 0.5, 1), InvalidArgument);
    CHECK_THROWS_AS(generate(config, 10, 1280, 960, 0.0, 1), InvalidParams);
    CHECK_THROWS_AS(generate({1, 200.0, 0, 0, 0, 0, 0, 0}, 10, 1280, 960, 0.5, 1),
                    InvalidArgument);
}

TEST_CASE("save/load: bitwise round trip") {
    TempDir tmp;
    const SceneConfig config{2, 105.0, 1.5, 0.0, 1.5, 0.0, 0.0, 0.0};
    const Dataset ds = generate(config, 300, 1280, 960, 0.5, 17);
    const fs::path file = tmp.path / "roundtrip.cpld";
    save(ds, file);
    const Dataset back = load(file);

    CHECK(back.config == ds.config);
    CHECK(back.width == ds.width);
    CHECK(back.height == ds.height);
    CHECK(back.seed == ds.seed);
    CHECK(back.params.intrinsics.f_x == ds.params.intrinsics.f_x);
    CHECK(back.params.extrinsics.theta_p == ds.params.extrinsics.theta_p);
    CHECK(back.ground_truth.entries == ds.ground_truth.entries);
    REQUIRE(back.size() == ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) {
        CHECK(back.observations[i].u == ds.observations[i].u);
        CHECK(back.observations[i].v == ds.observations[i].v);
        CHECK(back.observations[i].d == ds.observations[i].d);
        CHECK(back.world_points[i].X == ds.world_points[i].X);
        CHECK(back.world_points[i].Y == ds.world_points[i].Y);
        CHECK(back.world_points[i].Z == ds.world_points[i].Z);
    }

    // the file itself is byte-stable across saves
    const fs::path file2 = tmp.path / "again.cpld";
    save(back, file2);
    CHECK(slurp(file) == slurp(file2));
}

TEST_CASE("load: corrupt and mismatched headers are schema errors") {
    TempDir tmp;
    const fs::path garbage = tmp.path / "garbage.cpld";
    std::ofstream(garbage) << "this is not json\nu,v,d,X,Y,Z\n";
    CHECK_THROWS_AS(load(garbage), SchemaError);

    const fs::path wrong_format = tmp.path / "wrong_format.cpld";
    std::ofstream(wrong_format)
        << R"({"format":"something-else","schema_version":1})" << "\nu,v,d,X,Y,Z\n";
    CHECK_THROWS_AS(load(wrong_format), SchemaError);

    const Dataset ds = generate({1, 90.0, 0, 0, 1.5, 0, 0, 0}, 5, 1280, 960, 0.5, 1);
    const fs::path good = tmp.path / "good.cpld";
    save(ds, good);
    std::string text = slurp(good);
    const auto pos = text.find("\"schema_version\":1");
    REQUIRE(pos != std::string::npos);
    text.replace(pos, 18, "\"schema_version\":9");
    std::ofstream(tmp.path / "future.cpld") << text;
    CHECK_THROWS_AS(load(tmp.path / "future.cpld"), SchemaError);

    CHECK_THROWS_AS(load(tmp.path / "missing.cpld"), IoError);
}

TEST_CASE("load: tampered rows fail the self-consistency check") {
    TempDir tmp;
    const Dataset ds = generate({1, 90.0, 0, 0, 1.5, 7.5, 0, 0}, 20, 1280, 960, 0.5, 23);
    const fs::path file = tmp.path / "tampered.cpld";
    save(ds, file);

    std::string text = slurp(file);
    // bump the last row's X field by rewriting its digits
    const std::size_t header_end = text.find('\n', text.find('\n') + 1);
    REQUIRE(header_end != std::string::npos);
    std::size_t row_start = text.rfind('\n', text.size() - 2) + 1;
    std::string row = text.substr(row_start);
    std::size_t comma = 0;
    for (int i = 0; i < 3; ++i) comma = row.find(',', comma + 1);
    row = row.substr(0, comma + 1) + "99.5" + row.substr(row.find(',', comma + 1));
    text = text.substr(0, row_start) + row;
    std::ofstream(file) << text;

    CHECK_THROWS_AS(load(file), ConsistencyError);
}
