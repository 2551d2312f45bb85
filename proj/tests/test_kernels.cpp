#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <vector>

#include "cpl/kernels.hpp"
#include "cpl/rng.hpp"

using namespace cpl;

namespace {

ParamVector13 random_omega(Rng& rng) {
    ParamVector13 w;
    w[kFx] = rng.uniform(400.0, 1500.0);
    w[kFy] = rng.uniform(400.0, 1500.0);
    w[kU0] = rng.uniform(300.0, 900.0);
    w[kV0] = rng.uniform(200.0, 700.0);
    w[kB] = rng.uniform(0.2, 1.5);
    w[kD] = rng.uniform(0.5, 2.0);
    w[kThetaP] = rng.uniform(-0.5, 0.5);
    w[kTx] = rng.uniform(-5.0, 5.0);
    w[kTy] = rng.uniform(-5.0, 5.0);
    w[kTz] = rng.uniform(-5.0, 5.0);
    w[kX] = rng.uniform(-10.0, 10.0);
    w[kY] = rng.uniform(-10.0, 10.0);
    w[kZ] = rng.uniform(-10.0, 10.0);
    return w;
}

std::vector<ImageObservation> random_observations(Rng& rng, std::size_t n) {
    std::vector<ImageObservation> obs(n);
    for (auto& o : obs)
        o = {rng.uniform(0.0, 1280.0), rng.uniform(0.0, 960.0), rng.uniform(5.0, 80.0)};
    return obs;
}

} // namespace

TEST_CASE("reconstruct_batch: parallel equals serial bitwise across sizes") {
    Rng rng(201);
    for (std::size_t n : {std::size_t{1}, std::size_t{2}, std::size_t{255}, std::size_t{256},
                          std::size_t{1000}}) {
        const ParamVector13 w = random_omega(rng);
        const auto obs = random_observations(rng, n);
        std::vector<WorldPoint> par(n), ser(n);
        reconstruct_batch(w, obs, par);
        reconstruct_batch_serial(w, obs, ser);
        for (std::size_t i = 0; i < n; ++i) {
            CHECK(par[i].X == ser[i].X);
            CHECK(par[i].Y == ser[i].Y);
            CHECK(par[i].Z == ser[i].Z);
        }
    }
}

TEST_CASE("reconstruct_batch: matches the public projection chain per point") {
    Rng rng(203);
    ParamVector13 w = random_omega(rng);
    w[kD] = 1.0;
    const auto obs = random_observations(rng, 300);
    std::vector<WorldPoint> out(obs.size());
    reconstruct_batch(w, obs, out);
    const CameraParams params = w.camera_params();
    for (std::size_t i = 0; i < obs.size(); ++i) {
        const WorldPoint expect = project_to_world(params, obs[i]);
        CHECK(out[i].X == expect.X);
        CHECK(out[i].Y == expect.Y);
        CHECK(out[i].Z == expect.Z);
    }
}

TEST_CASE("cpl_point_terms: parallel equals serial bitwise") {
    Rng rng(207);
    for (std::size_t n : {std::size_t{1}, std::size_t{64}, std::size_t{257}, std::size_t{2048}}) {
        const ParamVector13 wt = random_omega(rng);
        const ParamVector13 wp = random_omega(rng);
        const auto obs = random_observations(rng, n);
        std::vector<double> par(n), ser(n);
        cpl_point_terms(wt, wp, obs, par);
        cpl_point_terms_serial(wt, wp, obs, ser);
        CHECK(par == ser);
    }
}

TEST_CASE("breakdown_point_terms: parallel equals serial bitwise in both modes") {
    Rng rng(211);
    for (BreakdownMode mode : {BreakdownMode::kThirteenTerm, BreakdownMode::kTenParam}) {
        const ParamVector13 wt = random_omega(rng);
        const ParamVector13 wp = random_omega(rng);
        const std::size_t n = 600;
        const auto obs = random_observations(rng, n);
        std::vector<double> par(kParamCount * n), ser(kParamCount * n);
        breakdown_point_terms(wt, wp, obs, mode, par);
        breakdown_point_terms_serial(wt, wp, obs, mode, ser);
        CHECK(par == ser);
    }
}

#ifdef _OPENMP
TEST_CASE("kernels: output does not depend on the thread count") {
    Rng rng(213);
    const ParamVector13 wt = random_omega(rng);
    const ParamVector13 wp = random_omega(rng);
    const std::size_t n = 1500;
    const auto obs = random_observations(rng, n);

    std::vector<double> multi(kParamCount * n), single(kParamCount * n);
    breakdown_point_terms(wt, wp, obs, BreakdownMode::kThirteenTerm, multi);
    const int saved = omp_get_max_threads();
    omp_set_num_threads(1);
    breakdown_point_terms(wt, wp, obs, BreakdownMode::kThirteenTerm, single);
    omp_set_num_threads(saved);
    CHECK(multi == single);
}
#endif

TEST_CASE("sequential_sum: fixed left-to-right order") {
    const std::vector<double> values{1e16, 1.0, -1e16, 1.0};
    // ((1e16 + 1) - 1e16) + 1 = 1 exactly in left-to-right IEEE order
    CHECK(sequential_sum(values) == 1.0);
}

TEST_CASE("kernels: size and validity errors") {
    Rng rng(217);
    const ParamVector13 w = random_omega(rng);
    auto obs = random_observations(rng, 8);
    std::vector<WorldPoint> small(4);
    CHECK_THROWS_AS(reconstruct_batch(w, obs, small), LengthMismatch);

    std::vector<double> terms(8);
    obs[3].d = 0.0;
    CHECK_THROWS_AS(cpl_point_terms(w, w, obs, terms), DisparityZeroOrNegative);
    obs[3].d = -2.0;
    CHECK_THROWS_AS(cpl_point_terms(w, w, obs, terms), DisparityZeroOrNegative);
}
