// Serial vs OpenMP timings for the batch kernels and the 13-pass gradient.

#include <chrono>
#include <cstdio>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "cpl/gradient.hpp"
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
    w[kD] = rng.uniform(0.8, 1.2);
    w[kThetaP] = rng.uniform(-0.4, 0.4);
    w[kTx] = rng.uniform(-5.0, 5.0);
    w[kTy] = rng.uniform(-5.0, 5.0);
    w[kTz] = rng.uniform(-5.0, 5.0);
    return w;
}

template <class F>
double time_ms(F&& fn, int reps) {
    // warm up once, then report the best of `reps`
    fn();
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        const auto start = std::chrono::steady_clock::now();
        fn();
        const double ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
                .count();
        if (ms < best) best = ms;
    }
    return best;
}

void report(const char* name, std::size_t n, double serial_ms, double parallel_ms) {
    std::printf("%-28s n=%-8zu serial %9.3f ms   parallel %9.3f ms   speedup %.2fx\n", name, n,
                serial_ms, parallel_ms, serial_ms / parallel_ms);
}

} // namespace

int main() {
#ifdef _OPENMP
    std::printf("OpenMP enabled, max threads %d\n", omp_get_max_threads());
#else
    std::printf("built without OpenMP; parallel variants run serially\n");
#endif

    Rng rng(12345);
    const ParamVector13 wt = random_omega(rng);
    ParamVector13 wp = wt;
    for (std::size_t i = 0; i < kParamCount; ++i) wp[i] = wt[i] * rng.uniform(0.9, 1.1);

    for (const std::size_t n : {std::size_t{10000}, std::size_t{100000}, std::size_t{1000000}}) {
        std::vector<ImageObservation> obs(n);
        for (auto& o : obs)
            o = {rng.uniform(0.0, 1280.0), rng.uniform(0.0, 960.0), rng.uniform(5.0, 80.0)};

        std::vector<WorldPoint> points(n);
        report("reconstruct_batch", n,
               time_ms([&] { reconstruct_batch_serial(wt, obs, points); }, 3),
               time_ms([&] { reconstruct_batch(wt, obs, points); }, 3));

        std::vector<double> terms(n);
        report("cpl_point_terms", n,
               time_ms([&] { cpl_point_terms_serial(wt, wp, obs, terms); }, 3),
               time_ms([&] { cpl_point_terms(wt, wp, obs, terms); }, 3));

        std::vector<double> matrix(kParamCount * n);
        report("breakdown_point_terms", n,
               time_ms([&] { breakdown_point_terms_serial(wt, wp, obs,
                                                          BreakdownMode::kThirteenTerm, matrix); },
                       3),
               time_ms([&] { breakdown_point_terms(wt, wp, obs, BreakdownMode::kThirteenTerm,
                                                   matrix); },
                       3));
    }

    // gradient: parallelism is across the 13 seeded passes
    for (const std::size_t n : {std::size_t{1000}, std::size_t{10000}}) {
        std::vector<ImageObservation> obs(n);
        for (auto& o : obs)
            o = {rng.uniform(0.0, 1280.0), rng.uniform(0.0, 960.0), rng.uniform(5.0, 80.0)};
        const std::span<const ImageObservation> s(obs);
        report("grad_cpl (13 passes)", n,
               time_ms([&] { (void)grad_cpl_serial(wt, wp, s); }, 3),
               time_ms([&] { (void)grad_cpl(wt, wp, s); }, 3));
    }
    return 0;
}
