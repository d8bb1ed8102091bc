#include <benchmark/benchmark.h>

#include "critcon/critcontours.hpp"
#include "critcon/imagecalc.hpp"
#include "critcon/invariance.hpp"
#include "critcon/morse.hpp"
#include "critcon/render.hpp"
#include "critcon/shadingeq.hpp"
#include "critcon/surface.hpp"

using namespace critcon;

namespace {

GridSpec grid(int n) { return GridSpec::square(n, 0.0, n - 1.0); }

AnalyticSurface bump(int n) {
    return make_sigmoidal_bump({0.5 * (n - 1) + 3.3, 0.5 * (n - 1) - 2.1}, 0.2 * n, 0.12 * n, kDefaultTilt,
                               {0.0, n - 1.0, 0.0, n - 1.0});
}

ScalarGrid image(int n) {
    return render(normals(bump(n), grid(n)), Lambertian{Vec3(0.3, 0.2, 0.93).normalized()}).image;
}

}  // namespace

static void BM_Render(benchmark::State& st) {
    const int n = static_cast<int>(st.range(0));
    const auto nf = normals(bump(n), grid(n));
    for (auto _ : st) benchmark::DoNotOptimize(render(nf, Specular{Vec3(0.3, 0.2, 0.93).normalized()}));
}
BENCHMARK(BM_Render)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

static void BM_ShadingFlow(benchmark::State& st) {
    const auto img = image(static_cast<int>(st.range(0)));
    for (auto _ : st) benchmark::DoNotOptimize(shading_flow(img));
}
BENCHMARK(BM_ShadingFlow)->Arg(256)->Unit(benchmark::kMillisecond);

static void BM_BuildComplex(benchmark::State& st) {
    const auto img = image(static_cast<int>(st.range(0)));
    for (auto _ : st) benchmark::DoNotOptimize(build_complex(img));
}
BENCHMARK(BM_BuildComplex)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

static void BM_Simplify(benchmark::State& st) {
    const auto img = image(256);
    const auto c = build_complex(img);
    for (auto _ : st) benchmark::DoNotOptimize(simplify(c, 0.05 * img.range()));
}
BENCHMARK(BM_Simplify)->Unit(benchmark::kMillisecond);

static void BM_CandidateContours(benchmark::State& st) {
    const auto img = image(256);
    const auto c = simplify(build_complex(img), 0.05 * img.range());
    for (auto _ : st) benchmark::DoNotOptimize(candidate_contours(img, c));
}
BENCHMARK(BM_CandidateContours)->Unit(benchmark::kMillisecond);

static void BM_MatchContours(benchmark::State& st) {
    const auto img = image(256);
    const auto c = simplify(build_complex(img), 0.05 * img.range());
    auto ks = candidate_contours(img, c);
    for (auto& k : ks) k.admitted = true;
    for (auto _ : st) benchmark::DoNotOptimize(match_contours(ks, c, ks, c, 3.0));
}
BENCHMARK(BM_MatchContours)->Unit(benchmark::kMillisecond);

static void BM_ResidualSweep(benchmark::State& st) {
    const auto s = bump(256);
    std::vector<Vec3> lights{Vec3(0.3, 0.2, 0.93).normalized(), Vec3(-0.25, 0.1, 0.96).normalized()};
    std::vector<Vec2> points;
    for (int i = 0; i < 100; ++i) points.emplace_back(90 + 0.7 * i, 100 + 0.5 * i);
    for (auto _ : st)
        benchmark::DoNotOptimize(residual_sweep(s, lights, points, {EqId::E1, EqId::E2, EqId::E3}));
}
BENCHMARK(BM_ResidualSweep)->Unit(benchmark::kMillisecond);

static void BM_Scaffold(benchmark::State& st) {
    const int n = static_cast<int>(st.range(0));
    const auto truth = slant_field(normals(bump(n), grid(n)));
    const auto c = simplify(build_complex(truth), 0.01 * truth.range());
    const auto curves = scaffold_from(contour_paths(c), truth);
    for (auto _ : st) benchmark::DoNotOptimize(reconstruct_scaffold(curves, truth, truth.spec()));
}
BENCHMARK(BM_Scaffold)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
