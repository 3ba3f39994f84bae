#include "ipmf/bridge_mc.hpp"
#include "ipmf/matrix.hpp"
#include "ipmf/rng.hpp"
#include "ipmf/scalar.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace ipmf;

void BM_ScalarRound(benchmark::State& state) {
    const scalar::ScalarProblem problem{0.3, 1.2, -0.5, 0.8, 1.0};
    scalar::ScalarIterate it{0.0, 1.0, 0.4, scalar::Side::StartsAtP0};
    const auto mode = state.range(0) == 0 ? scalar::ImfMode::discrete(0.5) : scalar::ImfMode::continuous();
    for (auto _ : state) {
        auto next = scalar::ipmfRound(it, problem, mode);
        benchmark::DoNotOptimize(next);
    }
}
BENCHMARK(BM_ScalarRound)->Arg(0)->Arg(1);

matrix::MatrixProblem randomProblem(Index d) {
    Rng rng(7);
    auto spd = [&] {
        Matrix g(d, d);
        for (Index j = 0; j < d; ++j) {
            for (Index i = 0; i < d; ++i) {
                g(i, j) = rng.normal();
            }
        }
        return Matrix(g * g.transpose() / static_cast<double>(d) + 0.5 * Matrix::Identity(d, d));
    };
    return {GaussianND(Vector::Zero(d), spd()), GaussianND(Vector::Zero(d), spd()), 0.3, TimeGrid::uniform(1)};
}

void BM_MatrixRound(benchmark::State& state) {
    const auto problem = randomProblem(state.range(0));
    const JointGaussian start = matrix::makeStart(problem, matrix::StartCoupling::imf());
    for (auto _ : state) {
        auto next = matrix::ipmfRoundMatrix(start, problem);
        benchmark::DoNotOptimize(next);
    }
}
BENCHMARK(BM_MatrixRound)->Arg(2)->Arg(16)->Unit(benchmark::kMicrosecond);

void BM_Sinkhorn(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const double chi = scalar::xi(0.5, 1.0, 1.3);
    for (auto _ : state) {
        auto plan = mc::sinkhornPlan(Gaussian1D(0.0, 1.0), Gaussian1D(0.5, 1.69), chi, n, 6.0);
        benchmark::DoNotOptimize(plan);
    }
}
BENCHMARK(BM_Sinkhorn)->Arg(400)->Arg(800)->Unit(benchmark::kMillisecond);

} // namespace
BENCHMARK_MAIN();
