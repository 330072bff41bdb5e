#include <benchmark/benchmark.h>

#include <random>

#include "dmfv/branches.hpp"
#include "dmfv/pins.hpp"

using namespace dmfv;

namespace {

struct Scene {
    PinMap map;
    std::vector<Motion> motions;
};

Scene scene(int droplets)
{
    const int n = 64;
    std::mt19937 rng(42);
    Scene s{PinMap(n, n), {}};
    std::uniform_int_distribution<int> pin(1, 200), cell(1, n), dir(0, 4);
    for (int r = 1; r <= n; ++r)
        for (int c = 1; c <= n; ++c) s.map.set({r, c}, pin(rng));
    const int dr[] = {0, -1, 0, 1, 0}, dc[] = {0, 0, -1, 0, 1};
    for (int i = 0; i < droplets; ++i) {
        Motion m;
        m.serial = i + 1;
        m.from = {cell(rng), cell(rng)};
        const int k = dir(rng);
        m.to = {m.from.row + dr[k], m.from.col + dc[k]};
        if (!s.map.in_bounds(m.to)) m.to = m.from;
        s.motions.push_back(m);
    }
    return s;
}

void BM_PairSerial(benchmark::State& st)
{
    auto s = scene(static_cast<int>(st.range(0)));
    for (auto _ : st) benchmark::DoNotOptimize(pair_kernel_serial(s.map, s.motions));
    st.counters["pairs"] = static_cast<double>(pair_check_count(s.motions));
}

void BM_PairParallel(benchmark::State& st)
{
    auto s = scene(static_cast<int>(st.range(0)));
    for (auto _ : st) benchmark::DoNotOptimize(pair_kernel_parallel(s.map, s.motions));
    st.counters["pairs"] = static_cast<double>(pair_check_count(s.motions));
}

// k sequential detect / conditional blocks, each recovery wiggling the parked droplet
Program branchy(int k)
{
    std::string s = "dim(6,6)\naccuracy 4\nR(1,1,A) O(6,6)\nD(d1,3,3,2)\n";
    s += "1 d(1,1)\n2 m([1,1]->[2,1])\n3 m([2,1]->[3,1])\n4 m([3,1]->[3,2])\n5 m([3,2]->[3,3])\n";
    std::string rec;
    int t = 6;
    for (int b = 1; b <= k; ++b) {
        s += std::to_string(t) + " detect(d1)\n";
        s += std::to_string(t + 2) + " if(d1) call Recovery(" + std::to_string(b) + ")\n";
        rec += "recovery " + std::to_string(b) + ":\n";
        for (int i = 1; i <= 20; ++i) rec += std::to_string(t + 2 + i) + (i % 2 ? " m([3,3]->[3,4])\n" : " m([3,4]->[3,3])\n");
        rec += "endrecovery\n";
        t += 23;
    }
    s += std::to_string(t) + " m([3,3]->[4,3])\n" + std::to_string(t + 1) + " end\n";
    return parse_program(s + rec);
}

void BM_PathsSerial(benchmark::State& st)
{
    auto paths = enumerate_paths(branchy(static_cast<int>(st.range(0))));
    for (auto _ : st) benchmark::DoNotOptimize(verify_all_paths_serial(paths, {}));
    st.counters["paths"] = static_cast<double>(paths.size());
}

void BM_PathsParallel(benchmark::State& st)
{
    auto paths = enumerate_paths(branchy(static_cast<int>(st.range(0))));
    for (auto _ : st) benchmark::DoNotOptimize(verify_all_paths_parallel(paths, {}));
    st.counters["paths"] = static_cast<double>(paths.size());
}

}  // namespace

BENCHMARK(BM_PairSerial)->Arg(64)->Arg(256)->Arg(1024);
BENCHMARK(BM_PairParallel)->Arg(64)->Arg(256)->Arg(1024);
BENCHMARK(BM_PathsSerial)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PathsParallel)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
