#include "seqgen/channel.hpp"
#include "seqgen/conveyor.hpp"
#include "seqgen/grammar.hpp"
#include "seqgen/halfline_walk.hpp"
#include "seqgen/motzkin.hpp"
#include "seqgen/pda.hpp"
#include "seqgen/switches.hpp"

#include <benchmark/benchmark.h>

using namespace seqgen;
using motzkin::MotzkinEnsemble;

static void BM_ReturnProbability(benchmark::State &state) {
    const auto spec = walk::TransitionSpec::make(0.25, 0.25);
    const auto horizon = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(walk::return_probability_series(spec, horizon));
    }
}
BENCHMARK(BM_ReturnProbability)->Arg(1024)->Arg(4096)->Unit(benchmark::kMillisecond);

static void BM_HeightDp(benchmark::State &state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto e = MotzkinEnsemble::unbiased(n, 2, 0.125);
    for (auto _ : state) {
        const motzkin::HeightDp dp(e);
        benchmark::DoNotOptimize(dp.spectrum(n / 2).entropy());
    }
}
BENCHMARK(BM_HeightDp)->Arg(256)->Arg(2048)->Unit(benchmark::kMillisecond);

static void BM_ChannelRenyi(benchmark::State &state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto e = MotzkinEnsemble::unbiased(n, 1, 0.25);
    const auto ch = motzkin::motzkin_channel(e, n / 2 + 1);
    for (auto _ : state) {
        benchmark::DoNotOptimize(renyi_entropy_channel(ch, 0, 0, n, n / 2, 2));
    }
}
BENCHMARK(BM_ChannelRenyi)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

static void BM_SequentialGenerate(benchmark::State &state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto ch = motzkin::motzkin_channel(MotzkinEnsemble::unbiased(n, 2, 0.125), n);
    for (auto _ : state) {
        benchmark::DoNotOptimize(sequential_generate(ch, 0, n, 0).support_size());
    }
}
BENCHMARK(BM_SequentialGenerate)->Arg(6)->Arg(8)->Unit(benchmark::kMillisecond);

static void BM_PdaSample(benchmark::State &state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto pda = qpda::compile_to_pda(qpda::load_grammar(std::string(SEQGEN_DATA_DIR) + "/grammars/motzkin1.cnf"));
    std::uint64_t seed = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(qpda::sample_emission(pda, n, seed++).accepted);
    }
}
BENCHMARK(BM_PdaSample)->Arg(64)->Arg(256);

static void BM_TwoLegExact(benchmark::State &state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto e = MotzkinEnsemble::unbiased(n, 2, 0.125);
    for (auto _ : state) {
        benchmark::DoNotOptimize(conveyor::run_two_leg(n, e).success_probability);
    }
}
BENCHMARK(BM_TwoLegExact)->Arg(4)->Arg(6)->Unit(benchmark::kMillisecond);

static void BM_TwoLegTrajectory(benchmark::State &state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto e = MotzkinEnsemble::unbiased(n, 2, 0.125);
    std::uint64_t seed = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(conveyor::sample_two_leg(n, e, seed++).accepted);
    }
}
BENCHMARK(BM_TwoLegTrajectory)->Arg(256)->Arg(1024)->Unit(benchmark::kMicrosecond);

static void BM_ThreeLeg(benchmark::State &state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto g = qpda::load_grammar(std::string(SEQGEN_DATA_DIR) + "/grammars/cat3.cnf");
    for (auto _ : state) {
        benchmark::DoNotOptimize(conveyor::run_three_leg(g, n).success_probability);
    }
}
BENCHMARK(BM_ThreeLeg)->Arg(3)->Arg(6)->Unit(benchmark::kMillisecond);

static void BM_LevyTrace(benchmark::State &state) {
    const auto horizon = static_cast<std::size_t>(state.range(0));
    const std::vector<std::size_t> times{horizon};
    std::uint64_t seed = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(switches::levy_trace(switches::AuxWalkerModel{}, horizon, 0.5, seed++, times));
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(horizon));
}
BENCHMARK(BM_LevyTrace)->Arg(100000)->Unit(benchmark::kMicrosecond);

static void BM_TrapTrace(benchmark::State &state) {
    const auto horizon = static_cast<std::size_t>(state.range(0));
    const std::vector<std::size_t> times{horizon};
    const switches::RandomRateField field{switches::RandomRateField::Kind::Trap, 1.0 / 3.0, 1};
    std::uint64_t seed = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(switches::subdiffusive_trace(field, horizon, seed++, times));
    }
}
BENCHMARK(BM_TrapTrace)->Arg(1000000)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
