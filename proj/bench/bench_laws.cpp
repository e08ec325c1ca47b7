// Serial reference vs OpenMP kernels: batched control evaluation and sweep fan-out.

#include "geoctl/app.hpp"
#include "geoctl/batch.hpp"

#include <benchmark/benchmark.h>

using namespace geoctl;

namespace {

void law_batch(benchmark::State &state, ScenarioId id, bool parallel) {
    Scenario sc = build(id);
    FeedbackLaw law = synthesized_law(sc);
    StateBatch states = random_states(sc, static_cast<int>(state.range(0)), 1);
    for (auto _ : state) {
        Mat u = parallel ? evaluate_law_parallel(law, states) : evaluate_law_serial(law, states);
        benchmark::DoNotOptimize(u.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
    state.counters["threads"] = parallel ? worker_threads() : 1;
}

void sweep_escape(benchmark::State &state, bool parallel) {
    nlohmann::json doc = {{"scenario", "Escape"}, {"sweep", {{"param", "eps"}, {"values", nlohmann::json::array()}}}};
    for (int i = 0; i < state.range(0); ++i) doc["sweep"]["values"].push_back(0.25 + 0.25 * i);
    app::RunConfig cfg = app::parse_config(doc);
    for (auto _ : state) {
        auto rows = app::sweep(cfg, parallel);
        benchmark::DoNotOptimize(rows.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

} // namespace

BENCHMARK_CAPTURE(law_batch, disk_serial, ScenarioId::DiskAvoid, false)->Arg(4096);
BENCHMARK_CAPTURE(law_batch, disk_parallel, ScenarioId::DiskAvoid, true)->Arg(4096);
BENCHMARK_CAPTURE(law_batch, upright_serial, ScenarioId::PendulumCartUp, false)->Arg(4096);
BENCHMARK_CAPTURE(law_batch, upright_parallel, ScenarioId::PendulumCartUp, true)->Arg(4096);
BENCHMARK_CAPTURE(sweep_escape, serial, false)->Arg(8)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(sweep_escape, parallel, true)->Arg(8)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
