#include <benchmark/benchmark.h>

#include "xpoint/perf.hpp"

using namespace xpoint;

namespace {

void BM_SweepArea(benchmark::State& state) {
  const TransistorModel word{50.0, 5e-3, 1e9, 56.0};
  const std::vector<std::size_t> n{2, 4, 8, 16, 32, 64};
  std::vector<std::size_t> m;
  for (std::size_t v = 16; v <= 65536; v *= 2) m.push_back(v);
  for (auto _ : state)
    benchmark::DoNotOptimize(sweep_area(ArchitectureConfig{}, n, m, MtjParams{}, OperatingPoint{}, word));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(n.size() * m.size()));
}
BENCHMARK(BM_SweepArea);

void BM_CsvRoundTrip(benchmark::State& state) {
  const auto r = sweep_area(ArchitectureConfig{}, {2, 4, 8, 16, 32, 64}, {1024, 4096},
                            MtjParams{}, OperatingPoint{}, TransistorModel{50.0, 5e-3, 1e9, 56.0});
  for (auto _ : state) benchmark::DoNotOptimize(parse_perf_csv(to_csv(r)));
}
BENCHMARK(BM_CsvRoundTrip);

}  // namespace
