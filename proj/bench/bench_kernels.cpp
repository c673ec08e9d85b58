// Serial reference kernels against their OpenMP counterparts on a Table 2
// sized frame (165 x 165 LR, 330 x 330 SR, 55 zones).

#include <benchmark/benchmark.h>

#include <random>

#include "dsr/kernels.hpp"
#include "dsr/operators.hpp"
#include "dsr/optics.hpp"

namespace {

using namespace dsr;

ImageGrid noise(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  ImageGrid out(rows, cols);
  for (double& v : out.values()) v = dist(rng);
  return out;
}

const BlurOperator& table2_blur(Orientation orientation) {
  auto make = [](Orientation o) {
    DefocusSpec spec;
    spec.blur = 0.06;
    spec.zones = 55;
    spec.focal = 28;
    spec.zone_width = 3;
    spec.orientation = o;
    return BlurOperator::from_spec(165, 165, spec);
  };
  static const BlurOperator vertical = make(Orientation::kVertical);
  static const BlurOperator horizontal = make(Orientation::kHorizontal);
  return orientation == Orientation::kVertical ? vertical : horizontal;
}

template <ImageGrid (*Kernel)(const kernels::ZoneKernelSet&, const ImageGrid&)>
void BM_Zone(benchmark::State& state) {
  const auto orientation = state.range(0) == 0 ? Orientation::kVertical : Orientation::kHorizontal;
  const kernels::ZoneKernelSet& set = table2_blur(orientation).kernel_set();
  const ImageGrid x = noise(165, 165, 1);
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(set, x));
}

template <ImageGrid (*Kernel)(const ImageGrid&, PixelShift, int)>
void BM_Resample(benchmark::State& state) {
  const auto rows = static_cast<std::size_t>(state.range(0));
  const ImageGrid x = noise(rows, rows, 2);
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(x, {1, 1}, 2));
}

BENCHMARK_TEMPLATE(BM_Zone, kernels::reference::zone_convolve)->Arg(0)->Arg(1);
BENCHMARK_TEMPLATE(BM_Zone, kernels::parallel::zone_convolve)->Arg(0)->Arg(1);
BENCHMARK_TEMPLATE(BM_Zone, kernels::reference::zone_correlate)->Arg(0)->Arg(1);
BENCHMARK_TEMPLATE(BM_Zone, kernels::parallel::zone_correlate)->Arg(0)->Arg(1);
BENCHMARK_TEMPLATE(BM_Resample, kernels::reference::shifted_downsample)->Arg(330);
BENCHMARK_TEMPLATE(BM_Resample, kernels::parallel::shifted_downsample)->Arg(330);
BENCHMARK_TEMPLATE(BM_Resample, kernels::reference::upsample_shifted)->Arg(165);
BENCHMARK_TEMPLATE(BM_Resample, kernels::parallel::upsample_shifted)->Arg(165);

}  // namespace

BENCHMARK_MAIN();
