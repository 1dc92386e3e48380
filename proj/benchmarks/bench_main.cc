// benchmarks/bench_main.cc

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include <benchmark/benchmark.h>

#include "switchsound/dsp.h"
#include "switchsound/rng.h"
#include "switchsound/snmf.h"
#include "switchsound/synth.h"

namespace {

using namespace switchsound;

const Waveform& bench_event() {
  static const Waveform w = [] {
    auto [wave, gt] = generate_event(DegradationProfile{}, DisturbanceSpec{}, 1);
    return wave;
  }();
  return w;
}

void BM_GenerateEvent(benchmark::State& state) {
  std::uint64_t seed = 0;
  for (auto _ : state) {
    auto [w, gt] = generate_event(DegradationProfile{}, DisturbanceSpec{}, seed++);
    benchmark::DoNotOptimize(w.samples.data());
  }
}
BENCHMARK(BM_GenerateEvent)->Unit(benchmark::kMillisecond);

void BM_Stft(benchmark::State& state) {
  const Waveform& w = bench_event();
  for (auto _ : state) {
    const Spectrogram s = stft(w, static_cast<int>(state.range(0)), static_cast<int>(state.range(0)) / 2);
    benchmark::DoNotOptimize(s.magnitudes.data());
  }
}
BENCHMARK(BM_Stft)->Arg(512)->Arg(1024)->Arg(2048)->Unit(benchmark::kMillisecond);

void BM_EstimateActivations(benchmark::State& state) {
  const Spectrogram spec = stft(bench_event(), 1024, 512);
  Rng rng(3);
  BasisDictionary d;
  const int k = 16;
  d.bases.resize(spec.n_bins(), k);
  for (int j = 0; j < k; ++j) {
    for (int i = 0; i < spec.n_bins(); ++i) d.bases(i, j) = 0.01 + rng.uniform();
    d.bases.col(j) /= d.bases.col(j).norm();
  }
  for (int j = 0; j < k; ++j) {
    d.component_owner.push_back(static_cast<SourceName>(j % 4));
  }
  d.n_per_source = 4;
  d.bin_hz = spec.bin_hz;

  for (auto _ : state) {
    const ActivationMatrix a = estimate_activations(spec, d, static_cast<int>(state.range(0)));
    benchmark::DoNotOptimize(a.activations.data());
  }
}
BENCHMARK(BM_EstimateActivations)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
