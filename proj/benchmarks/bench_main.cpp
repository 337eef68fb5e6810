#include "nsp/eeg_features.hpp"
#include "nsp/gru_model.hpp"
#include "nsp/kpca.hpp"
#include "nsp/mfcc.hpp"
#include "nsp/rng.hpp"
#include "nsp/signal.hpp"
#include "nsp/trainer.hpp"

#include <benchmark/benchmark.h>

namespace {

Eigen::MatrixXd noise(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  nsp::Rng rng(seed);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal(0.0, 1.0);
  return m;
}

nsp::MultichannelSignal signal(Eigen::Index samples, Eigen::Index channels, double rate_hz) {
  nsp::MultichannelSignal s;
  s.sample_rate_hz = rate_hz;
  s.data = noise(samples, channels, 3);
  return s;
}

nsp::ModelParams model(int input_dim, int hidden) {
  nsp::ModelShape shape;
  shape.input_dim = input_dim;
  shape.hidden = hidden;
  shape.dense = 64;
  shape.classes = 4;
  shape.pooling = nsp::Pooling::Average;
  return nsp::init_model(shape, 1);
}

void BM_GruForward(benchmark::State& state) {
  const auto m = model(156, static_cast<int>(state.range(0)));
  const Eigen::MatrixXd x = noise(91, 156, 2);
  for (auto _ : state) benchmark::DoNotOptimize(nsp::forward(m, x, false).logits);
}
BENCHMARK(BM_GruForward)->Arg(32)->Arg(128);

void BM_GruForwardBackward(benchmark::State& state) {
  const auto m = model(156, static_cast<int>(state.range(0)));
  const Eigen::MatrixXd x = noise(91, 156, 2);
  nsp::ModelParams grads = m;
  for (auto _ : state) benchmark::DoNotOptimize(nsp::loss_and_grads(m, x, 1, &grads));
}
BENCHMARK(BM_GruForwardBackward)->Arg(32)->Arg(128);

void BM_FilterChain(benchmark::State& state) {
  const auto bp = nsp::design_bandpass(0.1, 70.0, 4, 1000.0);
  const auto notch = nsp::design_notch(60.0, 1000.0);
  const auto s = signal(1000, 31, 1000.0);
  for (auto _ : state) benchmark::DoNotOptimize(nsp::apply_filter(notch, nsp::apply_filter(bp, s)).data);
}
BENCHMARK(BM_FilterChain);

void BM_EegFeatures(benchmark::State& state) {
  const auto s = signal(1000, 31, 1000.0);
  for (auto _ : state) benchmark::DoNotOptimize(nsp::extract_eeg_features(s).data);
}
BENCHMARK(BM_EegFeatures);

void BM_Mfcc(benchmark::State& state) {
  const auto s = signal(16000, 1, 16000.0);
  for (auto _ : state) benchmark::DoNotOptimize(nsp::extract_mfcc(s).data);
}
BENCHMARK(BM_Mfcc);

void BM_KpcaFit(benchmark::State& state) {
  const Eigen::MatrixXd x = noise(state.range(0), 155, 4);
  for (auto _ : state) benchmark::DoNotOptimize(nsp::kpca_fit(x, 39).eigenvalues);
}
BENCHMARK(BM_KpcaFit)->Arg(250)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
