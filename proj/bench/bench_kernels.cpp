// Serial reference vs OpenMP kernels on the synthetic protocol.
// Args: {p, test rows}.

#include <benchmark/benchmark.h>

#include "sqda/classifiers.hpp"
#include "sqda/kernels.hpp"
#include "sqda/model.hpp"

using namespace sqda;

namespace {

struct Fixture {
  MatrixXd train0, train1, test;
  ImpQdaModel imp;
  RQdaModel rqda;
  OracleQdaModel oracle;
  LabeledDataset train;
};

const Fixture& fixture(Index p, Index rows) {
  static Index cached_p = -1, cached_rows = -1;
  static Fixture f;
  if (p == cached_p && rows == cached_rows) return f;
  const auto [m0, m1] = synth_protocol_models(0.5, p, 1.0, 1.5);
  Rng rng(42);
  f.train0 = sample_class(m0, p, rng);
  f.train1 = sample_class(m1, p, rng);
  f.test.resize(rows, p);
  f.test << sample_class(m0, rows / 2, rng), sample_class(m1, rows - rows / 2, rng);
  ImpQdaOptions o;
  o.sigma2 = {1.0, 1.5};
  o.rank = {Index{3}, Index{3}};
  f.imp = train_imp_qda(f.train0, f.train1, o);
  f.rqda = train_rqda(f.train0, f.train1, 1.0);
  f.oracle = OracleQdaModel{{m0, m1}};
  f.train.samples.resize(2 * p, p);
  f.train.samples << f.train0, f.train1;
  f.train.labels.assign(static_cast<std::size_t>(p), 0);
  f.train.labels.resize(static_cast<std::size_t>(2 * p), 1);
  cached_p = p;
  cached_rows = rows;
  return f;
}

template <auto Kernel>
void imp_scores(benchmark::State& state) {
  const auto& f = fixture(state.range(0), state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(f.imp, f.test));
  state.SetItemsProcessed(state.iterations() * state.range(1));
}

template <auto Kernel>
void oracle_scores(benchmark::State& state) {
  const auto& f = fixture(state.range(0), state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(f.oracle, f.test));
  state.SetItemsProcessed(state.iterations() * state.range(1));
}

template <auto Kernel>
void ridge(benchmark::State& state) {
  const auto& f = fixture(state.range(0), state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(f.rqda, f.test));
  state.SetItemsProcessed(state.iterations() * state.range(1));
}

template <auto Kernel>
void knn(benchmark::State& state) {
  const auto& f = fixture(state.range(0), state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(f.train, f.test, 5));
  state.SetItemsProcessed(state.iterations() * state.range(1));
}

}  // namespace

#define SQDA_PAIR(name, fn)                                                                   \
  BENCHMARK(name<fn>)->Name(#name "/serial")->Args({500, 2000})->Unit(benchmark::kMillisecond); \
  BENCHMARK(name<kernels::parallel::fn>)                                                    \
      ->Name(#name "/parallel")                                                             \
      ->Args({500, 2000})                                                                   \
      ->Unit(benchmark::kMillisecond)                                                       \
      ->UseRealTime();

using kernels::serial::imp_qda_scores;
using kernels::serial::knn_predict;
using kernels::serial::oracle_qda_scores;
using kernels::serial::ridge_project;

SQDA_PAIR(imp_scores, imp_qda_scores)
SQDA_PAIR(oracle_scores, oracle_qda_scores)
SQDA_PAIR(ridge, ridge_project)
SQDA_PAIR(knn, knn_predict)

BENCHMARK_MAIN();
