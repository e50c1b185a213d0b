#include <benchmark/benchmark.h>

#include "cepbp/bp.h"
#include "cepbp/gibbs.h"
#include "cepbp/parallel.h"
#include "cepbp/synthetic.h"
#include "cepbp/sync.h"

namespace {

using namespace cepbp;

const SparseCorpus& bench_corpus() {
  static const SparseCorpus corpus = [] {
    SyntheticSpec s;
    s.num_docs = 500;
    s.num_words = 3000;
    s.num_topics = 20;
    s.mean_doc_length = 120;
    return generate_lda_corpus(s);
  }();
  return corpus;
}

Hyper bench_hyper(std::int64_t k) {
  Hyper h;
  h.num_topics = static_cast<std::int32_t>(k);
  h.iterations = 1;
  return h;
}

void BM_BpStep(benchmark::State& state) {
  const auto& c = bench_corpus();
  const Hyper h = bench_hyper(state.range(0));
  MessageStore msgs = init_messages(c, h, 1);
  SufficientStats stats = accumulate_stats(c, msgs, h.num_topics);
  for (auto _ : state) bp_step(c, msgs, stats, h);
  state.SetItemsProcessed(state.iterations() * c.nnz());
}
BENCHMARK(BM_BpStep)->Arg(10)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_GsSweep(benchmark::State& state) {
  const auto& c = bench_corpus();
  const Hyper h = bench_hyper(state.range(0));
  Rng rng = make_rng(1, 0);
  TokenAssignments z = init_assignments(c, h.num_topics, rng);
  CountMatrices counts = count_assignments(c, z, h.num_topics);
  for (auto _ : state) gs_sweep(c, z, counts, h, rng);
  state.SetItemsProcessed(state.iterations() * c.total_tokens);
}
BENCHMARK(BM_GsSweep)->Arg(10)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);

// One full reduction and broadcast of the word-topic matrix across M workers.
void BM_SyncAllParts(benchmark::State& state) {
  const auto& c = bench_corpus();
  const auto M = static_cast<std::int32_t>(state.range(0));
  const std::int32_t K = 50;
  const auto partition = partition_vocab(word_frequencies(c), 16);
  std::vector<ReplicaRows<double>> reps(M, ReplicaRows<double>(c.num_words, K));
  for (auto& r : reps)
    for (std::size_t i = 0; i < r.contrib.size(); ++i) r.contrib[i] = static_cast<double>(i % 7);
  std::vector<double> global(static_cast<std::size_t>(c.num_words) * K, 0.0);
  std::vector<std::int32_t> due(16);
  for (int r = 0; r < 16; ++r) due[r] = r + 1;
  std::uint64_t bytes = 0;
  for (auto _ : state) {
    std::vector<SyncDelta<double>> deltas;
    for (std::int32_t m = 0; m < M; ++m)
      for (std::int32_t r : due) deltas.push_back(pack_delta(m, reps[m], partition, r));
    sync_global<double>(global, K, partition, deltas);
    for (auto& r : reps) bytes += broadcast<double>(global, r, partition, due);
    benchmark::DoNotOptimize(global.data());
  }
  state.SetBytesProcessed(static_cast<std::int64_t>(bytes));
}
BENCHMARK(BM_SyncAllParts)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
