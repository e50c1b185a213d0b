#include "cepbp/gibbs.h"

#include <algorithm>
#include <chrono>
#include <stdexcept>

#include "cepbp/zipf_schedule.h"

namespace cepbp {

TokenAssignments init_assignments(const SparseCorpus& corpus, std::int32_t topics, Rng& rng) {
  TokenAssignments z;
  z.topic.reserve(static_cast<std::size_t>(corpus.total_tokens));
  for (const Cell& c : corpus.cells) {
    for (std::int32_t i = 0; i < c.count; ++i) {
      z.topic.push_back(static_cast<std::int32_t>(rng() % static_cast<std::uint64_t>(topics)));
    }
  }
  return z;
}

CountMatrices count_assignments(const SparseCorpus& corpus, const TokenAssignments& z,
                                std::int32_t topics) {
  if (static_cast<std::int64_t>(z.topic.size()) != corpus.total_tokens) {
    throw std::invalid_argument("assignment count differs from total tokens");
  }
  const auto K = static_cast<std::size_t>(topics);
  CountMatrices counts;
  counts.topics = topics;
  counts.doc_topic.assign(static_cast<std::size_t>(corpus.num_docs()) * K, 0);
  counts.word_topic.assign(static_cast<std::size_t>(corpus.num_words) * K, 0);
  counts.topic_totals.assign(K, 0);
  std::size_t token = 0;
  for (DocId d = 0; d < corpus.num_docs(); ++d) {
    for (const Cell& c : corpus.doc(d)) {
      for (std::int32_t i = 0; i < c.count; ++i) {
        const std::int32_t k = z.topic[token++];
        if (k < 0 || k >= topics) throw std::out_of_range("topic label out of range");
        ++counts.doc_topic[d * K + k];
        ++counts.word_topic[c.word * K + k];
        ++counts.topic_totals[k];
      }
    }
  }
  return counts;
}

std::int32_t sample_discrete(std::span<const double> weights, Rng& rng) {
  double total = 0.0;
  for (double w : weights) total += w;
  const double u = uniform01(rng) * total;
  double acc = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    acc += weights[k];
    if (u < acc) return static_cast<std::int32_t>(k);
  }
  // u landed on the rounding edge; fall back to the last non-zero weight.
  for (std::size_t k = weights.size(); k-- > 0;) {
    if (weights[k] > 0.0) return static_cast<std::int32_t>(k);
  }
  throw InvariantError("all sampling weights are zero");
}

namespace {

// Shared by the serial sampler and the PGS workers. `contrib`, when given,
// mirrors every word_topic change into the worker's own-contribution matrix.
void sweep_tokens(const SparseCorpus& corpus, std::int32_t* z, std::int32_t* doc_topic,
                  std::int32_t* word_topic, std::int64_t* totals, std::int32_t* contrib,
                  std::int32_t topics, const Hyper& hyper, std::int32_t num_words, Rng& rng) {
  const auto K = static_cast<std::size_t>(topics);
  const double w_beta = num_words * hyper.beta;
  std::vector<double> weights(K);
  std::size_t token = 0;
  for (DocId d = 0; d < corpus.num_docs(); ++d) {
    std::int32_t* nd = doc_topic + static_cast<std::size_t>(d) * K;
    for (const Cell& c : corpus.doc(d)) {
      const std::size_t row = static_cast<std::size_t>(c.word) * K;
      std::int32_t* nw = word_topic + row;
      for (std::int32_t i = 0; i < c.count; ++i, ++token) {
        const std::int32_t old = z[token];
        --nd[old];
        --nw[old];
        --totals[old];
        if (contrib != nullptr) --contrib[row + old];
        for (std::size_t k = 0; k < K; ++k) {
          weights[k] = (nd[k] + hyper.alpha) * (nw[k] + hyper.beta) /
                       (static_cast<double>(totals[k]) + w_beta);
        }
        const std::int32_t fresh = sample_discrete(weights, rng);
        z[token] = fresh;
        ++nd[fresh];
        ++nw[fresh];
        ++totals[fresh];
        if (contrib != nullptr) ++contrib[row + fresh];
      }
    }
  }
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

RunConfigEcho gibbs_config(const SparseCorpus& corpus, const TrainOptions& options,
                           const char* algo) {
  RunConfigEcho c;
  c.algo = algo;
  c.num_topics = options.hyper.num_topics;
  c.iterations = options.hyper.iterations;
  c.alpha = options.hyper.alpha;
  c.beta = options.hyper.beta;
  c.seed = options.seed;
  c.num_docs = corpus.num_docs();
  c.num_words = corpus.num_words;
  c.nnz = corpus.nnz();
  c.entry_bytes = kGibbsEntryBytes;
  return c;
}

}  // namespace

void gs_sweep(const SparseCorpus& corpus, TokenAssignments& z, CountMatrices& counts,
              const Hyper& hyper, Rng& rng) {
  if (static_cast<std::int64_t>(z.topic.size()) != corpus.total_tokens) {
    throw std::invalid_argument("assignment count differs from total tokens");
  }
  sweep_tokens(corpus, z.topic.data(), counts.doc_topic.data(), counts.word_topic.data(),
               counts.topic_totals.data(), nullptr, counts.topics, hyper, corpus.num_words, rng);
}

TopicModel estimate_from_counts(const CountMatrices& counts, const Hyper& hyper) {
  SufficientStats stats;
  stats.topics = counts.topics;
  stats.theta_hat.assign(counts.doc_topic.begin(), counts.doc_topic.end());
  stats.phi_hat.assign(counts.word_topic.begin(), counts.word_topic.end());
  stats.phi_col_sums.assign(counts.topics, 0.0);
  stats.refresh_col_sums();
  return estimate_parameters(stats, hyper);
}

TrainResult gs_train(const SparseCorpus& corpus, const TrainOptions& options) {
  const Hyper& hyper = options.hyper;
  hyper.validate();
  TrainResult result;
  result.report.config = gibbs_config(corpus, options, "gs");

  Rng rng = make_rng(options.seed, streams::kGibbsWorkerBase);
  TokenAssignments z = init_assignments(corpus, hyper.num_topics, rng);
  CountMatrices counts = count_assignments(corpus, z, hyper.num_topics);
  for (std::int32_t t = 1; t <= hyper.iterations; ++t) {
    const auto start = Clock::now();
    gs_sweep(corpus, z, counts, hyper, rng);
    IterationRecord rec;
    rec.t = t;
    rec.comp_s = seconds_since(start);
    if (perplexity_due(t, options.perplexity_every, hyper.iterations)) {
      rec.train_perplexity = perplexity(corpus, estimate_from_counts(counts, hyper));
    }
    result.report.records.push_back(rec);
  }
  result.model = estimate_from_counts(counts, hyper);
  result.stats.topics = hyper.num_topics;
  result.stats.theta_hat.assign(counts.doc_topic.begin(), counts.doc_topic.end());
  result.stats.phi_hat.assign(counts.word_topic.begin(), counts.word_topic.end());
  result.stats.phi_col_sums.assign(hyper.num_topics, 0.0);
  result.stats.refresh_col_sums();
  result.report.final_train_perplexity = perplexity(corpus, result.model);
  return result;
}

namespace {

struct GibbsWorker {
  SparseCorpus shard;
  std::vector<DocId> doc_ids;
  Rng rng;
  TokenAssignments z;
  std::vector<std::int32_t> doc_topic;
  ReplicaRows<std::int32_t> word_topic;
  std::vector<std::int64_t> local_totals;

  void refresh_totals() {
    const auto K = static_cast<std::size_t>(word_topic.topics);
    std::fill(local_totals.begin(), local_totals.end(), 0);
    for (std::size_t i = 0; i < word_topic.local.size(); i += K) {
      for (std::size_t k = 0; k < K; ++k) local_totals[k] += word_topic.local[i + k];
    }
  }
};

CountMatrices gather_counts(const SparseCorpus& corpus, const std::vector<GibbsWorker>& workers,
                            const std::vector<std::int32_t>& global, std::int32_t topics) {
  const auto K = static_cast<std::size_t>(topics);
  CountMatrices counts;
  counts.topics = topics;
  counts.doc_topic.assign(static_cast<std::size_t>(corpus.num_docs()) * K, 0);
  for (const GibbsWorker& w : workers) {
    for (std::size_t j = 0; j < w.doc_ids.size(); ++j) {
      std::copy_n(w.doc_topic.begin() + static_cast<std::ptrdiff_t>(j * K), K,
                  counts.doc_topic.begin() + static_cast<std::ptrdiff_t>(w.doc_ids[j] * K));
    }
  }
  counts.word_topic = global;
  counts.topic_totals.assign(K, 0);
  for (std::size_t i = 0; i < global.size(); i += K) {
    for (std::size_t k = 0; k < K; ++k) counts.topic_totals[k] += global[i + k];
  }
  return counts;
}

}  // namespace

TrainResult pgs_train(const SparseCorpus& corpus, const PgsOptions& options) {
  const Hyper& hyper = options.train.hyper;
  hyper.validate();
  if (options.sync_every < 1) throw std::invalid_argument("sync period T' must be >= 1");
  const std::int32_t K = hyper.num_topics;
  const std::int32_t M = options.workers;

  TrainResult result;
  RunReport& report = result.report;
  report.config = gibbs_config(corpus, options.train, "pgs");
  report.config.workers = M;
  report.config.sync_every = options.sync_every;

  const CommSchedule schedule = fixed_period_schedule(
      partition_vocab(word_frequencies(corpus), 1), options.sync_every, hyper.iterations);
  const VocabPartition& partition = schedule.partition;
  const ShardPlan plan = shard_documents(corpus, M, options.policy);

  std::vector<GibbsWorker> workers(M);
  std::vector<std::int32_t> global(static_cast<std::size_t>(corpus.num_words) * K, 0);
  for (std::int32_t m = 0; m < M; ++m) {
    GibbsWorker& w = workers[m];
    w.doc_ids = plan.docs[m];
    w.shard = select_documents(corpus, w.doc_ids);
    w.shard.vocab.clear();
    w.rng = make_rng(options.train.seed, streams::kGibbsWorkerBase + m);
    w.z = init_assignments(w.shard, K, w.rng);
    CountMatrices local = count_assignments(w.shard, w.z, K);
    w.doc_topic = std::move(local.doc_topic);
    w.word_topic = ReplicaRows<std::int32_t>(corpus.num_words, K);
    w.word_topic.contrib = std::move(local.word_topic);
    w.local_totals.assign(K, 0);
    for (std::size_t i = 0; i < global.size(); ++i) global[i] += w.word_topic.contrib[i];
  }
  for (GibbsWorker& w : workers) {
    w.word_topic.adopt(global);
    w.refresh_totals();
  }

  std::vector<double> sweep_seconds(M, 0.0);
  std::vector<std::vector<SyncDelta<std::int32_t>>> outbox(M);
  for (std::int32_t t = 1; t <= hyper.iterations; ++t) {
    run_workers(M, options.threads, [&](std::int32_t m) {
      GibbsWorker& w = workers[m];
      const auto start = Clock::now();
      sweep_tokens(w.shard, w.z.topic.data(), w.doc_topic.data(), w.word_topic.local.data(),
                   w.local_totals.data(), w.word_topic.contrib.data(), K, hyper,
                   corpus.num_words, w.rng);
      sweep_seconds[m] = seconds_since(start);
    });
    IterationRecord rec;
    rec.t = t;
    rec.comp_s = *std::max_element(sweep_seconds.begin(), sweep_seconds.end());

    const auto due = parts_due(schedule, t);
    const auto comm_start = Clock::now();
    std::uint64_t bytes = 0;
    run_workers(M, options.threads, [&](std::int32_t m) {
      outbox[m].clear();
      for (std::int32_t r : due) {
        outbox[m].push_back(pack_delta(m, workers[m].word_topic, partition, r));
      }
    });
    std::vector<SyncDelta<std::int32_t>> inbox;
    for (auto& box : outbox) {
      for (auto& d : box) {
        bytes += d.byte_size();
        inbox.push_back(std::move(d));
      }
    }
    sync_global<std::int32_t>(global, K, partition, inbox);
    std::vector<std::uint64_t> sent(M, 0);
    run_workers(M, options.threads, [&](std::int32_t m) {
      sent[m] = broadcast<std::int32_t>(global, workers[m].word_topic, partition, due);
      if (!due.empty()) workers[m].refresh_totals();
    });
    for (std::uint64_t b : sent) bytes += b;
    rec.comm_s = seconds_since(comm_start);
    rec.bytes = bytes;
    if (t == hyper.iterations && scheduled_parts(schedule, t).empty()) {
      report.terminal_extra_bytes = bytes;
    }
    if (perplexity_due(t, options.train.perplexity_every, hyper.iterations)) {
      rec.train_perplexity =
          perplexity(corpus, estimate_from_counts(gather_counts(corpus, workers, global, K), hyper));
    }
    report.records.push_back(rec);
  }

  const CountMatrices counts = gather_counts(corpus, workers, global, K);
  result.model = estimate_from_counts(counts, hyper);
  result.stats.topics = K;
  result.stats.theta_hat.assign(counts.doc_topic.begin(), counts.doc_topic.end());
  result.stats.phi_hat.assign(counts.word_topic.begin(), counts.word_topic.end());
  result.stats.phi_col_sums.assign(K, 0.0);
  result.stats.refresh_col_sums();
  report.final_train_perplexity = perplexity(corpus, result.model);
  return result;
}

}  // namespace cepbp
