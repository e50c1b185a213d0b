#include "cepbp/parallel.h"

#include <algorithm>
#include <chrono>
#include <numeric>
#include <stdexcept>
#include <thread>

namespace cepbp {

ShardPlan shard_documents(const SparseCorpus& corpus, std::int32_t workers, ShardPolicy policy) {
  const DocId num_docs = corpus.num_docs();
  if (workers < 1) throw std::invalid_argument("worker count must be >= 1");
  if (workers > num_docs) {
    throw std::invalid_argument("more workers (" + std::to_string(workers) +
                                ") than documents (" + std::to_string(num_docs) + ")");
  }
  ShardPlan plan;
  plan.workers = workers;
  plan.owner.assign(num_docs, 0);
  plan.docs.assign(workers, {});
  if (policy == ShardPolicy::round_robin) {
    for (DocId d = 0; d < num_docs; ++d) plan.owner[d] = d % workers;
  } else {
    std::vector<DocId> order(num_docs);
    std::iota(order.begin(), order.end(), 0);
    std::vector<std::int64_t> length(num_docs);
    for (DocId d = 0; d < num_docs; ++d) length[d] = corpus.doc_length(d);
    std::stable_sort(order.begin(), order.end(),
                     [&](DocId a, DocId b) { return length[a] > length[b]; });
    std::vector<std::int64_t> load(workers, 0);
    for (DocId d : order) {
      const auto lightest = static_cast<std::int32_t>(
          std::min_element(load.begin(), load.end()) - load.begin());
      plan.owner[d] = lightest;
      load[lightest] += length[d];
    }
  }
  for (DocId d = 0; d < num_docs; ++d) plan.docs[plan.owner[d]].push_back(d);
  return plan;
}

void WorkerState::refresh_col_sums() {
  const auto K = static_cast<std::size_t>(phi.topics);
  phi_col_sums.assign(K, 0.0);
  for (std::size_t i = 0; i < phi.local.size(); i += K) {
    for (std::size_t k = 0; k < K; ++k) phi_col_sums[k] += phi.local[i + k];
  }
}

std::vector<WorkerState> make_workers(const SparseCorpus& corpus, const ShardPlan& plan,
                                      const MessageStore& msgs, std::vector<double>& global_phi) {
  const std::int32_t topics = msgs.topics();
  const auto K = static_cast<std::size_t>(topics);
  std::vector<WorkerState> workers(plan.workers);
  global_phi.assign(static_cast<std::size_t>(corpus.num_words) * K, 0.0);
  for (std::int32_t m = 0; m < plan.workers; ++m) {
    WorkerState& w = workers[m];
    w.id = m;
    w.doc_ids = plan.docs[m];
    w.shard = select_documents(corpus, w.doc_ids);
    w.shard.vocab.clear();
    for (DocId d : w.doc_ids) {
      for (std::int64_t i = corpus.doc_offsets[d]; i < corpus.doc_offsets[d + 1]; ++i) {
        w.cell_ids.push_back(i);
      }
    }
    w.msgs = MessageStore(static_cast<std::int64_t>(w.cell_ids.size()), topics);
    for (std::size_t i = 0; i < w.cell_ids.size(); ++i) {
      const auto src = msgs[w.cell_ids[i]];
      std::copy(src.begin(), src.end(), w.msgs[static_cast<std::int64_t>(i)].begin());
    }
    const SufficientStats local = accumulate_stats(w.shard, w.msgs, topics);
    w.theta_hat = local.theta_hat;
    w.phi = ReplicaRows<double>(corpus.num_words, topics);
    w.phi.contrib = local.phi_hat;
  }
  for (const WorkerState& w : workers) {
    for (std::size_t i = 0; i < global_phi.size(); ++i) global_phi[i] += w.phi.contrib[i];
  }
  for (WorkerState& w : workers) {
    w.phi.adopt(global_phi);
    w.refresh_col_sums();
  }
  return workers;
}

void worker_sweep(WorkerState& state, const Hyper& hyper, std::int32_t num_words) {
  const SparseCorpus& shard = state.shard;
  if (shard.num_docs() == 0) return;
  const auto K = static_cast<std::size_t>(state.phi.topics);
  std::vector<double> new_contrib(state.phi.contrib.size(), 0.0);
  std::vector<double> new_theta(K);
  std::vector<double> updated(K);
  for (DocId d = 0; d < shard.num_docs(); ++d) {
    std::fill(new_theta.begin(), new_theta.end(), 0.0);
    const std::span<const double> theta_row(state.theta_hat.data() + d * K, K);
    for (std::int64_t i = shard.doc_offsets[d]; i < shard.doc_offsets[d + 1]; ++i) {
      const Cell& c = shard.cells[i];
      auto msg = state.msgs[i];
      bp_update_cell(c.count, msg, theta_row, state.phi.local_row(c.word), state.phi_col_sums,
                     hyper, num_words, updated);
      std::copy(updated.begin(), updated.end(), msg.begin());
      double* contrib = new_contrib.data() + static_cast<std::size_t>(c.word) * K;
      for (std::size_t k = 0; k < K; ++k) {
        const double mass = c.count * updated[k];
        new_theta[k] += mass;
        contrib[k] += mass;
      }
    }
    std::copy(new_theta.begin(), new_theta.end(),
              state.theta_hat.begin() + static_cast<std::ptrdiff_t>(d * K));
  }
  state.phi.contrib = std::move(new_contrib);
  state.phi.rebuild_local();
  state.refresh_col_sums();
}

std::int32_t default_threads(std::int32_t workers) {
  const auto hw = static_cast<std::int32_t>(std::max(1u, std::thread::hardware_concurrency()));
  return std::max(1, std::min(workers, hw));
}

void run_workers(std::int32_t workers, std::int32_t threads,
                 const std::function<void(std::int32_t)>& fn) {
  if (threads <= 0) threads = default_threads(workers);
  threads = std::min(threads, workers);
  if (threads <= 1) {
    for (std::int32_t m = 0; m < workers; ++m) fn(m);
    return;
  }
  std::vector<std::exception_ptr> errors(threads);
  {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::int32_t i = 0; i < threads; ++i) {
      pool.emplace_back([&, i] {
        try {
          for (std::int32_t m = i; m < workers; m += threads) fn(m);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      });
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

SufficientStats gather_stats(const SparseCorpus& corpus, const std::vector<WorkerState>& workers,
                             const std::vector<double>& global_phi, std::int32_t topics) {
  const auto K = static_cast<std::size_t>(topics);
  SufficientStats stats(corpus.num_docs(), corpus.num_words, topics);
  for (const WorkerState& w : workers) {
    for (std::size_t j = 0; j < w.doc_ids.size(); ++j) {
      std::copy_n(w.theta_hat.begin() + static_cast<std::ptrdiff_t>(j * K), K,
                  stats.theta_hat.begin() + static_cast<std::ptrdiff_t>(w.doc_ids[j] * K));
    }
  }
  stats.phi_hat = global_phi;
  stats.refresh_col_sums();
  return stats;
}

}  // namespace

TrainResult pbp_train(const SparseCorpus& corpus, const PbpOptions& options,
                      const CommSchedule& schedule) {
  const Hyper& hyper = options.train.hyper;
  hyper.validate();
  if (schedule.horizon != hyper.iterations) {
    throw std::invalid_argument("schedule horizon differs from T");
  }
  if (schedule.partition.num_words != corpus.num_words) {
    throw std::invalid_argument("schedule partition does not cover the corpus vocabulary");
  }
  const std::int32_t K = hyper.num_topics;
  const VocabPartition& partition = schedule.partition;

  TrainResult result;
  RunReport& report = result.report;
  report.config.algo = options.algo;
  report.config.num_topics = K;
  report.config.workers = options.workers;
  report.config.parts = partition.num_parts();
  report.config.zipf_h = schedule.zipf_h;
  report.config.iterations = hyper.iterations;
  report.config.alpha = hyper.alpha;
  report.config.beta = hyper.beta;
  report.config.seed = options.train.seed;
  report.config.num_docs = corpus.num_docs();
  report.config.num_words = corpus.num_words;
  report.config.nnz = corpus.nnz();
  report.config.entry_bytes = sizeof(double);

  const ShardPlan plan = shard_documents(corpus, options.workers, options.policy);
  std::vector<double> global_phi;
  std::vector<WorkerState> workers;
  {
    const MessageStore msgs = init_messages(corpus, hyper, options.train.seed);
    workers = make_workers(corpus, plan, msgs, global_phi);
  }
  const std::int32_t M = options.workers;
  std::vector<double> sweep_seconds(M, 0.0);
  std::vector<std::vector<SyncDelta<double>>> outbox(M);

  for (std::int32_t t = 1; t <= hyper.iterations; ++t) {
    run_workers(M, options.threads, [&](std::int32_t m) {
      const auto start = Clock::now();
      worker_sweep(workers[m], hyper, corpus.num_words);
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
      for (std::int32_t r : due) outbox[m].push_back(pack_delta(m, workers[m].phi, partition, r));
    });
    std::vector<SyncDelta<double>> inbox;
    for (auto& box : outbox) {
      for (auto& d : box) {
        bytes += d.byte_size();
        inbox.push_back(std::move(d));
      }
    }
    sync_global<double>(global_phi, K, partition, inbox);
    std::vector<std::uint64_t> sent(M, 0);
    run_workers(M, options.threads, [&](std::int32_t m) {
      sent[m] = broadcast<double>(global_phi, workers[m].phi, partition, due);
      if (!due.empty()) workers[m].refresh_col_sums();
    });
    for (std::uint64_t b : sent) bytes += b;
    rec.comm_s = seconds_since(comm_start);
    rec.bytes = bytes;

    if (t == hyper.iterations) {
      const auto natural = scheduled_parts(schedule, t);
      std::uint64_t extra_rows = 0;
      for (std::int32_t r : due) {
        if (!std::binary_search(natural.begin(), natural.end(), r)) {
          extra_rows += partition.parts[r - 1].size();
        }
      }
      report.terminal_extra_bytes = extra_rows * K * sizeof(double) * 2 * M;
    }
    if (perplexity_due(t, options.train.perplexity_every, hyper.iterations)) {
      const SufficientStats stats = gather_stats(corpus, workers, global_phi, K);
      rec.train_perplexity = perplexity(corpus, estimate_parameters(stats, hyper));
    }
    report.records.push_back(rec);
  }

  result.stats = gather_stats(corpus, workers, global_phi, K);
  result.model = estimate_parameters(result.stats, hyper);
  report.final_train_perplexity = perplexity(corpus, result.model);
  return result;
}

}  // namespace cepbp
