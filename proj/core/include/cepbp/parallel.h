#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "cepbp/bp.h"
#include "cepbp/corpus.h"
#include "cepbp/sync.h"
#include "cepbp/zipf_schedule.h"

namespace cepbp {

enum class ShardPolicy {
  round_robin,     // doc d goes to worker d mod M
  token_balanced,  // longest document first, onto the lightest worker
};

struct ShardPlan {
  std::int32_t workers = 1;
  std::vector<std::int32_t> owner;          // per document
  std::vector<std::vector<DocId>> docs;     // per worker, ascending
};

ShardPlan shard_documents(const SparseCorpus& corpus, std::int32_t workers,
                          ShardPolicy policy = ShardPolicy::round_robin);

// A worker's slice of the corpus plus its copies of the statistics.
struct WorkerState {
  std::int32_t id = 0;
  SparseCorpus shard;
  std::vector<DocId> doc_ids;          // global id of each shard document
  std::vector<std::int64_t> cell_ids;  // global cell index of each shard cell
  MessageStore msgs;
  std::vector<double> theta_hat;       // shard docs x K
  ReplicaRows<double> phi;
  std::vector<double> phi_col_sums;    // column sums of phi.local

  void refresh_col_sums();
};

// Builds worker states for a plan, slicing the given global messages, and
// returns the initial global phi_hat (sum of worker contributions in worker
// order). Every worker adopts that global matrix.
std::vector<WorkerState> make_workers(const SparseCorpus& corpus, const ShardPlan& plan,
                                      const MessageStore& msgs, std::vector<double>& global_phi);

// One synchronous sweep over the worker's cells against its t-1 statistics.
void worker_sweep(WorkerState& state, const Hyper& hyper, std::int32_t num_words);

// Calls fn(worker) for every worker id, on up to `threads` threads.
void run_workers(std::int32_t workers, std::int32_t threads,
                 const std::function<void(std::int32_t)>& fn);

// Threads to use when the caller passes 0: min(M, hardware concurrency).
std::int32_t default_threads(std::int32_t workers);

struct PbpOptions {
  TrainOptions train;
  std::int32_t workers = 1;
  ShardPolicy policy = ShardPolicy::round_robin;
  std::int32_t threads = 0;
  std::string algo = "pbp";  // label echoed in the report
};

// Data-parallel BP. With a period-1 schedule this is plain PBP; with a Zipf
// schedule it is the communication-reduced variant. All parts are synced at
// t = T before the model is estimated.
TrainResult pbp_train(const SparseCorpus& corpus, const PbpOptions& options,
                      const CommSchedule& schedule);

}  // namespace cepbp
