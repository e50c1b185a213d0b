#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cepbp/bp.h"
#include "cepbp/corpus.h"
#include "cepbp/parallel.h"
#include "cepbp/rng.h"

namespace cepbp {

// One topic label per token. Tokens are laid out document-major, then in
// cell order, then by token index within the cell.
struct TokenAssignments {
  std::vector<std::int32_t> topic;

  friend bool operator==(const TokenAssignments&, const TokenAssignments&) = default;
};

struct CountMatrices {
  std::int32_t topics = 0;
  std::vector<std::int32_t> doc_topic;     // D x K
  std::vector<std::int32_t> word_topic;    // W x K
  std::vector<std::int64_t> topic_totals;  // K

  friend bool operator==(const CountMatrices&, const CountMatrices&) = default;
};

TokenAssignments init_assignments(const SparseCorpus& corpus, std::int32_t topics, Rng& rng);

// Exact integer recount.
CountMatrices count_assignments(const SparseCorpus& corpus, const TokenAssignments& z,
                                std::int32_t topics);

// One collapsed Gibbs sweep in token order. Each token's label is removed from
// the counts, a new label is drawn from
//   (n_dk + alpha) (n_wk + beta) / (n_k + W beta)
// and added back, so later tokens see earlier updates.
void gs_sweep(const SparseCorpus& corpus, TokenAssignments& z, CountMatrices& counts,
              const Hyper& hyper, Rng& rng);

// Draws a label from unnormalized weights with one uniform from rng.
std::int32_t sample_discrete(std::span<const double> weights, Rng& rng);

// Smoothed theta/phi from counts (same estimator as BP).
TopicModel estimate_from_counts(const CountMatrices& counts, const Hyper& hyper);

// Serial collapsed Gibbs; uses the worker-0 random stream so it matches a
// one-worker parallel run.
TrainResult gs_train(const SparseCorpus& corpus, const TrainOptions& options);

struct PgsOptions {
  TrainOptions train;
  std::int32_t workers = 1;
  std::int32_t sync_every = 1;  // T'
  ShardPolicy policy = ShardPolicy::round_robin;
  std::int32_t threads = 0;
};

inline constexpr std::uint32_t kGibbsEntryBytes = sizeof(std::int32_t);

// Approximate data-parallel Gibbs sampling: workers sweep their shard against
// a stale word-topic copy and exchange integer count deltas every T'
// iterations (and at t = T).
TrainResult pgs_train(const SparseCorpus& corpus, const PgsOptions& options);

}  // namespace cepbp
