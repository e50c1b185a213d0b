#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "cepbp/zipf_schedule.h"

namespace cepbp {

// A worker's view of the shared word-topic matrix (W x K, word-major).
//
//   local    = base - snapshot + contrib       (rowwise)
//   base     = global rows at the last broadcast of their part
//   contrib  = this worker's own current contribution
//   snapshot = contrib at the last sync of the row's part
//
// so contrib - snapshot is exactly what the worker still owes the global
// matrix for that row.
template <class T>
struct ReplicaRows {
  std::int32_t topics = 0;
  std::vector<T> local;
  std::vector<T> base;
  std::vector<T> contrib;
  std::vector<T> snapshot;

  ReplicaRows() = default;
  ReplicaRows(std::int32_t words, std::int32_t k)
      : topics(k),
        local(static_cast<std::size_t>(words) * k, T{}),
        base(local.size(), T{}),
        contrib(local.size(), T{}),
        snapshot(local.size(), T{}) {}

  std::span<T> local_row(std::int32_t w) {
    return {local.data() + static_cast<std::size_t>(w) * topics, static_cast<std::size_t>(topics)};
  }

  void rebuild_local() {
    for (std::size_t i = 0; i < local.size(); ++i) local[i] = base[i] - snapshot[i] + contrib[i];
  }

  // Initial state after the coordinator has formed global from all workers'
  // contributions: every row counts as synced.
  void adopt(const std::vector<T>& global) {
    local = global;
    base = global;
    snapshot = contrib;
  }
};

// Rows of one part, contrib - snapshot, in the part's word order.
template <class T>
struct SyncDelta {
  std::int32_t worker = 0;
  std::int32_t part_rank = 0;
  std::int32_t topics = 0;
  std::vector<T> values;

  std::uint64_t byte_size() const { return values.size() * sizeof(T); }
};

template <class T>
SyncDelta<T> pack_delta(std::int32_t worker, const ReplicaRows<T>& replica,
                        const VocabPartition& partition, std::int32_t rank) {
  SyncDelta<T> delta;
  delta.worker = worker;
  delta.part_rank = rank;
  delta.topics = replica.topics;
  const auto K = static_cast<std::size_t>(replica.topics);
  const auto& words = partition.parts.at(rank - 1);
  delta.values.resize(words.size() * K);
  T* out = delta.values.data();
  for (WordId w : words) {
    const std::size_t row = static_cast<std::size_t>(w) * K;
    for (std::size_t k = 0; k < K; ++k) *out++ = replica.contrib[row + k] - replica.snapshot[row + k];
  }
  return delta;
}

// global[due rows] += sum of deltas, accumulated in ascending worker id for
// each part so the floating-point result does not depend on arrival order.
template <class T>
void sync_global(std::vector<T>& global, std::int32_t topics, const VocabPartition& partition,
                 std::span<const SyncDelta<T>> deltas) {
  const auto K = static_cast<std::size_t>(topics);
  if (global.size() != static_cast<std::size_t>(partition.num_words) * K) {
    throw std::invalid_argument("global matrix does not match the partition");
  }
  std::vector<const SyncDelta<T>*> ordered;
  ordered.reserve(deltas.size());
  for (const auto& d : deltas) {
    if (d.part_rank < 1 || d.part_rank > partition.num_parts()) {
      throw std::invalid_argument("delta refers to an unknown part");
    }
    if (d.topics != topics ||
        d.values.size() != partition.parts[d.part_rank - 1].size() * K) {
      throw std::invalid_argument("delta dimensions do not match its part");
    }
    ordered.push_back(&d);
  }
  std::stable_sort(ordered.begin(), ordered.end(), [](const auto* a, const auto* b) {
    return a->worker < b->worker;
  });
  for (const SyncDelta<T>* d : ordered) {
    const T* in = d->values.data();
    for (WordId w : partition.parts[d->part_rank - 1]) {
      T* row = global.data() + static_cast<std::size_t>(w) * K;
      for (std::size_t k = 0; k < K; ++k) row[k] += *in++;
    }
  }
}

// Overwrites the worker's rows of the due parts with the global rows and
// marks its current contribution as synced. Returns payload bytes.
template <class T>
std::uint64_t broadcast(const std::vector<T>& global, ReplicaRows<T>& replica,
                        const VocabPartition& partition, std::span<const std::int32_t> due) {
  const auto K = static_cast<std::size_t>(replica.topics);
  std::uint64_t bytes = 0;
  for (std::int32_t rank : due) {
    for (WordId w : partition.parts.at(rank - 1)) {
      const std::size_t row = static_cast<std::size_t>(w) * K;
      for (std::size_t k = 0; k < K; ++k) {
        replica.local[row + k] = global[row + k];
        replica.base[row + k] = global[row + k];
        replica.snapshot[row + k] = replica.contrib[row + k];
      }
    }
    bytes += partition.parts[rank - 1].size() * K * sizeof(T);
  }
  return bytes;
}

}  // namespace cepbp
