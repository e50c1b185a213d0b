#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cepbp/corpus.h"

namespace cepbp {

// Vocabulary split into N blocks of the frequency rank order. Part rank r
// (1-based) is parts[r - 1]; rank 1 holds the most frequent words.
struct VocabPartition {
  std::int32_t num_words = 0;
  std::vector<std::vector<WordId>> parts;
  std::vector<std::int32_t> part_of_word;  // 0-based part index per word

  std::int32_t num_parts() const { return static_cast<std::int32_t>(parts.size()); }
  std::int32_t part_size(std::int32_t rank) const {
    return static_cast<std::int32_t>(parts[rank - 1].size());
  }
  std::vector<std::int32_t> part_sizes() const;
};

VocabPartition partition_vocab(const FrequencyTable& ft, std::int32_t num_parts);

struct CommSchedule {
  VocabPartition partition;
  double zipf_h = 0.0;
  std::vector<std::int32_t> periods;  // periods[r - 1] = p_r
  std::int32_t horizon = 0;           // T

  std::int32_t period(std::int32_t rank) const { return periods[rank - 1]; }
};

// p_r = max(1, round(r^H)).
std::int32_t zipf_period(std::int32_t rank, double h);

CommSchedule zipf_schedule(VocabPartition partition, double h, std::int32_t horizon);

// Every part shares one period; period 1 gives plain PBP, period T' gives the
// PGS every-T'-iterations rate.
CommSchedule fixed_period_schedule(VocabPartition partition, std::int32_t period,
                                   std::int32_t horizon);

// Ranks with t mod p_r == 0, ascending.
std::vector<std::int32_t> scheduled_parts(const CommSchedule& schedule, std::int32_t t);

// scheduled_parts plus every rank when t == T.
std::vector<std::int32_t> parts_due(const CommSchedule& schedule, std::int32_t t);

// 2 * M * T * W * K * bytes_per_entry; throws std::overflow_error when the
// result does not fit in 64 bits.
std::uint64_t predicted_full_cost(std::int64_t words, std::int64_t topics, std::int64_t workers,
                                  std::int64_t iterations, std::int64_t bytes_per_entry);

// Sum over parts of 2 * M * floor(T / p_r) * |part_r| * K * bytes_per_entry,
// with the same block sizes partition_vocab uses.
std::uint64_t predicted_reduced_cost(std::int64_t words, std::int64_t topics,
                                     std::int64_t workers, std::int64_t iterations,
                                     std::int32_t num_parts, double h,
                                     std::int64_t bytes_per_entry);

// Scheduled bytes for an explicit schedule, excluding the terminal forcing.
std::uint64_t predicted_schedule_cost(const CommSchedule& schedule, std::int64_t topics,
                                      std::int64_t workers, std::int64_t bytes_per_entry);

// {"N", "H", "part_sizes", "periods"} as JSON.
std::string schedule_to_json(const CommSchedule& schedule);

}  // namespace cepbp
