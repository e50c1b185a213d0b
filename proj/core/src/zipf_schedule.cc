#include "cepbp/zipf_schedule.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "json.hpp"

namespace cepbp {

namespace {

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
  const unsigned __int128 p = static_cast<unsigned __int128>(a) * b;
  if (p > std::numeric_limits<std::uint64_t>::max()) {
    throw std::overflow_error("communication cost overflows 64 bits");
  }
  return static_cast<std::uint64_t>(p);
}

std::uint64_t checked_add(std::uint64_t a, std::uint64_t b) {
  if (a > std::numeric_limits<std::uint64_t>::max() - b) {
    throw std::overflow_error("communication cost overflows 64 bits");
  }
  return a + b;
}

void require_positive(std::int64_t v, const char* name) {
  if (v <= 0) throw std::invalid_argument(std::string(name) + " must be positive");
}

}  // namespace

std::vector<std::int32_t> VocabPartition::part_sizes() const {
  std::vector<std::int32_t> sizes;
  sizes.reserve(parts.size());
  for (const auto& p : parts) sizes.push_back(static_cast<std::int32_t>(p.size()));
  return sizes;
}

VocabPartition partition_vocab(const FrequencyTable& ft, std::int32_t num_parts) {
  const auto W = static_cast<std::int32_t>(ft.rank_order.size());
  if (num_parts < 1 || num_parts > W) {
    throw std::invalid_argument("part count must lie in [1, W]");
  }
  VocabPartition partition;
  partition.num_words = W;
  partition.part_of_word.assign(W, -1);
  const auto sizes = block_sizes(W, num_parts);
  std::size_t pos = 0;
  for (std::int32_t r = 0; r < num_parts; ++r) {
    auto& part = partition.parts.emplace_back();
    part.reserve(sizes[r]);
    for (std::int32_t i = 0; i < sizes[r]; ++i) {
      const WordId w = ft.rank_order[pos++];
      part.push_back(w);
      partition.part_of_word[w] = r;
    }
  }
  return partition;
}

std::int32_t zipf_period(std::int32_t rank, double h) {
  if (rank < 1) throw std::invalid_argument("part rank is 1-based");
  if (!(h >= 0.0)) throw std::invalid_argument("H must be non-negative");
  const double p = std::round(std::pow(static_cast<double>(rank), h));
  if (p >= static_cast<double>(std::numeric_limits<std::int32_t>::max())) {
    return std::numeric_limits<std::int32_t>::max();
  }
  return std::max<std::int32_t>(1, static_cast<std::int32_t>(p));
}

CommSchedule zipf_schedule(VocabPartition partition, double h, std::int32_t horizon) {
  if (horizon < 1) throw std::invalid_argument("schedule horizon must be >= 1");
  CommSchedule schedule;
  schedule.zipf_h = h;
  schedule.horizon = horizon;
  for (std::int32_t r = 1; r <= partition.num_parts(); ++r) {
    schedule.periods.push_back(zipf_period(r, h));
  }
  schedule.partition = std::move(partition);
  return schedule;
}

CommSchedule fixed_period_schedule(VocabPartition partition, std::int32_t period,
                                   std::int32_t horizon) {
  if (period < 1) throw std::invalid_argument("sync period must be >= 1");
  if (horizon < 1) throw std::invalid_argument("schedule horizon must be >= 1");
  CommSchedule schedule;
  schedule.zipf_h = 0.0;
  schedule.horizon = horizon;
  schedule.periods.assign(partition.num_parts(), period);
  schedule.partition = std::move(partition);
  return schedule;
}

std::vector<std::int32_t> scheduled_parts(const CommSchedule& schedule, std::int32_t t) {
  if (t < 1 || t > schedule.horizon) {
    throw std::out_of_range("iteration outside [1, T]");
  }
  std::vector<std::int32_t> due;
  for (std::int32_t r = 1; r <= static_cast<std::int32_t>(schedule.periods.size()); ++r) {
    if (t % schedule.periods[r - 1] == 0) due.push_back(r);
  }
  return due;
}

std::vector<std::int32_t> parts_due(const CommSchedule& schedule, std::int32_t t) {
  if (t == schedule.horizon) {
    std::vector<std::int32_t> all(schedule.periods.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<std::int32_t>(i + 1);
    return all;
  }
  return scheduled_parts(schedule, t);
}

std::uint64_t predicted_full_cost(std::int64_t words, std::int64_t topics, std::int64_t workers,
                                  std::int64_t iterations, std::int64_t bytes_per_entry) {
  require_positive(words, "W");
  require_positive(topics, "K");
  require_positive(workers, "M");
  require_positive(iterations, "T");
  require_positive(bytes_per_entry, "bytes per entry");
  std::uint64_t cost = 2;
  for (std::int64_t f : {workers, iterations, words, topics, bytes_per_entry}) {
    cost = checked_mul(cost, static_cast<std::uint64_t>(f));
  }
  return cost;
}

std::uint64_t predicted_reduced_cost(std::int64_t words, std::int64_t topics,
                                     std::int64_t workers, std::int64_t iterations,
                                     std::int32_t num_parts, double h,
                                     std::int64_t bytes_per_entry) {
  require_positive(words, "W");
  require_positive(topics, "K");
  require_positive(workers, "M");
  require_positive(iterations, "T");
  require_positive(bytes_per_entry, "bytes per entry");
  if (words > std::numeric_limits<std::int32_t>::max()) {
    throw std::invalid_argument("W does not fit a 32-bit word id");
  }
  const auto sizes = block_sizes(static_cast<std::int32_t>(words), num_parts);
  const std::uint64_t row_bytes = checked_mul(
      checked_mul(2 * static_cast<std::uint64_t>(workers), static_cast<std::uint64_t>(topics)),
      static_cast<std::uint64_t>(bytes_per_entry));
  std::uint64_t total = 0;
  for (std::int32_t r = 1; r <= num_parts; ++r) {
    const auto syncs = static_cast<std::uint64_t>(iterations / zipf_period(r, h));
    total = checked_add(total, checked_mul(checked_mul(syncs, sizes[r - 1]), row_bytes));
  }
  return total;
}

std::uint64_t predicted_schedule_cost(const CommSchedule& schedule, std::int64_t topics,
                                      std::int64_t workers, std::int64_t bytes_per_entry) {
  require_positive(topics, "K");
  require_positive(workers, "M");
  require_positive(bytes_per_entry, "bytes per entry");
  const std::uint64_t row_bytes = checked_mul(
      checked_mul(2 * static_cast<std::uint64_t>(workers), static_cast<std::uint64_t>(topics)),
      static_cast<std::uint64_t>(bytes_per_entry));
  std::uint64_t total = 0;
  for (std::int32_t r = 1; r <= schedule.partition.num_parts(); ++r) {
    const auto syncs = static_cast<std::uint64_t>(schedule.horizon / schedule.period(r));
    total = checked_add(
        total, checked_mul(checked_mul(syncs, schedule.partition.part_size(r)), row_bytes));
  }
  return total;
}

std::string schedule_to_json(const CommSchedule& schedule) {
  nlohmann::ordered_json j;
  j["N"] = schedule.partition.num_parts();
  j["H"] = schedule.zipf_h;
  j["part_sizes"] = schedule.partition.part_sizes();
  j["periods"] = schedule.periods;
  return j.dump() + "\n";
}

}  // namespace cepbp
