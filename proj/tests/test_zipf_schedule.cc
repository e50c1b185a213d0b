#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "cepbp/zipf_schedule.h"
#include "oracles/schedule_enum.h"
#include "test_util.h"

using namespace cepbp;

namespace {

FrequencyTable ramp(int words) {
  SparseCorpus c;
  c.num_words = words;
  std::vector<Cell> cells;
  for (int w = 0; w < words; ++w) cells.push_back({w, 1 + (w * 7) % 11});
  c.add_document(cells);
  return word_frequencies(c);
}

}  // namespace

TEST(Partition, CoversVocabularyOnceInRankOrder) {
  const auto ft = ramp(23);
  const auto p = partition_vocab(ft, 5);
  EXPECT_EQ(p.part_sizes(), (std::vector<std::int32_t>{5, 5, 5, 4, 4}));
  std::vector<WordId> flat;
  for (const auto& part : p.parts) flat.insert(flat.end(), part.begin(), part.end());
  EXPECT_EQ(flat, ft.rank_order);
  for (int r = 0; r < 5; ++r)
    for (WordId w : p.parts[r]) EXPECT_EQ(p.part_of_word[w], r);
}

TEST(Partition, RejectsBadPartCounts) {
  const auto ft = ramp(4);
  EXPECT_THROW(partition_vocab(ft, 0), std::invalid_argument);
  EXPECT_THROW(partition_vocab(ft, 5), std::invalid_argument);
  EXPECT_EQ(partition_vocab(ft, 4).part_sizes(), (std::vector<std::int32_t>{1, 1, 1, 1}));
}

TEST(Period, RoundsPowers) {
  EXPECT_EQ(zipf_period(1, 1.0), 1);
  EXPECT_EQ(zipf_period(16, 1.0), 16);
  EXPECT_EQ(zipf_period(3, 1.5), 5);    // 5.196
  EXPECT_EQ(zipf_period(2, 0.5), 1);    // 1.414
  EXPECT_EQ(zipf_period(7, 0.0), 1);
  EXPECT_THROW(zipf_period(0, 1.0), std::invalid_argument);
  EXPECT_THROW(zipf_period(2, -1.0), std::invalid_argument);
  EXPECT_THROW(zipf_period(2, std::nan("")), std::invalid_argument);
}

TEST(Schedule, EnumerationMatchesFloorCounts) {
  for (int N = 1; N <= 32; ++N) {
    const auto s = zipf_schedule(partition_vocab(ramp(64), N), 1.0, 100);
    std::vector<std::vector<int>> fired(N);
    for (int t = 1; t <= 100; ++t)
      for (int r : scheduled_parts(s, t)) fired[r - 1].push_back(t);
    for (int r = 1; r <= N; ++r) {
      EXPECT_EQ(fired[r - 1], oracle::firing_times(r, 100)) << "N=" << N << " r=" << r;
      EXPECT_EQ(static_cast<int>(fired[r - 1].size()), 100 / r);
    }
  }
}

TEST(Schedule, TerminalForcingAddsEveryPart) {
  const auto s = zipf_schedule(partition_vocab(ramp(40), 16), 1.0, 100);
  EXPECT_EQ(parts_due(s, 100).size(), 16u);
  EXPECT_EQ(parts_due(s, 99), scheduled_parts(s, 99));
  EXPECT_THROW(scheduled_parts(s, 0), std::out_of_range);
  EXPECT_THROW(scheduled_parts(s, 101), std::out_of_range);
}

TEST(Schedule, FixedPeriod) {
  const auto s = fixed_period_schedule(partition_vocab(ramp(10), 1), 3, 10);
  EXPECT_EQ(s.period(1), 3);
  EXPECT_TRUE(scheduled_parts(s, 4).empty());
  EXPECT_EQ(scheduled_parts(s, 9), (std::vector<std::int32_t>{1}));
  EXPECT_EQ(parts_due(s, 10), (std::vector<std::int32_t>{1}));
  EXPECT_THROW(fixed_period_schedule(partition_vocab(ramp(10), 1), 0, 10), std::invalid_argument);
}

TEST(Cost, FullCostFormula) {
  EXPECT_EQ(predicted_full_cost(83470, 10, 32, 1, 8), 427366400u);
  EXPECT_EQ(predicted_full_cost(83470, 10, 32, 1, 4) * 2, predicted_full_cost(83470, 10, 32, 1, 8));
  EXPECT_THROW(predicted_full_cost(0, 10, 1, 1, 8), std::invalid_argument);
  EXPECT_THROW(predicted_full_cost(1 << 30, 1 << 30, 1 << 30, 1 << 30, 8), std::overflow_error);
}

TEST(Cost, ReducedCostClosedForm) {
  // With W divisible by N every part has W / N words, and the ratio to the
  // full cost is sum floor(T / r) / (N T).
  const std::int64_t W = 1600, K = 7, M = 3, T = 500;
  long floors = 0;
  for (int r = 1; r <= 16; ++r) floors += 500 / r;
  EXPECT_EQ(floors, 1685);
  const auto reduced = predicted_reduced_cost(W, K, M, T, 16, 1.0, 8);
  const auto full = predicted_full_cost(W, K, M, T, 8);
  EXPECT_EQ(reduced * 8000, full * 1685);
}

TEST(Cost, ScheduleCostAgreesWithReduced) {
  for (int N : {1, 3, 16, 50}) {
    for (double h : {0.5, 1.0, 1.6}) {
      const auto s = zipf_schedule(partition_vocab(ramp(257), N), h, 123);
      EXPECT_EQ(predicted_schedule_cost(s, 5, 4, 8), predicted_reduced_cost(257, 5, 4, 123, N, h, 8));
    }
  }
}

TEST(Cost, OneEverywhereEqualsFull) {
  EXPECT_EQ(predicted_reduced_cost(100, 5, 2, 9, 1, 1.0, 8), predicted_full_cost(100, 5, 2, 9, 8));
  EXPECT_EQ(predicted_reduced_cost(100, 5, 2, 9, 10, 0.0, 8), predicted_full_cost(100, 5, 2, 9, 8));
}

TEST(Schedule, JsonShape) {
  const auto s = zipf_schedule(partition_vocab(ramp(10), 3), 1.0, 5);
  EXPECT_EQ(schedule_to_json(s), "{\"N\":3,\"H\":1.0,\"part_sizes\":[4,3,3],\"periods\":[1,2,3]}\n");
}
