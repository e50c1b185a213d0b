#include <gtest/gtest.h>

#include <numeric>

#include "cepbp/gibbs.h"
#include "cepbp/zipf_schedule.h"
#include "oracles/gibbs_trace.h"
#include "test_util.h"

using namespace cepbp;

namespace {

Hyper gibbs_hyper(int k, int iters) {
  Hyper h;
  h.num_topics = k;
  h.alpha = 0.5;
  h.beta = 0.1;
  h.iterations = iters;
  return h;
}

}  // namespace

TEST(Gibbs, CountsMatchAssignments) {
  const auto c = testutil::random_corpus(6, 8, 3, 4);
  Rng rng = make_rng(1, 0);
  const auto z = init_assignments(c, 3, rng);
  ASSERT_EQ(static_cast<std::int64_t>(z.topic.size()), c.total_tokens);
  const auto counts = count_assignments(c, z, 3);
  EXPECT_EQ(std::accumulate(counts.doc_topic.begin(), counts.doc_topic.end(), 0LL),
            c.total_tokens);
  EXPECT_EQ(std::accumulate(counts.topic_totals.begin(), counts.topic_totals.end(), 0LL),
            c.total_tokens);
  TokenAssignments bad = z;
  bad.topic.pop_back();
  EXPECT_THROW(count_assignments(c, bad, 3), std::invalid_argument);
  bad = z;
  bad.topic[0] = 7;
  EXPECT_THROW(count_assignments(c, bad, 3), std::out_of_range);
}

TEST(Gibbs, SweepMatchesTraceOracle) {
  for (unsigned seed = 0; seed < 5; ++seed) {
    const auto c = testutil::random_corpus(5, 6, 3, 100 + seed);
    const Hyper h = gibbs_hyper(3, 1);
    Rng rng = make_rng(seed, 0), oracle_rng = make_rng(seed, 0);
    auto z = init_assignments(c, 3, rng);
    auto toks = oracle::tokens_of(c);
    {
      Rng init = make_rng(seed, 0);
      for (auto& t : toks) t.topic = static_cast<int>(init() % 3);
      oracle_rng = init;
    }
    auto counts = count_assignments(c, z, 3);
    for (int sweep = 0; sweep < 4; ++sweep) {
      gs_sweep(c, z, counts, h, rng);
      oracle::gibbs_trace_sweep(toks, c.num_words, 3, h.alpha, h.beta, oracle_rng);
      for (std::size_t i = 0; i < toks.size(); ++i) ASSERT_EQ(z.topic[i], toks[i].topic);
      ASSERT_EQ(counts, count_assignments(c, z, 3));
    }
  }
}

// Chi-square goodness of fit of the discrete sampler, 3 degrees of freedom;
// 16.27 is the 0.001 critical value.
TEST(Gibbs, SampleDiscreteDistribution) {
  const std::vector<double> w{1.0, 2.0, 3.0, 4.0};
  Rng rng = make_rng(42, 0);
  std::vector<int> hits(4, 0);
  const int n = 200000;
  for (int i = 0; i < n; ++i) ++hits[sample_discrete(w, rng)];
  double chi2 = 0.0;
  for (int k = 0; k < 4; ++k) {
    const double expected = n * w[k] / 10.0;
    chi2 += (hits[k] - expected) * (hits[k] - expected) / expected;
  }
  EXPECT_LT(chi2, 16.27);
}

TEST(Gibbs, SampleDiscreteEdgeCases) {
  Rng rng = make_rng(1, 0);
  const std::vector<double> one{0.0, 0.0, 5.0};
  for (int i = 0; i < 100; ++i) EXPECT_EQ(sample_discrete(one, rng), 2);
  const std::vector<double> zeros{0.0, 0.0};
  EXPECT_THROW(sample_discrete(zeros, rng), InvariantError);
}

TEST(Gibbs, SerialTrainingIsDeterministicAndLearns) {
  const auto c = testutil::random_corpus(20, 15, 4, 5, 0.3);
  TrainOptions o;
  o.hyper = gibbs_hyper(3, 20);
  const auto a = gs_train(c, o), b = gs_train(c, o);
  EXPECT_EQ(a.model, b.model);
  EXPECT_LT(*a.report.final_train_perplexity, static_cast<double>(c.num_words));
  EXPECT_EQ(a.report.config.entry_bytes, kGibbsEntryBytes);
}

TEST(Pgs, OneWorkerEqualsSerial) {
  const auto c = testutil::random_corpus(15, 12, 3, 8);
  TrainOptions o;
  o.hyper = gibbs_hyper(4, 7);
  const auto serial = gs_train(c, o);
  for (int every : {1, 3, 7}) {
    PgsOptions p;
    p.train = o;
    p.sync_every = every;
    const auto par = pgs_train(c, p);
    EXPECT_EQ(par.model, serial.model);
  }
}

TEST(Pgs, CountsStayConsistentAfterSync) {
  const auto c = testutil::random_corpus(24, 18, 3, 12, 0.3);
  PgsOptions p;
  p.train.hyper = gibbs_hyper(3, 9);
  p.workers = 3;
  p.sync_every = 4;
  const auto r = pgs_train(c, p);
  const double phi_mass = std::accumulate(r.stats.phi_hat.begin(), r.stats.phi_hat.end(), 0.0);
  const double theta_mass =
      std::accumulate(r.stats.theta_hat.begin(), r.stats.theta_hat.end(), 0.0);
  EXPECT_EQ(phi_mass, static_cast<double>(c.total_tokens));
  EXPECT_EQ(theta_mass, static_cast<double>(c.total_tokens));
  for (double v : r.stats.phi_hat) EXPECT_GE(v, 0.0);
}

TEST(Pgs, BytesFollowSyncPeriod) {
  const auto c = testutil::random_corpus(10, 20, 2, 3);
  PgsOptions p;
  p.train.hyper = gibbs_hyper(5, 10);
  p.train.perplexity_every = 0;
  p.workers = 2;
  p.sync_every = 4;
  const auto r = pgs_train(c, p);
  const std::uint64_t per_sync = 2ull * 2 * 20 * 5 * 4;
  for (const auto& rec : r.report.records) {
    const bool fires = rec.t % 4 == 0 || rec.t == 10;
    EXPECT_EQ(rec.bytes, fires ? per_sync : 0u) << "t=" << rec.t;
  }
  EXPECT_EQ(r.report.terminal_extra_bytes, per_sync);
  const auto schedule =
      fixed_period_schedule(partition_vocab(word_frequencies(c), 1), 4, 10);
  EXPECT_EQ(r.report.scheduled_bytes(), predicted_schedule_cost(schedule, 5, 2, 4));
}

TEST(Pgs, RejectsBadOptions) {
  const auto c = testutil::random_corpus(3, 5, 2, 3);
  PgsOptions p;
  p.train.hyper = gibbs_hyper(2, 2);
  p.sync_every = 0;
  EXPECT_THROW(pgs_train(c, p), std::invalid_argument);
  p.sync_every = 1;
  p.workers = 4;
  EXPECT_THROW(pgs_train(c, p), std::invalid_argument);
}
