#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "cepbp/corpus.h"
#include "cepbp/metrics.h"

namespace cepbp {

struct Hyper {
  std::int32_t num_topics = 100;  // K
  double alpha = 0.01;
  double beta = 0.01;
  std::int32_t iterations = 500;  // T

  // Throws std::invalid_argument unless K >= 1, alpha > 0, beta > 0, T >= 1.
  void validate() const;
};

// Thrown when a normalizer that must be positive is not.
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// One K-vector of topic probabilities per nonzero cell, aligned with
// SparseCorpus::cells.
class MessageStore {
 public:
  MessageStore() = default;
  MessageStore(std::int64_t cells, std::int32_t topics)
      : topics_(topics), values_(static_cast<std::size_t>(cells) * topics, 0.0) {}

  std::int32_t topics() const { return topics_; }
  std::int64_t cells() const {
    return topics_ == 0 ? 0 : static_cast<std::int64_t>(values_.size()) / topics_;
  }
  std::span<double> operator[](std::int64_t cell) {
    return {values_.data() + cell * topics_, static_cast<std::size_t>(topics_)};
  }
  std::span<const double> operator[](std::int64_t cell) const {
    return {values_.data() + cell * topics_, static_cast<std::size_t>(topics_)};
  }
  std::span<const double> values() const { return values_; }

  friend bool operator==(const MessageStore&, const MessageStore&) = default;

 private:
  std::int32_t topics_ = 0;
  std::vector<double> values_;
};

// theta_hat is stored document-major (D x K), phi_hat word-major (W x K).
struct SufficientStats {
  std::int32_t topics = 0;
  std::vector<double> theta_hat;
  std::vector<double> phi_hat;
  std::vector<double> phi_col_sums;

  SufficientStats() = default;
  SufficientStats(std::int32_t docs, std::int32_t words, std::int32_t k)
      : topics(k),
        theta_hat(static_cast<std::size_t>(docs) * k, 0.0),
        phi_hat(static_cast<std::size_t>(words) * k, 0.0),
        phi_col_sums(k, 0.0) {}

  std::span<const double> theta_row(DocId d) const {
    return {theta_hat.data() + static_cast<std::size_t>(d) * topics,
            static_cast<std::size_t>(topics)};
  }
  std::span<const double> phi_row(WordId w) const {
    return {phi_hat.data() + static_cast<std::size_t>(w) * topics,
            static_cast<std::size_t>(topics)};
  }
  void refresh_col_sums();

  friend bool operator==(const SufficientStats&, const SufficientStats&) = default;
};

// Smoothed multinomials; theta is D x K and phi is W x K, both row-major.
struct TopicModel {
  std::int32_t topics = 0;
  std::int32_t docs = 0;
  std::int32_t words = 0;
  std::vector<double> theta;
  std::vector<double> phi;

  double theta_at(DocId d, std::int32_t k) const {
    return theta[static_cast<std::size_t>(d) * topics + k];
  }
  double phi_at(WordId w, std::int32_t k) const {
    return phi[static_cast<std::size_t>(w) * topics + k];
  }

  friend bool operator==(const TopicModel&, const TopicModel&) = default;
};

MessageStore init_messages(const SparseCorpus& corpus, const Hyper& hyper,
                           std::uint64_t seed);

SufficientStats accumulate_stats(const SparseCorpus& corpus, const MessageStore& msgs,
                                 std::int32_t topics);

// Message update for one cell. Each statistic has this cell's own mass
// x * old_msg(k) removed (clamped at zero) before the product is formed.
void bp_update_cell(std::int32_t count, std::span<const double> old_msg,
                    std::span<const double> theta_row, std::span<const double> phi_row,
                    std::span<const double> phi_col_sums, const Hyper& hyper,
                    std::int32_t num_words, std::span<double> out);

std::vector<double> bp_update_cell(WordId w, DocId d, std::int32_t count,
                                   std::span<const double> old_msg,
                                   const SufficientStats& stats, const Hyper& hyper,
                                   std::int32_t num_words);

// One synchronous sweep: every new message is computed from the given stats,
// then the stats are recomputed from the new messages.
std::pair<MessageStore, SufficientStats> bp_iteration(const SparseCorpus& corpus,
                                                      const MessageStore& msgs,
                                                      const SufficientStats& stats,
                                                      const Hyper& hyper);

// In-place form of bp_iteration used by the training loops.
void bp_step(const SparseCorpus& corpus, MessageStore& msgs, SufficientStats& stats,
             const Hyper& hyper);

TopicModel estimate_parameters(const SufficientStats& stats, const Hyper& hyper);

// exp(-sum x log sum_k theta_kd phi_wk / sum x). Throws std::domain_error when a
// token has zero probability.
double perplexity(const SparseCorpus& corpus, const TopicModel& model);

inline constexpr std::int32_t kDefaultFoldInIterations = 50;

// Estimates theta for unseen documents with phi held fixed. With zero
// iterations no mass has been assigned and theta is the uniform floor.
TopicModel fold_in(const SparseCorpus& test_observed, std::span<const double> phi,
                   std::int32_t num_words, const Hyper& hyper, std::int32_t iterations,
                   std::uint64_t seed);

// Perplexity of split.test_heldout under the folded-in theta and trained phi.
double predictive_perplexity(const EvalSplit& split, const TopicModel& folded);

// Folds in split.test_observed against `trained` and scores the held-out half.
double predictive_perplexity(const EvalSplit& split, const TopicModel& trained,
                             const Hyper& hyper, std::uint64_t seed,
                             std::int32_t fold_in_iterations = kDefaultFoldInIterations);

struct TrainOptions {
  Hyper hyper;
  std::uint64_t seed = 1;
  std::int32_t perplexity_every = 10;  // 0 disables the periodic evaluation
};

struct TrainResult {
  TopicModel model;
  SufficientStats stats;
  RunReport report;
};

// Serial synchronous BP for hyper.iterations sweeps.
TrainResult bp_train(const SparseCorpus& corpus, const TrainOptions& options);

bool perplexity_due(std::int32_t t, std::int32_t every, std::int32_t last);

}  // namespace cepbp
