#include "cepbp/bp.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>

#include "cepbp/rng.h"

namespace cepbp {

void Hyper::validate() const {
  if (num_topics < 1) throw std::invalid_argument("K must be >= 1");
  if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be > 0");
  if (!(beta > 0.0)) throw std::invalid_argument("beta must be > 0");
  if (iterations < 1) throw std::invalid_argument("T must be >= 1");
}

void SufficientStats::refresh_col_sums() {
  std::fill(phi_col_sums.begin(), phi_col_sums.end(), 0.0);
  const std::size_t k = static_cast<std::size_t>(topics);
  for (std::size_t i = 0; i < phi_hat.size(); i += k) {
    for (std::size_t j = 0; j < k; ++j) phi_col_sums[j] += phi_hat[i + j];
  }
}

MessageStore init_messages(const SparseCorpus& corpus, const Hyper& hyper,
                           std::uint64_t seed) {
  hyper.validate();
  MessageStore msgs(corpus.nnz(), hyper.num_topics);
  Rng rng = make_rng(seed, streams::kMessageInit);
  for (std::int64_t i = 0; i < corpus.nnz(); ++i) {
    auto msg = msgs[i];
    double sum = 0.0;
    for (double& v : msg) {
      // Open interval (0, 1) so a cell never draws an all-zero vector.
      v = (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
      sum += v;
    }
    for (double& v : msg) v /= sum;
  }
  return msgs;
}

SufficientStats accumulate_stats(const SparseCorpus& corpus, const MessageStore& msgs,
                                 std::int32_t topics) {
  if (msgs.cells() != corpus.nnz() || msgs.topics() != topics) {
    throw std::invalid_argument("message store is not aligned with the corpus");
  }
  SufficientStats stats(corpus.num_docs(), corpus.num_words, topics);
  const auto K = static_cast<std::size_t>(topics);
  for (DocId d = 0; d < corpus.num_docs(); ++d) {
    double* theta = stats.theta_hat.data() + static_cast<std::size_t>(d) * K;
    for (std::int64_t i = corpus.doc_offsets[d]; i < corpus.doc_offsets[d + 1]; ++i) {
      const Cell& c = corpus.cells[i];
      const auto msg = msgs[i];
      double* phi = stats.phi_hat.data() + static_cast<std::size_t>(c.word) * K;
      for (std::size_t k = 0; k < K; ++k) {
        const double mass = c.count * msg[k];
        theta[k] += mass;
        phi[k] += mass;
      }
    }
  }
  stats.refresh_col_sums();
  return stats;
}

void bp_update_cell(std::int32_t count, std::span<const double> old_msg,
                    std::span<const double> theta_row, std::span<const double> phi_row,
                    std::span<const double> phi_col_sums, const Hyper& hyper,
                    std::int32_t num_words, std::span<double> out) {
  const std::size_t K = out.size();
  const double w_beta = num_words * hyper.beta;
  double norm = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    const double own = count * old_msg[k];
    const double theta = std::max(theta_row[k] - own, 0.0) + hyper.alpha;
    const double phi = std::max(phi_row[k] - own, 0.0) + hyper.beta;
    const double denom = std::max(phi_col_sums[k] - own, 0.0) + w_beta;
    const double p = theta * phi / denom;
    out[k] = p;
    norm += p;
  }
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw InvariantError("message normalizer is not positive");
  }
  for (std::size_t k = 0; k < K; ++k) out[k] /= norm;
}

std::vector<double> bp_update_cell(WordId w, DocId d, std::int32_t count,
                                   std::span<const double> old_msg,
                                   const SufficientStats& stats, const Hyper& hyper,
                                   std::int32_t num_words) {
  std::vector<double> out(stats.topics);
  bp_update_cell(count, old_msg, stats.theta_row(d), stats.phi_row(w), stats.phi_col_sums,
                 hyper, num_words, out);
  return out;
}

void bp_step(const SparseCorpus& corpus, MessageStore& msgs, SufficientStats& stats,
             const Hyper& hyper) {
  const std::int32_t topics = stats.topics;
  const auto K = static_cast<std::size_t>(topics);
  std::vector<double> new_phi(stats.phi_hat.size(), 0.0);
  std::vector<double> new_theta(K);
  std::vector<double> updated(K);
  for (DocId d = 0; d < corpus.num_docs(); ++d) {
    std::fill(new_theta.begin(), new_theta.end(), 0.0);
    const auto theta_row = stats.theta_row(d);
    for (std::int64_t i = corpus.doc_offsets[d]; i < corpus.doc_offsets[d + 1]; ++i) {
      const Cell& c = corpus.cells[i];
      auto msg = msgs[i];
      bp_update_cell(c.count, msg, theta_row, stats.phi_row(c.word), stats.phi_col_sums,
                     hyper, corpus.num_words, updated);
      std::copy(updated.begin(), updated.end(), msg.begin());
      double* phi = new_phi.data() + static_cast<std::size_t>(c.word) * K;
      for (std::size_t k = 0; k < K; ++k) {
        const double mass = c.count * updated[k];
        new_theta[k] += mass;
        phi[k] += mass;
      }
    }
    std::copy(new_theta.begin(), new_theta.end(),
              stats.theta_hat.begin() + static_cast<std::ptrdiff_t>(d * K));
  }
  stats.phi_hat = std::move(new_phi);
  stats.refresh_col_sums();
}

std::pair<MessageStore, SufficientStats> bp_iteration(const SparseCorpus& corpus,
                                                      const MessageStore& msgs,
                                                      const SufficientStats& stats,
                                                      const Hyper& hyper) {
  if (msgs.cells() != corpus.nnz()) {
    throw std::invalid_argument("message store is not aligned with the corpus");
  }
  MessageStore next_msgs = msgs;
  SufficientStats next_stats = stats;
  bp_step(corpus, next_msgs, next_stats, hyper);
  return {std::move(next_msgs), std::move(next_stats)};
}

TopicModel estimate_parameters(const SufficientStats& stats, const Hyper& hyper) {
  const auto K = static_cast<std::size_t>(stats.topics);
  TopicModel model;
  model.topics = stats.topics;
  model.docs = static_cast<std::int32_t>(stats.theta_hat.size() / K);
  model.words = static_cast<std::int32_t>(stats.phi_hat.size() / K);
  model.theta.resize(stats.theta_hat.size());
  model.phi.resize(stats.phi_hat.size());

  for (std::size_t d = 0; d < static_cast<std::size_t>(model.docs); ++d) {
    const double* row = stats.theta_hat.data() + d * K;
    double total = 0.0;
    for (std::size_t k = 0; k < K; ++k) total += row[k];
    const double denom = total + K * hyper.alpha;
    for (std::size_t k = 0; k < K; ++k) model.theta[d * K + k] = (row[k] + hyper.alpha) / denom;
  }

  std::vector<double> col(K, 0.0);
  for (std::size_t i = 0; i < stats.phi_hat.size(); i += K) {
    for (std::size_t k = 0; k < K; ++k) col[k] += stats.phi_hat[i + k];
  }
  for (std::size_t k = 0; k < K; ++k) col[k] += model.words * hyper.beta;
  for (std::size_t i = 0; i < stats.phi_hat.size(); i += K) {
    for (std::size_t k = 0; k < K; ++k) {
      model.phi[i + k] = (stats.phi_hat[i + k] + hyper.beta) / col[k];
    }
  }
  return model;
}

double perplexity(const SparseCorpus& corpus, const TopicModel& model) {
  if (model.docs != corpus.num_docs() || model.words != corpus.num_words) {
    throw std::invalid_argument("model dimensions do not match corpus");
  }
  const auto K = static_cast<std::size_t>(model.topics);
  double log_likelihood = 0.0;
  for (DocId d = 0; d < corpus.num_docs(); ++d) {
    const double* theta = model.theta.data() + static_cast<std::size_t>(d) * K;
    for (const Cell& c : corpus.doc(d)) {
      const double* phi = model.phi.data() + static_cast<std::size_t>(c.word) * K;
      double p = 0.0;
      for (std::size_t k = 0; k < K; ++k) p += theta[k] * phi[k];
      if (!(p > 0.0)) {
        throw std::domain_error("zero probability for word " + std::to_string(c.word) +
                                " in document " + std::to_string(d));
      }
      log_likelihood += c.count * std::log(p);
    }
  }
  if (corpus.total_tokens == 0) throw std::domain_error("perplexity of an empty corpus");
  return std::exp(-log_likelihood / static_cast<double>(corpus.total_tokens));
}

TopicModel fold_in(const SparseCorpus& test_observed, std::span<const double> phi,
                   std::int32_t num_words, const Hyper& hyper, std::int32_t iterations,
                   std::uint64_t seed) {
  const auto K = static_cast<std::size_t>(hyper.num_topics);
  if (phi.size() != static_cast<std::size_t>(num_words) * K ||
      test_observed.num_words != num_words) {
    throw std::invalid_argument("fold-in: phi dimensions do not match the corpus");
  }
  const DocId docs = test_observed.num_docs();
  MessageStore msgs = init_messages(test_observed, hyper, mix_seed(seed, streams::kFoldIn));
  std::vector<double> theta_hat(static_cast<std::size_t>(docs) * K, 0.0);
  for (DocId d = 0; d < docs; ++d) {
    for (std::int64_t i = test_observed.doc_offsets[d]; i < test_observed.doc_offsets[d + 1];
         ++i) {
      const auto msg = msgs[i];
      for (std::size_t k = 0; k < K; ++k) {
        theta_hat[d * K + k] += test_observed.cells[i].count * msg[k];
      }
    }
  }

  std::vector<double> new_theta(K);
  for (std::int32_t it = 0; it < iterations; ++it) {
    for (DocId d = 0; d < docs; ++d) {
      double* theta = theta_hat.data() + static_cast<std::size_t>(d) * K;
      std::fill(new_theta.begin(), new_theta.end(), 0.0);
      for (std::int64_t i = test_observed.doc_offsets[d]; i < test_observed.doc_offsets[d + 1];
           ++i) {
        const Cell& c = test_observed.cells[i];
        auto msg = msgs[i];
        const double* phi_row = phi.data() + static_cast<std::size_t>(c.word) * K;
        double norm = 0.0;
        for (std::size_t k = 0; k < K; ++k) {
          const double own = c.count * msg[k];
          msg[k] = (std::max(theta[k] - own, 0.0) + hyper.alpha) * phi_row[k];
          norm += msg[k];
        }
        if (!(norm > 0.0)) throw InvariantError("fold-in normalizer is not positive");
        for (std::size_t k = 0; k < K; ++k) {
          msg[k] /= norm;
          new_theta[k] += c.count * msg[k];
        }
      }
      std::copy(new_theta.begin(), new_theta.end(), theta);
    }
  }

  SufficientStats stats;
  stats.topics = hyper.num_topics;
  if (iterations > 0) {
    stats.theta_hat = std::move(theta_hat);
  } else {
    stats.theta_hat.assign(static_cast<std::size_t>(docs) * K, 0.0);
  }
  TopicModel model = estimate_parameters(stats, hyper);
  model.words = num_words;
  model.phi.assign(phi.begin(), phi.end());
  return model;
}

double predictive_perplexity(const EvalSplit& split, const TopicModel& folded) {
  return perplexity(split.test_heldout, folded);
}

double predictive_perplexity(const EvalSplit& split, const TopicModel& trained,
                             const Hyper& hyper, std::uint64_t seed,
                             std::int32_t fold_in_iterations) {
  const TopicModel folded = fold_in(split.test_observed, trained.phi, trained.words, hyper,
                                    fold_in_iterations, seed);
  return predictive_perplexity(split, folded);
}

bool perplexity_due(std::int32_t t, std::int32_t every, std::int32_t last) {
  return every > 0 && (t % every == 0 || t == last);
}

TrainResult bp_train(const SparseCorpus& corpus, const TrainOptions& options) {
  const Hyper& hyper = options.hyper;
  hyper.validate();
  using Clock = std::chrono::steady_clock;

  TrainResult result;
  RunReport& report = result.report;
  report.config.algo = "bp";
  report.config.num_topics = hyper.num_topics;
  report.config.iterations = hyper.iterations;
  report.config.alpha = hyper.alpha;
  report.config.beta = hyper.beta;
  report.config.seed = options.seed;
  report.config.num_docs = corpus.num_docs();
  report.config.num_words = corpus.num_words;
  report.config.nnz = corpus.nnz();

  MessageStore msgs = init_messages(corpus, hyper, options.seed);
  result.stats = accumulate_stats(corpus, msgs, hyper.num_topics);
  for (std::int32_t t = 1; t <= hyper.iterations; ++t) {
    const auto start = Clock::now();
    bp_step(corpus, msgs, result.stats, hyper);
    IterationRecord rec;
    rec.t = t;
    rec.comp_s = std::chrono::duration<double>(Clock::now() - start).count();
    if (perplexity_due(t, options.perplexity_every, hyper.iterations)) {
      rec.train_perplexity = perplexity(corpus, estimate_parameters(result.stats, hyper));
    }
    report.records.push_back(rec);
  }
  result.model = estimate_parameters(result.stats, hyper);
  report.final_train_perplexity = perplexity(corpus, result.model);
  return result;
}

}  // namespace cepbp
