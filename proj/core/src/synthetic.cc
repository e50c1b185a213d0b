#include "cepbp/synthetic.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "cepbp/rng.h"

namespace cepbp {

namespace {

double standard_normal(Rng& rng) {
  double u1 = uniform01(rng);
  while (u1 <= 0.0) u1 = uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

// Marsaglia-Tsang; shape < 1 handled by the u^(1/shape) boost.
double gamma_draw(Rng& rng, double shape) {
  if (shape < 1.0) {
    double u = uniform01(rng);
    while (u <= 0.0) u = uniform01(rng);
    return gamma_draw(rng, shape + 1.0) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = standard_normal(rng);
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform01(rng);
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

std::size_t draw_from_cdf(const std::vector<double>& cdf, double u) {
  const auto it = std::upper_bound(cdf.begin(), cdf.end(), u * cdf.back());
  return std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), cdf.size() - 1);
}

}  // namespace

SparseCorpus generate_lda_corpus(const SyntheticSpec& spec) {
  if (spec.num_docs < 1 || spec.num_words < 1 || spec.num_topics < 1 ||
      spec.mean_doc_length < 1.0) {
    throw std::invalid_argument("synthetic corpus dimensions must be positive");
  }
  Rng rng = make_rng(spec.seed, 0);
  const auto W = static_cast<std::size_t>(spec.num_words);
  const auto K = static_cast<std::size_t>(spec.num_topics);

  std::vector<std::vector<double>> topic_cdf(K, std::vector<double>(W));
  for (std::size_t k = 0; k < K; ++k) {
    double acc = 0.0;
    for (std::size_t w = 0; w < W; ++w) {
      const double base = std::pow(static_cast<double>(w + 1), -spec.zipf_exponent);
      acc += base * gamma_draw(rng, spec.topic_shape);
      topic_cdf[k][w] = acc;
    }
  }

  SparseCorpus corpus;
  corpus.num_words = spec.num_words;
  std::vector<double> theta_cdf(K);
  std::vector<std::int32_t> counts(W, 0);
  std::vector<WordId> touched;
  std::vector<Cell> cells;
  const double sigma = spec.doc_length_sigma;
  for (std::int32_t d = 0; d < spec.num_docs; ++d) {
    double acc = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      acc += gamma_draw(rng, spec.doc_alpha);
      theta_cdf[k] = acc;
    }
    if (acc <= 0.0) theta_cdf.back() = 1.0;
    const double scale = std::exp(sigma * standard_normal(rng) - 0.5 * sigma * sigma);
    const auto length = std::max<std::int64_t>(2, std::llround(spec.mean_doc_length * scale));
    touched.clear();
    for (std::int64_t i = 0; i < length; ++i) {
      const std::size_t k = draw_from_cdf(theta_cdf, uniform01(rng));
      const auto w = static_cast<WordId>(draw_from_cdf(topic_cdf[k], uniform01(rng)));
      if (counts[w]++ == 0) touched.push_back(w);
    }
    std::sort(touched.begin(), touched.end());
    cells.clear();
    for (WordId w : touched) {
      cells.push_back({w, counts[w]});
      counts[w] = 0;
    }
    corpus.add_document(cells);
  }
  return corpus;
}

SyntheticSpec kos_like_spec(std::uint64_t seed) {
  SyntheticSpec spec;
  spec.num_docs = 3430;
  spec.num_words = 6906;
  spec.num_topics = 30;
  spec.zipf_exponent = 1.0;
  spec.topic_shape = 0.3;
  spec.doc_alpha = 0.2;
  spec.mean_doc_length = 136.0;
  spec.doc_length_sigma = 0.6;
  spec.seed = seed;
  return spec;
}

}  // namespace cepbp
