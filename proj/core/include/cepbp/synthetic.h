#pragma once

#include <cstdint>

#include "cepbp/corpus.h"

namespace cepbp {

// Parameters of an LDA generative process over a Zipf-shaped vocabulary.
// Word w has base weight (w + 1)^-zipf_exponent; each topic perturbs the base
// weights with Gamma(topic_shape) noise, so every topic is concentrated on a
// different subset while the corpus-wide frequencies stay Zipfian.
struct SyntheticSpec {
  std::int32_t num_docs = 100;
  std::int32_t num_words = 500;
  std::int32_t num_topics = 10;
  double zipf_exponent = 1.0;
  double topic_shape = 0.1;
  double doc_alpha = 0.1;
  double mean_doc_length = 100.0;
  double doc_length_sigma = 0.5;  // log-normal spread of document lengths
  std::uint64_t seed = 1;
};

SparseCorpus generate_lda_corpus(const SyntheticSpec& spec);

// Same D and W as the KOS blog corpus with a comparable document length and
// nnz. Stand-in when the real file is not available.
SyntheticSpec kos_like_spec(std::uint64_t seed = 20120);

}  // namespace cepbp
