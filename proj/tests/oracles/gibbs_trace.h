#pragma once

// Token-list collapsed Gibbs sampler. Counts are recomputed from all other
// tokens for every draw, and the draw consumes one uniform the same way the
// engine does (u * total against the running sum).

#include <cstdint>
#include <vector>

#include "cepbp/corpus.h"
#include "cepbp/rng.h"

namespace oracle {

struct Token {
  int doc, word, topic;
};

inline std::vector<Token> tokens_of(const cepbp::SparseCorpus& c) {
  std::vector<Token> out;
  for (int d = 0; d < c.num_docs(); ++d)
    for (const auto& cell : c.doc(d))
      for (int i = 0; i < cell.count; ++i) out.push_back({d, cell.word, 0});
  return out;
}

inline void gibbs_trace_sweep(std::vector<Token>& toks, int W, int K, double alpha, double beta,
                              cepbp::Rng& rng) {
  for (std::size_t i = 0; i < toks.size(); ++i) {
    std::vector<double> weights(K);
    for (int k = 0; k < K; ++k) {
      long nd = 0, nw = 0, nk = 0;
      for (std::size_t j = 0; j < toks.size(); ++j) {
        if (j == i || toks[j].topic != k) continue;
        ++nk;
        if (toks[j].doc == toks[i].doc) ++nd;
        if (toks[j].word == toks[i].word) ++nw;
      }
      weights[k] = (nd + alpha) * (nw + beta) / (static_cast<double>(nk) + W * beta);
    }
    double total = 0.0;
    for (double w : weights) total += w;
    const double u = cepbp::uniform01(rng) * total;
    double acc = 0.0;
    int pick = K - 1;
    for (int k = 0; k < K; ++k) {
      acc += weights[k];
      if (u < acc) {
        pick = k;
        break;
      }
    }
    toks[i].topic = pick;
  }
}

}  // namespace oracle
