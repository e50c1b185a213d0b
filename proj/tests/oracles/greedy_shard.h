#pragma once

// Greedy longest-first sharding written as a plain selection loop: repeatedly
// take the longest unassigned document (lowest id on ties) and give it to the
// worker with the smallest load (lowest id on ties).

#include <cstdint>
#include <vector>

#include "cepbp/corpus.h"

namespace oracle {

inline std::vector<int> greedy_owner(const cepbp::SparseCorpus& c, int workers) {
  const int D = c.num_docs();
  std::vector<int> owner(D, -1);
  std::vector<long long> load(workers, 0);
  for (int step = 0; step < D; ++step) {
    int best = -1;
    for (int d = 0; d < D; ++d) {
      if (owner[d] != -1) continue;
      if (best == -1 || c.doc_length(d) > c.doc_length(best)) best = d;
    }
    int m_best = 0;
    for (int m = 1; m < workers; ++m)
      if (load[m] < load[m_best]) m_best = m;
    owner[best] = m_best;
    load[m_best] += c.doc_length(best);
  }
  return owner;
}

}  // namespace oracle
