#pragma once

// Literal dense synchronous BP: x is W x D, every statistic is formed by
// summing over the other cells instead of subtracting the cell's own mass.

#include <cstdint>
#include <vector>

namespace oracle {

struct DenseBp {
  int W = 0, D = 0, K = 0;
  std::vector<std::vector<int>> x;                         // [w][d]
  std::vector<std::vector<std::vector<double>>> mu;        // [w][d][k]

  std::vector<std::vector<double>> theta_hat() const {     // [d][k]
    std::vector<std::vector<double>> t(D, std::vector<double>(K, 0.0));
    for (int d = 0; d < D; ++d)
      for (int w = 0; w < W; ++w)
        for (int k = 0; k < K; ++k) t[d][k] += x[w][d] * mu[w][d][k];
    return t;
  }

  std::vector<std::vector<double>> phi_hat() const {       // [w][k]
    std::vector<std::vector<double>> p(W, std::vector<double>(K, 0.0));
    for (int w = 0; w < W; ++w)
      for (int d = 0; d < D; ++d)
        for (int k = 0; k < K; ++k) p[w][k] += x[w][d] * mu[w][d][k];
    return p;
  }

  void iterate(double alpha, double beta) {
    auto next = mu;
    for (int w = 0; w < W; ++w) {
      for (int d = 0; d < D; ++d) {
        if (x[w][d] == 0) continue;
        double norm = 0.0;
        for (int k = 0; k < K; ++k) {
          double th = 0.0;   // theta_hat_{-w,d}(k)
          for (int w2 = 0; w2 < W; ++w2)
            if (w2 != w) th += x[w2][d] * mu[w2][d][k];
          double ph = 0.0;   // phi_hat_{w,-d}(k)
          for (int d2 = 0; d2 < D; ++d2)
            if (d2 != d) ph += x[w][d2] * mu[w][d2][k];
          double col = 0.0;  // sum_w phi_hat_{w,-(w,d)}(k)
          for (int w2 = 0; w2 < W; ++w2)
            for (int d2 = 0; d2 < D; ++d2)
              if (w2 != w || d2 != d) col += x[w2][d2] * mu[w2][d2][k];
          next[w][d][k] = (th + alpha) * (ph + beta) / (col + W * beta);
          norm += next[w][d][k];
        }
        for (int k = 0; k < K; ++k) next[w][d][k] /= norm;
      }
    }
    mu = std::move(next);
  }
};

}  // namespace oracle
