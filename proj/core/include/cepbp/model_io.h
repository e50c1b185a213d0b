#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "cepbp/bp.h"

namespace cepbp {

struct ModelHeader {
  std::string algo;
  std::int32_t num_docs = 0;
  std::int32_t num_words = 0;
  std::int32_t num_topics = 0;
  double alpha = 0.0;
  double beta = 0.0;
  std::uint64_t seed = 0;
};

// Layout: one line of JSON describing the dimensions and hyperparameters,
// then theta (D x K) and phi (W x K) as row-major little-endian float64.
void write_model(std::ostream& out, const ModelHeader& header, const TopicModel& model);

struct LoadedModel {
  ModelHeader header;
  TopicModel model;
};

LoadedModel read_model(std::istream& in);
LoadedModel read_model_file(const std::string& path);

}  // namespace cepbp
