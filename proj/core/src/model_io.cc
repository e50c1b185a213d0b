#include "cepbp/model_io.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "json.hpp"

namespace cepbp {

namespace {

constexpr const char* kFormat = "cepbp-model";
constexpr int kVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "model payload is written in native order and must be little-endian");

void write_doubles(std::ostream& out, const std::vector<double>& values) {
  out.write(reinterpret_cast<const char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(double)));
}

void read_doubles(std::istream& in, std::vector<double>& values) {
  in.read(reinterpret_cast<char*>(values.data()),
          static_cast<std::streamsize>(values.size() * sizeof(double)));
  if (in.gcount() != static_cast<std::streamsize>(values.size() * sizeof(double))) {
    throw std::runtime_error("model payload is truncated");
  }
}

}  // namespace

void write_model(std::ostream& out, const ModelHeader& header, const TopicModel& model) {
  if (model.docs != header.num_docs || model.words != header.num_words ||
      model.topics != header.num_topics) {
    throw std::invalid_argument("model header does not match model dimensions");
  }
  nlohmann::ordered_json j;
  j["format"] = kFormat;
  j["version"] = kVersion;
  j["algo"] = header.algo;
  j["D"] = header.num_docs;
  j["W"] = header.num_words;
  j["K"] = header.num_topics;
  j["alpha"] = header.alpha;
  j["beta"] = header.beta;
  j["seed"] = header.seed;
  j["theta"] = "D x K row-major float64 little-endian";
  j["phi"] = "W x K row-major float64 little-endian";
  out << j.dump() << '\n';
  write_doubles(out, model.theta);
  write_doubles(out, model.phi);
  if (!out) throw std::runtime_error("failed to write model");
}

LoadedModel read_model(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("model file is empty");
  const auto j = nlohmann::json::parse(line);
  if (j.value("format", "") != kFormat || j.value("version", 0) != kVersion) {
    throw std::runtime_error("not a cepbp model file");
  }
  LoadedModel loaded;
  ModelHeader& h = loaded.header;
  h.algo = j.at("algo").get<std::string>();
  h.num_docs = j.at("D").get<std::int32_t>();
  h.num_words = j.at("W").get<std::int32_t>();
  h.num_topics = j.at("K").get<std::int32_t>();
  h.alpha = j.at("alpha").get<double>();
  h.beta = j.at("beta").get<double>();
  h.seed = j.at("seed").get<std::uint64_t>();
  if (h.num_docs < 0 || h.num_words < 1 || h.num_topics < 1) {
    throw std::runtime_error("model header has invalid dimensions");
  }
  TopicModel& m = loaded.model;
  m.docs = h.num_docs;
  m.words = h.num_words;
  m.topics = h.num_topics;
  m.theta.resize(static_cast<std::size_t>(h.num_docs) * h.num_topics);
  m.phi.resize(static_cast<std::size_t>(h.num_words) * h.num_topics);
  read_doubles(in, m.theta);
  read_doubles(in, m.phi);
  return loaded;
}

LoadedModel read_model_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open model " + path);
  return read_model(in);
}

}  // namespace cepbp
