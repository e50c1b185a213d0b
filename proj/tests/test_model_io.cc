#include <gtest/gtest.h>

#include <sstream>

#include "cepbp/model_io.h"

using namespace cepbp;

namespace {

TopicModel tiny_model() {
  TopicModel m;
  m.topics = 2;
  m.docs = 3;
  m.words = 4;
  for (int i = 0; i < 6; ++i) m.theta.push_back(0.1 * i + 1e-17);
  for (int i = 0; i < 8; ++i) m.phi.push_back(1.0 / (i + 3));
  return m;
}

ModelHeader header_for(const TopicModel& m) {
  ModelHeader h;
  h.algo = "cepbp";
  h.num_docs = m.docs;
  h.num_words = m.words;
  h.num_topics = m.topics;
  h.alpha = 0.01;
  h.beta = 0.02;
  h.seed = 77;
  return h;
}

}  // namespace

TEST(ModelIo, RoundTripIsBitExact) {
  const auto m = tiny_model();
  std::stringstream ss;
  write_model(ss, header_for(m), m);
  const auto loaded = read_model(ss);
  EXPECT_EQ(loaded.model, m);
  EXPECT_EQ(loaded.header.algo, "cepbp");
  EXPECT_EQ(loaded.header.seed, 77u);
  EXPECT_DOUBLE_EQ(loaded.header.beta, 0.02);
}

TEST(ModelIo, HeaderIsOneJsonLine) {
  const auto m = tiny_model();
  std::stringstream ss;
  write_model(ss, header_for(m), m);
  const auto text = ss.str();
  const auto nl = text.find('\n');
  ASSERT_NE(nl, std::string::npos);
  EXPECT_EQ(text[0], '{');
  EXPECT_EQ(text.size() - nl - 1, (6 + 8) * sizeof(double));
}

TEST(ModelIo, Errors) {
  const auto m = tiny_model();
  auto h = header_for(m);
  h.num_words = 5;
  std::stringstream bad;
  EXPECT_THROW(write_model(bad, h, m), std::invalid_argument);

  std::stringstream ss;
  write_model(ss, header_for(m), m);
  std::string text = ss.str();
  std::istringstream truncated(text.substr(0, text.size() - 3));
  EXPECT_THROW(read_model(truncated), std::runtime_error);
  std::istringstream wrong("{\"format\":\"other\",\"version\":1}\n");
  EXPECT_THROW(read_model(wrong), std::runtime_error);
  std::istringstream empty("");
  EXPECT_THROW(read_model(empty), std::runtime_error);
  EXPECT_THROW(read_model_file("/nonexistent/model.bin"), std::runtime_error);
}
